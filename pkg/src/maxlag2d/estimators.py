"""Estimator-style wrappers around the pipeline.

``MacroSplit`` is a transformer from meshes to refined meshes and
``LagrangeMaxwellEigensolver`` fits a discrete spectrum to a mesh.  Both
follow the scikit-learn conventions: hyperparameters are stored verbatim
in ``__init__``, checked in ``fit``, and fitted attributes end in ``_``.
"""
from __future__ import annotations

import warnings

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .assemble import assemble_mass, assemble_rot_rot
from .bench import MIN_DEGREE, CompatibilityWarning, reference_spectrum
from .eig import lowest_nonzero, spectrum_error
from .fespace import build_vector_space
from .mesh import DOMAINS
from .refine import refine
from .validation import (check_choice, check_degree, check_int, check_mesh, check_positive,
                         check_refined)

__all__ = ["MacroSplit", "LagrangeMaxwellEigensolver"]

_SPLITS = ("ps", "ct", "none")


class MacroSplit(TransformerMixin, BaseEstimator):
    """Refine a triangulation by a Powell-Sabin or Clough-Tocher split.

    Parameters
    ----------
    split : {"ps", "ct", "none"}
    """

    def __init__(self, split: str = "ps"):
        self.split = split

    def fit(self, X, y=None):
        check_choice(self.split, "split", _SPLITS)
        check_mesh(X, "X")
        self.split_ = self.split
        return self

    def transform(self, X):
        check_is_fitted(self, "split_")
        return refine(check_mesh(X, "X"), self.split_)


class LagrangeMaxwellEigensolver(BaseEstimator):
    """Smallest nonzero Maxwell eigenvalues with vector Lagrange elements.

    Parameters
    ----------
    degree : int
        Polynomial degree ``k``.
    split : {"ps", "ct", "none"}
        Applied to meshes that are not already refined.
    nev : int
        Number of nonzero eigenvalues.
    shift : float or None
        Shift of the eigensolver, default half the first reference value
        of ``domain``.
    zero_tol : float
        Eigenvalues below this are discrete kernel.
    domain : {"unit-square", "L-shape"}
        Only used for the default shift and by :meth:`score`.

    Attributes
    ----------
    eigenvalues_ : ndarray of shape (nev,)
    residuals_ : ndarray of shape (nev,)
    n_dofs_ : int
    zero_count_ : int
        Kernel modes seen by the solver (all of them on the dense path).
    converged_ : bool
    """

    def __init__(self, degree: int = 1, split: str = "ps", nev: int = 10, shift=None,
                 zero_tol: float = 1e-6, domain: str = "unit-square"):
        self.degree = degree
        self.split = split
        self.nev = nev
        self.shift = shift
        self.zero_tol = zero_tol
        self.domain = domain

    def _validate(self):
        degree = check_degree(self.degree)
        check_choice(self.split, "split", _SPLITS)
        check_choice(self.domain, "domain", DOMAINS)
        nev = check_int(self.nev, "nev", 1)
        zero_tol = check_positive(self.zero_tol, "zero_tol")
        if self.shift is None:
            shift = 0.5 * reference_spectrum(self.domain, 1).values[0]
        else:
            shift = check_positive(self.shift, "shift")
        return degree, nev, zero_tol, shift

    def fit(self, X, y=None):
        """Compute the spectrum of mesh ``X`` (a ``Mesh`` or ``RefinedMesh``)."""
        degree, nev, zero_tol, shift = self._validate()
        if hasattr(X, "split_kind"):
            refined = check_refined(X)
        else:
            refined = refine(check_mesh(X, "X"), self.split)
        kind = {"powell-sabin": "ps", "clough-tocher": "ct"}.get(refined.split_kind, "none")
        if degree < MIN_DEGREE[kind]:
            warnings.warn(f"split {kind!r} with degree {degree} may produce spurious eigenvalues",
                          CompatibilityWarning, stacklevel=2)
        space = build_vector_space(refined, degree)
        k, m = assemble_rot_rot(space), assemble_mass(space)
        values, res = lowest_nonzero(k, m, nev, shift, zero_tol=zero_tol)
        keep = res.eigenvalues >= zero_tol
        self.eigenvalues_ = np.asarray(values)
        self.residuals_ = res.residuals[keep][:len(values)]
        self.n_dofs_ = space.dim
        self.zero_count_ = res.zero_count
        self.converged_ = bool(res.converged)
        return self

    def score(self, X=None, y=None) -> float:
        """Negative largest error against ``y`` or the reference of ``domain``.

        ``X`` is refitted when given.
        """
        if X is not None:
            self.fit(X)
        check_is_fitted(self, "eigenvalues_")
        if y is None:
            y = reference_spectrum(self.domain, len(self.eigenvalues_)).values
        err = spectrum_error(self.eigenvalues_, np.asarray(y, dtype=float))
        return -float(np.max(err)) if len(err) else float("nan")
