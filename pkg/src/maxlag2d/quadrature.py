"""Quadrature rules on the reference triangle and on segments."""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

__all__ = ["QuadratureRule", "triangle_rule", "monomial_integral", "gauss_legendre"]


@dataclass(frozen=True)
class QuadratureRule:
    """Barycentric points and weights normalized to sum to one."""
    points: np.ndarray  # (nq, 3) barycentric
    weights: np.ndarray  # (nq,)
    degree: int

    @property
    def ref_points(self) -> np.ndarray:
        """Points on the reference triangle (0,0), (1,0), (0,1)."""
        return self.points[:, 1:]

    def __len__(self):
        return len(self.weights)


def _orbits(centroid, s21, s111):
    pts, wts = [], []
    if centroid is not None:
        pts.append((1 / 3, 1 / 3, 1 / 3))
        wts.append(centroid)
    for a, w in s21:
        b = 1 - 2 * a
        pts += [(a, a, b), (a, b, a), (b, a, a)]
        wts += [w] * 3
    for a, b, w in s111:
        c = 1 - a - b
        pts += [(a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a)]
        wts += [w] * 6
    return np.array(pts), np.array(wts)


_DUNAVANT8 = _orbits(
    0.144315607677787,
    [(0.459292588292723, 0.095091634267285),
     (0.170569307751760, 0.103217370534718),
     (0.050547228317031, 0.032458497623198)],
    [(0.008394777409958, 0.263112829634638, 0.027230314174435)],
)


def triangle_rule(degree: int = 8) -> QuadratureRule:
    """Symmetric 16-point rule exact for polynomials of total degree 8."""
    if degree > 8:
        raise ValueError("rules above degree 8 are not provided")
    pts, wts = _DUNAVANT8
    return QuadratureRule(pts, wts / wts.sum(), 8)


def monomial_integral(i: int, j: int) -> float:
    """Exact integral of ``x**i * y**j`` over the reference triangle."""
    return factorial(i) * factorial(j) / factorial(i + j + 2)


def gauss_legendre(n: int):
    """Gauss-Legendre nodes on [0, 1] and weights summing to one."""
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (x + 1), 0.5 * w
