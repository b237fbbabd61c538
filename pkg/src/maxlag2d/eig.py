"""Generalized symmetric eigensolver for ``K x = lambda M x``.

The stiffness matrix has a very large kernel (the discrete gradients).
The iterative path works with an operator that maps the kernel to zero,
see :func:`solve_lanczos`; the dense path computes everything and
:func:`filter_nonzero` removes the numerically zero eigenvalues.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

__all__ = ["EigenResult", "solve_generalized", "solve_dense", "solve_lanczos",
           "filter_nonzero", "lowest_nonzero", "window", "spectrum_error", "relative_residuals",
           "FactorizationError", "ConvergenceWarning", "ZeroClusterWarning"]

log = logging.getLogger(__name__)

DENSE_LIMIT = 500


class FactorizationError(RuntimeError):
    """The shifted matrix could not be factorized."""


class ConvergenceWarning(RuntimeWarning):
    pass


class ZeroClusterWarning(RuntimeWarning):
    """An eigenvalue sits just above the zero cutoff."""


@dataclass
class EigenResult:
    """Eigenpairs of a generalized symmetric problem.

    Attributes
    ----------
    eigenvalues : ndarray
        Ascending.
    vectors : ndarray or None
        M-orthonormal columns matching ``eigenvalues``.
    zero_count : int
        Number of modes below ``zero_tol``.
    residuals : ndarray
        Relative residuals, see :func:`relative_residuals`.
    shift : float
    iterations : int
        Restarts for the Lanczos path, 0 for the dense path.
    converged : bool
    solver : str
    """
    eigenvalues: np.ndarray
    vectors: np.ndarray | None
    zero_count: int
    residuals: np.ndarray
    shift: float
    iterations: int = 0
    converged: bool = True
    solver: str = "dense"
    zero_tol: float = 1e-6
    n_matvec: int = field(default=0, repr=False)

    @property
    def nonzero(self) -> np.ndarray:
        return self.eigenvalues[self.eigenvalues >= self.zero_tol]


def _scales(k, m):
    n = k.shape[0]
    fro = (lambda a: spla.norm(a, "fro")) if sp.issparse(k) else np.linalg.norm
    return fro(k) / np.sqrt(n), fro(m) / np.sqrt(n)


def relative_residuals(k, m, lam, x) -> np.ndarray:
    """``||K x - lam M x|| / ((||K||_F + |lam| ||M||_F) / sqrt(n) * ||x||)`` per column."""
    ks, ms = _scales(k, m)
    r = k @ x - (m @ x) * lam
    return np.linalg.norm(r, axis=0) / ((ks + np.abs(lam) * ms) * np.linalg.norm(x, axis=0))


def _pick(lam, sigma, nev):
    """Indices of the ``nev`` largest ``lambda / (lambda - sigma)**2``, ascending in ``lambda``."""
    with np.errstate(divide="ignore"):
        f = _transformed(lam, sigma)
    order = np.argsort(-f, kind="stable")[:nev]
    return order[np.argsort(lam[order], kind="stable")]


def _transformed(lam, sigma):
    """Spectral map ``lambda / (lambda - sigma)**2`` of the iteration operator."""
    return lam / (lam - sigma) ** 2


def solve_dense(k, m, nev=None, shift=0.0, zero_tol=1e-6) -> EigenResult:
    """All eigenpairs by ``scipy.linalg.eigh``.

    With ``nev`` given, keeps the whole zero cluster plus the ``nev``
    nonzero eigenvalues selected like :func:`solve_lanczos` does.
    """
    kd = k.toarray() if sp.issparse(k) else np.asarray(k, dtype=float)
    md = m.toarray() if sp.issparse(m) else np.asarray(m, dtype=float)
    lam, x = scipy.linalg.eigh(kd, md)
    if nev is not None:
        zero = np.flatnonzero(lam < zero_tol)
        cand = np.flatnonzero(lam >= zero_tol)
        idx = np.sort(np.concatenate([zero, cand[_pick(lam[cand], shift, nev)]]))
        lam, x = lam[idx], x[:, idx]
    res = relative_residuals(kd, md, lam, x)
    return EigenResult(lam, x, int(np.sum(lam < zero_tol)), res, float(shift),
                       solver="dense", zero_tol=zero_tol)


def _factorize(k, m, sigma, retries=3):
    a = (k - sigma * m).tocsc()
    for attempt in range(retries + 1):
        try:
            lu = spla.splu(a)
            if not np.all(np.isfinite(lu.U.diagonal())) or np.min(np.abs(lu.U.diagonal())) == 0:
                raise RuntimeError("exactly singular factor")
            return lu, sigma
        except RuntimeError as exc:
            if attempt == retries:
                raise FactorizationError(f"factorization of K - sigma M failed for sigma={sigma}: "
                                         f"{exc}") from exc
            sigma *= 1 + 1e-3
            log.info("retrying factorization with shift %.12g", sigma)
            a = (k - sigma * m).tocsc()


DROP_TOL = 1e-6


def _m_orthonormalize(w, v, m, rng, fill=None, drop_tol=DROP_TOL, retries=3):
    """M-orthonormal basis of ``w`` orthogonalized twice against ``v``.

    A direction that shrinks below ``drop_tol`` of its original M-norm is
    numerically inside ``span(v)``; what is left of it is rounding noise, so
    it is replaced by a random vector passed through ``fill``.  When the
    refills keep collapsing as well, ``span(v)`` already holds the range
    of ``fill`` and the result has fewer columns, possibly none.
    """
    n = w.shape[0]
    pre = np.sqrt(np.maximum(np.einsum("ij,ij->j", w, m @ w), 1e-300))
    for _ in range(2):
        if v.shape[1]:
            w = w - v @ (v.T @ (m @ w))
    ws = w / pre
    g = ws.T @ (m @ ws)
    evals, evecs = np.linalg.eigh(0.5 * (g + g.T))
    keep = evals > drop_tol ** 2
    if not np.all(keep):
        if retries == 0:
            evals, evecs = evals[keep], evecs[:, keep]
        else:
            fresh = rng.standard_normal((n, int(np.sum(~keep))))
            if fill is not None:
                fresh = fill(fresh)
            return _m_orthonormalize(np.hstack([ws @ evecs[:, keep], fresh]), v, m, rng, fill,
                                     drop_tol, retries - 1)
    if not evals.size:
        return np.zeros((n, 0))
    q = ws @ (evecs / np.sqrt(evals))
    # one more pass restores orthogonality to working precision
    if v.shape[1]:
        q = q - v @ (v.T @ (m @ q))
    g = q.T @ (m @ q)
    r = np.linalg.cholesky(0.5 * (g + g.T)).T
    return scipy.linalg.solve_triangular(r, q.T, trans="T").T


POLISH_STEPS = 4


def _ritz(k, m, v, hv):
    """Rayleigh-Ritz with the iteration operator; primal Rayleigh quotients and residuals."""
    g = v.T @ (m @ hv)
    mu, y = np.linalg.eigh(0.5 * (g + g.T))
    x = v @ y
    lam = np.einsum("ij,ij->j", x, k @ x)
    return mu, y, lam, x, relative_residuals(k, m, lam, x)


def _polish(k, m, x, apply, tol, rng):
    """Subspace iteration with the iteration operator, stopped once converged."""
    steps = 0
    for steps in range(1, POLISH_STEPS + 1):
        x = _m_orthonormalize(apply(x), np.zeros((x.shape[0], 0)), m, rng, apply)
        _, _, lam, x, res = _ritz(k, m, x, apply(x))
        if np.all(res <= tol):
            break
    return lam, x, res, steps


def solve_lanczos(k, m, nev, shift, tol=1e-10, block_size=8, max_iter=200, ncv=None,
                  seed=0, zero_tol=1e-6, polish_below=1e-5) -> EigenResult:
    """Thick-restart block shift-invert Lanczos for the modes nearest ``shift``.

    The iteration operator is ``H = (K - s M)^{-1} K (K - s M)^{-1} M``, the
    shift-invert operator ``C = (K - s M)^{-1} M`` followed by its kernel
    purifier ``(K - s M)^{-1} K``.  ``H`` is M-self-adjoint with eigenvalue
    ``lambda / (lambda - s)**2``, which peaks at the shift and vanishes on
    both the kernel of ``K`` and the high end of the spectrum.  Rounding
    noise in the huge kernel therefore stays at the unwanted end instead of
    competing with the wanted modes, as it would for ``C`` alone.

    Ritz vectors come from an explicit Rayleigh-Ritz step with ``H`` in the
    M-orthonormal basis (full reorthogonalization, twice); eigenvalues are
    primal Rayleigh quotients.  Returns the ``nev`` modes with the largest
    transformed value, which are the nonzero modes closest to the shift.
    """
    k = sp.csr_matrix(k)
    m = sp.csr_matrix(m)
    n = k.shape[0]
    b = max(1, min(block_size, n))
    if ncv is None:
        ncv = max(2 * nev + 4 * b, nev + 8 * b, 32)
    ncv = min(ncv, n)
    if nev + 2 * b > ncv:
        raise ValueError("nev too large for the problem size; use the dense solver")
    lu, sigma = _factorize(k, m, float(shift))
    rng = np.random.default_rng(seed)
    apply = lambda x: lu.solve(np.asarray(k @ lu.solve(np.asarray(m @ x))))  # noqa: E731

    v = np.zeros((n, 0))
    block = _m_orthonormalize(apply(rng.standard_normal((n, b))), v, m, rng, apply)
    n_matvec = b
    it = 0
    hv = np.zeros((n, 0))
    for it in range(1, max_iter + 1):
        while True:
            v = np.hstack([v, block])
            w = apply(block)
            n_matvec += b
            hv = np.hstack([hv, w])
            if v.shape[1] + b > ncv:
                break
            block = _m_orthonormalize(w, v, m, rng, apply)
            if block.shape[1] == 0:
                break  # invariant subspace, Rayleigh-Ritz is exact
        mu, y, theta, ritz, res_all = _ritz(k, m, v, hv)
        order = np.argsort(-mu, kind="stable")
        order = order[theta[order] >= zero_tol]
        idx = order[:nev]
        lam, x, res = theta[idx], ritz[:, idx], res_all[idx]
        log.debug("restart %d: %d/%d converged", it, int(np.sum(res <= tol)), nev)
        if np.all(res <= tol):
            break
        if res.max() <= polish_below:
            lam, x, res, steps = _polish(k, m, x, apply, tol, rng)
            n_matvec += nev * 2 * steps
            if np.all(res <= tol):
                break
        # thick restart: wanted Ritz vectors plus a margin of the next ones
        keep = order[:min(nev + b, ncv - 2 * b)]
        hv = hv @ y
        v = ritz[:, keep]
        pending = idx[res_all[idx] > tol]
        worst = pending[np.argsort(-res_all[pending], kind="stable")[:b]]
        w = hv[:, worst]
        hv = hv[:, keep]
        if w.shape[1] < b:
            w = np.hstack([w, apply(rng.standard_normal((n, b - w.shape[1])))])
        block = _m_orthonormalize(w, v, m, rng, apply)
    converged = bool(np.all(res <= tol))
    if not converged:
        warnings.warn(f"Lanczos did not converge in {max_iter} restarts "
                      f"(max residual {res.max():.2e})", ConvergenceWarning, stacklevel=2)
    x = x / np.sqrt(np.einsum("ij,ij->j", x, m @ x))
    lam = np.einsum("ij,ij->j", x, k @ x)
    order = np.argsort(lam, kind="stable")
    lam, x = lam[order], x[:, order]
    res = relative_residuals(k, m, lam, x)
    return EigenResult(lam, x, int(np.sum(lam < zero_tol)), res, sigma, iterations=it,
                       converged=converged, solver="lanczos", zero_tol=zero_tol,
                       n_matvec=n_matvec)


def solve_generalized(k, m, nev: int, shift: float, tol: float = 1e-10, max_iter: int = 200,
                      solver: str = "auto", block_size: int = 8, seed: int = 0,
                      zero_tol: float = 1e-6) -> EigenResult:
    """``nev`` nonzero eigenpairs of ``K x = lambda M x`` around ``shift``.

    The modes are those with the largest ``lambda / (lambda - shift)**2``,
    an interval ``[lo, hi]`` around the shift that contains it.  The dense
    path also returns the zero modes (``lambda < zero_tol``) and counts
    them in ``zero_count``.  ``solver="auto"`` uses the dense path below
    500 unknowns.
    """
    if k.shape != m.shape or k.shape[0] != k.shape[1]:
        raise ValueError(f"K {k.shape} and M {m.shape} must be square of equal size")
    if nev < 1:
        raise ValueError("nev must be positive")
    n = k.shape[0]
    if solver == "auto":
        solver = "dense" if n < DENSE_LIMIT else "lanczos"
    if solver not in ("dense", "lanczos"):
        raise ValueError(f"unknown solver {solver!r}")
    b = max(block_size, 1)
    if solver == "dense" or 2 * nev + 2 * b > n:
        return solve_dense(k, m, nev, shift, zero_tol)
    return solve_lanczos(k, m, nev, shift, tol=tol, block_size=block_size, max_iter=max_iter,
                         seed=seed, zero_tol=zero_tol)


def filter_nonzero(result, zero_tol: float = 1e-6):
    """Drop zero modes; return ``(nonzero ascending, dropped count)``."""
    lam = np.sort(np.asarray(result.eigenvalues if isinstance(result, EigenResult) else result,
                             dtype=float))
    near = lam[(lam >= zero_tol) & (lam <= 10 * zero_tol)]
    if near.size:
        warnings.warn(f"{near.size} eigenvalue(s) in [{zero_tol:g}, {10 * zero_tol:g}]: "
                      "suspicious cluster near the zero cutoff", ZeroClusterWarning, stacklevel=2)
    keep = lam >= zero_tol
    return lam[keep], int(np.sum(~keep))


def _lower_root(f, sigma):
    """Smaller root ``lo < sigma`` of ``lo / (lo - sigma)**2 = f``."""
    # f lo^2 - (2 f sigma + 1) lo + f sigma^2 = 0
    p = 2 * f * sigma + 1
    return (p - np.sqrt(p * p - 4 * f * f * sigma * sigma)) / (2 * f)


def window(values, sigma) -> tuple[float, float]:
    """Interval ``[lo, hi]`` that a mode selection around ``sigma`` covers.

    Every eigenvalue ``lambda > 0`` with ``lambda / (lambda - sigma)**2``
    at least as large as for all selected values lies inside it.
    """
    v = np.asarray(values, dtype=float)
    f = float(np.min(_transformed(v, sigma)))
    lo = _lower_root(f, sigma)
    hi = float(sigma + (1 + np.sqrt(1 + 4 * f * sigma)) / (2 * f))
    return float(lo), hi


def _merge(base: EigenResult, extra: EigenResult, below: float) -> EigenResult:
    """``base`` plus the nonzero modes of ``extra`` lying below ``below``."""
    take = np.flatnonzero((extra.eigenvalues >= extra.zero_tol)
                          & (extra.eigenvalues < below * (1 - 1e-8)))
    if take.size == 0:
        return base
    lam = np.concatenate([base.eigenvalues, extra.eigenvalues[take]])
    res = np.concatenate([base.residuals, extra.residuals[take]])
    vec = None
    if base.vectors is not None and extra.vectors is not None:
        vec = np.hstack([base.vectors, extra.vectors[:, take]])
    order = np.argsort(lam, kind="stable")
    return EigenResult(lam[order], None if vec is None else vec[:, order], base.zero_count,
                       res[order], base.shift, base.iterations + extra.iterations,
                       base.converged and extra.converged, base.solver, base.zero_tol,
                       base.n_matvec + extra.n_matvec)


def lowest_nonzero(k, m, count: int, shift: float, zero_tol: float = 1e-6,
                   margin: float = 0.5, max_probes: int = 64, **kwargs):
    """The ``count`` smallest nonzero eigenvalues.

    The selected modes fill a window ``[lo, hi]`` around the shift (see
    :func:`window`) and anything below ``lo`` is invisible to the
    iteration.  ``nev`` is first doubled until ``lo`` is at most ``margin``
    times the smallest value found.  The rest of ``[zero_tol, lo)`` is then
    covered by small probes, each at the geometric midpoint of an uncovered
    interval; this catches isolated spurious eigenvalues far below the
    shift.  Intervals above the ``count``-th value found are dropped.
    Returns ``(values, result)``.
    """
    n = k.shape[0]
    solver = kwargs.get("solver", "auto")
    if solver == "dense" or (solver == "auto" and n < DENSE_LIMIT):
        res = solve_dense(k, m, None, shift, zero_tol)
        nz, _ = filter_nonzero(res, zero_tol)
        return nz[:count], res
    nev = count
    while True:
        res = solve_generalized(k, m, nev, shift, zero_tol=zero_tol, **kwargs)
        nz = res.nonzero
        if len(nz) == 0 or nev >= n:
            break
        lo, _ = window(nz, res.shift)
        if lo <= margin * nz[0]:
            break
        log.info("window starts at %.6g next to %.6g; doubling nev to %d", lo, nz[0], 2 * nev)
        nev = min(2 * nev, n)
    gaps = [(zero_tol, window(nz, res.shift)[0])] if len(nz) else []
    probe_nev = max(1, min(kwargs.get("block_size", 8), count))
    probes = 0
    while gaps:
        found = res.nonzero
        cap = found[count - 1] if len(found) >= count else np.inf
        a, c = gaps.pop()
        c = min(c, cap)
        if c <= a * (1 + 1e-9):
            continue
        if probes == max_probes:
            warnings.warn(f"gap [{a:.3g}, {c:.3g}) left unsearched after {max_probes} probes",
                          ConvergenceWarning, stacklevel=2)
            break
        probes += 1
        sigma = float(np.sqrt(a * c))
        log.info("searching [%.3g, %.3g) with shift %.3g", a, c, sigma)
        probe = solve_generalized(k, m, probe_nev, sigma, zero_tol=zero_tol, **kwargs)
        pnz = probe.nonzero
        if len(pnz) == 0:
            continue
        lo_p, hi_p = window(pnz, probe.shift)
        keep = probe.eigenvalues >= a
        keep &= probe.eigenvalues < c * (1 - 1e-8)
        res = _merge(res, EigenResult(probe.eigenvalues[keep], None if probe.vectors is None
                                      else probe.vectors[:, keep], 0, probe.residuals[keep],
                                      probe.shift, probe.iterations, probe.converged,
                                      probe.solver, zero_tol, probe.n_matvec), c)
        if hi_p < c:
            gaps.append((hi_p, c))
        if lo_p > a:
            gaps.append((a, lo_p))
    nz, _ = filter_nonzero(res, zero_tol)
    return nz[:count], res


def spectrum_error(computed, reference) -> np.ndarray:
    """Elementwise ``|computed - reference|`` up to the shorter length."""
    c = np.asarray(computed, dtype=float)
    r = np.asarray(reference, dtype=float)
    n = min(len(c), len(r))
    return np.abs(c[:n] - r[:n])
