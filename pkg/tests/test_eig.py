import warnings

import numpy as np
import pytest
import scipy.linalg
import scipy.sparse as sp

from maxlag2d.assemble import assemble_mass, assemble_rot_rot
from maxlag2d.eig import (ConvergenceWarning, EigenResult, FactorizationError, ZeroClusterWarning,
                          filter_nonzero, lowest_nonzero, relative_residuals, solve_dense,
                          solve_generalized, solve_lanczos, spectrum_error, window)
from maxlag2d.fespace import build_vector_space
from maxlag2d.mesh import generate_jittered, generate_structured
from maxlag2d.refine import powell_sabin

CRISSCROSS6_K4 = [9.869604401309, 9.869604401309, 19.73920880459, 39.47841782951, 39.47841782951,
          49.34802238840, 49.34802238840, 78.95683762620, 88.82645223886, 88.82645223886]


def matrices(mesh, k):
    v = build_vector_space(mesh, k)
    return assemble_rot_rot(v), assemble_mass(v)


@pytest.fixture(scope="module")
def cc3k4():
    return matrices(generate_structured(3, "criss-cross"), 4)


def test_one_by_one():
    r = solve_generalized(sp.csr_matrix([[2.0]]), sp.csr_matrix([[1.0]]), 1, 1.0)
    assert r.eigenvalues.tolist() == [2.0]
    assert r.zero_count == 0


def test_lanczos_matches_dense(cc3k4):
    k, m = cc3k4
    assert k.shape[0] >= 500
    lz = solve_generalized(k, m, 12, 5.0, solver="lanczos")
    dense = solve_dense(k, m)
    nz = dense.nonzero
    assert lz.converged
    np.testing.assert_allclose(lz.nonzero, nz[:12], rtol=1e-10)


def test_small_fixtures_use_dense_oracle():
    k, m = matrices(powell_sabin(generate_structured(3)), 1)
    assert k.shape[0] < 500
    r = solve_generalized(k, m, 5, 5.0)
    assert r.solver == "dense"
    ref = scipy.linalg.eigh(k.toarray(), m.toarray(), eigvals_only=True)
    np.testing.assert_allclose(r.nonzero, np.sort(ref[ref > 1e-6])[:5], rtol=1e-12)


def test_crisscross_table_values(crisscross6):
    k, m = matrices(crisscross6, 4)
    r = solve_generalized(k, m, 30, 5.0)
    nz, _ = filter_nonzero(r)
    np.testing.assert_allclose(nz[:10], CRISSCROSS6_K4, rtol=1e-6)
    assert nz[0] == pytest.approx(9.869604401309, abs=1e-5)


def test_residual_and_orthonormality(cc3k4):
    k, m = cc3k4
    r = solve_lanczos(k, m, 8, 5.0)
    assert (r.residuals <= 1e-10).all()
    np.testing.assert_allclose(relative_residuals(k, m, r.eigenvalues, r.vectors), r.residuals)
    g = r.vectors.T @ (m @ r.vectors)
    np.testing.assert_allclose(g, np.eye(8), atol=1e-8)
    assert np.all(np.diff(r.eigenvalues) >= 0)


def test_shift_independence(cc3k4):
    k, m = cc3k4
    a, _ = lowest_nonzero(k, m, 6, 5.0, solver="lanczos")
    b, _ = lowest_nonzero(k, m, 6, 15.0, solver="lanczos")
    np.testing.assert_allclose(a, b, rtol=1e-9)


def test_filter_nonzero():
    vals, dropped = filter_nonzero([1e-12, 1e-11, 9.87, 19.7])
    assert vals.tolist() == [9.87, 19.7] and dropped == 2
    with pytest.warns(ZeroClusterWarning):
        filter_nonzero([1e-12, 5e-6, 9.87])


def test_filter_keeps_small_true_and_spurious_values():
    vals, _ = filter_nonzero([1e-13, 0.149511749824251, 1.424154538647])
    assert vals.tolist() == [0.149511749824251, 1.424154538647]


def test_spectrum_error_examples():
    assert spectrum_error([9.872556542826], [np.pi ** 2])[0] == pytest.approx(2.952141736802e-3,
                                                                              rel=1e-9)
    assert spectrum_error([39.47841782951], [4 * np.pi ** 2])[0] == pytest.approx(2.2515e-7,
                                                                                  rel=1e-3)
    assert spectrum_error([1.0, 2.0], [1.0, 2.0, 3.0]).tolist() == [0.0, 0.0]


def _synthetic(values, kernel=200, n=700, seed=0):
    rng = np.random.default_rng(seed)
    d = np.concatenate([np.zeros(kernel), values,
                        np.linspace(200, 5000, n - kernel - len(values))])
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    mdiag = rng.uniform(0.5, 2.0, n)
    # K = Q^T diag(d) Q scaled so the generalized eigenvalues are d
    s = np.sqrt(mdiag)
    k = (s[:, None] * (q @ np.diag(d) @ q.T) * s[None, :])
    m = np.diag(mdiag)
    return sp.csr_matrix(k), sp.csr_matrix(m)


def test_isolated_tiny_eigenvalue_is_found():
    true = [3e-3, 10.0, 10.0, 20.0, 40.0, 50.0]
    k, m = _synthetic(true)
    vals, res = lowest_nonzero(k, m, 4, 5.0, solver="lanczos")
    np.testing.assert_allclose(vals, true[:4], rtol=1e-8)
    # a single run around the shift misses the tiny value
    direct = solve_generalized(k, m, 4, 5.0, solver="lanczos")
    assert direct.nonzero.min() > 1


def test_window_contains_selected_values():
    vals = np.array([9.87, 19.7, 39.5])
    lo, hi = window(vals, 5.0)
    assert lo < vals.min() and hi >= vals.max()
    f = lambda x: x / (x - 5.0) ** 2  # noqa: E731
    assert f(lo) == pytest.approx(f(vals).min())


def test_factorization_retry_on_exact_eigenvalue():
    n = 600
    k = sp.diags(np.arange(1.0, n + 1)).tocsr()
    m = sp.identity(n, format="csr")
    r = solve_generalized(k, m, 3, 3.0, solver="lanczos")
    assert r.shift != 3.0
    np.testing.assert_allclose(np.sort(r.eigenvalues), [2.0, 3.0, 4.0], rtol=1e-10)


def test_factorization_failure_reported():
    n = 600
    k = sp.csr_matrix((n, n))
    m = sp.csr_matrix((n, n))
    with pytest.raises(FactorizationError):
        solve_lanczos(k, m, 2, 1.0)


def test_non_convergence_is_flagged(cc3k4):
    k, m = cc3k4
    with pytest.warns(ConvergenceWarning):
        r = solve_lanczos(k, m, 12, 5.0, max_iter=1, tol=1e-15, polish_below=0)
    assert not r.converged


def test_input_validation():
    k = sp.identity(4, format="csr")
    with pytest.raises(ValueError):
        solve_generalized(k, sp.identity(5, format="csr"), 1, 0.5)
    with pytest.raises(ValueError):
        solve_generalized(k, k, 0, 0.5)
    with pytest.raises(ValueError):
        solve_generalized(k, k, 1, 0.5, solver="arnoldi")


def test_dense_counts_kernel():
    k, m = matrices(generate_jittered(2, seed=0), 2)
    r = solve_dense(k, m)
    assert r.zero_count + len(r.nonzero) == len(r.eigenvalues) == k.shape[0]
    assert isinstance(r, EigenResult)
