import numpy as np
import pytest

from ssatlas._tridiag import eigvals_tridiag, eigvecs_tridiag, to_dense


def _match(a, b):
    # max distance from each eigenvalue in a to its nearest one in b
    return max(np.min(np.abs(b - x)) for x in a)


@pytest.mark.parametrize("seed", range(4))
def test_ql_matches_lapack_complex_symmetric(seed):
    rng = np.random.default_rng(seed)
    n = 200
    d = rng.normal(size=n) + 0.3j * rng.normal(size=n)
    e = rng.normal(size=n - 1) + 0.1j * rng.normal(size=n - 1)
    w = eigvals_tridiag(d, e, e)
    assert w is not None
    ref = np.linalg.eigvals(to_dense(d, e, e))
    assert _match(w, ref) < 1e-9
    assert _match(ref, w) < 1e-9


def test_ql_nonsymmetric_via_symmetrization():
    rng = np.random.default_rng(7)
    n = 150
    d = rng.normal(size=n) + 0.2j * rng.normal(size=n)
    u = rng.uniform(0.5, 1.5, n - 1) * np.exp(0.3j)
    l = rng.uniform(0.5, 1.5, n - 1) * np.exp(-0.1j)
    w = eigvals_tridiag(d, u, l)
    ref = np.linalg.eigvals(to_dense(d, u, l))
    assert _match(w, ref) < 1e-9


def test_discrete_laplacian():
    n, h = 400, 0.05
    d = np.full(n, 2 / h**2)
    off = np.full(n - 1, -1 / h**2)
    w = np.sort(eigvals_tridiag(d, off, off).real)
    j = np.arange(1, n + 1)
    exact = np.sort(2 * (1 - np.cos(j * np.pi / (n + 1))) / h**2)
    assert np.max(np.abs(w - exact) / exact) < 1e-10


def test_eigvecs_residual():
    rng = np.random.default_rng(3)
    n = 120
    d = rng.normal(size=n) + 0.5j * rng.normal(size=n)
    e = np.ones(n - 1, dtype=complex)
    w = eigvals_tridiag(d, e, e)
    V = eigvecs_tridiag(d, e, e, w)
    H = to_dense(d, e, e)
    res = np.linalg.norm(H @ V - V * w, axis=0)
    assert np.allclose(np.linalg.norm(V, axis=0), 1.0)
    assert np.max(res) < 1e-8


def test_single_element():
    assert eigvals_tridiag(np.array([2.0 + 1j]), np.array([]), np.array([]))[0] == 2.0 + 1j
