"""Eigenvalues and eigenvectors of complex tridiagonal matrices.

A tridiagonal matrix with diagonal ``d``, super-diagonal ``u`` and
sub-diagonal ``l`` is diagonally similar to the complex *symmetric*
tridiagonal matrix with off-diagonal sqrt(u*l).  Its eigenvalues are found
with the implicit QL iteration using complex orthogonal (not unitary)
rotations, O(n^2) in total.  Complex orthogonal rotations can break down;
callers fall back to dense LAPACK when :func:`eigvals_tridiag` reports
failure.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EPS = np.finfo(float).eps
_MAX_ITER = 60
_BREAKDOWN = 1e-10


@njit(cache=True)
def _csqrt(z):
    return np.sqrt(z + 0j)


@njit(cache=True)
def _ql_implicit(d, e):
    # d: diagonal (overwritten by eigenvalues); e[i] couples i and i+1,
    # e[n-1] == 0.  Returns False on breakdown or non-convergence.
    n = d.size
    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= _EPS * dd:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > _MAX_ITER:
                return False
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = _csqrt(g * g + 1.0)
            if abs(g + r) >= abs(g - r):
                g = d[m] - d[l] + e[l] / (g + r)
            else:
                g = d[m] - d[l] + e[l] / (g - r)
            s = 1.0 + 0j
            c = 1.0 + 0j
            p = 0j
            i = m - 1
            deflated = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = _csqrt(f * f + g * g)
                e[i + 1] = r
                if abs(r) <= _BREAKDOWN * (abs(f) + abs(g)):
                    if abs(f) + abs(g) == 0.0:
                        d[i + 1] -= p
                        e[m] = 0.0
                        deflated = True
                        break
                    return False
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                i -= 1
            if deflated:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0
    return True


@njit(cache=True)
def _inverse_iteration(d, u, l, lams, n_iter):
    # One right eigenvector per shift in ``lams`` by inverse iteration on the
    # tridiagonal (d, u, l), using Gaussian elimination with partial pivoting.
    n = d.size
    m = lams.size
    vecs = np.empty((n, m), dtype=np.complex128)
    scale = 0.0
    for i in range(n):
        scale = max(scale, abs(d[i]))
    for i in range(n - 1):
        scale = max(scale, abs(u[i]), abs(l[i]))
    tiny = _EPS * scale
    # U has up to two super-diagonals after pivoting
    a0 = np.empty(n, dtype=np.complex128)
    a1 = np.empty(n, dtype=np.complex128)
    a2 = np.empty(n, dtype=np.complex128)
    mult = np.empty(n, dtype=np.complex128)
    piv = np.empty(n, dtype=np.bool_)
    x = np.empty(n, dtype=np.complex128)
    for j in range(m):
        lam = lams[j] + tiny * (1.0 + 1.0j)
        # factorize T - lam I
        a0[0] = d[0] - lam
        a1[0] = u[0] if n > 1 else 0.0
        a2[0] = 0.0
        for i in range(n - 1):
            below = l[i]
            nd = d[i + 1] - lam
            nu = u[i + 1] if i + 1 < n - 1 else 0.0
            if abs(below) > abs(a0[i]):
                piv[i] = True
                # swap rows i and i+1
                r0, r1, r2 = below, nd, nu
                o0, o1, o2 = a0[i], a1[i], a2[i]
                a0[i], a1[i], a2[i] = r0, r1, r2
                f = o0 / r0
                mult[i] = f
                a0[i + 1] = o1 - f * r1
                a1[i + 1] = o2 - f * r2
            else:
                piv[i] = False
                piv_el = a0[i]
                if piv_el == 0:
                    piv_el = tiny
                    a0[i] = tiny
                f = below / piv_el
                mult[i] = f
                a0[i + 1] = nd - f * a1[i]
                a1[i + 1] = nu - f * a2[i]
            a2[i + 1] = 0.0
        if a0[n - 1] == 0:
            a0[n - 1] = tiny
        for i in range(n):
            # irregular start, never orthogonal to parity eigenvectors
            x[i] = 1.0 + 0.5 * np.sin(0.7 * i + 0.3) + 0.25j * np.cos(1.3 * i)
        for _ in range(n_iter):
            # forward elimination on the right-hand side
            for i in range(n - 1):
                if piv[i]:
                    t = x[i]
                    x[i] = x[i + 1]
                    x[i + 1] = t - mult[i] * x[i]
                else:
                    x[i + 1] = x[i + 1] - mult[i] * x[i]
            # back substitution
            x[n - 1] = x[n - 1] / a0[n - 1]
            if n > 1:
                x[n - 2] = (x[n - 2] - a1[n - 2] * x[n - 1]) / a0[n - 2]
            for i in range(n - 3, -1, -1):
                x[i] = (x[i] - a1[i] * x[i + 1] - a2[i] * x[i + 2]) / a0[i]
            nrm = 0.0
            for i in range(n):
                nrm += abs(x[i]) ** 2
            nrm = np.sqrt(nrm)
            for i in range(n):
                x[i] = x[i] / nrm
        for i in range(n):
            vecs[i, j] = x[i]
    return vecs


def eigvals_tridiag(d, u, l):
    """Eigenvalues of the tridiagonal matrix (d, u, l), or None on breakdown."""
    d = np.asarray(d, dtype=np.complex128)
    n = d.size
    if n == 1:
        return d.copy()
    e = np.zeros(n, dtype=np.complex128)
    e[:-1] = np.sqrt(np.asarray(u, dtype=np.complex128) * np.asarray(l, dtype=np.complex128))
    w = d.copy()
    if not _ql_implicit(w, e):
        return None
    if not np.all(np.isfinite(w)):
        return None
    return w


def eigvecs_tridiag(d, u, l, eigenvalues, n_iter: int = 3):
    """Unit-norm right eigenvectors, one column per eigenvalue."""
    return _inverse_iteration(
        np.asarray(d, dtype=np.complex128),
        np.asarray(u, dtype=np.complex128),
        np.asarray(l, dtype=np.complex128),
        np.asarray(eigenvalues, dtype=np.complex128),
        n_iter,
    )


def to_dense(d, u, l) -> np.ndarray:
    """Dense matrix with diagonal d, super-diagonal u and sub-diagonal l."""
    return np.diag(d) + np.diag(u, 1) + np.diag(l, -1)
