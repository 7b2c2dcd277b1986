"""Transfer matrix and scattering coefficients by direct integration.

Solutions behave as a e^{ikx} + b e^{-ikx} on the far left and
c e^{ikx} + d e^{-ikx} on the far right; the transfer matrix maps (a, b) to
(c, d).  Both columns come from integrating the first-order system
(psi, psi') across [-L, L] with an adaptive 8th-order Dormand-Prince scheme,
starting from a pure right-mover (a=1, b=0) and a pure left-mover (a=0, b=1).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericalError
from .potential import PROFILES, PotentialParams

DEFAULT_L = 25.0
DEFAULT_RTOL = 1e-10
K_MIN = 1e-3
OVERFLOW_RATIO = 1e-12


@dataclass(frozen=True)
class TransferMatrix:
    """2x2 transfer matrix M(g, k) mapping left amplitudes to right ones."""

    m11: complex
    m12: complex
    m21: complex
    m22: complex
    k: float
    params: PotentialParams

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.m11, self.m12], [self.m21, self.m22]])

    @property
    def det(self) -> complex:
        return self.m11 * self.m22 - self.m12 * self.m21

    @property
    def norm(self) -> float:
        """Spectral norm."""
        return float(np.linalg.norm(self.matrix, 2))

    @property
    def pt_defect(self) -> float:
        """|m11 - conj(m22)|, zero for a PT-symmetric potential."""
        return abs(self.m11 - self.m22.conjugate())


@dataclass(frozen=True)
class ScatteringCoefficients:
    """T = |1/m22|^2, R_left = |m21/m22|^2, R_right = |m12/m22|^2.

    When |m22| < 1e-12 ||M|| the coefficients are computed with |m22| clamped
    to that floor and ``overflow`` is set.
    """

    T: float
    R_left: float
    R_right: float
    overflow: bool = False


def _potential_parts(p: PotentialParams):
    prof = PROFILES[p.profile]

    def parts(x):
        return prof.W(x, p.A), prof.dW(x, p.A)

    return parts


def _check_truncation(p: PotentialParams, k, L: float) -> None:
    prof = PROFILES[p.profile]
    tail = max(abs(prof.W(-L, p.A)), abs(prof.W(L, p.A)))
    kmax = float(np.max(np.abs(k)))
    if tail >= 1e-10 * max(1.0, kmax * kmax):
        raise ValueError(f"|W(+-L)| = {tail:.3g} too large for L = {L}; enlarge L")


def _propagate(p: PotentialParams, g, k, L: float, rel_tol: float, columns=(0, 1)):
    """Integrate one or both initial conditions for a batch of (g, k).

    Returns an array of shape (len(columns), 2, N) with psi and psi' at +L.
    The batch shares one adaptive step sequence.
    """
    g = np.atleast_1d(np.asarray(g, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    g, k = np.broadcast_arrays(g, k)
    N = g.size
    parts = _potential_parts(p)
    k2 = k * k
    ncol = len(columns)
    y0 = np.empty((ncol, 2, N), dtype=complex)
    for j, col in enumerate(columns):
        sign = 1.0 if col == 0 else -1.0
        e = np.exp(-sign * 1j * k * L)
        y0[j, 0] = e
        y0[j, 1] = sign * 1j * k * e

    def rhs(x, y):
        w, dw = parts(x)
        q = -w * w - 2.0 * g * w - 1j * dw - k2
        y = y.reshape(ncol, 2, N)
        out = np.empty_like(y)
        out[:, 0] = y[:, 1]
        out[:, 1] = q * y[:, 0]
        return out.ravel()

    sol = solve_ivp(
        rhs,
        (-L, L),
        y0.ravel(),
        method="DOP853",
        rtol=rel_tol,
        atol=rel_tol * 1e-3,
        t_eval=[L],
    )
    if not sol.success:
        raise NumericalError(f"integration failed: {sol.message}")
    return sol.y[:, -1].reshape(ncol, 2, N)


def _decompose(psi, dpsi, k, L):
    c = 0.5 * np.exp(-1j * k * L) * (psi + dpsi / (1j * k))
    d = 0.5 * np.exp(1j * k * L) * (psi - dpsi / (1j * k))
    return c, d


def integrate_transfer_matrix(
    p: PotentialParams, k: float, L: float = DEFAULT_L, rel_tol: float = DEFAULT_RTOL
) -> TransferMatrix:
    """Transfer matrix at wave number ``k`` by integration over [-L, L].

    Raises :class:`NumericalError` when det M deviates from 1 by more than
    100 * rel_tol * max(1, ||M||^2), the Wronskian budget of the integration.
    """
    if not k > 0:
        raise ValueError(f"k must be positive, got {k!r}")
    if p.A == 0.0:
        # free propagation: M is exactly the identity
        return TransferMatrix(1 + 0j, 0j, 0j, 1 + 0j, float(k), p)
    _check_truncation(p, k, L)
    out = _propagate(p, p.g, k, L, rel_tol)
    c1, d1 = _decompose(out[0, 0, 0], out[0, 1, 0], k, L)
    c2, d2 = _decompose(out[1, 0, 0], out[1, 1, 0], k, L)
    M = TransferMatrix(complex(c1), complex(c2), complex(d1), complex(d2), float(k), p)
    scale = max(1.0, M.norm**2)
    if not np.isfinite(M.det) or abs(M.det - 1) > 100 * rel_tol * scale:
        raise NumericalError(
            f"det M = {M.det} deviates from 1 (k={k}, {p}); increase L or tighten rel_tol"
        )
    return M


def m22_batch(
    p: PotentialParams,
    g,
    k,
    L: float = DEFAULT_L,
    rel_tol: float = DEFAULT_RTOL,
) -> np.ndarray:
    """m22 for many (g, k) pairs at the amplitude and profile of ``p``.

    Only the left-mover column is integrated.  Members share steps, so the
    accuracy is governed by the most oscillatory member.
    """
    g, k = np.broadcast_arrays(np.asarray(g, dtype=float), np.asarray(k, dtype=float))
    if np.any(k <= 0):
        raise ValueError("k must be positive")
    if p.A == 0.0:
        return np.ones(g.shape, dtype=complex)
    _check_truncation(p, k, L)
    out = _propagate(p, g.ravel(), k.ravel(), L, rel_tol, columns=(1,))
    _, d = _decompose(out[0, 0], out[0, 1], k.ravel(), L)
    return d.reshape(g.shape)


def scattering_coefficients(M: TransferMatrix) -> ScatteringCoefficients:
    """T, R_left and R_right from a transfer matrix."""
    if M.k < K_MIN:
        raise ValueError(f"k = {M.k} below the propagating-wave guard {K_MIN}")
    floor = OVERFLOW_RATIO * M.norm
    m22 = abs(M.m22)
    overflow = m22 < floor
    denom = max(m22, floor) ** 2
    return ScatteringCoefficients(
        T=1.0 / denom,
        R_left=abs(M.m21) ** 2 / denom,
        R_right=abs(M.m12) ** 2 / denom,
        overflow=bool(overflow),
    )


@dataclass(frozen=True)
class ScatteringRow:
    value: float
    T: float
    R_left: float
    R_right: float
    overflow: bool


def scattering_sweep(
    A: float,
    axis: Literal["g", "k"],
    fixed: float,
    lo: float,
    hi: float,
    n_samples: int,
    L: float = DEFAULT_L,
    rel_tol: float = DEFAULT_RTOL,
) -> list[ScatteringRow]:
    """Coefficients along g (at fixed k) or along k (at fixed g).

    ``fixed`` is the wave number when sweeping g and the coupling when
    sweeping k.  Rows are ordered by the swept value.
    """
    if axis not in ("g", "k"):
        raise ValueError(f"axis must be 'g' or 'k', got {axis!r}")
    if not lo < hi:
        raise ValueError("need lo < hi")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    values = np.linspace(lo, hi, n_samples) if n_samples > 1 else np.array([lo])
    rows = []
    for v in values:
        g, k = (v, fixed) if axis == "g" else (fixed, v)
        M = integrate_transfer_matrix(PotentialParams(g=float(g), A=A), float(k), L, rel_tol)
        c = scattering_coefficients(M)
        rows.append(ScatteringRow(float(v), c.T, c.R_left, c.R_right, c.overflow))
    return rows
