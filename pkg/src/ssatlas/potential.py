"""Wadati-type PT-symmetric potentials and the exact bound-state solution.

The potential family is built from a real localized profile W(x) and a real
coupling g,

    V(x) = -W(x)**2 - 2 g W(x) - i W'(x),

and the default profile is W(x) = A sech(x).  Units are hbar = 2m = 1, so the
stationary equation reads -psi'' + V psi = E psi.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

LOG_SPACE_CUTOFF = 30.0


@dataclass(frozen=True)
class Profile:
    """A real localized profile W(x) together with its derivative."""

    name: str
    W: Callable[[np.ndarray, float], np.ndarray]
    dW: Callable[[np.ndarray, float], np.ndarray]


def _sech(x):
    # 1/cosh overflows to 0 gracefully for |x| > 710
    return 1.0 / np.cosh(x)


def _sech_W(x, A):
    return A * _sech(x)


def _sech_dW(x, A):
    return -A * _sech(x) * np.tanh(x)


SECH = Profile("sech", _sech_W, _sech_dW)

PROFILES: dict[str, Profile] = {"sech": SECH}


@dataclass(frozen=True)
class PotentialParams:
    """Parameters (g, A) of one member of the potential family.

    ``profile`` names an entry of :data:`PROFILES`.
    """

    g: float
    A: float
    profile: str = "sech"

    def __post_init__(self) -> None:
        if not math.isfinite(self.g):
            raise ValueError(f"g must be finite, got {self.g!r}")
        if not math.isfinite(self.A) or self.A < 0:
            raise ValueError(f"A must be finite and >= 0, got {self.A!r}")
        if self.profile not in PROFILES:
            raise ValueError(f"unknown profile {self.profile!r}")


def eval_W(x, A: float):
    """Sech profile W(x) = A sech(x)."""
    w = _sech_W(np.asarray(x, dtype=float), A)
    return float(w) if w.ndim == 0 else w


def eval_V_generic(x, W, dW, g: float):
    """Evaluate -W^2 - 2 g W - i W' for precomputed or callable W, W'.

    ``W`` and ``dW`` may be numbers/arrays already evaluated at ``x`` or
    callables of one argument.
    """
    w = W(x) if callable(W) else W
    dw = dW(x) if callable(dW) else dW
    w = np.asarray(w, dtype=float)
    dw = np.asarray(dw, dtype=float)
    out = -w * w - 2.0 * g * w - 1j * dw
    return complex(out) if out.ndim == 0 else out


def eval_V(x, p: PotentialParams):
    """Complex potential V(x) for the parameters ``p``.

    For the sech profile this is
    -A^2 sech^2 x - 2 g A sech x + i A sech x tanh x.
    """
    prof = PROFILES[p.profile]
    xa = np.asarray(x, dtype=float)
    return eval_V_generic(xa, prof.W(xa, p.A), prof.dW(xa, p.A), p.g)


def check_pt_symmetry(
    p: PotentialParams | Callable[[np.ndarray], np.ndarray],
    sample_points: Sequence[float],
    tol: float = 1e-12,
) -> bool:
    """True iff |V(-x) - conj(V(x))| <= tol at every sample point.

    ``p`` may also be any callable returning V on an array of points, which
    is how non-symmetric test profiles are checked.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    x = np.asarray(sample_points, dtype=float)
    V = p if callable(p) else (lambda s: eval_V(s, p))
    return bool(np.all(np.abs(V(-x) - np.conj(V(x))) <= tol))


@dataclass(frozen=True)
class ExactBoundState:
    """Closed-form bound state, available on the curve A = 1/(1 - 4 g^2).

    The wavefunction carries no normalization; compare ratios or residuals.
    """

    g: float
    A: float
    energy: float
    marginal: bool = field(default=False)

    def psi(self, x):
        """Evaluate the bound-state wavefunction on real ``x``.

        (e^x - i)^(-A) and (e^x + i)^(1-A) use principal branches; both bases
        stay off the real axis for real x, so psi is continuous.
        """
        x = np.asarray(x, dtype=float)
        A, g = self.A, self.g
        ratio = (2 * g + 1j) / (1 + 2j * g)
        out = np.empty(x.shape, dtype=complex)

        small = np.abs(x) <= LOG_SPACE_CUTOFF
        xs = x[small]
        ex = np.exp(xs)
        out[small] = (
            np.exp((A - 1) * xs)
            * (ex - 1j) ** (-A)
            * (ex + 1j) ** (1 - A)
            * (1 - ratio * ex)
        )

        big = ~small
        if np.any(big):
            xb = x[big]
            # log(e^x -+ i) = x + log(1 -+ i e^{-x}) for large positive x,
            # log(-+ i) + log(1 +- i e^{x}) for large negative x
            pos = xb > 0
            log_m = np.where(
                pos,
                xb + np.log1p(-1j * np.exp(-np.abs(xb))),
                np.log(-1j + 0j) + np.log1p(1j * np.exp(-np.abs(xb))),
            )
            log_p = np.where(
                pos,
                xb + np.log1p(1j * np.exp(-np.abs(xb))),
                np.log(1j + 0j) + np.log1p(-1j * np.exp(-np.abs(xb))),
            )
            # 1 - ratio e^x, split the same way to avoid overflow
            log_lin = np.where(
                pos,
                xb + np.log(np.exp(-np.abs(xb)) - ratio),
                np.log(1 - ratio * np.exp(-np.abs(xb))),
            )
            out[big] = np.exp((A - 1) * xb - A * log_m + (1 - A) * log_p + log_lin)
        return out if out.ndim else complex(out)


def exact_bound_state(g: float) -> ExactBoundState:
    """Exact bound state for |g| < 1/2.

    Returns A = 1/(1 - 4 g^2) and E = -16 g^4 / (1 - 4 g^2)^2 = -(A - 1)^2.
    g = 0 is accepted but flagged ``marginal``: E = 0 sits on the continuum
    edge and the state is not normalizable.
    """
    if not math.isfinite(g) or g * g >= 0.25:
        raise ValueError(f"exact solution requires g^2 < 1/4, got g={g!r}")
    denom = 1.0 - 4.0 * g * g
    A = 1.0 / denom
    E = -16.0 * g**4 / denom**2
    marginal = g == 0.0
    if marginal:
        warnings.warn("g = 0 gives E = 0 at the continuum edge", stacklevel=2)
    return ExactBoundState(g=float(g), A=float(A), energy=float(E), marginal=marginal)


def schrodinger_residual(psi, E: complex, p: PotentialParams, grid, h: float) -> float:
    """Normalized finite-difference residual of -psi'' + V psi - E psi.

    ``grid`` must be uniform with spacing ``h``; psi is evaluated at grid
    points and their +-h neighbours.  The result is
    max_i |(-psi'' + V psi - E psi)(x_i)| / max_i |psi(x_i)| over interior
    points and is O(h^2) for an exact solution.
    """
    x = np.asarray(grid, dtype=float)
    if x.size == 0:
        raise ValueError("empty grid")
    if x.size > 1 and not np.allclose(np.diff(x), h, rtol=1e-6, atol=1e-12):
        raise ValueError("grid is not uniform with spacing h")
    f0 = np.asarray(psi(x), dtype=complex)
    fp = np.asarray(psi(x + h), dtype=complex)
    fm = np.asarray(psi(x - h), dtype=complex)
    V = np.broadcast_to(eval_V(x, p), x.shape)
    res = -(fp - 2 * f0 + fm) / h**2 + (V - E) * f0
    return float(np.max(np.abs(res)) / np.max(np.abs(f0)))
