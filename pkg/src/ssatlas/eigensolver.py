"""Finite-difference spectra and phase-transition finders.

The stationary equation -psi'' + V psi = E psi is discretized with
second-order central differences on [-L, L].  Two closures are available:

``dirichlet``
    psi = 0 at +-L.  The operator is complex symmetric; the continuum turns
    into a dense comb of box states.  Box states near a strongly reflecting
    PT scatterer pair up into complex-conjugate eigenvalues whose imaginary
    parts scale like the level spacing, so this closure cannot tell a
    genuine complex pair from a cavity artifact near threshold.

``scaled``
    The same interior grid continued into exterior layers on which the
    coordinate is rotated, x -> +-(L + s e^{i theta}), ending in a Dirichlet
    wall.  The continuum rotates into the lower half plane, resonances
    (zeros of the Jost function below the real k axis) appear with
    Im E < 0, and only normalizable states remain in the upper half plane.
    This is what the transition finders use.

Eigenvalues come from an O(n^2) tridiagonal QL kernel.  On the non-normal
scaled operator that kernel is accurate only at low energy, so every
upper-half-plane candidate is refined by two-sided Rayleigh quotient
iteration on the banded operator before it is trusted.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Literal, Sequence

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from ._tridiag import eigvals_tridiag, eigvecs_tridiag
from .errors import CoarseGridWarning, NoTransitionError, NumericalError
from .potential import PotentialParams, eval_V

logger = logging.getLogger(__name__)

Boundary = Literal["dirichlet", "scaled"]

IM_THRESHOLD = 1e-4
IPR_FACTOR = 5.0
TOL_G = 1e-3


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on [-L, L] with ``n_points`` nodes including both walls.

    ``exterior_width`` and ``scaling_angle`` only matter for the ``scaled``
    closure.
    """

    half_width: float = 25.0
    n_points: int = 2001
    boundary: Boundary = "dirichlet"
    exterior_width: float = 10.0
    scaling_angle: float = 0.5
    truncation_tol: float = 1e-10

    def __post_init__(self) -> None:
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 3:
            raise ValueError("n_points must be an integer >= 3")
        if self.boundary not in ("dirichlet", "scaled"):
            raise ValueError(f"unknown boundary {self.boundary!r}")
        if self.boundary == "scaled":
            if not self.exterior_width > 0:
                raise ValueError("exterior_width must be positive")
            if not 0 < self.scaling_angle < math.pi / 4:
                raise ValueError("scaling_angle must lie in (0, pi/4)")
        if 1.0 / math.cosh(self.half_width) >= self.truncation_tol:
            raise ValueError(
                f"sech(L) = {1 / math.cosh(self.half_width):.3g} is not below "
                f"truncation_tol = {self.truncation_tol:g}; enlarge half_width"
            )

    @property
    def h(self) -> float:
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.n_points)

    def with_boundary(self, boundary: Boundary) -> "GridSpec":
        return replace(self, boundary=boundary)


@dataclass(frozen=True)
class Tridiagonal:
    """Tridiagonal operator on the unknown nodes ``x`` (real coordinates)."""

    diag: np.ndarray
    upper: np.ndarray
    lower: np.ndarray
    x: np.ndarray

    @property
    def n(self) -> int:
        return self.diag.size

    def toarray(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.upper, 1) + np.diag(self.lower, -1)

    def tosparse(self) -> sp.csc_matrix:
        return sp.diags([self.lower, self.diag, self.upper], [-1, 0, 1], format="csc")


def _node_coordinates(grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    # real node positions and their (possibly complex) contour positions,
    # walls included
    x = grid.x
    if grid.boundary == "dirichlet":
        return x, x.astype(complex)
    h = grid.h
    L = grid.half_width
    m = max(1, int(round(grid.exterior_width / h)))
    s = h * np.arange(1, m + 1)
    xr = np.concatenate([-L - s[::-1], x, L + s])
    rot = np.exp(1j * grid.scaling_angle)
    z = np.concatenate([-(L + s[::-1] * rot), x.astype(complex), L + s * rot])
    return xr, z


def build_hamiltonian(p: PotentialParams, grid: GridSpec) -> Tridiagonal:
    """Three-point finite-difference Hamiltonian with walls at the ends.

    For the Dirichlet closure the off-diagonals are -1/h^2 and the diagonal is
    2/h^2 + V(x_i).  On the rotated exterior the non-uniform three-point
    formula is applied along the complex contour; V is evaluated at the real
    coordinate there, where it is below ``grid.truncation_tol``.

    Emits :class:`CoarseGridWarning` when h^2 max|V| > 1.
    """
    xr, z = _node_coordinates(grid)
    hp = z[2:] - z[1:-1]
    hm = z[1:-1] - z[:-2]
    xi = xr[1:-1]
    V = np.asarray(eval_V(xi, p), dtype=complex)
    if grid.h**2 * np.max(np.abs(V)) > 1.0:
        warnings.warn(
            f"h^2 max|V| = {grid.h**2 * np.max(np.abs(V)):.3g} > 1; grid too coarse",
            CoarseGridWarning,
            stacklevel=2,
        )
    diag = 2.0 / (hp * hm) + V
    upper = (-2.0 / (hp * (hp + hm)))[:-1]
    lower = (-2.0 / (hm * (hp + hm)))[1:]
    if grid.boundary == "dirichlet":
        # exact for uniform real spacing; keeps the matrix exactly symmetric
        h2 = grid.h**2
        diag = 2.0 / h2 + V
        upper = np.full(xi.size - 1, -1.0 / h2, dtype=complex)
        lower = upper.copy()
    return Tridiagonal(diag=diag, upper=upper, lower=lower, x=xi)


@dataclass
class SpectrumResult:
    """Eigenvalues sorted by (Re E, Im E) with per-state IPR.

    ``unresolved`` marks QL estimates of the scaled operator that refinement
    showed to be spurious (they converge onto another eigenvalue); their
    values are kept but carry no information.
    """

    eigenvalues: np.ndarray
    ipr: np.ndarray
    params: PotentialParams
    grid: GridSpec
    method: str = "ql"
    vectors: np.ndarray | None = field(default=None, repr=False)
    unresolved: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return self.eigenvalues.size


def _rayleigh_refine(H: Tridiagonal, lam: complex, max_iter: int = 12) -> complex:
    # two-sided Rayleigh quotient iteration: right solves with H, left with H^T
    n = H.n
    ab = np.zeros((3, n), dtype=complex)
    abt = np.zeros((3, n), dtype=complex)
    ab[0, 1:], ab[2, :-1] = H.upper, H.lower
    abt[0, 1:], abt[2, :-1] = H.lower, H.upper
    x = np.ones(n, dtype=complex)
    y = np.ones(n, dtype=complex)
    scale = max(1.0, abs(lam))
    for _ in range(max_iter):
        ab[1] = H.diag - lam
        abt[1] = ab[1]
        try:
            x = sla.solve_banded((1, 1), ab, x, check_finite=False)
            y = sla.solve_banded((1, 1), abt, y, check_finite=False)
        except (sla.LinAlgError, ValueError):
            # exactly singular: lam is already an eigenvalue to working precision
            return lam
        x /= np.linalg.norm(x)
        y /= np.linalg.norm(y)
        Hx = H.diag * x
        Hx[:-1] += H.upper * x[1:]
        Hx[1:] += H.lower * x[:-1]
        new = complex(y @ Hx / (y @ x))
        if not np.isfinite(new):
            raise NumericalError(f"Rayleigh refinement diverged near {lam}")
        done = abs(new - lam) <= 1e-13 * scale
        lam = new
        if done:
            break
    return lam


def _refine_upper_half(
    H: Tridiagonal, w: np.ndarray, im_threshold: float, e_max: float
) -> tuple[np.ndarray, np.ndarray]:
    # QL eigenvalues of the rotated operator are unreliable away from low
    # energy.  Each upper-half-plane candidate inside the window is replaced
    # by the eigenvalue Rayleigh iteration converges to.  When several
    # candidates reach the same eigenvalue, or one reaches an eigenvalue
    # already present elsewhere in the list, only the candidate that started
    # closest keeps it; the rest are flagged unresolved.
    out = w.copy()
    unresolved = np.zeros(w.size, dtype=bool)
    idx = np.flatnonzero((w.imag > im_threshold) & (w.real < e_max))
    if idx.size == 0:
        return out, unresolved
    refined = np.array([_rayleigh_refine(H, w[i]) for i in idx])
    others = np.delete(w, idx)
    claimed: list[complex] = []
    for j in np.argsort(np.abs(refined - w[idx])):
        lam = refined[j]
        tol = 1e-6 * max(1.0, abs(lam))
        if any(abs(lam - c) <= tol for c in claimed) or np.any(np.abs(others - lam) <= tol):
            unresolved[idx[j]] = True
            continue
        claimed.append(lam)
        out[idx[j]] = lam
    return out, unresolved


def _ipr(vecs: np.ndarray) -> np.ndarray:
    p = np.abs(vecs) ** 2
    return np.sum(p * p, axis=0) / np.sum(p, axis=0) ** 2


def compute_spectrum(
    p: PotentialParams,
    grid: GridSpec | None = None,
    *,
    method: Literal["auto", "ql", "lapack"] = "auto",
    keep_vectors: bool = False,
) -> SpectrumResult:
    """All eigenvalues of the discretized operator, with IPR per state.

    IPR = sum|psi_i|^4 / (sum|psi_i|^2)^2 over the unknown nodes; ~1/n for
    extended states and grid independent for localized ones.
    """
    grid = grid or GridSpec()
    H = build_hamiltonian(p, grid)
    w = None
    unresolved = None
    used = method
    if method in ("auto", "ql"):
        w = eigvals_tridiag(H.diag, H.upper, H.lower)
        if w is None:
            if method == "ql":
                raise NumericalError("tridiagonal QL iteration broke down")
            logger.info("QL breakdown at %s; falling back to LAPACK", p)
        else:
            used = "ql"
            if grid.boundary == "scaled":
                w, unresolved = _refine_upper_half(
                    H, w, IM_THRESHOLD * 1e-2, default_energy_window(grid)
                )
    if w is None:
        used = "lapack"
        try:
            w, vecs = sla.eig(H.toarray(), check_finite=False)
        except sla.LinAlgError as exc:
            raise NumericalError("dense eigenvalue iteration failed") from exc
    else:
        vecs = eigvecs_tridiag(H.diag, H.upper, H.lower, w)
    order = np.lexsort((w.imag, w.real))
    w = w[order]
    vecs = vecs[:, order]
    return SpectrumResult(
        eigenvalues=w,
        ipr=_ipr(vecs),
        params=p,
        grid=grid,
        method=used,
        vectors=vecs if keep_vectors else None,
        unresolved=None if unresolved is None else unresolved[order],
    )


def eigenvalues(p: PotentialParams, grid: GridSpec) -> np.ndarray:
    """Eigenvalues only (no IPR); the cheap path used by indicators.

    For the scaled closure, estimates flagged unresolved are dropped.
    """
    H = build_hamiltonian(p, grid)
    w = eigvals_tridiag(H.diag, H.upper, H.lower)
    if w is None:
        w = sla.eigvals(H.toarray(), check_finite=False)
    elif grid.boundary == "scaled":
        w, unresolved = _refine_upper_half(H, w, IM_THRESHOLD * 1e-2, default_energy_window(grid))
        w = w[~unresolved]
    return w[np.lexsort((w.imag, w.real))]


def default_energy_window(grid: GridSpec) -> float:
    """Upper bound on Re E treated as physical: a tenth of the lattice band."""
    return 0.4 / grid.h**2


@dataclass(frozen=True)
class StateClasses:
    """Index partition of a spectrum into continuum-like, complex-pair, bound."""

    continuum: np.ndarray
    complex_pair: np.ndarray
    bound: np.ndarray
    ipr_threshold: float


def classify_states(
    s: SpectrumResult,
    im_threshold: float = IM_THRESHOLD,
    ipr_threshold: float | None = None,
    e_max: float | None = None,
) -> StateClasses:
    """Partition a spectrum.

    bound
        |Im E| <= im_threshold, Re E < 0 and IPR > ipr_threshold
        (default: ``IPR_FACTOR`` times the median IPR for the Dirichlet
        closure; for the scaled closure, whose damped exterior layers
        inflate the median, ``IPR_FACTOR`` times 3 / (2 N), the IPR of a
        standing wave on the N interior nodes).
    complex-pair
        For the Dirichlet closure |Im E| > im_threshold.  For the scaled
        closure Im E > im_threshold (only normalizable states live there)
        together with any conjugate partner that is resolved.
    continuum-like
        everything else, including states above ``e_max`` where lattice
        band-edge artifacts live and unresolved scaled-closure estimates.
    """
    if im_threshold <= 0 or (ipr_threshold is not None and ipr_threshold <= 0):
        raise ValueError("thresholds must be positive")
    w = s.eigenvalues
    e_max = default_energy_window(s.grid) if e_max is None else e_max
    if ipr_threshold is None:
        if s.grid.boundary == "dirichlet":
            ipr_threshold = IPR_FACTOR * float(np.median(s.ipr))
        else:
            ipr_threshold = IPR_FACTOR * 1.5 / (s.grid.n_points - 2)
    window = w.real < e_max
    if s.unresolved is not None:
        window &= ~s.unresolved
    if s.grid.boundary == "dirichlet":
        pair = window & (np.abs(w.imag) > im_threshold)
    else:
        upper = window & (w.imag > im_threshold)
        pair = upper.copy()
        tol = 1e-6 * max(1.0, float(np.max(np.abs(w[upper])))) if upper.any() else 0.0
        for e in w[upper]:
            partner = np.abs(w - np.conj(e)) < max(tol, 1e-3 * abs(e.imag))
            pair |= partner & window
    bound = window & ~pair & (np.abs(w.imag) <= im_threshold) & (w.real < 0) & (s.ipr > ipr_threshold)
    continuum = ~pair & ~bound
    return StateClasses(
        continuum=np.flatnonzero(continuum),
        complex_pair=np.flatnonzero(pair),
        bound=np.flatnonzero(bound),
        ipr_threshold=ipr_threshold,
    )


@dataclass(frozen=True)
class PairSummary:
    """Per-g summary used for the Im E / Re E versus g figures."""

    g: float
    max_im_E: float
    re_E_pair: float | None
    n_pair_states: int
    n_bound: int


def summarize(s: SpectrumResult, im_threshold: float = IM_THRESHOLD) -> PairSummary:
    cls = classify_states(s, im_threshold=im_threshold)
    w = s.eigenvalues[cls.complex_pair]
    if w.size:
        top = w[np.argmax(w.imag)]
        max_im, re_pair = float(np.max(np.abs(w.imag))), float(top.real)
    else:
        max_im, re_pair = 0.0, None
    return PairSummary(
        g=s.params.g,
        max_im_E=max_im,
        re_E_pair=re_pair,
        n_pair_states=int(w.size),
        n_bound=int(cls.bound.size),
    )


def spectrum_sweep(
    A: float, g_values: Sequence[float], grid: GridSpec | None = None
) -> list[SpectrumResult]:
    """One spectrum per g, in input order."""
    if len(g_values) == 0:
        raise ValueError("g_values must be nonempty")
    grid = grid or GridSpec()
    return [compute_spectrum(PotentialParams(g=float(g), A=A), grid) for g in g_values]


# -- transitions ---------------------------------------------------------------


@dataclass(frozen=True)
class TransitionPoint:
    """A critical coupling g_c of one of the two transition types.

    ``E_c`` is the eigenvalue of the nascent (bifurcation) or departing
    (collision) pair read on the broken side within ``tol_g`` of g_c.
    """

    g_c: float
    kind: Literal["bifurcation", "collision"]
    E_c: complex
    k_c: float
    A: float
    bracket: tuple[float, float]


def _scaled(grid: GridSpec | None) -> GridSpec:
    return (grid or GridSpec()).with_boundary("scaled")


def upper_pair_states(A: float, g: float, grid: GridSpec, im_threshold: float = IM_THRESHOLD) -> np.ndarray:
    """Eigenvalues with Im E > im_threshold inside the physical energy window."""
    w = eigenvalues(PotentialParams(g=g, A=A), grid)
    return w[(w.imag > im_threshold) & (w.real < default_energy_window(grid))]


def _bisect(indicator, g_lo: float, g_hi: float, tol_g: float):
    f_lo, f_hi = indicator(g_lo), indicator(g_hi)
    if f_lo[0] == f_hi[0]:
        raise NoTransitionError(
            f"indicator does not change across [{g_lo}, {g_hi}] (both {f_lo[0]})"
        )
    lo, hi = (g_lo, f_lo), (g_hi, f_hi)
    while hi[0] - lo[0] > tol_g:
        mid = 0.5 * (lo[0] + hi[0])
        fm = indicator(mid)
        if fm[0] == lo[1][0]:
            lo = (mid, fm)
        else:
            hi = (mid, fm)
    return lo, hi


def find_bifurcation_g(
    A: float,
    g_lo: float,
    g_hi: float,
    grid: GridSpec | None = None,
    tol_g: float = TOL_G,
    im_threshold: float = IM_THRESHOLD,
) -> TransitionPoint:
    """Locate the coupling where a complex pair leaves the real continuum.

    Bisects on "some eigenvalue has Im E > im_threshold" computed with the
    scaled closure of ``grid``.  E_c is read from the nascent pair on the
    broken side and k_c = sqrt(Re E_c).
    """
    if not g_lo < g_hi:
        raise ValueError("need g_lo < g_hi")
    sgrid = _scaled(grid)

    def indicator(g):
        w = upper_pair_states(A, g, sgrid, im_threshold)
        w = w[w.real > 0]
        return (w.size > 0, w)

    lo, hi = _bisect(indicator, g_lo, g_hi, tol_g)
    broken = lo if lo[1][0] else hi
    w = broken[1][1]
    # nascent pair: the one closest to the real axis
    E_c = complex(w[np.argmin(w.imag)])
    return TransitionPoint(
        g_c=0.5 * (lo[0] + hi[0]),
        kind="bifurcation",
        E_c=E_c,
        k_c=math.sqrt(E_c.real),
        A=A,
        bracket=(lo[0], hi[0]),
    )


def find_collision_g(
    A: float,
    g_lo: float,
    g_hi: float,
    grid: GridSpec | None = None,
    tol_g: float = TOL_G,
    im_threshold: float = IM_THRESHOLD,
) -> TransitionPoint:
    """Locate the coupling where a complex pair reaches the continuum bottom.

    Bisects on "a complex pair with Re E >= 0 exists".  Past this point the
    pair sits below E = 0 with a shrinking imaginary part and shortly after
    merges on the negative real axis, leaving a real bound state.
    """
    if not g_lo < g_hi:
        raise ValueError("need g_lo < g_hi")
    sgrid = _scaled(grid)

    def indicator(g):
        w = upper_pair_states(A, g, sgrid, im_threshold)
        return (bool(np.any(w.real >= 0)), w)

    lo, hi = _bisect(indicator, g_lo, g_hi, tol_g)
    present = lo if lo[1][0] else hi
    w = present[1][1]
    w = w[w.real >= 0]
    E_c = complex(w[np.argmin(w.real)])
    return TransitionPoint(
        g_c=0.5 * (lo[0] + hi[0]),
        kind="collision",
        E_c=E_c,
        k_c=0.0,
        A=A,
        bracket=(lo[0], hi[0]),
    )


# coarse grid for the bracketing walk of first_bifurcation
WALK_GRID = GridSpec(n_points=801)


def first_bifurcation(
    A: float,
    g_start: float,
    g_stop: float = 0.0,
    step: float = 0.05,
    grid: GridSpec | None = None,
    tol_g: float = TOL_G,
    walk_grid: GridSpec | None = WALK_GRID,
) -> TransitionPoint:
    """Walk g upward from ``g_start`` until a pair appears, then bisect.

    The walk runs on ``walk_grid`` (cheap; pass None to walk on ``grid``).
    The bracket it finds is widened by one step on each side before the
    bisection on ``grid``, which absorbs the discretization shift between
    the two grids.  Raises :class:`NoTransitionError` if no pair appears
    before ``g_stop``.
    """
    sgrid = _scaled(grid)
    wgrid = sgrid if walk_grid is None else _scaled(walk_grid)
    if not g_start < g_stop:
        raise ValueError("need g_start < g_stop")
    if upper_pair_states(A, g_start, sgrid).size:
        raise NoTransitionError(f"already broken at g = {g_start}")
    g_prev = g_start
    n = int(math.ceil((g_stop - g_start) / step))
    for i in range(1, n + 1):
        g = min(g_start + i * step, g_stop)
        w = upper_pair_states(A, g, wgrid)
        if np.any(w.real > 0):
            lo = max(g_start, g_prev - (step if wgrid is not sgrid else 0.0))
            hi = min(g_stop, g + (step if wgrid is not sgrid else 0.0))
            return find_bifurcation_g(A, lo, hi, grid, tol_g)
        g_prev = g
    raise NoTransitionError(f"no complex pair for g in [{g_start}, {g_stop}] at A = {A}")
