"""Spectral singularities: real zeros of m22(g, k) and their count versus A.

A spectral singularity is a point (g*, k*) with k* > 0 where m22 vanishes,
so T, R_left and R_right all diverge.  Because m11 = conj(m22) for these
potentials the time-reversed singularity sits at the same point.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .eigensolver import GridSpec, TransitionPoint, first_bifurcation
from .errors import NoTransitionError, NumericalError
from .potential import PotentialParams
from .scattering import DEFAULT_L, K_MIN, integrate_transfer_matrix, m22_batch

logger = logging.getLogger(__name__)

ROOT_TOL = 1e-9
NEWTON_RTOL = 1e-12
FD_STEP = 1e-6
MAX_HALVINGS = 8
DEDUP_RADIUS = 1e-4
SCAN_RTOL = 1e-8
SEED_THRESHOLD = 0.9
G_BOUND = 50.0
# distance from a staircase step within which counts are flagged
STEP_MARGIN = 0.05


class SSNotFound(NumericalError):
    """Newton iteration for a zero of m22 did not converge."""


@dataclass(frozen=True)
class SSRoot:
    """One spectral singularity at amplitude A."""

    g_star: float
    k_star: float
    residual: float
    A: float
    newton_iterations: int
    m11_abs: float = 0.0
    norm: float = 1.0
    det_defect: float = 0.0


@dataclass(frozen=True)
class Window:
    """Rectangular (g, k) search window."""

    g_lo: float
    g_hi: float
    k_lo: float
    k_hi: float

    def __post_init__(self) -> None:
        if not (self.g_lo < self.g_hi and self.k_lo < self.k_hi):
            raise ValueError(f"ill-ordered window {self}")
        if self.k_lo < K_MIN:
            raise ValueError(f"k_lo must be >= {K_MIN}")

    @classmethod
    def default(cls, A: float) -> "Window":
        return cls(-(A + 2.0), 0.0, 0.05, A + 2.0)

    def contains(self, g: float, k: float) -> bool:
        return self.g_lo <= g <= self.g_hi and self.k_lo <= k <= self.k_hi


@dataclass
class SSAtlas:
    """All singularities found at one amplitude, with the staircase count."""

    A: float
    roots: list[SSRoot]
    predicted_count: int
    window: Window
    warnings: list[str] = field(default_factory=list)

    @property
    def count(self) -> int:
        return len(self.roots)


def predicted_count(A: float) -> int:
    """Staircase law: 0 below A = 1/2, else n + 1 on [n + 1/2, n + 3/2)."""
    if not math.isfinite(A) or A < 0:
        raise ValueError(f"A must be finite and >= 0, got {A!r}")
    return int(math.floor(A + 0.5))


def _m22_components(A: float, pts, rel_tol: float) -> np.ndarray:
    pts = np.asarray(pts, dtype=float)
    return m22_batch(PotentialParams(0.0, A), pts[:, 0], pts[:, 1], DEFAULT_L, rel_tol)


def find_ss(
    A: float,
    g0: float,
    k0: float,
    tol: float = ROOT_TOL,
    max_iter: int = 50,
    rel_tol: float = NEWTON_RTOL,
) -> SSRoot:
    """Damped Newton iteration on (Re m22, Im m22) = 0 from the seed (g0, k0).

    The Jacobian is a forward difference with steps of ``FD_STEP``; a step
    that does not reduce |m22| is halved up to ``MAX_HALVINGS`` times.
    Raises :class:`SSNotFound` on divergence, a singular Jacobian, or k
    drifting below the small-k guard.
    """
    if k0 < K_MIN:
        raise ValueError(f"seed k0 = {k0} below guard {K_MIN}")
    g, k = float(g0), float(k0)
    f = _m22_components(A, [(g, k)], rel_tol)[0]
    for it in range(max_iter + 1):
        if abs(f) < tol:
            return _finalize(A, g, k, it, rel_tol)
        if it == max_iter:
            break
        vals = _m22_components(A, [(g, k), (g + FD_STEP, k), (g, k + FD_STEP)], rel_tol)
        f = vals[0]
        J = np.array(
            [
                [(vals[1] - f).real, (vals[2] - f).real],
                [(vals[1] - f).imag, (vals[2] - f).imag],
            ]
        ) / FD_STEP
        rhs = -np.array([f.real, f.imag])
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError as exc:
            raise SSNotFound(f"singular Jacobian at g={g}, k={k}") from exc
        if not np.all(np.isfinite(step)) or np.hypot(*step) < 1e-14:
            raise SSNotFound(f"Newton step vanished without convergence at g={g}, k={k}")
        lam = 1.0
        for _ in range(MAX_HALVINGS + 1):
            gt, kt = g + lam * step[0], k + lam * step[1]
            if kt < K_MIN:
                lam *= 0.5
                continue
            ft = _m22_components(A, [(gt, kt)], rel_tol)[0]
            if abs(ft) < abs(f):
                break
            lam *= 0.5
        if kt < K_MIN:
            raise SSNotFound(f"k drifted below guard {K_MIN}")
        g, k, f = gt, kt, ft
        if abs(g) > G_BOUND:
            raise SSNotFound(f"g diverged to {g}")
    raise SSNotFound(f"no convergence in {max_iter} iterations from ({g0}, {k0})")


def _finalize(A: float, g: float, k: float, iterations: int, rel_tol: float) -> SSRoot:
    M = integrate_transfer_matrix(PotentialParams(g, A), k, DEFAULT_L, rel_tol)
    return SSRoot(
        g_star=float(g),
        k_star=float(k),
        residual=float(abs(M.m22)),
        A=float(A),
        newton_iterations=iterations,
        m11_abs=float(abs(M.m11)),
        norm=M.norm,
        det_defect=float(abs(M.m12 * M.m21 + 1.0)),
    )


def _dedupe(roots: Sequence[SSRoot], radius: float = DEDUP_RADIUS) -> list[SSRoot]:
    kept: list[SSRoot] = []
    for r in sorted(roots, key=lambda r: r.residual):
        if all(math.hypot(r.g_star - q.g_star, r.k_star - q.k_star) >= radius for q in kept):
            kept.append(r)
    return sorted(kept, key=lambda r: r.g_star)


def scan_grid(A: float, window: Window, coarse_n: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """|m22| on a coarse_n x coarse_n grid covering ``window``."""
    G = np.linspace(window.g_lo, window.g_hi, coarse_n)
    K = np.linspace(window.k_lo, window.k_hi, coarse_n)
    GG, KK = np.meshgrid(G, K, indexing="ij")
    Z = np.abs(m22_batch(PotentialParams(0.0, A), GG, KK, DEFAULT_L, SCAN_RTOL))
    return G, K, Z


def _local_minima(Z: np.ndarray, threshold: float) -> list[tuple[int, int]]:
    n, m = Z.shape
    out = []
    for i in range(n):
        for j in range(m):
            z = Z[i, j]
            if not z < threshold:
                continue
            nb = Z[max(i - 1, 0) : i + 2, max(j - 1, 0) : j + 2]
            # strict: unique minimum of its neighbourhood
            if z <= nb.min() and np.count_nonzero(nb == z) == 1:
                out.append((i, j))
    return sorted(out, key=lambda ij: Z[ij])


def scan_ss(
    A: float,
    g_range: tuple[float, float] | None = None,
    k_range: tuple[float, float] | None = None,
    coarse_n: int = 24,
    seed_threshold: float = SEED_THRESHOLD,
    extra_seeds: Sequence[tuple[float, float]] = (),
) -> list[SSRoot]:
    """Find every zero of m22 in the rectangle ``g_range`` x ``k_range``.

    Seeds Newton from each strict local minimum of |m22| on the coarse grid
    that lies below ``seed_threshold`` (plus any ``extra_seeds``), keeps
    converged roots inside the rectangle and removes duplicates closer than
    ``DEDUP_RADIUS``.  Ranges default to the window of :meth:`Window.default`.
    """
    d = Window.default(A)
    window = Window(*(g_range or (d.g_lo, d.g_hi)), *(k_range or (d.k_lo, d.k_hi)))
    return _scan(A, window, coarse_n, seed_threshold, extra_seeds)


def _scan(
    A: float,
    window: Window,
    coarse_n: int,
    seed_threshold: float = SEED_THRESHOLD,
    extra_seeds: Sequence[tuple[float, float]] = (),
) -> list[SSRoot]:
    if coarse_n < 16:
        raise ValueError("coarse_n must be >= 16")
    roots: list[SSRoot] = []
    if A == 0.0:
        # m22 is identically 1
        return roots
    G, K, Z = scan_grid(A, window, coarse_n)
    seeds = [(G[i], K[j]) for i, j in _local_minima(Z, seed_threshold)]
    seeds += list(extra_seeds)
    for g0, k0 in seeds:
        if any(math.hypot(g0 - r.g_star, k0 - r.k_star) < DEDUP_RADIUS for r in roots):
            continue
        try:
            r = find_ss(A, g0, k0)
        except SSNotFound as exc:
            logger.debug("seed (%.4f, %.4f) at A=%g discarded: %s", g0, k0, A, exc)
            continue
        if window.contains(r.g_star, r.k_star):
            roots.append(r)
    return _dedupe(roots)


def count_ss(
    A: float, window: Window | None = None, coarse_n: int = 24, diagnostics: bool = False
) -> SSAtlas:
    """Scan for singularities at one A and compare with the staircase law.

    With ``diagnostics`` the window is extended to g = +0.5 and any root with
    g* > 0 is reported as a warning (and excluded from the count).
    """
    pc = predicted_count(A)
    window = window or Window.default(A)
    scan_win = replace(window, g_hi=max(window.g_hi, 0.5)) if diagnostics else window
    roots = _scan(A, scan_win, coarse_n)
    atlas = SSAtlas(A=A, roots=roots, predicted_count=pc, window=window)
    if diagnostics:
        for r in roots:
            if r.g_star > window.g_hi:
                atlas.warnings.append(f"root outside window at g*={r.g_star:.6g}, k*={r.k_star:.6g}")
        atlas.roots = [r for r in roots if window.contains(r.g_star, r.k_star)]
    if abs(A - (math.floor(A) + 0.5)) <= STEP_MARGIN + 1e-9:
        atlas.warnings.append(f"A={A} is near a staircase step; count may be off by one")
    if atlas.count != atlas.predicted_count:
        atlas.warnings.append(f"found {atlas.count} roots, staircase predicts {atlas.predicted_count}")
    return atlas


@dataclass(frozen=True)
class CurvePoint:
    A: float
    roots: tuple[SSRoot, ...]

    @property
    def g_stars(self) -> list[float]:
        return [r.g_star for r in self.roots]


def trace_gc_curve(
    A_values: Sequence[float],
    window: Window | None = None,
    coarse_n: int = 24,
    warm_start: bool = True,
) -> list[CurvePoint]:
    """Singularity couplings g* for each A, in input order.

    With ``warm_start`` the roots of the previous A seed Newton directly; a
    branch that fails to continue is looked for again by a fine local scan
    before it is dropped.  A full scan always runs too, so branches born
    between samples are picked up.
    """
    if len(A_values) == 0:
        raise ValueError("A_values must be nonempty")
    out: list[CurvePoint] = []
    prev: list[SSRoot] = []
    for A in A_values:
        if A < 0:
            raise ValueError("A must be >= 0")
        win = window or Window.default(A)
        continued: list[SSRoot] = []
        if warm_start:
            for r in prev:
                try:
                    cand = find_ss(A, r.g_star, r.k_star)
                    if win.contains(cand.g_star, cand.k_star):
                        continued.append(cand)
                        continue
                except SSNotFound:
                    pass
                continued.extend(_rescan_near(A, r, win))
        scanned = _scan(A, win, coarse_n, extra_seeds=[(r.g_star, r.k_star) for r in continued])
        roots = _dedupe(continued + scanned)
        out.append(CurvePoint(A=float(A), roots=tuple(roots)))
        prev = roots
    return out


def _rescan_near(A: float, r: SSRoot, win: Window) -> list[SSRoot]:
    dg, dk = 0.25, 0.25
    local = Window(
        max(win.g_lo, r.g_star - dg),
        min(win.g_hi, r.g_star + dg),
        max(win.k_lo, r.k_star - dk),
        min(win.k_hi, r.k_star + dk),
    )
    found = _scan(A, local, coarse_n=16)
    if not found:
        logger.info("branch at g*=%.4f terminated before A=%g", r.g_star, A)
    return found


@dataclass(frozen=True)
class CrossValidation:
    """Singularity side versus eigenvalue side at one A."""

    A: float
    ss_roots: tuple[SSRoot, ...]
    transition: TransitionPoint | None
    dg: float | None
    dk: float | None

    @property
    def both_absent(self) -> bool:
        return not self.ss_roots and self.transition is None

    @property
    def consistent(self) -> bool:
        return self.both_absent or (self.dg is not None and bool(self.ss_roots) and self.transition is not None)


def cross_validate_transition(
    A: float,
    grid: GridSpec | None = None,
    window: Window | None = None,
    walk_step: float = 0.05,
) -> CrossValidation:
    """Compare the most negative g* with the first bifurcation found by
    walking the eigenvalue problem upward in g from the window's lower edge.
    """
    window = window or Window.default(A)
    roots = tuple(_scan(A, window, 24))
    try:
        tp = first_bifurcation(A, window.g_lo, window.g_hi, step=walk_step, grid=grid)
    except NoTransitionError:
        tp = None
    dg = dk = None
    if roots and tp is not None:
        first = roots[0]
        dg = abs(first.g_star - tp.g_c)
        dk = abs(first.k_star - tp.k_c)
    return CrossValidation(A=A, ss_roots=roots, transition=tp, dg=dg, dk=dk)
