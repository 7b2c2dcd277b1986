"""Acceptance suite: one pass/fail line per criterion.

Run under pytest (lines appear in the terminal summary) or directly with
``python tests/test_acceptance.py``.
"""

import functools
import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from oracle import coefficients as oracle_coefficients
from ssatlas.atlas import count_ss, cross_validate_transition, find_ss
from ssatlas.eigensolver import (
    GridSpec,
    classify_states,
    compute_spectrum,
    find_bifurcation_g,
    find_collision_g,
)
from ssatlas.potential import PotentialParams, exact_bound_state, schrodinger_residual
from ssatlas.scattering import integrate_transfer_matrix, scattering_coefficients

ROOT = Path(__file__).resolve().parents[1]
LINES: dict[str, str] = {}

PROPERTY_SETTINGS = settings(
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
A_S = st.floats(0.0, 3.0)
G_S = st.floats(-2.0, 1.0)
K_S = st.floats(0.1, 3.0)


def criterion(cid: str, desc: str):
    """Record a PASS/FAIL line for the wrapped test."""

    def deco(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kw):
            try:
                fn(*args, **kw)
            except BaseException as exc:
                if isinstance(exc, pytest.skip.Exception):
                    raise
                LINES[cid] = f"FAIL  {cid}: {desc}  ({type(exc).__name__}: {str(exc).splitlines()[0][:160] if str(exc) else ''})"
                print(LINES[cid])
                raise
            LINES[cid] = f"PASS  {cid}: {desc}"
            print(LINES[cid])

        return wrapper

    return deco


@functools.lru_cache(maxsize=None)
def bifurcation():
    return find_bifurcation_g(1.5, -1.0, -0.8)


@functools.lru_cache(maxsize=None)
def collision():
    return find_collision_g(1.5, -0.45, -0.3)


@functools.lru_cache(maxsize=None)
def ss_root():
    return find_ss(1.5, -0.93, 1.0)


# -- 1 ------------------------------------------------------------------------


@criterion("1", "exact bound state: E = -1/4 within 1e-3; residual < 1e-5 at h=1e-3 with h^2 scaling")
def test_c1_exact_oracle():
    g = -1 / (2 * math.sqrt(3))
    s = compute_spectrum(PotentialParams(g=g, A=1.5), GridSpec(half_width=25.0, n_points=2001))
    bound = s.eigenvalues[classify_states(s).bound]
    assert bound.size >= 1, "no bound state classified"
    E = bound[np.argmin(np.abs(bound + 0.25))]
    assert abs(E + 0.25) < 1e-3, f"E = {E}"
    stt = exact_bound_state(g)
    p = PotentialParams(g=g, A=stt.A)
    res = {}
    for h in (2e-3, 1e-3):
        x = np.arange(-20, 20 + h / 2, h)
        res[h] = schrodinger_residual(stt.psi, stt.energy, p, x, h)
    assert res[1e-3] < 1e-5, f"residual {res[1e-3]}"
    assert 3.5 <= res[2e-3] / res[1e-3] <= 4.5, f"ratio {res[2e-3] / res[1e-3]}"


# -- 2 ------------------------------------------------------------------------


@criterion("2", "first transition at A=3/2: g_c in [-0.940,-0.917], E_c = 1.038 +- 0.04, k_c = 1.019 +- 0.02")
def test_c2_bifurcation():
    tp = bifurcation()
    assert -0.940 <= tp.g_c <= -0.917, f"g_c = {tp.g_c}"
    assert abs(tp.E_c.real - 1.038) <= 0.04 and abs(tp.E_c.imag) <= 0.04, f"E_c = {tp.E_c}"
    assert abs(tp.k_c - 1.019) <= 0.02, f"k_c = {tp.k_c}"


# -- 3 ------------------------------------------------------------------------


@criterion("3", "second transition at A=3/2: g_c = -0.365 +- 0.010, bound state just above, pair just below")
def test_c3_collision():
    tp = collision()
    assert abs(tp.g_c + 0.365) <= 0.010, f"g_c = {tp.g_c}"
    grid = GridSpec(boundary="scaled")
    above = compute_spectrum(PotentialParams(g=tp.g_c + 0.02, A=1.5), grid)
    cls = classify_states(above)
    b = above.eigenvalues[cls.bound]
    assert b.size >= 1 and np.all(b.real < 0), f"bound states above: {b}"
    assert cls.complex_pair.size == 0
    below = compute_spectrum(PotentialParams(g=tp.g_c - 0.01, A=1.5), grid)
    assert classify_states(below).complex_pair.size >= 1


# -- 4 ------------------------------------------------------------------------


@criterion("4", "SS at A=3/2: g* in [-0.940,-0.917], k* = 1.019 +- 0.005, |m22| < 1e-9; T, R > 1e3 and growing toward the root")
def test_c4_ss_location():
    r = ss_root()
    assert -0.940 <= r.g_star <= -0.917, f"g* = {r.g_star}"
    assert abs(r.k_star - 1.019) <= 0.005, f"k* = {r.k_star}"
    assert r.residual < 1e-9
    c = scattering_coefficients(integrate_transfer_matrix(PotentialParams(g=r.g_star, A=1.5), r.k_star))
    assert min(c.T, c.R_left, c.R_right) > 1e3
    offsets = [1e-2, 3e-3, 1e-3, 3e-4, 1e-4]
    for dg, dk in ((1, 0), (0, 1), (-1, 0), (0, -1)):
        rows = []
        for d in offsets:
            M = integrate_transfer_matrix(
                PotentialParams(g=r.g_star + dg * d, A=1.5), r.k_star + dk * d
            )
            cc = scattering_coefficients(M)
            rows.append((cc.T, cc.R_left, cc.R_right))
        rows = np.array(rows)
        assert np.all(np.diff(rows, axis=0) > 0), f"not monotone along ({dg},{dk}): {rows}"
        assert np.all(rows[-1] > 1e3)


# -- 5 ------------------------------------------------------------------------


@criterion("5", "transition/SS correspondence at A=3/2: |g*-g_c| < 0.01, |k*-k_c| < 0.02")
def test_c5_correspondence():
    r, tp = ss_root(), bifurcation()
    assert abs(r.g_star - tp.g_c) < 0.01 and abs(r.k_star - tp.k_c) < 0.02
    rep = cross_validate_transition(1.5)
    assert rep.dg is not None and rep.dg < 0.01 and rep.dk < 0.02, f"{rep.dg}, {rep.dk}"


# -- 6 ------------------------------------------------------------------------


@criterion("6", "staircase: counts {0,1,1,2,2,3} at A=0.25..2.75 and {1,2,3} at A=1,2,3")
def test_c6_staircase():
    A = [0.25, 0.75, 1.25, 1.75, 2.25, 2.75, 1.0, 2.0, 3.0]
    expected = [0, 1, 1, 2, 2, 3, 1, 2, 3]
    got = [count_ss(a).count for a in A]
    assert got == expected, f"got {got}"


# -- 7 ------------------------------------------------------------------------


@criterion("7a", "property: det M = 1 within 1e-8 (200 draws)")
@PROPERTY_SETTINGS
@given(A=A_S, g=G_S, k=K_S)
def test_c7a_determinant(A, g, k):
    M = integrate_transfer_matrix(PotentialParams(g=g, A=A), k)
    assert abs(M.det - 1) < 1e-8, f"|det-1| = {abs(M.det - 1):.3g}, ||M|| = {M.norm:.3g}"


@criterion("7a'", "diagnostic: |det M - 1| < 1e-8 * max(1, ||M||^2) (200 draws)")
@PROPERTY_SETTINGS
@given(A=A_S, g=G_S, k=K_S)
def test_c7a_determinant_scaled(A, g, k):
    M = integrate_transfer_matrix(PotentialParams(g=g, A=A), k)
    assert abs(M.det - 1) < 1e-8 * max(1.0, M.norm**2)


@criterion("7b", "property: |m11 - conj(m22)| < 1e-8 ||M|| (200 draws)")
@PROPERTY_SETTINGS
@given(A=A_S, g=G_S, k=K_S)
def test_c7b_pt_constraint(A, g, k):
    M = integrate_transfer_matrix(PotentialParams(g=g, A=A), k)
    assert M.pt_defect < 1e-8 * M.norm


@criterion("7c", "property: spectrum closed under conjugation within 1e-6 * spectral radius (200 draws)")
@PROPERTY_SETTINGS
@given(A=A_S, g=G_S)
def test_c7c_conjugation(A, g):
    w = compute_spectrum(PotentialParams(g=g, A=A), GridSpec(n_points=401)).eigenvalues
    rho = np.max(np.abs(w))
    gap = max(np.min(np.abs(w - np.conj(x))) for x in w)
    assert gap < 1e-6 * rho, f"gap {gap:.3g}, rho {rho:.3g}"


@criterion("7d", "property: A=0 gives identity M and the discrete-Laplacian spectrum within 1e-10")
@PROPERTY_SETTINGS
@given(g=G_S, k=K_S, n=st.integers(101, 801))
def test_c7d_free(g, k, n):
    M = integrate_transfer_matrix(PotentialParams(g=g, A=0.0), k)
    assert np.max(np.abs(M.matrix - np.eye(2))) < 1e-10
    grid = GridSpec(n_points=n)
    w = np.sort(compute_spectrum(PotentialParams(g=g, A=0.0), grid).eigenvalues)
    m = n - 2
    j = np.arange(1, m + 1)
    exact = np.sort(2 * (1 - np.cos(j * np.pi / (m + 1))) / grid.h**2)
    assert np.max(np.abs(w - exact) / exact) < 1e-10


@criterion("7e", "property: coefficients match the fixed-step oracle within 1e-6 relative (20 samples)")
def test_c7e_oracle():
    rng = np.random.default_rng(20261016)
    A = rng.uniform(0, 3, 20)
    g = rng.uniform(-2, 1, 20)
    k = rng.uniform(0.1, 3, 20)
    T, Rl, Rr = oracle_coefficients(g, A, k)
    for i in range(20):
        c = scattering_coefficients(integrate_transfer_matrix(PotentialParams(g=g[i], A=A[i]), k[i]))
        for name, ours, ref in (("T", c.T, T[i]), ("R_left", c.R_left, Rl[i]), ("R_right", c.R_right, Rr[i])):
            scale = max(abs(ref), 1e-12 * max(T[i], Rl[i], Rr[i]))
            assert abs(ours - ref) <= 1e-6 * scale, f"{name} at A={A[i]:.3f} g={g[i]:.3f} k={k[i]:.3f}: {ours} vs {ref}"


# -- 8 ------------------------------------------------------------------------

REPRODUCE = sorted((ROOT / "reproduce").glob("*.json"))
def _cli(config: Path, out: Path) -> bytes:
    """Raw bytes of the warnings and payload section of one CLI run."""
    r = subprocess.run(
        [sys.executable, "-m", "ssatlas", "--config", str(config), "--output", str(out)],
        capture_output=True,
    )
    assert r.returncode == 0, r.stderr.decode()
    raw = out.read_bytes()
    # config echo (output path) and wall time legitimately differ between runs
    return raw[raw.index(b'"warnings": '):]


@criterion("8", "determinism: repeated CLI runs of reproduce/ configs give byte-identical payloads")
def test_c8_determinism(tmp_path):
    names = {p.stem for p in REPRODUCE}
    for fig in ("fig1a", "fig2a", "fig2b", "fig3a", "fig3b"):
        assert any(n.startswith(fig) for n in names), f"missing reproduce config for {fig}"
    for cfg in REPRODUCE:
        a = _cli(cfg, tmp_path / f"{cfg.stem}_1.json")
        b = _cli(cfg, tmp_path / f"{cfg.stem}_2.json")
        assert a == b, f"{cfg.name} differs between runs"
        if cfg.stem.startswith("fig1a"):
            _check_fig1(json.loads(b"{" + a))


def _check_fig1(env):
    # qualitative Fig. 1(b): Re E of the pair positive and continuous between the transitions
    rows = [r for r in env["payload"]["rows"] if -0.92 <= r["g"] <= -0.37]
    re = np.array([r["re_E_pair"] for r in rows])
    assert np.all(re > 0)
    assert np.all(np.diff(re) < 0)
    assert np.max(np.abs(np.diff(re))) < 0.15


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
