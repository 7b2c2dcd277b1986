import math

import numpy as np
import pytest

from ssatlas.potential import (
    LOG_SPACE_CUTOFF,
    PotentialParams,
    check_pt_symmetry,
    eval_V,
    eval_V_generic,
    eval_W,
    exact_bound_state,
    schrodinger_residual,
)

G_EXACT = -1 / (2 * math.sqrt(3))


def test_eval_W_values():
    assert eval_W(0.0, 1.5) == 1.5
    assert eval_W(0.0, 0.0) == 0.0
    # 1.5 sech(25) = 3 e^-25 / (1 + e^-50) ~ 4.17e-11
    assert eval_W(25.0, 1.5) == pytest.approx(3 * math.exp(-25) / (1 + math.exp(-50)), rel=1e-14)
    assert eval_W(25.0, 1.5) < 4.2e-11


def test_eval_V_values():
    assert eval_V(0.0, PotentialParams(g=-1.0, A=1.5)) == pytest.approx(0.75 + 0j, abs=1e-15)
    for g in (-2.0, 0.3, 1.0):
        assert eval_V(0.0, PotentialParams(g=g, A=0.7)).imag == 0.0
    x = np.linspace(-5, 5, 11)
    assert np.all(eval_V(x, PotentialParams(g=0.4, A=0.0)) == 0)


def test_generic_matches_sech():
    x = np.linspace(-12, 12, 241)
    for g, A in [(-1.0, 1.5), (0.3, 0.2), (0.0, 2.7)]:
        W = lambda t: A / np.cosh(t)
        dW = lambda t: -A * np.tanh(t) / np.cosh(t)
        diff = eval_V_generic(x, W, dW, g) - eval_V(x, PotentialParams(g=g, A=A))
        assert np.max(np.abs(diff)) < 1e-14
    assert np.all(eval_V_generic(x, lambda t: 0 * t, lambda t: 0 * t, 0.7) == 0)
    assert eval_V_generic(0.0, lambda t: 1 / np.cosh(t), lambda t: -np.tanh(t) / np.cosh(t), 0.0) == -1


def test_pt_parity_exact_on_symmetric_grid():
    x = np.linspace(0, 15, 301)
    p = PotentialParams(g=-0.7, A=1.3)
    V, Vm = eval_V(x, p), eval_V(-x, p)
    assert np.max(np.abs(V.real - Vm.real)) <= 1e-14
    assert np.max(np.abs(V.imag + Vm.imag)) <= 1e-14


def test_check_pt_symmetry():
    pts = np.linspace(-10, 10, 100)
    assert check_pt_symmetry(PotentialParams(g=-1.0, A=1.5), pts, 1e-12)
    assert check_pt_symmetry(PotentialParams(g=2.0, A=0.0), pts, 1e-12)
    shifted = lambda x: eval_V_generic(
        x, lambda t: 1 / np.cosh(t - 1), lambda t: -np.tanh(t - 1) / np.cosh(t - 1), 0.0
    )
    assert not check_pt_symmetry(shifted, pts, 1e-12)


def test_params_validation():
    with pytest.raises(ValueError):
        PotentialParams(g=0.0, A=-0.1)
    with pytest.raises(ValueError):
        PotentialParams(g=float("nan"), A=1.0)


def test_exact_state_parameters():
    st = exact_bound_state(G_EXACT)
    assert st.A == pytest.approx(1.5, abs=1e-14)
    assert st.energy == pytest.approx(-0.25, abs=1e-14)
    st = exact_bound_state(0.3)
    assert st.A == pytest.approx(1.5625, abs=1e-14)
    assert st.energy == pytest.approx(-0.31640625, abs=1e-14)


@pytest.mark.parametrize("g", [-0.45, -0.3, -0.1, 0.05, 0.2, 0.4999])
def test_exact_energy_identity(g):
    st = exact_bound_state(g)
    assert st.A > 1
    assert abs(st.energy + (st.A - 1) ** 2) < 1e-14 * max(1.0, st.A**2)


def test_exact_state_marginal_and_invalid():
    with pytest.warns(UserWarning):
        st = exact_bound_state(0.0)
    assert st.marginal and st.A == 1.0 and st.energy == 0.0
    for g in (0.5, -0.5, 0.7):
        with pytest.raises(ValueError):
            exact_bound_state(g)


def test_exact_state_residual_h2_scaling():
    st = exact_bound_state(G_EXACT)
    p = PotentialParams(g=G_EXACT, A=st.A)
    res = []
    for h in (2e-3, 1e-3):
        x = np.arange(-20, 20 + h / 2, h)
        res.append(schrodinger_residual(st.psi, st.energy, p, x, h))
    assert res[1] < 1e-5
    assert 3.5 <= res[0] / res[1] <= 4.5


def test_residual_detects_wrong_energy():
    st = exact_bound_state(G_EXACT)
    p = PotentialParams(g=G_EXACT, A=st.A)
    x = np.arange(-20, 20, 1e-3)
    assert schrodinger_residual(st.psi, st.energy + 0.1, p, x, 1e-3) > 0.01


def test_residual_plane_wave():
    x = np.arange(-10, 10, 1e-3)
    r = schrodinger_residual(lambda t: np.exp(1j * t), 1.0, PotentialParams(g=0.0, A=0.0), x, 1e-3)
    assert r < 1e-6
    with pytest.raises(ValueError):
        schrodinger_residual(lambda t: t, 0.0, PotentialParams(g=0.0, A=0.0), np.array([]), 1e-3)


def test_exact_state_decay_and_log_branch():
    st = exact_bound_state(G_EXACT)
    psi0 = abs(st.psi(0.0))
    for x in (20.0, -20.0):
        assert abs(st.psi(x)) < math.exp(-(st.A - 1) * 15) * psi0
    # continuity across the log-space switch
    for x0 in (LOG_SPACE_CUTOFF, -LOG_SPACE_CUTOFF):
        a, b = st.psi(x0 - 1e-9), st.psi(x0 + 1e-9)
        assert abs(a - b) <= 1e-6 * abs(a)
    assert np.all(np.isfinite(st.psi(np.array([-800.0, 800.0]))))
