import numpy as np
import pytest

from savif import stepper_ifrk as R
from savif.errors import NonFinite, SingularStageSystem
from savif.experiments import manufactured_initial_state, manufactured_problem
from savif.sav_core import ProblemParams, discrete_energy, f_N_array, init_state
from savif.spectral import forward_array, make_grid, parseval_factor


@pytest.fixture
def problem():
    params, ms = manufactured_problem(24, beta=1.0, source="none")
    return params, manufactured_initial_state(params, ms)


@pytest.mark.parametrize("s,order", [(2, 4), (3, 6)])
def test_gauss_tableaus(s, order):
    tab = R.gauss_tableau(s)
    assert tab.s == s and tab.order == order
    assert R.check_conservation_condition(tab) <= 1e-15
    assert tab.consistency_residual() <= 1e-15
    # order conditions b.c^k = 1/(k+1) up to 2s-1
    for k in range(2 * s):
        assert tab.b @ tab.c**k == pytest.approx(1 / (k + 1), abs=1e-15)


def test_euler_violates_condition():
    assert R.check_conservation_condition(R.explicit_euler_tableau()) == pytest.approx(1.0)


def test_tableau_validation():
    with pytest.raises(ValueError):
        R.ButcherTableau([[0, 0]], [1.0], [0.0], 1)
    with pytest.raises(ValueError):
        R.gauss_tableau(4)


@pytest.mark.parametrize("s", [2, 3])
def test_energy_conserved(problem, s):
    params, state = problem
    ws = R.make_workspace(params, 0.05, R.gauss_tableau(s))
    E0 = discrete_energy(state, params)
    for _ in range(20):
        state = R.step_ifrk(state, params, ws)
    assert abs(discrete_energy(state, params) - E0) <= 1e-12 * abs(E0)


def test_stage_equations_hold(problem):
    params, state = problem
    tab = R.gauss_tableau(2)
    ws = R.make_workspace(params, 0.05, tab)
    R.step_ifrk(state, params, ws)
    st = ws.last_stages
    scale = parseval_factor(params.grid)
    # r_i = r_n + tau sum_j a_ij Re(f_j, v_j)
    P = np.array([scale * np.vdot(st["v_hat"][j], st["f_hat"][j]).real for j in range(2)])
    np.testing.assert_allclose(st["r"], state.r + ws.tau * tab.a @ P, rtol=1e-13)
    # f stages are evaluated at the predicted u
    for p, fh in zip(st["u_pred"], st["f_hat"]):
        np.testing.assert_allclose(fh, forward_array(f_N_array(p, params.grid, params.C0)), atol=1e-15)


def test_predictor_converges_and_reports_iterations(problem):
    params, state = problem
    ws = R.make_workspace(params, 0.01, R.gauss_tableau(3), max_iter=50, tol=1e-14)
    preds = R.predict_stages(state.u, state.v, params, ws)
    assert len(preds) == 3 and 1 < ws.last_iterations < 50
    ws0 = R.make_workspace(params, 0.01, R.gauss_tableau(3))
    R.predict_stages(state.u, state.v, params, ws0, beta=0.0)
    # one sweep lands on the linear flow, the next sees no change
    assert ws0.last_iterations == 2


def test_strict_flag_changes_predictor_for_focusing():
    params, ms = manufactured_problem(16, beta=-1.0, source="none")
    state = manufactured_initial_state(params, ms)
    tab = R.gauss_tableau(2)
    a = R.make_workspace(params, 0.05, tab)
    b = R.make_workspace(params, 0.05, tab, strict_paper=True)
    pa = R.predict_stages(state.u, state.v, params, a)
    pb = R.predict_stages(state.u, state.v, params, b)
    assert np.abs(pa[0].data - pb[0].data).max() > 1e-8
    # both still conserve the modified energy
    E0 = discrete_energy(state, params)
    for ws in (a, b):
        new = R.step_ifrk(state, params, ws)
        assert abs(discrete_energy(new, params) - E0) <= 1e-12 * abs(E0)


def test_euler_drifts(problem):
    params, state = problem
    ws = R.make_workspace(params, 0.05, R.explicit_euler_tableau())
    E0 = discrete_energy(state, params)
    for _ in range(20):
        state = R.step_ifrk(state, params, ws)
    assert abs(discrete_energy(state, params) - E0) > 1e-8


def test_singular_stage_system():
    g = make_grid(-4, -4, 8, 8, 16)
    params = ProblemParams(g, 1.0, -1.0, 1.0)
    state = init_state(params, lambda x, y: 2 * np.exp(-x * x - y * y), lambda x, y: 0 * x)
    midpoint = R.ButcherTableau([[0.5]], [1.0], [0.5], 2, "midpoint")
    ws = R.make_workspace(params, 0.1, midpoint)
    f_h = [forward_array(f_N_array(state.u.data, g, 1.0))]
    v_lin = [np.zeros(g.shape, complex)]
    Q = parseval_factor(g) * np.vdot(f_h[0], f_h[0]).real
    # M = 1 + tau^2 beta Q / 4 vanishes for this beta
    bad = ProblemParams(g, 1.0, -4.0 / (ws.tau**2 * Q), 1.0)
    with pytest.raises(SingularStageSystem):
        R.solve_stage_r(v_lin, f_h, state.r, bad, ws)
    assert np.isfinite(R.solve_stage_r(v_lin, f_h, state.r, params, ws)).all()


def test_blowup_is_reported():
    g = make_grid(-4, -4, 8, 8, 16)
    params = ProblemParams(g, 1.0, -1.0, 1.0)
    state = init_state(params, lambda x, y: 50 * np.exp(-x * x - y * y), lambda x, y: 0 * x)
    ws = R.make_workspace(params, 0.5, R.gauss_tableau(2), max_iter=200)
    with pytest.raises(NonFinite):
        R.step_ifrk(state, params, ws)


def test_workspace_validation(problem):
    params, _ = problem
    tab = R.gauss_tableau(2)
    for kw in (dict(tol=0.0), dict(max_iter=0)):
        with pytest.raises(ValueError):
            R.make_workspace(params, 0.1, tab, **kw)
    with pytest.raises(ValueError):
        R.make_workspace(params, -0.1, tab)
    assert R.make_workspace(params, 0.1, tab).max_iter == 6
