import numpy as np
import pytest

from speccl.collector import (
    CollectorState,
    ForgettingConfig,
    _sym_eigmax,
    collector_rhs,
    forgetting_factor,
    saturation,
    varpi,
    z_substitution_step,
)
from speccl.config import scenario_config
from speccl.plants import fo_benchmark
import speccl.simulate as sim

CFG = ForgettingConfig(sigma_min=5.0, sigma_max=10.0)


def test_saturation():
    assert saturation(-2.0) == -1.0
    assert saturation(0.3) == 0.3
    assert saturation(1.0) == 1.0


def test_forgetting_config_derived_constants():
    assert CFG.mu == 7.5
    assert CFG.omega == 2.5
    with pytest.raises(ValueError):
        ForgettingConfig(sigma_min=5.0, sigma_max=3.0)


def test_forgetting_factor_branches():
    assert forgetting_factor(3.0, 4.0, CFG) == 0.0
    # midpoint of the ramp: sat = 0 -> rho = lam_max / (2 lam)
    assert forgetting_factor(7.5, 6.0, CFG) == pytest.approx(0.4, abs=1e-15)
    # ceiling: rho * lam equals the current excitation strength
    rho = forgetting_factor(10.0, 6.0, CFG)
    assert rho == pytest.approx(0.6, abs=1e-15)
    assert rho * 10.0 == pytest.approx(6.0, abs=1e-15)


def test_varpi_trivial_cases():
    phi = np.zeros((3, 3))
    assert np.all(varpi(phi, np.ones(3), np.zeros(3), np.zeros(3)) == 0.0)
    phi = np.arange(9.0).reshape(3, 3)
    drift = np.array([1.0, 2.0, 3.0])
    u = np.array([0.5, 0.5, 0.5])
    np.testing.assert_allclose(varpi(phi, drift + u, drift, u), np.zeros(3), atol=0)


def test_varpi_benchmark_value():
    # hand evaluation of phi phi^T theta at x = [3, 5, -3], theta = [1, 2, -1]
    plant = fo_benchmark()
    x = np.array([3.0, 5.0, -3.0])
    phi = plant.regressor(x)
    xdot = plant.drift(x) + phi.T @ plant.true_theta  # u = 0
    out = varpi(phi, xdot, plant.drift(x), np.zeros(3))
    np.testing.assert_allclose(out, [94.0, 98.0, -81.0], atol=1e-12)


def test_varpi_dimension_errors():
    with pytest.raises(ValueError):
        varpi(np.zeros((3, 2)), np.zeros(3), np.zeros(3), np.zeros(3))
    with pytest.raises(ValueError):
        varpi(np.zeros((3, 3)), np.zeros(3), np.zeros(2), np.zeros(3))


def test_collector_rhs_empty_collector():
    state = CollectorState.zeros(3, tol_zero=1e-8)
    phi = fo_benchmark().regressor(np.array([3.0, 5.0, -3.0]))
    w = np.array([94.0, 98.0, -81.0])
    Zdot, Wdot = collector_rhs(state, phi, w, CFG)
    np.testing.assert_allclose(Zdot, w, atol=0)
    np.testing.assert_allclose(Wdot, phi @ phi.T, atol=0)


def test_collector_rhs_saturated_direction_nonincreasing():
    # a fully saturated direction aligned with the regressor cannot grow
    e1 = np.array([1.0, 0.0, 0.0])
    state = CollectorState(Z=np.zeros(3), W=10.0 * np.outer(e1, e1))
    state.refresh_spectrum(tol_zero=1e-8)
    phi = np.outer(e1, np.array([2.0, 1.0, 0.0]))  # range in span{e1}
    _, Wdot = collector_rhs(state, phi, np.zeros(3), CFG)
    assert np.linalg.eigvalsh(Wdot).max() <= 1e-12


def test_collector_rhs_forgetting_gated_by_excitation():
    state = CollectorState(Z=np.zeros(3), W=np.diag([6.0, 0.0, 0.0]))
    state.refresh_spectrum(tol_zero=1e-8)
    _, Wdot = collector_rhs(state, np.zeros((3, 3)), np.zeros(3), CFG)
    np.testing.assert_allclose(Wdot, np.zeros((3, 3)), atol=0)


def test_substitution_step_trivial():
    acc = np.array([1.0, 2.0, 3.0])
    phi = np.arange(9.0).reshape(3, 3)
    out = z_substitution_step(acc, phi, phi, np.ones(3), np.ones(3),
                              np.zeros(3), np.zeros(3), dt=0.1)
    np.testing.assert_allclose(out, acc, atol=0)


def test_substitution_step_constant_regressor():
    phi = np.arange(9.0).reshape(3, 3)
    dx = np.array([0.1, -0.2, 0.3])
    out = z_substitution_step(np.zeros(3), phi, phi, np.zeros(3), dx,
                              np.zeros(3), np.zeros(3), dt=0.05)
    np.testing.assert_allclose(out, phi @ dx, atol=1e-15)


def test_substitution_step_rejects_bad_dt():
    with pytest.raises(ValueError):
        z_substitution_step(np.zeros(3), np.zeros((3, 3)), np.zeros((3, 3)),
                            np.zeros(3), np.zeros(3), np.zeros(3), np.zeros(3), dt=0.0)


def test_substitution_matches_derivative_integral_on_segment():
    # oracle: trapezoid accumulation of the exact varpi along an integrated
    # segment of the sufficient-excitation benchmark
    cfg = scenario_config("fo_sufficient")
    model = sim._make_model(cfg)
    s = model.initial_state()
    t, dt = 0.0, cfg.dt
    acc_exact = np.zeros(3)
    acc_sub = np.zeros(3)
    phi_p, f_p, u_p, x_p = model.endpoint(t, s)
    w_p = phi_p @ (model.rhs(t, s)[:3] - f_p - u_p)
    for _ in range(1000):  # one second
        s = sim.rk4_step(model.rhs, s, t, dt)
        t += dt
        phi_n, f_n, u_n, x_n = model.endpoint(t, s)
        w_n = phi_n @ (model.rhs(t, s)[:3] - f_n - u_n)
        acc_exact += 0.5 * (w_p + w_n) * dt
        acc_sub = z_substitution_step(acc_sub, phi_p, phi_n, x_p, x_n,
                                      f_p, u_p, dt, drift_next=f_n, u_next=u_n)
        phi_p, f_p, u_p, x_p, w_p = phi_n, f_n, u_n, x_n, w_n
    rel = np.abs(acc_sub - acc_exact).max() / np.abs(acc_exact).max()
    assert rel <= 1e-4


def test_sym_eigmax_matches_lapack():
    rng = np.random.default_rng(3)
    for _ in range(500):
        m = int(rng.integers(1, 4))
        A = rng.normal(size=(m, m))
        A = A @ A.T
        ref = np.linalg.eigvalsh(A)[-1]
        assert _sym_eigmax(A) == pytest.approx(ref, rel=1e-10, abs=1e-12)


def test_collector_state_invariants_on_trajectory(fo_sufficient_log):
    log = fo_sufficient_log
    # W stays symmetric and its eigenvalues stay within the configured band
    for k in range(0, len(log), 500):
        W = log.W[k]
        assert np.abs(W - W.T).max() <= 1e-8
    assert log.eigs.min() >= -log.config.zero_threshold
    assert log.eigs.max() <= log.config.sigma_max * (1.0 + 1e-3)
    assert np.all(np.diff(log.rank) >= 0)
    assert log.rank[0] == 0 and np.all(log.Z[0] == 0.0) and np.all(log.W[0] == 0.0)
