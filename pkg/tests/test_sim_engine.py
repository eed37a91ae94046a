import math

import numpy as np
import pytest

from speccl.acceptance import rk4_order_ratio
from speccl.config import scenario_config
from speccl.simulate import (
    ScenarioConfig,
    decompose_error,
    excitation_diagnostic,
    lyapunov_value,
    rk4_step,
    run_scenario,
)
from speccl.spectral import symmetric_eigensystem

THETA_FO = np.array([1.0, 2.0, -1.0])


def test_rk4_exponential_decay():
    y = np.array([1.0])
    out = rk4_step(lambda t, s: -s, y, 0.0, 0.1)
    assert abs(out[0] - math.exp(-0.1)) < 1e-7
    assert out[0] == pytest.approx(0.90483742, abs=1e-7)


def test_rk4_polynomial_exactness():
    y = np.array([2.0])
    assert rk4_step(lambda t, s: np.zeros(1), y, 0.0, 0.1)[0] == 2.0
    assert rk4_step(lambda t, s: np.ones(1), y, 0.0, 0.1)[0] == pytest.approx(2.1, abs=1e-15)


def test_rk4_order():
    assert 12.0 <= rk4_order_ratio() <= 20.0


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_rk4_rejects_bad_step_and_nonfinite():
    with pytest.raises(ValueError):
        rk4_step(lambda t, s: s, np.ones(1), 0.0, 0.0)
    from speccl.simulate import DivergenceError

    with pytest.raises(DivergenceError):
        rk4_step(lambda t, s: s / 0.0, np.ones(1), 0.0, 0.1)


def test_decompose_error_examples():
    spec = symmetric_eigensystem(np.diag([0.0, 0.0, 2.0]))
    # rotate so the nullspace is span{[1,-1,0]}
    d = np.array([1.0, -1.0, 0.0]) / np.sqrt(2.0)
    W = 5.0 * (np.eye(3) - np.outer(d, d))
    spec = symmetric_eigensystem(W, require_psd=True)
    excited, unexcited = decompose_error([0.5, 1.5, -1.5], spec)
    np.testing.assert_allclose(unexcited, [-0.5, 0.5, 0.0], atol=1e-12)
    np.testing.assert_allclose(excited, [1.0, 1.0, -1.5], atol=1e-12)
    assert abs(excited @ unexcited) <= 1e-10

    full = symmetric_eigensystem(np.eye(3))
    excited, unexcited = decompose_error([1.0, 2.0, 3.0], full)
    np.testing.assert_allclose(unexcited, np.zeros(3), atol=0)

    empty = symmetric_eigensystem(np.zeros((3, 3)))
    excited, unexcited = decompose_error([1.0, 2.0, 3.0], empty)
    np.testing.assert_allclose(excited, np.zeros(3), atol=0)


def test_lyapunov_value():
    assert lyapunov_value("va", np.zeros(3), np.zeros(3), 0.05) == 0.0
    assert lyapunov_value("vkappa", [1.0, 0.0, 0.0], np.zeros(3), 0.05) == 0.5
    # initial value of the insufficient-excitation benchmark
    v = lyapunov_value("vkappa", [4.0, 4.0, -3.0], [1.0, 1.0, -1.5], 0.05)
    assert v == pytest.approx(63.0, abs=1e-12)
    with pytest.raises(ValueError):
        lyapunov_value("bogus", np.zeros(3), np.zeros(3), 0.05)
    with pytest.raises(ValueError):
        lyapunov_value("va", np.zeros(3), np.zeros(3), -1.0)


def test_zero_horizon_run():
    cfg = scenario_config("fo_sufficient", overrides=["horizon=0.001", "x0=[0,0,0]"])
    log = run_scenario(cfg)
    assert len(log) == 2
    assert log.rank_events == []
    assert log.t[0] == 0.0 and log.t[1] == pytest.approx(0.001)

    # with a nonzero start the single step already collects excitation
    cfg = scenario_config("fo_sufficient", overrides=["horizon=0.001"])
    log = run_scenario(cfg)
    assert len(log) == 2
    assert log.rank[-1] > 0


def test_scenario_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(name="x", plant="nope", law="spectral_cl",
                       x0=np.zeros(3), theta_hat0=np.zeros(3))
    with pytest.raises(ValueError):
        ScenarioConfig(name="x", plant="fo_benchmark", law="spectral_cl",
                       x0=np.zeros(2), theta_hat0=np.zeros(3))
    with pytest.raises(ValueError):
        ScenarioConfig(name="x", plant="fo_benchmark", law="spectral_cl",
                       x0=np.zeros(3), theta_hat0=np.zeros(3), sigma_min=10.0,
                       sigma_max=5.0)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
def test_divergence_guard():
    # gains far beyond the fixed-step stability limit blow the loop up
    cfg = scenario_config("fo_sufficient", overrides=["k1=100000", "horizon=0.05"])
    log = run_scenario(cfg)
    assert log.status == "diverged"
    assert len(log) >= 1  # partial log retained


def test_run_scenario_against_benchmarks(fo_sufficient_log, fo_insufficient_log):
    # terminal behavior of the two first-order cases
    assert np.abs(fo_sufficient_log.theta_hat[-1] - THETA_FO).max() <= 0.05
    assert np.linalg.norm(fo_sufficient_log.x[-1]) <= 1e-3
    assert np.abs(
        fo_insufficient_log.theta_hat[-1] - np.array([1.5, 1.5, -1.0])
    ).max() <= 0.05
    # the supremum of the collected rank stays below the parameter count
    assert fo_insufficient_log.rank[-1] == 2
    assert fo_sufficient_log.rank[-1] == 3


def test_log_monotonicity_and_consistency(fo_sufficient_log, fo_insufficient_log):
    for log in (fo_sufficient_log, fo_insufficient_log):
        assert np.all(np.diff(log.t) > 0)
        assert np.all(np.diff(log.rank) >= 0)
        resid = np.abs(log.Z - np.einsum("kij,j->ki", log.W, THETA_FO)).max()
        assert resid <= 1e-5
        for t_i, new_rank in log.rank_events:
            assert 0.0 < t_i <= log.t[-1]
        ranks = [r for _, r in log.rank_events]
        assert ranks == sorted(ranks)


def test_unexcited_projection_constant(fo_insufficient_log):
    # the projection of the estimation error onto the final-time nullspace
    # never moves
    log = fo_insufficient_log
    E0 = log.final_spectrum().zero_projector()
    proj = log.theta_tilde @ E0.T
    drift = np.abs(proj - proj[0]).max()
    assert drift <= 1e-6


def test_excitation_diagnostic_zero_regressor():
    cfg = scenario_config("fo_sufficient", overrides=["horizon=0.5", "x0=[0,0,0]"])
    log = run_scenario(cfg)
    rep = excitation_diagnostic(log, tau_d=0.1, rho=1e-12)
    assert not rep.pe and not rep.se
    assert rep.ie_interval is None


def test_excitation_diagnostic_benchmarks(fo_sufficient_log, fo_insufficient_log):
    rep = excitation_diagnostic(fo_sufficient_log, tau_d=2.0, rho=0.1)
    assert rep.se
    assert rep.ie_interval is not None
    # the insufficient case has a rank-2 history Gram for every threshold
    rep = excitation_diagnostic(fo_insufficient_log, tau_d=2.0, rho=1e-9)
    assert not rep.se
    assert rep.lambda_min_total <= 1e-12
