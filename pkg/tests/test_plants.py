import math

import numpy as np
import pytest

from speccl.plants import (
    ReferenceSignal,
    bs_benchmark,
    first_order_dynamics,
    fo_benchmark,
    sine_reference,
    stacked_regressor,
    strict_feedback_dynamics,
)


def test_first_order_benchmark_dynamics():
    plant = fo_benchmark()
    x = np.array([3.0, 5.0, -3.0])
    xdot = first_order_dynamics(plant, x, np.zeros(3))
    np.testing.assert_allclose(xdot, [14.0, 18.0, math.sin(-3.0) - 9.0], atol=1e-12)


def test_first_order_equilibrium_and_cancellation():
    plant = fo_benchmark()
    np.testing.assert_allclose(
        first_order_dynamics(plant, np.zeros(3), np.zeros(3)), np.zeros(3), atol=0
    )
    x = np.array([0.7, -1.2, 2.0])
    u = -plant.drift(x) - plant.regressor(x).T @ plant.true_theta
    np.testing.assert_allclose(first_order_dynamics(plant, x, u), np.zeros(3), atol=1e-15)


def test_strict_feedback_benchmark_dynamics():
    plant = bs_benchmark()
    np.testing.assert_allclose(
        strict_feedback_dynamics(plant, np.array([1.0, 0.0]), 0.0), [2.0, 0.0], atol=0
    )
    np.testing.assert_allclose(
        strict_feedback_dynamics(plant, np.zeros(2), 0.0), [0.0, 0.0], atol=0
    )
    np.testing.assert_allclose(
        strict_feedback_dynamics(plant, np.array([0.0, 1.0]), 0.0), [1.0, 2.0], atol=0
    )


def test_stacked_regressor():
    plant = bs_benchmark()
    F0, Phi = stacked_regressor(plant, np.array([1.0, 0.0]))
    np.testing.assert_allclose(Phi, [[1.0, 0.0], [1.0, 0.0], [0.0, 0.0]], atol=0)
    np.testing.assert_allclose(F0, [0.0, 0.0], atol=0)
    _, Phi = stacked_regressor(plant, np.zeros(2))
    assert np.all(Phi == 0.0)
    _, Phi = stacked_regressor(plant, np.array([1.0, 1.0]))
    np.testing.assert_allclose(Phi, [[1.0, 1.0], [1.0, 1.0], [0.0, 1.0]], atol=0)


def test_triangular_structure():
    # stage-1 maps must not see x2
    plant = bs_benchmark()
    a = np.asarray(plant.regressors[0]([1.3]), dtype=float)
    for x2 in (-5.0, 0.0, 7.0):
        F0, Phi = stacked_regressor(plant, np.array([1.3, x2]))
        np.testing.assert_array_equal(Phi[:, 0], a)


def test_symmetry_preservation(fo_insufficient_log):
    # starting on the x1 = x2 diagonal keeps the closed loop on it
    log = fo_insufficient_log
    assert np.abs(log.x[:, 0] - log.x[:, 1]).max() <= 1e-9


def test_reference_signal():
    ref = sine_reference(2)
    vals = ref(0.0)
    np.testing.assert_allclose(vals, [0.0, 1.0, 0.0], atol=1e-15)
    vals = ref(math.pi / 2.0)
    np.testing.assert_allclose(vals, [1.0, 0.0, -1.0], atol=1e-12)

    bad = ReferenceSignal(order=2, fn=lambda t: np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        bad(0.0)


def test_non_finite_dynamics_raise():
    plant = fo_benchmark()
    with pytest.raises(FloatingPointError):
        first_order_dynamics(plant, np.array([np.inf, 0.0, 0.0]), np.zeros(3))
