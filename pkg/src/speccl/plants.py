"""Uncertain benchmark plants driving the collector and controllers.

Two built-in instances ship with the package: a three-state first-order
system with a rank-deficient regressor on the diagonal x1 = x2, and a
two-state strict-feedback system with unmatched parametric uncertainty.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "FirstOrderPlant",
    "StrictFeedbackPlant",
    "ReferenceSignal",
    "first_order_dynamics",
    "strict_feedback_dynamics",
    "stacked_regressor",
    "fo_benchmark",
    "bs_benchmark",
    "sine_reference",
    "PLANTS",
]

# Trajectories beyond this radius abort with a divergence error.
DIVERGENCE_RADIUS = 1e6


@dataclass(frozen=True)
class FirstOrderPlant:
    """dx/dt = drift(x) + regressor(x)^T theta + u with x, u in R^n."""

    dim: int
    param_dim: int
    drift: Callable[[np.ndarray], np.ndarray]
    regressor: Callable[[np.ndarray], np.ndarray]  # (p, n) matrix
    true_theta: np.ndarray


@dataclass(frozen=True)
class StrictFeedbackPlant:
    """Triangular chain: dx_i/dt = x_{i+1} + phi_i^T theta + psi_i, u in the last stage.

    ``regressors[i]`` and ``known_maps[i]`` take the state prefix
    (x_1, ..., x_{i+1}) and must be written with generic arithmetic so they
    also evaluate on dual numbers (the backstepping recursion differentiates
    through them).  ``regressors[i]`` returns a length-p sequence,
    ``known_maps[i]`` a scalar.
    """

    order: int
    param_dim: int
    regressors: Sequence[Callable]
    known_maps: Sequence[Callable]
    true_theta: np.ndarray


@dataclass(frozen=True)
class ReferenceSignal:
    """Analytic reference trajectory with derivatives through a given order.

    ``fn(t)`` returns the array [x_r, x_r', ..., x_r^(order)].
    """

    order: int
    fn: Callable[[float], np.ndarray]

    def __call__(self, t):
        vals = np.asarray(self.fn(t), dtype=float)
        if vals.shape != (self.order + 1,):
            raise ValueError(
                f"reference returned {vals.shape}, expected ({self.order + 1},)"
            )
        return vals


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise FloatingPointError(f"{name} evaluated non-finite")


def first_order_dynamics(plant, x, u):
    """True state derivative drift(x) + regressor(x)^T theta + u."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if x.shape != (plant.dim,) or u.shape != (plant.dim,):
        raise ValueError("state/input dimension mismatch")
    xdot = plant.drift(x) + plant.regressor(x).T @ plant.true_theta + u
    _check_finite("first-order dynamics", xdot)
    return xdot


def strict_feedback_dynamics(plant, x, u):
    """True state derivative of the triangular chain with scalar input u."""
    x = np.asarray(x, dtype=float)
    if x.shape != (plant.order,):
        raise ValueError("state dimension mismatch")
    n = plant.order
    theta = plant.true_theta
    xdot = np.empty(n)
    for i in range(n):
        prefix = x[: i + 1]
        phi_i = np.asarray(plant.regressors[i](prefix), dtype=float)
        psi_i = float(plant.known_maps[i](prefix))
        head = x[i + 1] if i < n - 1 else float(u)
        xdot[i] = head + phi_i @ theta + psi_i
    _check_finite("strict-feedback dynamics", xdot)
    return xdot


def stacked_regressor(plant, x):
    """Input-free drift stack and the (p, n) regressor matrix of the chain.

    Returns ``(F0, Phi)`` where ``F0 = [x_2 + psi_1, ..., psi_n]`` (the caller
    adds u to the last entry) and column i of ``Phi`` is phi_i.
    """
    x = np.asarray(x, dtype=float)
    n = plant.order
    F0 = np.empty(n)
    Phi = np.empty((plant.param_dim, n))
    for i in range(n):
        prefix = x[: i + 1]
        Phi[:, i] = plant.regressors[i](prefix)
        psi_i = float(plant.known_maps[i](prefix))
        F0[i] = (x[i + 1] if i < n - 1 else 0.0) + psi_i
    return F0, Phi


# --- built-in benchmark instances -------------------------------------------


def _fo_drift(x):
    return np.array([x[0], x[1], math.sin(x[2])])


def _fo_regressor(x):
    return np.array(
        [
            [x[1], x[0], 0.0],
            [x[0], x[1], 0.0],
            [0.0, 0.0, x[2] ** 2],
        ]
    )


def fo_benchmark():
    """Three-state first-order benchmark; x1(0)=x2(0) makes the regressor rank-deficient."""
    return FirstOrderPlant(
        dim=3,
        param_dim=3,
        drift=_fo_drift,
        regressor=_fo_regressor,
        true_theta=np.array([1.0, 2.0, -1.0]),
    )


def _bs_phi1(xs):
    x1 = xs[0]
    return [x1, x1 * x1, 0.0]


def _bs_phi2(xs):
    x1, x2 = xs[0], xs[1]
    return [x1 * x2, x2, x2 * x2]


def _bs_psi_zero(xs):
    return 0.0


def bs_benchmark():
    """Two-state strict-feedback benchmark with polynomial regressors."""
    return StrictFeedbackPlant(
        order=2,
        param_dim=3,
        regressors=(_bs_phi1, _bs_phi2),
        known_maps=(_bs_psi_zero, _bs_psi_zero),
        true_theta=np.array([1.0, 1.0, 1.0]),
    )


def sine_reference(order):
    """Unit sine reference with exact derivatives x_r^(k) = sin(t + k*pi/2)."""

    def fn(t):
        return np.array([math.sin(t + 0.5 * math.pi * k) for k in range(order + 1)])

    return ReferenceSignal(order=order, fn=fn)


PLANTS = {
    "fo_benchmark": fo_benchmark,
    "bs_benchmark": bs_benchmark,
}
