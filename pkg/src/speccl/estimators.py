"""Certainty-equivalence control and the first-order parameter update laws.

Three update laws are provided: the classical gradient law, the filtered
regression baseline (whose accumulated matrices grow without bound), and the
composite law driven by the bounded collector pair (Z, W).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "EstimatorState",
    "FilterBankState",
    "FilterBankRates",
    "ce_control",
    "lyapunov_update",
    "composite_update",
    "filter_bank_rhs",
    "filtered_composite_update",
]


@dataclass
class EstimatorState:
    """Parameter estimate plus the gains of the active update law.

    ``law_gain`` is the learning-term gain: k3 for the filtered baseline,
    k4 for the composite law.
    """

    theta_hat: np.ndarray
    gamma: float
    k1: float
    law_gain: float

    def __post_init__(self):
        self.theta_hat = np.asarray(self.theta_hat, dtype=float)
        if not np.all(np.isfinite(self.theta_hat)):
            raise ValueError("theta_hat must be finite")
        for name in ("gamma", "k1", "law_gain"):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")


@dataclass
class FilterBankState:
    """Low-pass filter states of the regression baseline.

    q tracks the filtered regressor transpose (n, p); x_f and g are low-pass
    copies of the state and of drift+input; Y and Q accumulate the filtered
    regression pair.  All start at zero except x_f, which starts at x(0) so
    the derivative surrogate has no initial spike.
    """

    q: np.ndarray
    x_f: np.ndarray
    g: np.ndarray
    Y: np.ndarray
    Q: np.ndarray
    a: float

    @classmethod
    def initial(cls, x0, p, a):
        x0 = np.asarray(x0, dtype=float)
        n = x0.shape[0]
        if a <= 0.0:
            raise ValueError("filter constant a must be positive")
        return cls(
            q=np.zeros((n, p)),
            x_f=x0.copy(),
            g=np.zeros(n),
            Y=np.zeros(p),
            Q=np.zeros((p, p)),
            a=float(a),
        )


@dataclass
class FilterBankRates:
    """Time derivatives of the filter bank states."""

    q: np.ndarray
    x_f: np.ndarray
    g: np.ndarray
    Y: np.ndarray
    Q: np.ndarray


def ce_control(x, est, plant):
    """Certainty-equivalence law u = -k1 x - drift(x) - regressor(x)^T theta_hat."""
    x = np.asarray(x, dtype=float)
    return -est.k1 * x - plant.drift(x) - plant.regressor(x).T @ est.theta_hat


def lyapunov_update(x, phi, est):
    """Classical gradient law gamma * phi @ x."""
    return est.gamma * (np.asarray(phi, dtype=float) @ np.asarray(x, dtype=float))


def composite_update(x, phi, Z, W, est):
    """Gradient law plus the collector correction k4 * gamma * (Z - W theta_hat)."""
    grad = lyapunov_update(x, phi, est)
    return grad + est.law_gain * est.gamma * (
        np.asarray(Z, dtype=float) - np.asarray(W, dtype=float) @ est.theta_hat
    )


def filter_bank_rhs(fb, x, phi, drift_plus_u):
    """Derivatives of the filter bank driven by the current regressor and input.

    Realizes first-order low-passes dq = a (phi^T - q), dx_f = a (x - x_f),
    dg = a (drift+u - g); the derivative surrogate y = a (x - x_f) - g then
    feeds the accumulators dY = q^T y, dQ = q^T q.
    """
    x = np.asarray(x, dtype=float)
    phi = np.asarray(phi, dtype=float)
    drift_plus_u = np.asarray(drift_plus_u, dtype=float)
    a = fb.a
    y = a * (x - fb.x_f) - fb.g
    return FilterBankRates(
        q=a * (phi.T - fb.q),
        x_f=a * (x - fb.x_f),
        g=a * (drift_plus_u - fb.g),
        Y=fb.q.T @ y,
        Q=fb.q.T @ fb.q,
    )


def filtered_composite_update(x, phi, fb, est):
    """Gradient law plus the filtered-regression correction k3 * gamma * (Y - Q theta_hat)."""
    grad = lyapunov_update(x, phi, est)
    return grad + est.law_gain * est.gamma * (fb.Y - fb.Q @ est.theta_hat)
