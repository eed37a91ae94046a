"""Bounded excitation collection through eigenvalue-gated forgetting.

Maintains the pair (Z, W) of an online linear regression equation Z = W*theta
by integrating

    dZ/dt = varpi - sum_i rho(lambda_i) E_i Z
    dW/dt = phi phi^T - sum_i rho(lambda_i) lambda_i E_i

where (lambda_i, E_i) is the clustered spectrum of W.  The forgetting factor
rho is zero below ``sigma_min`` and ramps up so that eigenvalues saturate at
``sigma_max``; directions with little collected excitation are never decayed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .spectral import Spectrum, symmetric_eigensystem

__all__ = [
    "ForgettingConfig",
    "CollectorState",
    "saturation",
    "forgetting_factor",
    "varpi",
    "collector_rhs",
    "z_substitution_step",
]


@dataclass(frozen=True)
class ForgettingConfig:
    """Eigenvalue band of the forgetting law.

    ``sigma_min`` is the largest eigenvalue that is never decayed;
    ``sigma_max`` is the saturation ceiling.  The ramp between them is
    centred at ``mu`` with half-width ``omega``.
    """

    sigma_min: float
    sigma_max: float

    def __post_init__(self):
        if not (0.0 < self.sigma_min < self.sigma_max):
            raise ValueError(
                f"need 0 < sigma_min < sigma_max, got {self.sigma_min}, {self.sigma_max}"
            )

    @property
    def mu(self):
        return 0.5 * (self.sigma_max + self.sigma_min)

    @property
    def omega(self):
        return 0.5 * (self.sigma_max - self.sigma_min)


@dataclass
class CollectorState:
    """The regression pair (Z, W) plus the cached spectrum of W."""

    Z: np.ndarray
    W: np.ndarray
    spectrum_cache: Spectrum | None = field(default=None)

    @classmethod
    def zeros(cls, p, tol_zero):
        state = cls(Z=np.zeros(p), W=np.zeros((p, p)))
        state.refresh_spectrum(tol_zero)
        return state

    def refresh_spectrum(self, tol_zero, tol_cluster=None):
        """Symmetrize W and recompute its spectrum (PSD enforced)."""
        self.W = 0.5 * (self.W + self.W.T)
        self.spectrum_cache = symmetric_eigensystem(
            self.W, tol_cluster=tol_cluster, tol_zero=tol_zero, require_psd=True
        )
        return self.spectrum_cache


def saturation(y):
    """Unit saturation: clips to [-1, 1], identity in between."""
    if y <= -1.0:
        return -1.0
    if y >= 1.0:
        return 1.0
    return float(y)


def forgetting_factor(lambda_i, lambda_max_phi, cfg):
    """Per-direction forgetting rate for an eigenvalue of W.

    Zero for ``lambda_i <= sigma_min``; otherwise scaled by the current
    excitation strength ``lambda_max_phi`` (the top eigenvalue of phi phi^T)
    and ramped so that ``rho * lambda_i`` reaches ``lambda_max_phi`` exactly
    at ``lambda_i = sigma_max``, stalling further growth there.
    """
    if lambda_i <= cfg.sigma_min:
        return 0.0
    s = saturation((lambda_i - cfg.mu) / cfg.omega)
    return lambda_max_phi / (2.0 * lambda_i) * (s + 1.0)


def varpi(phi, xdot, drift, u):
    """Regressor-weighted parametric residual phi @ (xdot - drift - u).

    When the inputs come from the true plant this equals phi phi^T theta.
    """
    phi = np.asarray(phi, dtype=float)
    xdot = np.asarray(xdot, dtype=float)
    drift = np.asarray(drift, dtype=float)
    u = np.asarray(u, dtype=float)
    if phi.ndim != 2 or xdot.shape != (phi.shape[1],):
        raise ValueError(
            f"dimension mismatch: phi {phi.shape} vs xdot {xdot.shape}"
        )
    if drift.shape != xdot.shape or u.shape != xdot.shape:
        raise ValueError("drift and u must match the state dimension")
    return phi @ (xdot - drift - u)


def collector_rhs(state, phi, varpi_val, cfg):
    """Time derivatives (dZ, dW) of the collector for the current regressor.

    Requires ``state.spectrum_cache`` to be current for ``state.W``.  The
    forgetting sums run over every cluster; the zero cluster contributes
    nothing because its rate is zero.
    """
    spec = state.spectrum_cache
    return _collector_rates(state.Z, spec, np.asarray(phi, dtype=float), varpi_val, cfg)


def _collector_rates(Z, spec, phi, varpi_val, cfg):
    G = phi @ phi.T
    # top eigenvalue of phi phi^T == top eigenvalue of phi^T phi; use the smaller
    if phi.shape[1] < phi.shape[0]:
        lam_max_phi = max(0.0, _sym_eigmax(phi.T @ phi))
    else:
        lam_max_phi = max(0.0, _sym_eigmax(G))
    Zdot = np.array(varpi_val, dtype=float)
    Wdot = G
    if lam_max_phi > 0.0:
        for lam, E in zip(spec.distinct_eigenvalues, spec.projectors):
            rho = forgetting_factor(lam, lam_max_phi, cfg)
            if rho > 0.0:
                Zdot -= rho * (E @ Z)
                Wdot = Wdot - (rho * lam) * E
    return Zdot, 0.5 * (Wdot + Wdot.T)


def _sym_eigmax(A):
    """Largest eigenvalue of a small symmetric matrix, in closed form up to 3x3."""
    m = A.shape[0]
    if m == 1:
        return float(A[0, 0])
    if m == 2:
        a, b, c = A[0, 0], A[0, 1], A[1, 1]
        return float(0.5 * (a + c) + math.hypot(0.5 * (a - c), b))
    if m == 3:
        a00, a11, a22 = A[0, 0], A[1, 1], A[2, 2]
        a01, a02, a12 = A[0, 1], A[0, 2], A[1, 2]
        p1 = a01 * a01 + a02 * a02 + a12 * a12
        if p1 == 0.0:
            return float(max(a00, a11, a22))
        q = (a00 + a11 + a22) / 3.0
        p2 = (a00 - q) ** 2 + (a11 - q) ** 2 + (a22 - q) ** 2 + 2.0 * p1
        p = math.sqrt(p2 / 6.0)
        b00, b11, b22 = (a00 - q) / p, (a11 - q) / p, (a22 - q) / p
        b01, b02, b12 = a01 / p, a02 / p, a12 / p
        half_det = 0.5 * (
            b00 * (b11 * b22 - b12 * b12)
            - b01 * (b01 * b22 - b12 * b02)
            + b02 * (b01 * b12 - b11 * b02)
        )
        r = min(1.0, max(-1.0, half_det))
        return float(q + 2.0 * p * math.cos(math.acos(r) / 3.0))
    return float(np.linalg.eigvalsh(A)[-1])


def z_substitution_step(
    accumulator,
    phi_prev,
    phi_next,
    x_prev,
    x_next,
    drift_prev,
    u_prev,
    dt,
    drift_next=None,
    u_next=None,
):
    """Advance the derivative-free accumulation of the integral of varpi.

    Uses the identity  int varpi dt = int phi dx - int phi (drift + u) dt,
    so no state derivative measurement is needed.  The path integral uses the
    trapezoid in the state increment.  The drift/input quadrature uses the
    left endpoint when only the ``*_prev`` samples are given; passing
    ``drift_next``/``u_next`` upgrades it to a trapezoid as well, which the
    simulation engine does for second-order accuracy.
    """
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    phi_prev = np.asarray(phi_prev, dtype=float)
    phi_next = np.asarray(phi_next, dtype=float)
    inc = 0.5 * (phi_prev + phi_next) @ (np.asarray(x_next) - np.asarray(x_prev))
    if drift_next is None:
        inc -= (phi_prev @ (np.asarray(drift_prev) + np.asarray(u_prev))) * dt
    else:
        lo = phi_prev @ (np.asarray(drift_prev) + np.asarray(u_prev))
        hi = phi_next @ (np.asarray(drift_next) + np.asarray(u_next))
        inc -= 0.5 * (lo + hi) * dt
    return np.asarray(accumulator, dtype=float) + inc
