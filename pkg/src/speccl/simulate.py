"""Fixed-step integration of the coupled plant/collector/estimator system.

One scenario is one flat RK4 state  x (+) theta_hat (+) Z (+) vec(W)
(+ filter-bank states for the filtered baseline), so every sub-dynamics
advances synchronously.  The collector spectrum is recomputed at every
integrator stage evaluation; W is re-symmetrized after each accepted step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .backstepping import BacksteppingGains, backstepping_update, evaluate_backstepping
from .collector import ForgettingConfig, _collector_rates, z_substitution_step
from .plants import (
    DIVERGENCE_RADIUS,
    PLANTS,
    FirstOrderPlant,
    sine_reference,
    stacked_regressor,
)
from .spectral import PSDViolationError, numeric_rank, symmetric_eigensystem

__all__ = [
    "DivergenceError",
    "ScenarioConfig",
    "TrajectoryLog",
    "ExcitationReport",
    "rk4_step",
    "run_scenario",
    "decompose_error",
    "lyapunov_value",
    "excitation_diagnostic",
]

UPDATE_LAWS = ("lyapunov", "filtered_cl", "spectral_cl")
Z_MODES = ("derivative", "substitution")
LYAPUNOV_KINDS = ("va", "vkappa", "vn")


class DivergenceError(RuntimeError):
    """Trajectory left the admissible region or produced non-finite values."""


@dataclass
class ScenarioConfig:
    """Everything needed to reproduce one simulation run."""

    name: str
    plant: str
    law: str
    x0: np.ndarray
    theta_hat0: np.ndarray
    k1: float = 2.0
    c: tuple = (8.0, 8.0)
    gamma: float = 0.05
    k3: float = 1.0
    k4: float = 4.0
    filter_a: float = 10.0
    sigma_min: float = 5.0
    sigma_max: float = 10.0
    dt: float = 1e-3
    horizon: float = 40.0
    z_mode: str = "derivative"
    log_stride: int = 10
    lyapunov_kind: str = "va"
    tol_zero: float | None = None

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float)
        self.theta_hat0 = np.asarray(self.theta_hat0, dtype=float)
        self.c = tuple(float(v) for v in self.c)
        if self.plant not in PLANTS:
            raise ValueError(f"unknown plant '{self.plant}'")
        if self.law not in UPDATE_LAWS:
            raise ValueError(f"unknown update law '{self.law}'")
        if self.z_mode not in Z_MODES:
            raise ValueError(f"unknown z_mode '{self.z_mode}'")
        if self.lyapunov_kind not in LYAPUNOV_KINDS:
            raise ValueError(f"unknown lyapunov kind '{self.lyapunov_kind}'")
        for gain in ("k1", "gamma", "k3", "k4", "filter_a"):
            if getattr(self, gain) <= 0.0:
                raise ValueError(f"gain {gain} must be strictly positive")
        if any(ci <= 0.0 for ci in self.c):
            raise ValueError("all backstepping gains c must be strictly positive")
        if not (0.0 < self.sigma_min < self.sigma_max):
            raise ValueError("need 0 < sigma_min < sigma_max")
        if self.dt <= 0.0:
            raise ValueError("dt must be positive")
        if self.horizon < self.dt:
            raise ValueError("horizon must be at least one step long")
        if self.log_stride < 1:
            raise ValueError("log_stride must be >= 1")
        plant = PLANTS[self.plant]()
        n = plant.dim if isinstance(plant, FirstOrderPlant) else plant.order
        if self.x0.shape != (n,):
            raise ValueError(f"x0 must have length {n} for plant '{self.plant}'")
        if self.theta_hat0.shape != (plant.param_dim,):
            raise ValueError(f"theta_hat0 must have length {plant.param_dim}")
        if not isinstance(plant, FirstOrderPlant) and len(self.c) < plant.order:
            raise ValueError(f"need {plant.order} backstepping gains c")

    @property
    def zero_threshold(self):
        """Eigenvalue zero-clamp, scaled to the collector's ceiling by default."""
        return self.tol_zero if self.tol_zero is not None else 1e-9 * self.sigma_max

    def steps(self):
        return max(1, int(round(self.horizon / self.dt)))


class TrajectoryLog:
    """Time-indexed record of one run, with raw matrices kept for analysis.

    The columns mirrored into CSV are t, x, theta_hat, theta_tilde, the W
    eigenvalues, numeric rank, excited/unexcited error norms, the scenario's
    Lyapunov value and the control.  W, Z, the regressor samples and the
    estimate rate are retained in memory for the invariant checks.
    """

    def __init__(self, config, n, p, u_dim, capacity):
        self.config = config
        self.status = "ok"
        self.rank_events = []
        self._rows = 0
        self.t = np.zeros(capacity)
        self.x = np.zeros((capacity, n))
        self.theta_hat = np.zeros((capacity, p))
        self.theta_tilde = np.zeros((capacity, p))
        self.eigs = np.zeros((capacity, p))
        self.rank = np.zeros(capacity, dtype=int)
        self.excited_norm = np.zeros(capacity)
        self.unexcited_norm = np.zeros(capacity)
        self.V = np.zeros(capacity)
        self.u = np.zeros((capacity, u_dim))
        self.W = np.zeros((capacity, p, p))
        self.Z = np.zeros((capacity, p))
        self.phi = np.zeros((capacity, p, n))
        self.theta_dot = np.zeros((capacity, p))

    def _append(self, **kv):
        i = self._rows
        for key, val in kv.items():
            getattr(self, key)[i] = val
        self._rows += 1

    def _finalize(self):
        for key in (
            "t", "x", "theta_hat", "theta_tilde", "eigs", "rank",
            "excited_norm", "unexcited_norm", "V", "u", "W", "Z",
            "phi", "theta_dot",
        ):
            setattr(self, key, getattr(self, key)[: self._rows])

    def __len__(self):
        return self._rows

    def final_spectrum(self):
        """Spectrum of W at the last logged instant."""
        return symmetric_eigensystem(
            self.W[-1], tol_zero=self.config.zero_threshold, require_psd=True
        )


def rk4_step(rhs, state, t, h):
    """Classical four-stage Runge-Kutta advance of ``state`` by ``h``."""
    if h <= 0.0:
        raise ValueError("step size must be positive")
    k1 = rhs(t, state)
    k2 = rhs(t + 0.5 * h, state + 0.5 * h * k1)
    k3 = rhs(t + 0.5 * h, state + 0.5 * h * k2)
    k4 = rhs(t + h, state + h * k3)
    increment = k1 + 2.0 * k2 + 2.0 * k3 + k4
    # a non-finite entry in any stage poisons the summed increment
    if not math.isfinite(float(increment.sum())):
        raise DivergenceError(f"non-finite stage derivative at t={t:.6g}")
    return state + (h / 6.0) * increment


def decompose_error(theta_tilde, spectrum):
    """Split an error vector into its excited and unexcited components.

    The unexcited part is the projection onto the zero cluster; the excited
    part is the orthogonal remainder.
    """
    theta_tilde = np.asarray(theta_tilde, dtype=float)
    unexcited = spectrum.zero_projector() @ theta_tilde
    return theta_tilde - unexcited, unexcited


def lyapunov_value(kind, vec, theta_component, gamma):
    """Quadratic storage 0.5*|vec|^2 + (1/(2 gamma))*|theta_component|^2.

    ``kind`` names the convention: 'va' pairs the state with the full error,
    'vkappa' with the excited component only, 'vn' pairs the tracking errors
    with the full error.
    """
    if kind not in LYAPUNOV_KINDS:
        raise ValueError(f"unknown lyapunov kind '{kind}'")
    if gamma <= 0.0:
        raise ValueError("gamma must be positive")
    vec = np.asarray(vec, dtype=float)
    th = np.asarray(theta_component, dtype=float)
    return 0.5 * float(vec @ vec) + 0.5 / gamma * float(th @ th)


# --- scenario runner ----------------------------------------------------------


class _SpectrumCache:
    """Reuses the spectrum computed after an accepted step for the first
    stage evaluation of the next one (the collector matrix is identical)."""

    __slots__ = ("_W", "_spec")

    def __init__(self):
        self._W = None
        self._spec = None

    def get(self, W, tol_zero):
        if self._W is not None and np.array_equal(W, self._W):
            return self._spec
        # the engine keeps W bitwise symmetric, so the tolerance check is skipped
        spec = symmetric_eigensystem(
            W, tol_zero=tol_zero, require_psd=True, check_symmetry=False
        )
        self.put(W, spec)
        return spec

    def put(self, W, spec):
        self._W = W.copy()
        self._spec = spec


class _FirstOrderModel:
    """Stage evaluations for a first-order plant under one update law."""

    def __init__(self, plant, cfg):
        self.plant = plant
        self.cfg = cfg
        self.n, self.p = plant.dim, plant.param_dim
        self.u_dim = self.n
        self.fcfg = ForgettingConfig(cfg.sigma_min, cfg.sigma_max)
        self.spectrum_cache = _SpectrumCache()
        n, p = self.n, self.p
        self.iz = n + p
        self.iw = n + p + p
        self.size = self.iw + p * p
        if cfg.law == "filtered_cl":
            self.iq = self.size          # filtered regressor (n, p)
            self.ixf = self.iq + n * p
            self.ig = self.ixf + n
            self.iy = self.ig + n
            self.iQ = self.iy + p
            self.size = self.iQ + p * p

    def initial_state(self):
        cfg = self.cfg
        s = np.zeros(self.size)
        s[: self.n] = cfg.x0
        s[self.n : self.iz] = cfg.theta_hat0
        if cfg.law == "filtered_cl":
            s[self.ixf : self.ixf + self.n] = cfg.x0  # x_f(0) = x(0)
        return s

    def unpack(self, s):
        n, p = self.n, self.p
        return s[:n], s[n : self.iz], s[self.iz : self.iw], s[self.iw : self.iw + p * p].reshape(p, p)

    def control(self, x, th, f, phi):
        return -self.cfg.k1 * x - f - phi.T @ th

    def endpoint(self, t, s):
        """Regressor, drift and input at a step boundary (for substitution mode)."""
        x, th, _, _ = self.unpack(s)
        f = self.plant.drift(x)
        phi = self.plant.regressor(x)
        return phi, f, self.control(x, th, f, phi), x

    def theta_rate(self, s, x, th, phi, Z, W):
        cfg = self.cfg
        rate = cfg.gamma * (phi @ x)
        if cfg.law == "spectral_cl":
            rate = rate + cfg.k4 * cfg.gamma * (Z - W @ th)
        elif cfg.law == "filtered_cl":
            p = self.p
            Y = s[self.iy : self.iy + p]
            Q = s[self.iQ : self.iQ + p * p].reshape(p, p)
            rate = rate + cfg.k3 * cfg.gamma * (Y - Q @ th)
        return rate

    def rhs(self, t, s, varpi_bar=None):
        cfg = self.cfg
        n, p = self.n, self.p
        x, th, Z, W = self.unpack(s)
        f = self.plant.drift(x)
        phi = self.plant.regressor(x)
        u = self.control(x, th, f, phi)
        xdot = f + phi.T @ self.plant.true_theta + u
        spec = self.spectrum_cache.get(W, cfg.zero_threshold)
        vp = phi @ (xdot - f - u) if varpi_bar is None else varpi_bar
        Zdot, Wdot = _collector_rates(Z, spec, phi, vp, self.fcfg)
        ds = np.empty(self.size)
        ds[:n] = xdot
        ds[n : self.iz] = self.theta_rate(s, x, th, phi, Z, W)
        ds[self.iz : self.iw] = Zdot
        ds[self.iw : self.iw + p * p] = Wdot.ravel()
        if cfg.law == "filtered_cl":
            a = cfg.filter_a
            q = s[self.iq : self.iq + n * p].reshape(n, p)
            x_f = s[self.ixf : self.ixf + n]
            g = s[self.ig : self.ig + n]
            y = a * (x - x_f) - g
            ds[self.iq : self.iq + n * p] = (a * (phi.T - q)).ravel()
            ds[self.ixf : self.ixf + n] = a * (x - x_f)
            ds[self.ig : self.ig + n] = a * ((f + u) - g)
            ds[self.iy : self.iy + p] = q.T @ y
            ds[self.iQ : self.iQ + p * p] = (q.T @ q).ravel()
        return ds

    def log_extras(self, t, s, spec):
        x, th, Z, W = self.unpack(s)
        f = self.plant.drift(x)
        phi = self.plant.regressor(x)
        u = self.control(x, th, f, phi)
        theta_tilde = self.plant.true_theta - th
        excited, unexcited = decompose_error(theta_tilde, spec)
        kind = self.cfg.lyapunov_kind
        theta_comp = excited if kind == "vkappa" else theta_tilde
        V = lyapunov_value(kind, x, theta_comp, self.cfg.gamma)
        theta_dot = self.theta_rate(s, x, th, phi, Z, W)
        return phi, u, theta_tilde, excited, unexcited, V, theta_dot


class _BacksteppingModel:
    """Stage evaluations for a strict-feedback plant under one update law."""

    def __init__(self, plant, cfg):
        self.plant = plant
        self.cfg = cfg
        self.n, self.p = plant.order, plant.param_dim
        self.u_dim = 1
        self.fcfg = ForgettingConfig(cfg.sigma_min, cfg.sigma_max)
        self.spectrum_cache = _SpectrumCache()
        self.ref = sine_reference(plant.order)
        self.gains = BacksteppingGains(
            c=cfg.c[: plant.order], gamma=cfg.gamma, k4=cfg.k4
        )
        n, p = self.n, self.p
        self.iz = n + p
        self.iw = n + p + p
        self.size = self.iw + p * p

    def initial_state(self):
        s = np.zeros(self.size)
        s[: self.n] = self.cfg.x0
        s[self.n : self.iz] = self.cfg.theta_hat0
        return s

    def unpack(self, s):
        n, p = self.n, self.p
        return s[:n], s[n : self.iz], s[self.iz : self.iw], s[self.iw : self.iw + p * p].reshape(p, p)

    def _evaluate(self, t, x, th):
        return evaluate_backstepping(self.plant, x, th, self.ref(t), self.gains)

    def endpoint(self, t, s):
        x, th, _, _ = self.unpack(s)
        ev = self._evaluate(t, x, th)
        F0, Phi = stacked_regressor(self.plant, x)
        uvec = np.zeros(self.n)
        uvec[-1] = ev.u
        return Phi, F0, uvec, x

    def theta_rate(self, ev, th, Z, W):
        if self.cfg.law == "spectral_cl":
            return backstepping_update(ev, Z, W, th, self.gains)
        return self.cfg.gamma * ev.tau[-1]

    def rhs(self, t, s, varpi_bar=None):
        cfg = self.cfg
        n, p = self.n, self.p
        x, th, Z, W = self.unpack(s)
        ev = self._evaluate(t, x, th)
        F0, Phi = stacked_regressor(self.plant, x)
        uvec = np.zeros(n)
        uvec[-1] = ev.u
        xdot = F0 + uvec + Phi.T @ self.plant.true_theta
        spec = self.spectrum_cache.get(W, cfg.zero_threshold)
        vp = Phi @ (xdot - F0 - uvec) if varpi_bar is None else varpi_bar
        Zdot, Wdot = _collector_rates(Z, spec, Phi, vp, self.fcfg)
        ds = np.empty(self.size)
        ds[:n] = xdot
        ds[n : self.iz] = self.theta_rate(ev, th, Z, W)
        ds[self.iz : self.iw] = Zdot
        ds[self.iw : self.iw + p * p] = Wdot.ravel()
        return ds

    def log_extras(self, t, s, spec):
        x, th, Z, W = self.unpack(s)
        ev = self._evaluate(t, x, th)
        _, Phi = stacked_regressor(self.plant, x)
        theta_tilde = self.plant.true_theta - th
        excited, unexcited = decompose_error(theta_tilde, spec)
        kind = self.cfg.lyapunov_kind
        theta_comp = excited if kind == "vkappa" else theta_tilde
        vec = ev.z if kind == "vn" else x
        V = lyapunov_value(kind, vec, theta_comp, self.cfg.gamma)
        theta_dot = self.theta_rate(ev, th, Z, W)
        return Phi, np.array([ev.u]), theta_tilde, excited, unexcited, V, theta_dot


def _make_model(cfg):
    plant = PLANTS[cfg.plant]()
    if isinstance(plant, FirstOrderPlant):
        return _FirstOrderModel(plant, cfg)
    return _BacksteppingModel(plant, cfg)


def run_scenario(cfg):
    """Integrate one scenario and return its trajectory log.

    Rank events are detected after every accepted step.  A trajectory whose
    state norm exceeds the divergence radius (or goes non-finite) stops early
    with ``status == 'diverged'`` and the partial log retained.
    """
    model = _make_model(cfg)
    n, p = model.n, model.p
    dt = cfg.dt
    steps = cfg.steps()
    stride = cfg.log_stride
    substitution = cfg.z_mode == "substitution"

    log = TrajectoryLog(cfg, n, p, model.u_dim, capacity=steps // stride + 3)
    s = model.initial_state()
    t = 0.0
    spec = model.spectrum_cache.get(model.unpack(s)[3], cfg.zero_threshold)
    rank_prev = numeric_rank(spec)
    _log_row(log, model, t, s, spec)

    varpi_carry = np.zeros(p)
    endpoint_prev = model.endpoint(t, s) if substitution else None

    for k in range(steps):
        try:  # any numeric breakdown inside a step counts as divergence
            if substitution:
                provisional = rk4_step(
                    lambda tt, ss: model.rhs(tt, ss, varpi_carry), s, t, dt
                )
                phi0, drift0, u0, x0 = endpoint_prev
                phi1, drift1, u1, x1 = model.endpoint(t + dt, provisional)
                inc = z_substitution_step(
                    np.zeros(p), phi0, phi1, x0, x1, drift0, u0, dt,
                    drift_next=drift1, u_next=u1,
                )
                varpi_carry = inc / dt
                s = rk4_step(
                    lambda tt, ss: model.rhs(tt, ss, varpi_carry), s, t, dt
                )
            else:
                s = rk4_step(model.rhs, s, t, dt)
            t = (k + 1) * dt

            # keep W symmetric against floating-point drift
            W = s[model.iw : model.iw + p * p].reshape(p, p)
            s[model.iw : model.iw + p * p] = (0.5 * (W + W.T)).ravel()

            x = s[:n]
            if not np.all(np.isfinite(s)) or float(np.linalg.norm(x)) > DIVERGENCE_RADIUS:
                raise DivergenceError(f"state left the admissible region at t={t:.6g}")

            spec = model.spectrum_cache.get(
                s[model.iw : model.iw + p * p].reshape(p, p), cfg.zero_threshold
            )
            rank_now = numeric_rank(spec)
            if rank_now > rank_prev:
                log.rank_events.append((t, rank_now))
                rank_prev = rank_now

            if substitution:
                endpoint_prev = model.endpoint(t, s)

            if (k + 1) % stride == 0 or k + 1 == steps:
                _log_row(log, model, t, s, spec)
        except (DivergenceError, PSDViolationError, FloatingPointError):
            log.status = "diverged"
            break

    log._finalize()
    return log


def _log_row(log, model, t, s, spec):
    phi, u, theta_tilde, excited, unexcited, V, theta_dot = model.log_extras(t, s, spec)
    x, th, Z, W = model.unpack(s)
    log._append(
        t=t,
        x=x,
        theta_hat=th,
        theta_tilde=theta_tilde,
        eigs=spec.expanded_eigenvalues(),
        rank=numeric_rank(spec),
        excited_norm=float(np.linalg.norm(excited)),
        unexcited_norm=float(np.linalg.norm(unexcited)),
        V=V,
        u=u,
        W=W,
        Z=Z,
        phi=phi,
        theta_dot=theta_dot,
    )


# --- excitation diagnostics ---------------------------------------------------


@dataclass
class ExcitationReport:
    """Richness classification of the logged regressor history."""

    pe: bool
    se: bool
    ie_interval: tuple | None
    lambda_min_total: float


def excitation_diagnostic(log, tau_d, rho):
    """Classify the logged regressor history as PE / SE / IE.

    The Gram integral of phi phi^T is accumulated with the trapezoid rule on
    the logged samples.  SE holds when the smallest eigenvalue of the full
    integral reaches ``rho``; PE requires every sliding window of width
    ``tau_d`` to reach it; the IE interval is the first such window.
    """
    if len(log) == 0:
        raise ValueError("empty trajectory log")
    t = log.t
    G = np.einsum("kin,kjn->kij", log.phi, log.phi)
    C = np.zeros_like(G)
    for k in range(1, len(t)):
        C[k] = C[k - 1] + 0.5 * (G[k] + G[k - 1]) * (t[k] - t[k - 1])

    lam_total = float(np.linalg.eigvalsh(C[-1])[0])
    se = lam_total >= rho

    pe = None
    ie_interval = None
    for k in range(len(t)):
        if t[k] < tau_d:
            continue
        j = int(np.searchsorted(t, t[k] - tau_d))
        lam = float(np.linalg.eigvalsh(C[k] - C[j])[0])
        if lam >= rho and ie_interval is None:
            ie_interval = (float(t[j]), float(t[k]))
        if lam < rho:
            pe = False
        elif pe is None:
            pe = True
    pe = bool(pe) if pe is not None else False

    return ExcitationReport(
        pe=pe, se=se, ie_interval=ie_interval, lambda_min_total=lam_total
    )
