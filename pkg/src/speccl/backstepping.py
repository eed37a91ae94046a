"""Tuning-function adaptive backstepping for strict-feedback plants.

The design recursion is

    z_1 = x_1 - r_0,          alpha_1 = -c_1 z_1 - phi_1^T th - psi_1
    z_i = x_i - alpha_{i-1} - r_{i-1}
    w_i = phi_i - sum_{j<i} (d alpha_{i-1}/d x_j) phi_j
    tau_i = tau_{i-1} + w_i z_i

with the virtual controls alpha_i built from exact partial derivatives of
the previous one and the control u = alpha_n + r_n.  For two-state plants
the partials are evaluated in closed form; for longer chains the recursion
is differentiated with nested forward-mode jets, which is exact to rounding.

All parameter adaptation is deferred to the update law: the estimate rate is
gamma * tau_n plus the collector correction, with a cross term compensating
the d alpha/d theta_hat feedthrough of the virtual controls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fdiff import Jet, lift

__all__ = [
    "BacksteppingGains",
    "BacksteppingEvaluation",
    "evaluate_backstepping",
    "backstepping_update",
    "virtual_controls",
    "virtual_control_partials",
]


@dataclass(frozen=True)
class BacksteppingGains:
    """Stage gains c_1..c_n, adaptation gain gamma, learning gain k4."""

    c: tuple
    gamma: float
    k4: float

    def __post_init__(self):
        object.__setattr__(self, "c", tuple(float(ci) for ci in self.c))
        if any(ci <= 0.0 for ci in self.c):
            raise ValueError("all stage gains c_i must be positive")
        if self.gamma <= 0.0 or self.k4 <= 0.0:
            raise ValueError("gamma and k4 must be positive")


@dataclass
class BacksteppingEvaluation:
    """One evaluation of the design recursion at a state/estimate/reference triple.

    z : (n,) tracking errors
    alpha : (n-1,) virtual controls
    tau : list of n tuning-function vectors (each length p)
    dalpha_dtheta : (n-1, p) rows d alpha_i / d theta_hat
    u : scalar control
    """

    z: np.ndarray
    alpha: np.ndarray
    tau: list
    dalpha_dtheta: np.ndarray
    u: float


def evaluate_backstepping(plant, x, theta_hat, ref, gains):
    """Run the full design recursion; ``ref`` holds x_r and its n derivatives."""
    x = np.asarray(x, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    ref = np.asarray(ref, dtype=float)
    n, p = plant.order, plant.param_dim
    if n < 2:
        raise ValueError("backstepping needs a chain of order >= 2")
    if x.shape != (n,) or theta_hat.shape != (p,) or ref.shape[0] < n + 1:
        raise ValueError("dimension mismatch in backstepping inputs")
    if len(gains.c) != n:
        raise ValueError(f"need {n} stage gains, got {len(gains.c)}")

    if n == 2:
        ev = _evaluate_two_state(plant, x, theta_hat, ref, gains)
    else:
        ev = _evaluate_recursive(plant, x, theta_hat, ref, gains)
    if not (np.all(np.isfinite(ev.z)) and np.isfinite(ev.u)):
        raise FloatingPointError("backstepping evaluation went non-finite")
    return ev


def backstepping_update(evaluation, Z, W, theta_hat, gains):
    """Estimate rate gamma*tau_n + k4*gamma*[Z - W th + gamma W (sum z_j dalpha_{j-1}/dth)^T]."""
    Z = np.asarray(Z, dtype=float)
    W = np.asarray(W, dtype=float)
    theta_hat = np.asarray(theta_hat, dtype=float)
    gamma, k4 = gains.gamma, gains.k4
    tau_n = np.asarray(evaluation.tau[-1], dtype=float)
    cross = evaluation.z[1:] @ evaluation.dalpha_dtheta  # sum_j z_j dalpha_{j-1}/dth
    return gamma * tau_n + k4 * gamma * (Z - W @ theta_hat + gamma * (W @ cross))


# --- closed form for two-state chains ----------------------------------------


def _scalar_derivative(fn, x1):
    """Value and d/dx1 of a prefix map at a scalar state, via a 1-direction jet."""
    out = fn([Jet(float(x1), (1.0,))])
    if isinstance(out, (list, tuple)):
        vals = np.array([o.val if isinstance(o, Jet) else float(o) for o in out])
        ders = np.array([o.grad[0] if isinstance(o, Jet) else 0.0 for o in out])
        return vals, ders
    o = out
    if isinstance(o, Jet):
        return float(o.val), float(o.grad[0])
    return float(o), 0.0


def _evaluate_two_state(plant, x, th, ref, gains):
    c1, c2 = gains.c
    gamma = gains.gamma
    x1, x2 = x
    r0, r1, r2 = ref[0], ref[1], ref[2]

    phi1, dphi1 = _scalar_derivative(plant.regressors[0], x1)
    psi1, dpsi1 = _scalar_derivative(plant.known_maps[0], x1)
    phi2 = np.asarray(plant.regressors[1](x), dtype=float)
    psi2 = float(plant.known_maps[1](x))

    z1 = x1 - r0
    alpha1 = -c1 * z1 - phi1 @ th - psi1
    z2 = x2 - alpha1 - r1

    da1_dx1 = -c1 - dphi1 @ th - dpsi1
    da1_dth = -phi1
    da1_dr0 = c1

    w2 = phi2 - da1_dx1 * phi1
    tau1 = phi1 * z1
    tau2 = tau1 + w2 * z2

    u = (
        -z1
        - c2 * z2
        - psi2
        + da1_dx1 * (x2 + psi1)
        - w2 @ th
        + gamma * (da1_dth @ tau2)
        + da1_dr0 * r1
        + r2
    )
    return BacksteppingEvaluation(
        z=np.array([z1, z2]),
        alpha=np.array([alpha1]),
        tau=[tau1, tau2],
        dalpha_dtheta=da1_dth.reshape(1, -1),
        u=float(u),
    )


# --- generic recursion with nested jets ---------------------------------------


class _Chain:
    __slots__ = ("zs", "alphas", "taus")

    def __init__(self, zs, alphas, taus):
        self.zs = zs
        self.alphas = alphas
        self.taus = taus


def _design_chain(plant, c, gamma, xs, ths, rs, upto):
    """Evaluate steps 1..upto of the recursion with generic arithmetic.

    ``xs``/``ths``/``rs`` are ambient scalars: floats at the top call, jets
    inside a lifted call.  Partials of the previous virtual controls come
    from re-running the chain one jet level up, so they stay exact no matter
    how deep the recursion nests.
    """
    n, p = plant.order, plant.param_dim
    lifted = None
    if upto >= 2:
        lifted = _design_chain(
            plant, c, gamma, *_split(lift(list(xs) + list(ths) + list(rs)), n, p), upto - 1
        )

    zs, alphas, taus = [], [], []
    tau_prev = [0.0] * p
    alpha_prev = 0.0
    z_prev = 0.0
    phis = []  # phi_j at the ambient level, reused by later steps
    for i in range(1, upto + 1):
        z_i = xs[i - 1] - alpha_prev - rs[i - 1]
        phi_i = list(plant.regressors[i - 1](xs[:i]))
        psi_i = plant.known_maps[i - 1](xs[:i])
        phis.append(phi_i)

        if i == 1:
            w = phi_i
            alpha_i = -c[0] * z_i - psi_i - _dot(w, ths)
            tau_i = [w[k] * z_i for k in range(p)]
        else:
            a_prev = lifted.alphas[i - 2]
            dax = a_prev.grad[: i - 1]
            dath = a_prev.grad[n : n + p]
            dar = a_prev.grad[n + p : n + p + i - 1]
            w = [
                phi_i[k] - _dot(dax, [phis[j][k] for j in range(i - 1)])
                for k in range(p)
            ]
            tau_i = [tau_prev[k] + w[k] * z_i for k in range(p)]
            alpha_i = -z_prev - c[i - 1] * z_i - psi_i - _dot(w, ths)
            for j in range(i - 1):
                psi_j = plant.known_maps[j](xs[: j + 1])
                alpha_i = alpha_i + dax[j] * (xs[j + 1] + psi_j)
            alpha_i = alpha_i + gamma * _dot(dath, tau_i)
            # sum over the earlier virtual controls' estimate sensitivities
            # (the j = 1 term vanishes because alpha_0 = 0)
            if i >= 3:
                sum_dath = [0.0] * p
                for j in range(2, i):
                    g = lifted.alphas[j - 2].grad[n : n + p]
                    sum_dath = [sum_dath[k] + g[k] for k in range(p)]
                alpha_i = alpha_i + gamma * _dot(sum_dath, w)
            for j in range(1, i):
                alpha_i = alpha_i + dar[j - 1] * rs[j]

        zs.append(z_i)
        alphas.append(alpha_i)
        taus.append(tau_i)
        z_prev, alpha_prev, tau_prev = z_i, alpha_i, tau_i
    return _Chain(zs, alphas, taus)


def _split(flat, n, p):
    return flat[:n], flat[n : n + p], flat[n + p :]


def _dot(a, b):
    out = 0.0
    for x, y in zip(a, b):
        out = out + x * y
    return out


def virtual_controls(plant, x, theta_hat, ref, gains, upto=None):
    """Values of alpha_1..alpha_upto via the generic recursion (any order)."""
    n, p = plant.order, plant.param_dim
    if upto is None:
        upto = n - 1
    xs = [float(v) for v in x]
    ths = [float(v) for v in theta_hat]
    rs = [float(ref[k]) for k in range(n)]
    chain = _design_chain(plant, gains.c, gains.gamma, xs, ths, rs, upto)
    return np.array(chain.alphas, dtype=float)


def virtual_control_partials(plant, x, theta_hat, ref, gains, upto=None):
    """Exact partials of alpha_1..alpha_upto from one lifted recursion pass.

    Returns a list with one dict per virtual control holding the gradients
    with respect to the state ('x'), the estimate ('theta'), and the
    reference derivatives ('ref', orders 0..n-1).
    """
    n, p = plant.order, plant.param_dim
    if upto is None:
        upto = n - 1
    xs = [float(v) for v in x]
    ths = [float(v) for v in theta_hat]
    rs = [float(ref[k]) for k in range(n)]
    lifted = _design_chain(
        plant, gains.c, gains.gamma, *_split(lift(xs + ths + rs), n, p), upto
    )
    out = []
    for a in lifted.alphas:
        out.append(
            {
                "x": np.array(a.grad[:n], dtype=float),
                "theta": np.array(a.grad[n : n + p], dtype=float),
                "ref": np.array(a.grad[n + p :], dtype=float),
            }
        )
    return out


def _evaluate_recursive(plant, x, th, ref, gains):
    n, p = plant.order, plant.param_dim
    xs = [float(v) for v in x]
    ths = [float(v) for v in th]
    rs = [float(ref[k]) for k in range(n)]

    chain = _design_chain(plant, gains.c, gains.gamma, xs, ths, rs, n)
    u = chain.alphas[-1] + float(ref[n])

    # First partials of alpha_1..alpha_{n-1} with respect to theta_hat.
    lifted = _design_chain(
        plant, gains.c, gains.gamma, *_split(lift(xs + ths + rs), n, p), n - 1
    )
    dalpha_dtheta = np.array(
        [[g for g in a.grad[n : n + p]] for a in lifted.alphas]
    )
    return BacksteppingEvaluation(
        z=np.array(chain.zs, dtype=float),
        alpha=np.array(chain.alphas[: n - 1], dtype=float),
        tau=[np.array(t, dtype=float) for t in chain.taus],
        dalpha_dtheta=dalpha_dtheta,
        u=float(u),
    )
