"""Acceptance criteria for the built-in benchmark scenarios.

Every numerically checkable claim about the collector and the two control
schemes lives here as a named criterion with a frozen tolerance.  The pytest
suite and the ``reproduce`` CLI subcommand both evaluate this registry.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .backstepping import (
    BacksteppingGains,
    evaluate_backstepping,
    virtual_control_partials,
    virtual_controls,
)
from .config import SCENARIO_NAMES, scenario_config
from .plants import bs_benchmark, sine_reference
from .reporting import emit_csv, plot_log
from .simulate import (
    lyapunov_value,
    rk4_step,
    run_scenario,
    symmetric_eigensystem,
)
from .spectral import smallest_positive_eigenvalue

__all__ = ["CriterionResult", "ScenarioCache", "CRITERIA", "evaluate_all", "reproduce_all"]

THETA_FO = np.array([1.0, 2.0, -1.0])
THETA_BS = np.array([1.0, 1.0, 1.0])
THETA_LIMIT_INSUFFICIENT = np.array([1.5, 1.5, -1.0])
UNEXCITED_DIRECTION = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)


@dataclass
class CriterionResult:
    cid: str
    name: str
    passed: bool
    detail: str

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.cid:4s} {self.name}: {self.detail}"


class ScenarioCache:
    """Runs each built-in scenario at most once per process."""

    def __init__(self):
        self._logs = {}

    def get(self, name, z_mode=None):
        key = (name, z_mode or "derivative")
        if key not in self._logs:
            overrides = [f"z_mode={z_mode}"] if z_mode else ()
            cfg = scenario_config(name, overrides=overrides)
            self._logs[key] = run_scenario(cfg)
        return self._logs[key]


def _ok(log):
    if log.status != "ok":
        raise RuntimeError(f"scenario '{log.config.name}' diverged")
    return log


# --- scenario criteria ---------------------------------------------------------


def crit_insufficient_terminal(cache):
    log = _ok(cache.get("fo_insufficient"))
    err = float(np.max(np.abs(log.theta_hat[-1] - THETA_LIMIT_INSUFFICIENT)))
    return err <= 0.05, f"terminal |theta_hat - [1.5,1.5,-1]|_inf = {err:.3e} (tol 0.05)"


def crit_unexcited_invariance(cache):
    log = _ok(cache.get("fo_insufficient"))
    comp = log.theta_tilde @ UNEXCITED_DIRECTION
    target = -1.0 / math.sqrt(2.0)
    dev = float(np.max(np.abs(comp - target)))
    return dev <= 1e-4, f"max |proj - (-0.7071)| = {dev:.3e} (tol 1e-4)"


def crit_sufficient_convergence(cache):
    log = _ok(cache.get("fo_sufficient"))
    xn = float(np.linalg.norm(log.x[-1]))
    err = float(np.max(np.abs(log.theta_hat[-1] - THETA_FO)))
    ok = xn <= 1e-3 and err <= 0.05
    return ok, f"|x(T)| = {xn:.3e} (tol 1e-3), |theta err|_inf = {err:.3e} (tol 0.05)"


def crit_eigenvalue_ceiling(cache):
    worst = -np.inf
    for name in ("fo_sufficient", "fo_insufficient", "bs_composite"):
        log = _ok(cache.get(name))
        worst = max(worst, float(log.eigs.max()))
    return worst <= 10.01, f"max eigenvalue over scenarios = {worst:.6f} (tol 10.01)"


def crit_backstepping_estimation(cache):
    log = _ok(cache.get("bs_composite"))
    mask = log.t >= 15.0
    err = float(np.max(np.abs(log.theta_hat[mask] - THETA_BS)))
    return err <= 0.05, f"max_(t>=15) |theta err|_inf = {err:.3e} (tol 0.05)"


def crit_baseline_contrast(cache):
    # the tracking error decays with recurring bursts; "eventually" is read as
    # "settled below tolerance over the final two seconds of the run"
    log = _ok(cache.get("bs_lyapunov"))
    mask = log.t >= log.t[-1] - 2.0
    track = float(np.max(np.abs(log.x[mask, 0] - np.sin(log.t[mask]))))
    err = float(np.max(np.abs(log.theta_hat[-1] - THETA_BS)))
    ok = track <= 0.05 and err >= 0.1
    return ok, (
        f"trailing |x1 - sin t| = {track:.3e} (tol 0.05), "
        f"terminal |theta err|_inf = {err:.3e} (required >= 0.1)"
    )


# --- property criteria ----------------------------------------------------------


def spectral_identity_residuals(trials=1000, seed=2024):
    """Worst-case residual of the spectral identities over random symmetric matrices."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        p = int(rng.integers(2, 9))
        A = rng.normal(size=(p, p))
        W = 0.5 * (A + A.T)
        spec = symmetric_eigensystem(W)
        eye = np.zeros((p, p))
        recon = np.zeros((p, p))
        for lam, E in zip(spec.distinct_eigenvalues, spec.projectors):
            eye += E
            recon += lam * E
            worst = max(worst, float(np.abs(E - E.T).max()))
            worst = max(worst, float(np.abs(E @ E - E).max()))
        worst = max(worst, float(np.abs(eye - np.eye(p)).max()))
        scale = max(1.0, float(np.abs(spec.distinct_eigenvalues).max()))
        worst = max(worst, float(np.abs(recon - W).max()) / scale)
        for i in range(len(spec.projectors)):
            for j in range(i + 1, len(spec.projectors)):
                worst = max(
                    worst,
                    float(np.abs(spec.projectors[i] @ spec.projectors[j]).max()),
                )
    return worst


def quadratic_bound_margin(trials=1000, seed=2025):
    """Smallest margin of v^T W v - lam_min^+ |v|^2 over random rank-deficient PSD W."""
    rng = np.random.default_rng(seed)
    worst = np.inf
    for _ in range(trials):
        p = int(rng.integers(2, 9))
        r = int(rng.integers(1, p + 1))
        Q, _ = np.linalg.qr(rng.normal(size=(p, p)))
        lams = np.zeros(p)
        lams[:r] = rng.uniform(0.1, 5.0, size=r)
        W = (Q * lams) @ Q.T
        spec = symmetric_eigensystem(0.5 * (W + W.T), require_psd=True)
        v = rng.normal(size=p)
        v = v - spec.zero_projector() @ v
        lam_plus = smallest_positive_eigenvalue(spec)
        if lam_plus is None:
            continue
        worst = min(worst, float(v @ W @ v - lam_plus * (v @ v)))
    return worst


def crit_spectral_properties(cache):
    ident = spectral_identity_residuals()
    margin = quadratic_bound_margin()
    ok = ident <= 1e-9 and margin >= -1e-9
    return ok, (
        f"identity residual = {ident:.3e} (tol 1e-9), "
        f"quadratic bound margin = {margin:.3e} (>= -1e-9)"
    )


def containment_residuals(log):
    """Worst containment residuals of a logged run.

    Returns (rate_resid, range_resid): the estimate-rate component in the
    final nullspace relative to 1 + |rate|, and the worst logged-regressor
    column leakage into every later nullspace, relative to the column norm.
    """
    E0_final = log.final_spectrum().zero_projector()
    rates = log.theta_dot
    leak = np.linalg.norm(rates @ E0_final.T, axis=1)
    rate_resid = float(np.max(leak / (1.0 + np.linalg.norm(rates, axis=1))))

    K, p, n = log.phi.shape
    flat = np.swapaxes(log.phi, 0, 1).reshape(p, K * n)  # columns grouped by time
    colnorm = np.maximum(np.linalg.norm(flat, axis=0), 1e-300)
    range_resid = 0.0
    for k in range(1, K):  # strictly earlier samples only
        spec_k = symmetric_eigensystem(
            log.W[k], tol_zero=log.config.zero_threshold, require_psd=True
        )
        E0 = spec_k.zero_projector()
        upto = k * n
        resid = np.linalg.norm(E0 @ flat[:, :upto], axis=0) / colnorm[:upto]
        range_resid = max(range_resid, float(resid.max()))
    return rate_resid, range_resid


def nullspace_equivalence_residual(log):
    """max_tau |phi(tau)^T v| over unit vectors v in the terminal nullspace."""
    spec = log.final_spectrum()
    E0 = spec.zero_projector()
    evals, evecs = np.linalg.eigh(log.W[-1])
    vs = [evecs[:, i] for i in range(len(evals)) if abs(evals[i]) <= spec.tol_zero]
    worst = 0.0
    for v in vs:
        if np.linalg.norm(E0 @ v) < 0.5:  # not actually in the zero cluster
            continue
        worst = max(worst, float(np.max(np.abs(np.einsum("kpn,p->kn", log.phi, v)))))
    return worst


def crit_subspace_containment(cache):
    worst_rate, worst_range, worst_null = 0.0, 0.0, 0.0
    for name in ("fo_sufficient", "fo_insufficient"):
        log = _ok(cache.get(name))
        rate_resid, range_resid = containment_residuals(log)
        worst_rate = max(worst_rate, rate_resid)
        worst_range = max(worst_range, range_resid)
        worst_null = max(worst_null, nullspace_equivalence_residual(log))
    ok = worst_rate <= 1e-6 and worst_range <= 1e-6 and worst_null <= 1e-6
    return ok, (
        f"rate confinement = {worst_rate:.3e}, range containment = {worst_range:.3e}, "
        f"nullspace leak = {worst_null:.3e} (all tol 1e-6)"
    )


def excited_lyapunov_series(log):
    """Lyapunov value of the excited error component in the final-time basis."""
    E0 = log.final_spectrum().zero_projector()
    gamma = log.config.gamma
    vals = np.empty(len(log))
    for k in range(len(log)):
        th1 = log.theta_tilde[k] - E0 @ log.theta_tilde[k]
        vals[k] = lyapunov_value("vkappa", log.x[k], th1, gamma)
    return vals


def crit_lyapunov_descent(cache):
    log_i = _ok(cache.get("fo_insufficient"))
    vk = excited_lyapunov_series(log_i)
    jitter_k = float(np.max(np.diff(vk))) if len(vk) > 1 else 0.0
    log_b = _ok(cache.get("bs_composite"))
    jitter_n = float(np.max(np.diff(log_b.V))) if len(log_b.V) > 1 else 0.0
    ok = jitter_k <= 1e-8 and jitter_n <= 1e-7
    return ok, (
        f"max dV_excited = {jitter_k:.3e} (tol 1e-8), "
        f"max dV_tracking = {jitter_n:.3e} (tol 1e-7)"
    )


def crit_zmode_crosscheck(cache):
    log_d = _ok(cache.get("fo_sufficient"))
    log_s = _ok(cache.get("fo_sufficient", z_mode="substitution"))
    diff = float(np.max(np.abs(log_d.theta_hat[-1] - log_s.theta_hat[-1])))
    return diff <= 1e-3, f"terminal theta_hat mode difference = {diff:.3e} (tol 1e-3)"


def two_state_oracle(plant, x, th, ref, gains):
    """Independently derived closed form of the two-state design for the
    polynomial benchmark regressors; used only as a cross-check."""
    c1, c2 = gains.c[0], gains.c[1]
    gamma = gains.gamma
    x1, x2 = x
    r0, r1, r2 = ref[0], ref[1], ref[2]
    phi1 = np.array([x1, x1**2, 0.0])
    phi2 = np.array([x1 * x2, x2, x2**2])
    z1 = x1 - r0
    alpha1 = -c1 * z1 - (th[0] * x1 + th[1] * x1**2)
    z2 = x2 - alpha1 - r1
    A = -c1 - th[0] - 2.0 * th[1] * x1
    w2 = phi2 - A * phi1
    tau2 = phi1 * z1 + w2 * z2
    u = (
        -z1 - c2 * z2 + A * x2 - w2 @ th
        - gamma * (phi1 @ tau2) + c1 * r1 + r2
    )
    return z1, z2, alpha1, tau2, u


def backstepping_partial_residuals(trials=100, seed=77):
    """Compare recursion partials with central differences and the closed form.

    Returns (fd_resid, oracle_resid): worst relative deviation of the
    jet-propagated partials of alpha_1 from central finite differences, and
    the worst deviation of the production evaluation from the independently
    derived two-state closed form.
    """
    rng = np.random.default_rng(seed)
    plant = bs_benchmark()
    gains = BacksteppingGains(c=(8.0, 8.0), gamma=0.01, k4=8.0)
    ref_sig = sine_reference(plant.order)
    h = 1e-6
    fd_resid = 0.0
    oracle_resid = 0.0
    for _ in range(trials):
        x = rng.uniform(-2.0, 2.0, size=2)
        th = rng.uniform(-2.0, 2.0, size=3)
        t = rng.uniform(0.0, 2.0 * math.pi)
        ref = ref_sig(t)

        parts = virtual_control_partials(plant, x, th, ref, gains)[0]

        def alpha1(xv, thv, rv):
            return virtual_controls(plant, xv, thv, rv, gains)[0]

        base = {"x": x, "theta": th, "ref": ref}
        checks = [("x", 0), ("theta", 0), ("theta", 1), ("theta", 2), ("ref", 0)]
        for key, col in checks:
            up = dict(base)
            dn = dict(base)
            up[key] = base[key].copy()
            dn[key] = base[key].copy()
            up[key][col] += h
            dn[key][col] -= h
            fd = (
                alpha1(up["x"], up["theta"], up["ref"])
                - alpha1(dn["x"], dn["theta"], dn["ref"])
            ) / (2.0 * h)
            exact = parts[key][col]
            fd_resid = max(fd_resid, abs(fd - exact) / max(1.0, abs(exact)))

        ev = evaluate_backstepping(plant, x, th, ref, gains)
        z1, z2, alpha_1, tau2, u = two_state_oracle(plant, x, th, ref, gains)
        oracle_resid = max(
            oracle_resid,
            abs(ev.u - u),
            abs(ev.alpha[0] - alpha_1),
            float(np.max(np.abs(ev.tau[1] - tau2))),
            abs(ev.z[0] - z1),
            abs(ev.z[1] - z2),
        )
    return fd_resid, oracle_resid


def crit_backstepping_partials(cache):
    fd_resid, oracle_resid = backstepping_partial_residuals()
    ok = fd_resid <= 1e-5 and oracle_resid <= 1e-9
    return ok, (
        f"finite-difference residual = {fd_resid:.3e} (tol 1e-5), "
        f"closed-form residual = {oracle_resid:.3e} (tol 1e-9)"
    )


def rk4_order_ratio(h=0.1):
    """Terminal-error ratio err(h)/err(h/2) on dy/dt = -y over [0, 1]."""
    def rhs(t, y):
        return -y

    def integrate(step):
        y = np.array([1.0])
        t = 0.0
        for _ in range(int(round(1.0 / step))):
            y = rk4_step(rhs, y, t, step)
            t += step
        return float(y[0])

    exact = math.exp(-1.0)
    e1 = abs(integrate(h) - exact)
    e2 = abs(integrate(h / 2.0) - exact)
    return e1 / e2


def crit_rk4_order(cache):
    ratio = rk4_order_ratio()
    return 12.0 <= ratio <= 20.0, f"halving ratio = {ratio:.2f} (window [12, 20])"


CRITERIA = [
    ("C1", "insufficient-excitation estimate limit", crit_insufficient_terminal),
    ("C2", "unexcited component invariance", crit_unexcited_invariance),
    ("C3", "sufficient-excitation convergence", crit_sufficient_convergence),
    ("C4", "collector eigenvalue ceiling", crit_eigenvalue_ceiling),
    ("C5", "backstepping estimation", crit_backstepping_estimation),
    ("C6", "baseline tracking without estimation", crit_baseline_contrast),
    ("C7a", "spectral identities and quadratic bound", crit_spectral_properties),
    ("C7b", "subspace containment residuals", crit_subspace_containment),
    ("C7c", "Lyapunov descent", crit_lyapunov_descent),
    ("C7d", "derivative vs substitution Z mode", crit_zmode_crosscheck),
    ("C7e", "backstepping partial derivatives", crit_backstepping_partials),
    ("C7f", "integrator order", crit_rk4_order),
]


def evaluate_all(cache=None, verbose=False):
    """Evaluate every criterion; a scenario failure marks its criteria FAIL."""
    cache = cache or ScenarioCache()
    results = []
    for cid, name, fn in CRITERIA:
        try:
            passed, detail = fn(cache)
        except Exception as exc:  # divergence or setup failure
            passed, detail = False, f"error: {exc}"
        res = CriterionResult(cid, name, passed, detail)
        results.append(res)
        if verbose:
            print(res.line())
    return results


def reproduce_all(outdir, plots=True, verbose=True):
    """Run the four built-in scenarios, write artifacts, evaluate all criteria.

    Returns (results, exit_code); exit code 4 signals at least one FAIL.
    """
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    cache = ScenarioCache()
    for name in SCENARIO_NAMES:
        t0 = time.perf_counter()
        try:
            log = cache.get(name)
        except Exception as exc:
            if verbose:
                print(f"{name}: run failed ({exc})")
            continue
        emit_csv(log, outdir / f"{name}.csv")
        if plots:
            plot_log(log, outdir, name)
        if verbose:
            wall = time.perf_counter() - t0
            print(f"{name}: {log.status}, {len(log)} rows, {wall:.1f}s")
    results = evaluate_all(cache, verbose=verbose)
    n_fail = sum(1 for r in results if not r.passed)
    if verbose:
        print(f"{len(results) - n_fail}/{len(results)} criteria passed")
    return results, (4 if n_fail else 0)
