"""Fast oracle checks runnable from the command line.

Each check compares the library against an independent answer: closed
forms, a recomputation from scratch or an exhaustive search.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from ..antsel import exhaustive_select, select_antennas
from ..model import (
    SystemConfig,
    feasibility_violation,
    pa_power_of,
    pa_surrogate_of,
    rf_power_smoothed_of,
    rf_surrogate_of,
)
from ..sca import ScaOptions, Scheme, initial_point, sca_solve
from ..socp import ConeProblem, ConeSpec, SecondOrder, Status, kkt_residuals, solve_socp
from .channels import gen_channel


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str
    seconds: float


def _cfg(n, k, gamma, beta=0.5, p_static=20.0, pmax=1.5):
    return SystemConfig(n_antennas=n, n_users=k, sinr_targets=gamma, p_antenna_max=pmax,
                        p_sum_max=max(10 ** 1.6, n * pmax), eta_max=0.38, beta=beta, p_rf=0.35,
                        p_static=p_static, sigma2=1.0)


def check_norm_cone():
    # minimize t s.t. ||(3, 4)|| <= t
    p = ConeProblem(c=[1.0], G=[[-1.0], [0.0], [0.0]], h=[0.0, 3.0, 4.0],
                    cones=ConeSpec([SecondOrder(3)]))
    sol = solve_socp(p)
    err = abs(sol.x[0] - 5.0)
    res = kkt_residuals(p, sol).max()
    return sol.status == Status.OPTIMAL and err < 1e-7 and res < 1e-7, \
        f"t*={sol.x[0]:.10f}, recomputed residual {res:.1e}"


def check_single_user():
    worst = 0.0
    for seed in range(20):
        n = 1 + seed % 8
        ch = gen_channel(seed, 1, n, 1.0)
        exact = 2.0 / float(np.sum(np.abs(ch.entries) ** 2))
        # caps well above the closed-form power so they never bind
        cfg = _cfg(n, 1, 2.0, pmax=10.0 * exact)
        _, obj, _ = initial_point(ch, cfg)
        worst = max(worst, abs(obj - exact) / exact)
    return worst <= 1e-6, f"max relative error vs Gamma*sigma2/|h|^2: {worst:.1e}"


def check_surrogates():
    rng = np.random.default_rng(0)
    cfg = _cfg(8, 2, 1.0)
    worst_bound, worst_tan = -np.inf, 0.0
    for _ in range(1000):
        t = rng.uniform(0.0, 1.5, 8) * (rng.random(8) < 0.8)
        anchor = 1.5 * 10.0 ** rng.uniform(-6.0, 0.0, 8)
        worst_bound = max(worst_bound,
                          pa_power_of(t, cfg) - pa_surrogate_of(t, anchor, cfg),
                          rf_power_smoothed_of(t, cfg) - rf_surrogate_of(t, anchor, cfg))
        for f, g in ((pa_power_of, pa_surrogate_of), (rf_power_smoothed_of, rf_surrogate_of)):
            exact = f(anchor, cfg)
            worst_tan = max(worst_tan, abs(g(anchor, anchor, cfg) - exact) / abs(exact))
    return worst_bound <= 1e-10 and worst_tan <= 1e-8, \
        f"max(true - surrogate) {worst_bound:.1e}, max tangency error {worst_tan:.1e}"


def check_sca_descent():
    worst_rise, worst_sinr = -np.inf, -np.inf
    for seed in range(4):
        ch = gen_channel(seed, 3, 6, 1.0)
        cfg = _cfg(6, 3, 2.0)
        for scheme in Scheme:
            trace = sca_solve(ch, cfg, ScaOptions(scheme=scheme))
            worst_rise = max(worst_rise, float(np.max(np.diff(trace.smoothed), initial=-np.inf)))
            worst_sinr = max(worst_sinr, feasibility_violation(ch, trace.w, cfg)["sinr"])
    return worst_rise <= 1e-9 and worst_sinr <= 1e-6, \
        f"largest smoothed-objective rise {worst_rise:.1e}, worst SINR shortfall {worst_sinr:.1e}"


def check_selection():
    worst = -np.inf
    for seed in range(3):
        ch = gen_channel(seed, 2, 4, 1.0)
        cfg = _cfg(4, 2, 1.0, p_static=1.0)
        heur = select_antennas(ch, cfg).breakdown.total
        best = exhaustive_select(ch, cfg).breakdown.total
        worst = max(worst, best - heur)
    return worst <= 1e-6, f"max(exhaustive - heuristic) {worst:.1e}"


CHECKS: dict = {
    "socp-norm-cone": check_norm_cone,
    "single-user-closed-form": check_single_user,
    "surrogate-majorisation": check_surrogates,
    "sca-descent-feasibility": check_sca_descent,
    "selection-vs-exhaustive": check_selection,
}


def run_checks(checks: dict = None) -> list:
    out = []
    for name, fn in (checks or CHECKS).items():
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:  # report, do not abort the remaining checks
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        out.append(CheckResult(name, bool(passed), detail, time.perf_counter() - t0))
    return out
