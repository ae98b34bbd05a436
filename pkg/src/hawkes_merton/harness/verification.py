"""Acceptance checks for the limit theorems and the closed-form strategies.

Each check returns a :class:`CheckResult`; :func:`run_suite` runs them all.
``quick=True`` shrinks the Monte Carlo sizes for a fast smoke run (the
tolerances stay the same, only path counts and horizons change).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .. import gchp as G
from ..gchp import DiffusionParams, GCHPModel
from ..hawkes import ExponentialKernel, HawkesParams, ZeroKernel, fclt_statistic_hp, simulate_hawkes
from ..markov import MarkovChainSpec, stationary_distribution
from ..merton_finance import FinanceMarket, expected_log_utility, grid_search_optimal_pi, optimal_fraction_finance
from ..merton_insurance import (
    InsuranceModel,
    hjb_first_order_check,
    optimal_fraction_insurance,
    simulate_surplus_diffusion,
    simulate_surplus_jump,
    solve_p,
    surplus_mean_ode,
)
from .experiments import gchp_terminals, timestamp
from .stats import normality_check

REFERENCE_HAWKES = HawkesParams(1.0, ExponentialKernel(0.5, 1.0))
REFERENCE_TWO_STATE = dict(delta=1.0, p=0.7, p_prime=0.6)


def reference_gchp() -> GCHPModel:
    return GCHPModel(REFERENCE_HAWKES, G.two_state_chain(**REFERENCE_TWO_STATE))


@dataclass
class CheckResult:
    id: int
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.id}. {self.name} ({self.seconds:.1f}s)"


def _sizes(quick: bool, full, small):
    return small if quick else full


def check_lln_hp(seed: int, quick: bool = False) -> CheckResult:
    n_paths = _sizes(quick, 100, 20)
    T = 5000.0
    rates = np.array([len(simulate_hawkes(REFERENCE_HAWKES, T, seed + i)) / T for i in range(n_paths)])
    mean = float(rates.mean())
    target = REFERENCE_HAWKES.mean_rate
    rel = abs(mean - target) / target
    return CheckResult(1, "LLN for Hawkes: mean N(T)/T within 5% of lambda/(1-mu_hat)", rel < 0.05,
                       {"n_paths": n_paths, "T": T, "mean_rate": mean, "target": target, "relative_error": rel})


def check_fclt_hp(seed: int, quick: bool = False) -> CheckResult:
    n_paths, T = _sizes(quick, (2000, 2000.0), (400, 500.0))
    stats = [fclt_statistic_hp(simulate_hawkes(REFERENCE_HAWKES, T, seed + i), REFERENCE_HAWKES) for i in range(n_paths)]
    rep = normality_check(stats, 0.01)
    return CheckResult(2, "FCLT for Hawkes: normalised count passes KS at level 0.01", rep.ok,
                       {"n_paths": n_paths, "T": T, **rep.to_dict()})


def random_two_state(rng: np.random.Generator) -> tuple[float, float, float]:
    delta = float(rng.uniform(0.1, 5.0))
    p, pp = rng.uniform(0.01, 0.99, size=2)
    return delta, float(p), float(pp)


def iid_rows_chain(rng: np.random.Generator, n: int = 3) -> MarkovChainSpec:
    pi = rng.dirichlet(np.ones(n))
    return MarkovChainSpec(np.tile(pi, (n, 1)), rng.uniform(-2.0, 3.0, size=n))


def check_sigma_cross_validation(seed: int, quick: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(100):
        delta, p, pp = random_two_state(rng)
        chain = G.two_state_chain(delta, p, pp)
        pi = stationary_distribution(chain)
        a_cf, s2_cf = G.two_state_params(delta, p, pp)
        s2 = G.sigma_squared(chain, pi)
        worst = max(worst, abs(s2 - s2_cf), abs(G.a_star(chain, pi) - a_cf))
    worst_iid = 0.0
    for _ in range(100):
        chain = iid_rows_chain(rng)
        pi = stationary_distribution(chain)
        var = float(pi.pi_star @ (chain.a - pi.pi_star @ chain.a) ** 2)
        worst_iid = max(worst_iid, abs(G.sigma_squared(chain, pi) - var))
    ok = worst < 1e-10 and worst_iid < 1e-12
    return CheckResult(3, "sigma^2: matrix formula vs two-state closed form; i.i.d.-rows reduction", ok,
                       {"max_abs_diff_two_state": worst, "max_abs_diff_iid": worst_iid})


def check_fclt_gchp(seed: int, quick: bool = False) -> CheckResult:
    n_paths, T = _sizes(quick, (2000, 2000.0), (400, 500.0))
    model = reference_gchp()
    params = G.diffusion_params(model)
    inc, _ = gchp_terminals(model, T, n_paths, seed)
    unscaled = (inc - params.drift * T) / math.sqrt(T)
    rep = normality_check(unscaled / params.sigma_bar, 0.01)
    var = float(unscaled.var(ddof=1))
    var_rel = abs(var / params.sigma_bar**2 - 1.0)
    return CheckResult(4, "GCHP pure diffusion limit: KS at 0.01 and variance within 15% of sigma_bar^2",
                       rep.ok and var_rel < 0.15,
                       {"n_paths": n_paths, "T": T, **rep.to_dict(), "unscaled_variance": var,
                        "sigma_bar_sq": params.sigma_bar**2, "variance_relative_error": var_rel})


def check_poisson_reduction(seed: int, quick: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        chain = iid_rows_chain(rng)
        lam = float(rng.uniform(0.2, 5.0))
        params = G.diffusion_params(GCHPModel(HawkesParams(lam, ZeroKernel()), chain))
        pi = chain.P[0]
        target = lam * float(pi @ chain.a**2)
        worst = max(worst, abs(params.sigma_bar**2 - target) / target)
    return CheckResult(5, "Poisson reduction: sigma_bar^2 = lambda E[a^2] for i.i.d. marks", worst < 1e-12,
                       {"max_relative_diff": worst})


def check_finance(seed: int, quick: bool = False) -> CheckResult:
    params = DiffusionParams.from_drift_vol(0.08, 0.2)
    market = FinanceMarket(r=0.0, params=params, x0=1.0)
    pi_star = optimal_fraction_finance(params, 0.0).pi_star
    grid = np.arange(21) * 0.25
    res = grid_search_optimal_pi(market, grid, 1.0, 10_000, seed)
    k = int(np.argmin(np.abs(grid - 2.5)))
    analytic = expected_log_utility(market, pi_star, 1.0)
    z = abs(res.utility_mc[k] - analytic) / res.stderr[k]
    ok = abs(pi_star - 2.5) < 1e-12 and res.best_pi == 2.5 and z < 3.0 and abs(analytic - 0.125) < 1e-12
    return CheckResult(6, "Finance: pi* = 2.5, grid argmax 2.5, MC utility within 3 SE of 0.125", ok,
                       {"pi_star": pi_star, "argmax_pi": res.best_pi, "utility_mc": float(res.utility_mc[k]),
                        "utility_analytic": analytic, "stderr": float(res.stderr[k]), "z": z})


def random_insurance_model(rng: np.random.Generator) -> InsuranceModel:
    sigma_bar = float(rng.uniform(0.1, 5.0))
    lam = float(rng.uniform(0.2, 5.0))
    mu_hat = float(rng.uniform(0.0, 0.9))
    rate = lam / (1 - mu_hat)
    # keep a_star within the count-noise floor implied by sigma_bar
    a_max = sigma_bar * (1 - mu_hat) / math.sqrt(rate)
    params = DiffusionParams.from_drift_vol(float(rng.uniform(0, a_max)) * rate, sigma_bar, lam, mu_hat)
    r = float(rng.uniform(0.0, 0.1))
    return InsuranceModel(u=float(rng.uniform(0.5, 50.0)), c=params.drift + float(rng.uniform(0.01, 5.0)),
                          a=r + float(rng.uniform(-0.2, 0.3)), b=float(rng.uniform(0.05, 1.0)), r=r, params=params)


def worked_insurance_model() -> InsuranceModel:
    """theta = sigma_bar = b = u = 1 and a - r = 1."""
    params = DiffusionParams.from_drift_vol(0.5, 1.0)
    r = 0.05
    return InsuranceModel(u=1.0, c=1.0 - r + params.drift, a=1.0 + r, b=1.0, r=r, params=params)


def check_insurance(seed: int, quick: bool = False) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst_id = worst_quad = worst_hjb = 0.0
    for _ in range(100):
        m = random_insurance_model(rng)
        sol = optimal_fraction_insurance(m)
        excess = m.a - m.r
        lhs = sol.pi * m.u * sol.p * m.b**2
        worst_id = max(worst_id, abs(lhs - excess) / max(abs(excess), 1e-300))
        q = m.sigma_bar**2 * sol.p**2 - 2 * sol.theta * sol.p - excess**2 / m.b**2
        worst_quad = max(worst_quad, abs(q))
        worst_hjb = max(worst_hjb, hjb_first_order_check(m, sol))
    wm = worked_insurance_model()
    wsol = optimal_fraction_insurance(wm)
    p_err = abs(wsol.p - (1 + math.sqrt(2)))
    pi_err = abs(wsol.pi - (math.sqrt(2) - 1))
    ok = worst_id < 1e-12 and worst_quad < 1e-10 and worst_hjb < 1e-10 and p_err < 1e-12 and pi_err < 1e-12
    return CheckResult(7, "Insurance closed form: pi u p b^2 = a - r, p quadratic, HJB first-order, worked case", ok,
                       {"max_identity_rel": worst_id, "max_quadratic_residual": worst_quad,
                        "max_hjb_residual": worst_hjb, "worked_p": wsol.p, "worked_pi": wsol.pi,
                        "worked_theta": wsol.theta, "worked_p_solve": solve_p(wm)})


def check_simulator_oracles(seed: int, quick: bool = False) -> CheckResult:
    # sigma_bar = 0 forces zero claim drift, leaving R' = r R + c
    flat = DiffusionParams.from_limits(0.0, 0.0, 1.0, 0.0)
    m = InsuranceModel(u=5.0, c=1.5, a=0.08, b=0.2, r=0.05, params=flat)
    T = 10.0
    path = simulate_surplus_diffusion(m, 0.0, T, 100_000, seed)
    ode = surplus_mean_ode(m, 0.0, path.times)
    diff_rel = float(np.max(np.abs(path.surplus - ode) / np.abs(ode)))

    claims = GCHPModel(REFERENCE_HAWKES, MarkovChainSpec([[0.5, 0.5], [0.5, 0.5]], [1.0, 2.0]))
    jm = InsuranceModel.from_claims(claims, u=3.0, c=4.0, a=0.08, b=0.2, r=0.0)
    T_tiny = 2.0**-30
    jp = simulate_surplus_jump(jm, 0.0, T_tiny, 8, seed)
    exact = jp.terminal == jm.u + jm.c * T_tiny and jp.ruin_time is None
    return CheckResult(8, "Simulator oracles: diffusion ODE to 1e-8, jump surplus u + cT with no claims",
                       diff_rel < 1e-8 and exact,
                       {"diffusion_max_rel_error": diff_rel, "jump_terminal": jp.terminal,
                        "jump_expected": jm.u + jm.c * T_tiny})


CHECKS = (
    check_lln_hp,
    check_fclt_hp,
    check_sigma_cross_validation,
    check_fclt_gchp,
    check_poisson_reduction,
    check_finance,
    check_insurance,
    check_simulator_oracles,
)

DEFAULT_SEED = 12345


def run_check(fn, seed: int, quick: bool) -> CheckResult:
    # each check gets its own block of per-path seeds
    offset = 1_000_000 * CHECKS.index(fn)
    t0 = time.perf_counter()
    res = fn(seed + offset, quick)
    res.seconds = time.perf_counter() - t0
    return res


def run_suite(seed: int = DEFAULT_SEED, quick: bool = False, log=None) -> tuple[dict, list[CheckResult]]:
    """Run every check; ``log`` (if given) receives one pass/fail line per check."""
    results = []
    for fn in CHECKS:
        res = run_check(fn, seed, quick)
        results.append(res)
        if log is not None:
            log(res.line())
    report = {
        "suite": "quick" if quick else "full",
        "seed": seed,
        "all_passed": all(r.passed for r in results),
        "criteria": [{"id": r.id, "name": r.name, "passed": r.passed, "details": r.details} for r in results],
        "timestamp": timestamp(),
    }
    return report, results
