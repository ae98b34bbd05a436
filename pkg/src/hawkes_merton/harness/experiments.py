"""Config-driven experiments.

Every experiment is a pure function of its config: path ``i`` uses seed
``run.seed + i`` and per-path results are reduced in index order. The only
non-deterministic report field is ``timestamp``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .. import gchp as G
from ..gchp import DiffusionParams, GCHPModel
from ..hawkes import ExponentialKernel, HawkesParams, ZeroKernel, fclt_statistic_hp, simulate_hawkes
from ..markov import MarkovChainSpec
from ..merton_finance import FinanceMarket, grid_search_optimal_pi, optimal_fraction_finance, stock_sde_coefficients
from ..merton_insurance import InsuranceModel, optimal_fraction_insurance, ruin_probability_mc
from . import serialize
from .config import ExperimentConfig
from .stats import normality_check


def build_hawkes(cfg: ExperimentConfig) -> HawkesParams:
    m = cfg.model
    kernel = ExponentialKernel(m.alpha, m.beta) if m.alpha > 0 else ZeroKernel()
    return HawkesParams(m.lambda0, kernel)


def build_chain(cfg: ExperimentConfig) -> MarkovChainSpec:
    m = cfg.model
    if m.delta is not None:
        return G.two_state_chain(m.delta, m.p, m.p_prime)
    return MarkovChainSpec(m.P, m.a)


def build_gchp(cfg: ExperimentConfig) -> GCHPModel:
    return GCHPModel(build_hawkes(cfg), build_chain(cfg), s0=cfg.model.s0, initial_state=cfg.model.initial_state)


def build_params(cfg: ExperimentConfig) -> tuple[DiffusionParams, GCHPModel | None]:
    m = cfg.model
    if m.drift is not None:
        lam = m.lambda0 if m.lambda0 is not None else 1.0
        mu_hat = m.alpha / m.beta
        return DiffusionParams.from_drift_vol(m.drift, m.sigma_bar, lam, mu_hat), None
    model = build_gchp(cfg)
    return G.diffusion_params(model), model


def build_market(cfg: ExperimentConfig) -> FinanceMarket:
    params, model = build_params(cfg)
    return FinanceMarket(r=cfg.market.r, params=params, x0=cfg.market.x0, model=model)


def build_insurance(cfg: ExperimentConfig) -> InsuranceModel:
    params, model = build_params(cfg)
    m, mk = cfg.model, cfg.market
    return InsuranceModel(u=m.u, c=m.c, a=mk.a, b=mk.b, r=mk.r, params=params, claims=model)


@dataclass
class ExperimentResult:
    report: dict
    # name -> (header, rows); written as <name>.csv
    tables: dict = field(default_factory=dict)

    def write(self, out_dir) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        paths = [serialize.write_json(self.report, out / "report.json")]
        for name, (header, rows) in self.tables.items():
            paths.append(serialize.write_rows(out / f"{name}.csv", header, rows))
        return paths


def _mean_se(x: np.ndarray) -> tuple[float, float]:
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size)) if x.size > 1 else float("nan")


def _hp_sample(hp, cfg) -> dict:
    path = simulate_hawkes(hp, cfg.run.T, cfg.run.seed)
    return {"sample_path": (["time"], [(t,) for t in path.times])}


def _gchp_sample(model, cfg) -> dict:
    path = G.simulate_gchp(model, cfg.run.T, cfg.run.seed)
    rows = list(zip(path.times, path.states.tolist(), path.marks, path.cumulative))
    return {"sample_path": (["time", "state", "mark", "cumulative"], rows)}


def _lln_hp(cfg):
    hp = build_hawkes(cfg)
    T, n, seed = cfg.run.T, cfg.run.n_paths, cfg.run.seed
    stats = np.array([len(simulate_hawkes(hp, T, seed + i)) / T for i in range(n)])
    mean, se = _mean_se(stats)
    target = hp.mean_rate
    report = {"mean_rate": mean, "stderr": se, "target": target, "relative_error": abs(mean - target) / target}
    return report, {"statistics": (["path", "rate"], list(enumerate(stats))), **_hp_sample(hp, cfg)}


def _fclt_hp(cfg):
    hp = build_hawkes(cfg)
    T, n, seed = cfg.run.T, cfg.run.n_paths, cfg.run.seed
    stats = np.array([fclt_statistic_hp(simulate_hawkes(hp, T, seed + i), hp) for i in range(n)])
    rep = normality_check(stats, cfg.run.level)
    return {"normality": rep.to_dict()}, {"statistics": (["path", "statistic"], list(enumerate(stats))),
                                          **_hp_sample(hp, cfg)}


def gchp_terminals(model: GCHPModel, T: float, n_paths: int, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """``S(T) - s0`` and ``N(T)`` for paths ``seed + i``."""
    inc = np.empty(n_paths)
    counts = np.empty(n_paths)
    for i in range(n_paths):
        path = G.simulate_gchp(model, T, seed + i)
        inc[i] = path.terminal - path.s0
        counts[i] = len(path)
    return inc, counts


def _lln_gchp(cfg):
    model = build_gchp(cfg)
    params = G.diffusion_params(model)
    T = cfg.run.T
    inc, _ = gchp_terminals(model, T, cfg.run.n_paths, cfg.run.seed)
    mean, se = _mean_se(inc / T)
    report = {"mean_rate": mean, "stderr": se, "target": params.drift,
              "relative_error": abs(mean - params.drift) / abs(params.drift) if params.drift else None}
    return report, {"statistics": (["path", "rate"], list(enumerate(inc / T))), **_gchp_sample(model, cfg)}


def _fclt_gchp(cfg):
    model = build_gchp(cfg)
    params = G.diffusion_params(model)
    T = cfg.run.T
    inc, counts = gchp_terminals(model, T, cfg.run.n_paths, cfg.run.seed)
    unscaled = (inc - params.drift * T) / math.sqrt(T)
    stats = unscaled / params.sigma_bar
    report = {
        "params": params.to_dict(),
        "normality": normality_check(stats, cfg.run.level).to_dict(),
        "unscaled_variance": float(unscaled.var(ddof=1)),
        "sigma_bar_sq": params.sigma_bar**2,
    }
    if params.sigma_star > 0:
        # mark-only fluctuation, centred on the realised count
        jd = (inc - counts * params.a_star) / math.sqrt(T) / params.sigma_star
        report["jump_diffusion_diagnostic"] = normality_check(jd, cfg.run.level).to_dict()
    return report, {"statistics": (["path", "statistic"], list(enumerate(stats))), **_gchp_sample(model, cfg)}


def _params(cfg):
    model = build_gchp(cfg)
    report = {"diffusion_params": G.diffusion_params(model).to_dict()}
    m = cfg.model
    if m.delta is not None:
        a_cf, s2_cf = G.two_state_params(m.delta, m.p, m.p_prime)
        s2 = report["diffusion_params"]["sigma"] ** 2
        report["two_state_closed_form"] = {
            "a_star": a_cf,
            "sigma_sq": s2_cf,
            "agrees_with_matrix_formula": bool(abs(s2 - s2_cf) <= 1e-10 * max(1.0, s2)),
            "convention": "state 1 = +delta stays w.p. p; state 2 = -delta stays w.p. p_prime",
        }
    return report, {}


def _finance(cfg):
    market = build_market(cfg)
    run = cfg.run
    res = grid_search_optimal_pi(market, run.pi_grid, run.T, run.n_paths, run.seed, run.n_steps or 1)
    mu_e, vol = stock_sde_coefficients(market.params)
    grid = [
        {"pi": float(p), "utility_mc": float(u), "utility_analytic": float(ua), "stderr": float(se)}
        for p, u, ua, se in zip(res.pi_grid, res.utility_mc, res.utility_analytic, res.stderr)
    ]
    report = {
        "pi_star": optimal_fraction_finance(market.params, market.r).pi_star,
        "mu_e": mu_e,
        "sigma_bar": vol,
        "r": market.r,
        "grid": grid,
        "argmax_pi": res.best_pi,
    }
    rows = [(g["pi"], g["utility_mc"], g["utility_analytic"], g["stderr"]) for g in grid]
    return report, {"grid": (["pi", "utility_mc", "utility_analytic", "stderr"], rows)}


def _insurance(cfg):
    model = build_insurance(cfg)
    return optimal_fraction_insurance(model).to_dict(model), {}


def _ruin(cfg):
    model = build_insurance(cfg)
    run = cfg.run
    sol = optimal_fraction_insurance(model)
    pi = sol.pi if run.pi is None else run.pi
    est = ruin_probability_mc(model, pi, run.T, run.n_paths, run.n_steps, run.seed, run.mode)
    report = {
        "mode": run.mode,
        "pi": pi,
        "ruin_probability": est.probability,
        "stderr": est.stderr,
        "n_paths": est.n_paths,
        "terminal_mean": est.terminal_mean,
        "terminal_stderr": est.terminal_stderr,
    }
    return report, {}


_DISPATCH = {
    "lln_hp": _lln_hp,
    "fclt_hp": _fclt_hp,
    "lln_gchp": _lln_gchp,
    "fclt_gchp": _fclt_gchp,
    "params": _params,
    "finance_opt": _finance,
    "insurance_opt": _insurance,
    "ruin": _ruin,
}


def timestamp() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def run_experiment(cfg: ExperimentConfig, out_dir=None) -> ExperimentResult:
    """Run ``cfg.kind``; write ``report.json`` and CSV tables when ``out_dir`` is given."""
    body, tables = _DISPATCH[cfg.kind](cfg)
    report = {"kind": cfg.kind, "seed": cfg.run.seed, "result": body, "timestamp": timestamp()}
    result = ExperimentResult(report, tables)
    if out_dir is not None:
        result.write(out_dir)
    return result
