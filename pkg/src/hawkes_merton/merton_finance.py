"""Log-utility Merton problem for a bond and a GCHP-driven stock.

Under the diffusion approximation the stock is a geometric Brownian motion

    dS = S [(drift + sigma_bar^2 / 2) dt + sigma_bar dW]

and wealth with a constant fraction ``pi`` in the stock satisfies

    dX = X [(r + pi (mu_e - r)) dt + pi sigma_bar dW],   mu_e = drift + sigma_bar^2 / 2.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import ZeroVolatility
from .gchp import DiffusionParams, GCHPModel, diffusion_params


@dataclass(frozen=True)
class FinanceMarket:
    """Risk-free rate ``r`` and the approximated stock.

    Build from a :class:`GCHPModel` with :meth:`from_model`, or pass
    ``params`` directly for a market specified at the diffusion level.
    """

    r: float
    params: DiffusionParams
    x0: float = 1.0
    b0: float = 1.0
    model: GCHPModel | None = None

    def __post_init__(self):
        if not self.x0 > 0:
            raise ValueError(f"x0 must be positive, got {self.x0}")
        if not self.b0 > 0:
            raise ValueError(f"b0 must be positive, got {self.b0}")
        if not math.isfinite(self.mu_e):
            raise ValueError("effective stock drift is not finite")
        if self.model is not None:
            fresh = diffusion_params(self.model)
            for key, val in fresh.to_dict().items():
                if not math.isclose(val, self.params.to_dict()[key], rel_tol=1e-12, abs_tol=1e-15):
                    raise ValueError(f"params.{key} inconsistent with model")

    @classmethod
    def from_model(cls, model: GCHPModel, r: float, x0: float = 1.0, b0: float = 1.0) -> "FinanceMarket":
        return cls(r=r, params=diffusion_params(model), x0=x0, b0=b0, model=model)

    @property
    def mu_e(self) -> float:
        return stock_sde_coefficients(self.params)[0]

    @property
    def sigma_bar(self) -> float:
        return self.params.sigma_bar


@dataclass(frozen=True)
class FinanceStrategy:
    pi_star: float


def stock_sde_coefficients(params: DiffusionParams) -> tuple[float, float]:
    """``(mu_e, sigma_bar)``: drift carries the Ito correction ``sigma_bar^2 / 2``."""
    return params.drift + 0.5 * params.sigma_bar**2, params.sigma_bar


def optimal_fraction_finance(params: DiffusionParams, r: float) -> FinanceStrategy:
    """``pi* = (mu_e - r) / sigma_bar^2``."""
    if params.sigma_bar == 0.0:
        raise ZeroVolatility("sigma_bar = 0: log-optimal fraction undefined")
    mu_e, vol = stock_sde_coefficients(params)
    return FinanceStrategy((mu_e - r) / vol**2)


def log_growth_rate(market: FinanceMarket, pi: float) -> float:
    return market.r + pi * (market.mu_e - market.r) - 0.5 * pi**2 * market.sigma_bar**2


def expected_log_utility(market: FinanceMarket, pi: float, T: float) -> float:
    """``E log X_T = log x0 + (r + pi (mu_e - r) - pi^2 sigma_bar^2 / 2) T``."""
    return math.log(market.x0) + log_growth_rate(market, pi) * T


@dataclass(frozen=True, eq=False)
class WealthPath:
    times: NDArray[np.float64]
    wealth: NDArray[np.float64]

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time", "wealth"])
            for k, (t, x) in enumerate(zip(self.times, self.wealth)):
                w.writerow([k, format(t, ".17g"), format(x, ".17g")])
        return path


def _log_wealth_increments(market: FinanceMarket, pi: float, dt: float, Z: NDArray[np.float64]) -> NDArray[np.float64]:
    return log_growth_rate(market, pi) * dt + pi * market.sigma_bar * math.sqrt(dt) * Z


def simulate_wealth(market: FinanceMarket, pi: float, T: float, n_steps: int, seed) -> WealthPath:
    """Exact log-normal stepping of the wealth SDE on ``n_steps`` equal steps."""
    if not T > 0 or n_steps < 1:
        raise ValueError("need T > 0 and n_steps >= 1")
    dt = T / n_steps
    Z = np.random.default_rng(seed).standard_normal(n_steps)
    logx = math.log(market.x0) + np.concatenate(([0.0], np.cumsum(_log_wealth_increments(market, pi, dt, Z))))
    # positive by construction; exp may still underflow to 0.0 under extreme leverage
    assert np.all(np.isfinite(logx))
    return WealthPath(np.linspace(0.0, T, n_steps + 1), np.exp(logx))


def simulate_stock(market: FinanceMarket, T: float, n_steps: int, seed, s0: float = 1.0) -> NDArray[np.float64]:
    """Approximated stock price on the same grid and noise stream as :func:`simulate_wealth`."""
    dt = T / n_steps
    Z = np.random.default_rng(seed).standard_normal(n_steps)
    mu_e, vol = stock_sde_coefficients(market.params)
    inc = (mu_e - 0.5 * vol**2) * dt + vol * math.sqrt(dt) * Z
    return s0 * np.exp(np.concatenate(([0.0], np.cumsum(inc))))


@dataclass(frozen=True)
class GridSearchResult:
    best_pi: float
    pi_grid: NDArray[np.float64]
    utility_mc: NDArray[np.float64]
    stderr: NDArray[np.float64]
    utility_analytic: NDArray[np.float64]


def terminal_log_wealth(market: FinanceMarket, pi_grid: ArrayLike, T: float, n_paths: int, seed, n_steps: int = 1):
    """``log X_T`` for each grid point (rows) and path (columns).

    Path ``i`` draws its normals from ``default_rng(seed + i)``, and every
    grid point reuses the same draws (common random numbers).
    """
    pis = np.asarray(pi_grid, dtype=np.float64).reshape(-1)
    dt = T / n_steps
    # only the sum of a path's normals matters for log X_T
    zsum = np.array([np.random.default_rng(seed + i).standard_normal(n_steps).sum() for i in range(n_paths)])
    growth = np.array([log_growth_rate(market, p) for p in pis])
    return math.log(market.x0) + growth[:, None] * T + (pis * market.sigma_bar * math.sqrt(dt))[:, None] * zsum[None, :]


def grid_search_optimal_pi(market: FinanceMarket, pi_grid: ArrayLike, T: float, n_paths: int, seed, n_steps: int = 1) -> GridSearchResult:
    """Monte Carlo ``E log X_T`` over ``pi_grid``; returns the argmax.

    Ties resolve to the first grid point.
    """
    pis = np.asarray(pi_grid, dtype=np.float64).reshape(-1)
    if pis.size == 0 or n_paths < 1:
        raise ValueError("need a non-empty grid and n_paths >= 1")
    logx = terminal_log_wealth(market, pis, T, n_paths, seed, n_steps)
    mean = logx.mean(axis=1)
    se = logx.std(axis=1, ddof=1) / math.sqrt(n_paths) if n_paths > 1 else np.full(pis.size, np.nan)
    analytic = np.array([expected_log_utility(market, p, T) for p in pis])
    return GridSearchResult(float(pis[int(np.argmax(mean))]), pis, mean, se, analytic)
