"""General compound Hawkes process (GCHP) and its diffusion limit.

``S(t) = s0 + sum_{i <= N(t)} a(X_i)`` with ``N`` a Hawkes counter and
``X_i`` an ergodic Markov chain independent of ``N``. For large ``t``

    S(t) ~ s0 + drift * t + sigma_bar * W(t)

where ``drift = a_star * lambda0 / (1 - mu_hat)`` and

    sigma_bar^2 = sigma^2 * lambda0 / (1 - mu_hat) + a_star^2 * lambda0 / (1 - mu_hat)^3.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import DegenerateChain, NonErgodicChain, SigmaBarZero
from .hawkes import HawkesParams, simulate_hawkes
from .markov import (
    MarkovChainSpec,
    StationaryDistribution,
    draw_stationary_state,
    fundamental_solve,
    is_ergodic,
    simulate_chain,
    stationary_distribution,
)


@dataclass(frozen=True)
class GCHPModel:
    hawkes: HawkesParams
    chain: MarkovChainSpec
    s0: float = 0.0
    initial_state: int | None = None  # None: draw X_0 from the stationary law

    def __post_init__(self):
        if not is_ergodic(self.chain):
            raise NonErgodicChain("GCHP mark chain must be ergodic")
        if self.initial_state is not None and not 1 <= self.initial_state <= self.chain.n:
            raise ValueError(f"initial_state {self.initial_state} not in 1..{self.chain.n}")


@dataclass(frozen=True)
class DiffusionParams:
    """Limit quantities of the pure diffusion approximation.

    ``lambda0`` and ``mu_hat`` are carried along so that downstream closed
    forms can be evaluated without the originating model.
    """

    a_star: float
    sigma: float
    sigma_star: float
    sigma_bar: float
    drift: float
    lambda0: float
    mu_hat: float

    def __post_init__(self):
        if self.sigma < 0 or self.sigma_star < 0:
            raise ValueError("sigma and sigma_star must be non-negative")
        rate = self.lambda0 / (1.0 - self.mu_hat)
        expected = self.sigma_star**2 + self.a_star**2 * rate / (1.0 - self.mu_hat) ** 2
        if not math.isclose(self.sigma_bar**2, expected, rel_tol=1e-12, abs_tol=1e-300):
            raise ValueError("sigma_bar inconsistent with sigma_star and a_star")

    @classmethod
    def from_limits(cls, a_star: float, sigma: float, lambda0: float, mu_hat: float) -> "DiffusionParams":
        rate = lambda0 / (1.0 - mu_hat)
        sigma_star = sigma * math.sqrt(rate)
        sigma_bar = math.sqrt(sigma_star**2 + a_star**2 * rate / (1.0 - mu_hat) ** 2)
        return cls(a_star, sigma, sigma_star, sigma_bar, a_star * rate, lambda0, mu_hat)

    @classmethod
    def from_drift_vol(cls, drift: float, sigma_bar: float, lambda0: float = 1.0, mu_hat: float = 0.0) -> "DiffusionParams":
        """Back out ``a_star`` and ``sigma`` from a target drift and total volatility.

        Useful when a market is specified directly at the diffusion level.
        Requires ``sigma_bar^2 >= drift^2 / rate`` (the count-noise floor).
        """
        rate = lambda0 / (1.0 - mu_hat)
        a_star = drift / rate
        count_var = a_star**2 * rate / (1.0 - mu_hat) ** 2
        if sigma_bar**2 < count_var * (1.0 - 1e-12):
            raise ValueError(
                f"sigma_bar^2 = {sigma_bar**2} is below the count-noise floor {count_var} for this drift"
            )
        sigma_star = math.sqrt(max(sigma_bar**2 - count_var, 0.0))
        return cls(a_star, sigma_star / math.sqrt(rate), sigma_star, sigma_bar, drift, lambda0, mu_hat)

    @property
    def rate(self) -> float:
        return self.lambda0 / (1.0 - self.mu_hat)

    def to_dict(self) -> dict:
        return {
            "a_star": self.a_star,
            "sigma": self.sigma,
            "sigma_star": self.sigma_star,
            "sigma_bar": self.sigma_bar,
            "drift": self.drift,
            "mu_hat": self.mu_hat,
            "lambda": self.lambda0,
        }


@dataclass(frozen=True, eq=False)
class MarkedEventPath:
    T: float
    times: NDArray[np.float64]
    states: NDArray[np.int64]
    marks: NDArray[np.float64]
    s0: float = 0.0
    cumulative: NDArray[np.float64] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "cumulative", self.s0 + np.cumsum(self.marks))

    def __len__(self) -> int:
        return self.times.size

    @property
    def terminal(self) -> float:
        """``S(T)``."""
        return float(self.cumulative[-1]) if self.times.size else self.s0

    def value_at(self, t: float) -> float:
        k = int(np.searchsorted(self.times, t, side="right"))
        return self.s0 if k == 0 else float(self.cumulative[k - 1])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time", "state", "mark", "cumulative"])
            for t, s, m, c in zip(self.times, self.states, self.marks, self.cumulative):
                w.writerow([format(t, ".17g"), int(s), format(m, ".17g"), format(c, ".17g")])
        return path


def a_star(chain: MarkovChainSpec, pi_star: StationaryDistribution) -> float:
    """Stationary mean mark."""
    return float(pi_star.pi_star @ chain.a)


def sigma_squared(chain: MarkovChainSpec, pi_star: StationaryDistribution | None = None) -> float:
    """Asymptotic variance per event of the mark sum.

    ``sigma^2 = sum_i pi_i v(i)`` with ``b = a - a_star``,
    ``g = (P + Pi* - I)^{-1} b`` and

        v(i) = b_i^2 + sum_j (g_j - g_i)^2 P_ij - 2 b_i sum_j (g_j - g_i) P_ij.
    """
    if pi_star is None:
        pi_star = stationary_distribution(chain)
    b = chain.a - a_star(chain, pi_star)
    g = fundamental_solve(chain, pi_star, b)
    dg = g[None, :] - g[:, None]  # dg[i, j] = g_j - g_i
    P = chain.P
    v = b**2 + np.sum(dg**2 * P, axis=1) - 2.0 * b * np.sum(dg * P, axis=1)
    # exact value is >= 0; clip round-off
    return max(float(pi_star.pi_star @ v), 0.0)


def diffusion_params(model: GCHPModel) -> DiffusionParams:
    pi = stationary_distribution(model.chain)
    return DiffusionParams.from_limits(
        a_star(model.chain, pi),
        math.sqrt(sigma_squared(model.chain, pi)),
        model.hawkes.lambda0,
        model.hawkes.mu_hat,
    )


def two_state_chain(delta: float, p: float, p_prime: float) -> MarkovChainSpec:
    """Chain on marks ``(+delta, -delta)``; ``p`` and ``p_prime`` are the stay probabilities.

    State 1 carries ``+delta`` and stays with probability ``p``; state 2
    carries ``-delta`` and stays with probability ``p_prime``. This is the
    labelling under which :func:`two_state_params` agrees with the general
    matrix formula.
    """
    return MarkovChainSpec([[p, 1.0 - p], [1.0 - p_prime, p_prime]], [delta, -delta])


def two_state_params(delta: float, p: float, p_prime: float) -> tuple[float, float]:
    """Closed-form ``(a_star, sigma^2)`` for :func:`two_state_chain`.

    With ``pi = (1 - p') / (2 - p - p')`` the stationary weight of ``+delta``:

        a_star  = delta * (2 pi - 1)
        sigma^2 = 4 delta^2 * ((1 - p' + pi (p' - p)) / (p + p' - 2)^2 - pi (1 - pi))
    """
    if p == 1.0 and p_prime == 1.0:
        raise DegenerateChain("p = p' = 1: both states absorbing")
    if not (0.0 <= p <= 1.0 and 0.0 <= p_prime <= 1.0):
        raise ValueError("p and p_prime must lie in [0, 1]")
    pi = (1.0 - p_prime) / (2.0 - p - p_prime)
    a = delta * (2.0 * pi - 1.0)
    s2 = 4.0 * delta**2 * ((1.0 - p_prime + pi * (p_prime - p)) / (p + p_prime - 2.0) ** 2 - pi * (1.0 - pi))
    return a, s2


def simulate_gchp(model: GCHPModel, T: float, seed) -> MarkedEventPath:
    """Hawkes event times with one chain step per event.

    The Hawkes times, the initial mark state and the chain transitions are
    drawn in that order from one generator built from ``seed``.
    """
    rng = np.random.default_rng(seed)
    events = simulate_hawkes(model.hawkes, T, rng)
    if model.initial_state is None:
        x0 = draw_stationary_state(stationary_distribution(model.chain), rng)
    else:
        x0 = model.initial_state
    states = simulate_chain(model.chain, len(events), x0, rng)
    marks = model.chain.a[states - 1]
    return MarkedEventPath(T, events.times, states, marks, model.s0)


def fclt_statistic_gchp(path: MarkedEventPath, params: DiffusionParams) -> float:
    """``(S(T) - s0 - drift T) / (sigma_bar sqrt(T))``."""
    if params.sigma_bar == 0.0:
        raise SigmaBarZero("sigma_bar = 0: statistic undefined")
    return (path.terminal - path.s0 - params.drift * path.T) / (params.sigma_bar * math.sqrt(path.T))


def jump_diffusion_statistic(path: MarkedEventPath, params: DiffusionParams) -> float:
    """``(S(T) - s0 - N(T) a_star) / sqrt(T)``: the mark-only fluctuation.

    Asymptotically ``N(0, sigma_star^2)``; the count fluctuation is removed
    by centring on the realised event count.
    """
    return (path.terminal - path.s0 - len(path) * params.a_star) / math.sqrt(path.T)


@dataclass(frozen=True, eq=False)
class DiffusionPath:
    times: NDArray[np.float64]
    values: NDArray[np.float64]


def approximate_diffusion_path(params: DiffusionParams, s0: float, T: float, dt: float, seed) -> DiffusionPath:
    """Sample ``s0 + drift t + sigma_bar W(t)`` on a uniform grid.

    The number of steps is ``ceil(T / dt)``; the last step is shortened to
    land on ``T``. Brownian increments are exact, so there is no
    discretisation error at grid points.
    """
    if not (T > 0 and dt > 0):
        raise ValueError("T and dt must be positive")
    n = max(1, math.ceil(T / dt - 1e-12))
    times = np.minimum(np.arange(n + 1) * dt, T)
    h = np.diff(times)
    rng = np.random.default_rng(seed)
    dW = rng.standard_normal(n) * np.sqrt(h)
    values = s0 + params.drift * times + params.sigma_bar * np.concatenate(([0.0], np.cumsum(dW)))
    return DiffusionPath(times, values)
