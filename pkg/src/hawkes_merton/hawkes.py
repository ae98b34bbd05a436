"""One-dimensional Hawkes process with an exponential (or zero) excitation kernel.

The conditional intensity is

    lambda(t) = lambda0 + sum_{t_k < t} mu(t - t_k),   mu(s) = alpha * exp(-beta * s)

and the branching ratio ``mu_hat = alpha / beta`` must be below one.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike, NDArray


@dataclass(frozen=True)
class ExponentialKernel:
    """``mu(s) = alpha * exp(-beta * s)`` for ``s >= 0``."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not self.alpha >= 0.0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if not self.beta > 0.0:
            raise ValueError(f"beta must be positive, got {self.beta}")
        if self.alpha / self.beta >= 1.0:
            raise ValueError(f"branching ratio alpha/beta = {self.alpha / self.beta} must be < 1")

    def __call__(self, s):
        s = np.asarray(s, dtype=np.float64)
        return np.where(s >= 0.0, self.alpha * np.exp(-self.beta * np.maximum(s, 0.0)), 0.0)


@dataclass(frozen=True)
class ZeroKernel:
    """``mu = 0``: the process reduces to a homogeneous Poisson process."""

    def __call__(self, s):
        return np.zeros_like(np.asarray(s, dtype=np.float64))


ExcitationKernel = ExponentialKernel | ZeroKernel


def branching_ratio(kernel: ExcitationKernel) -> float:
    """Integral of the kernel over ``[0, inf)``."""
    if isinstance(kernel, ZeroKernel):
        return 0.0
    return kernel.alpha / kernel.beta


@dataclass(frozen=True)
class HawkesParams:
    lambda0: float
    kernel: ExcitationKernel = ZeroKernel()

    def __post_init__(self):
        if not self.lambda0 > 0.0:
            raise ValueError(f"lambda0 must be positive, got {self.lambda0}")

    @property
    def mu_hat(self) -> float:
        return branching_ratio(self.kernel)

    @property
    def mean_rate(self) -> float:
        """Long-run event rate ``lambda0 / (1 - mu_hat)``."""
        return self.lambda0 / (1.0 - self.mu_hat)


@dataclass(frozen=True, eq=False)
class EventPath:
    """Event times on ``(0, T]``, strictly increasing."""

    T: float
    times: NDArray[np.float64]

    def __post_init__(self):
        times = np.array(self.times, dtype=np.float64).reshape(-1)
        if not self.T > 0.0:
            raise ValueError("horizon T must be positive")
        if times.size:
            if np.any(np.diff(times) <= 0.0):
                raise ValueError("event times must be strictly increasing")
            if times[0] <= 0.0 or times[-1] > self.T:
                raise ValueError("event times must lie in (0, T]")
        times.setflags(write=False)
        object.__setattr__(self, "times", times)

    def __len__(self) -> int:
        return self.times.size

    def count(self, t: float | None = None) -> int:
        """``N(t)``, the number of events at or before ``t`` (default ``T``)."""
        if t is None:
            return self.times.size
        return int(np.searchsorted(self.times, t, side="right"))

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["time"])
            w.writerows([format(t, ".17g")] for t in self.times)
        return path


def intensity_at(params: HawkesParams, history: EventPath | ArrayLike, t: float) -> float:
    """``lambda(t)`` from events strictly before ``t`` (left-continuous)."""
    times = history.times if isinstance(history, EventPath) else np.asarray(history, dtype=np.float64)
    past = times[times < t]
    return params.lambda0 + float(np.sum(params.kernel(t - past)))


class _Stream:
    """Buffered draws from a Generator so the thinning loop avoids per-call overhead."""

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._exp: list[float] = []
        self._uni: list[float] = []

    def pair(self) -> tuple[float, float]:
        if not self._exp:
            self._exp = self._rng.standard_exponential(self._block).tolist()[::-1]
            self._uni = self._rng.random(self._block).tolist()[::-1]
        return self._exp.pop(), self._uni.pop()


def _thin_exponential(lambda0: float, alpha: float, beta: float, T: float, rng: np.random.Generator):
    """Ogata thinning for the exponential kernel.

    The dominating rate is the intensity just after the current point; it
    only decays until the next accepted event. Returns the event times and
    the (left-limit) intensity ``lambda(t_k)`` tracked by the recursion at
    each accepted event.
    """
    stream = _Stream(rng)
    times: list[float] = []
    lam_at: list[float] = []
    t = 0.0
    lam = lambda0  # intensity at t+
    while True:
        e, u = stream.pair()
        w = e / lam
        t += w
        if t > T:
            break
        lam_t = lambda0 + (lam - lambda0) * math.exp(-beta * w)
        if u * lam <= lam_t:
            times.append(t)
            lam_at.append(lam_t)
            lam = lam_t + alpha
        else:
            lam = lam_t
    return np.asarray(times), np.asarray(lam_at)


def _poisson_times(rate: float, T: float, rng: np.random.Generator) -> NDArray[np.float64]:
    n = rng.poisson(rate * T)
    return np.sort(rng.uniform(0.0, T, size=n))


def simulate_hawkes(params: HawkesParams, T: float, seed) -> EventPath:
    """Exact sample of the process on ``(0, T]``.

    ``seed`` is an int or a ``numpy.random.Generator``; the same seed gives
    the same path.
    """
    if not T > 0.0:
        raise ValueError("T must be positive")
    rng = np.random.default_rng(seed)
    if isinstance(params.kernel, ZeroKernel) or params.kernel.alpha == 0.0:
        times = _poisson_times(params.lambda0, T, rng)
        # a uniform draw of exactly 0.0 is outside (0, T]
        times = times[times > 0.0]
    else:
        k = params.kernel
        times, _ = _thin_exponential(params.lambda0, k.alpha, k.beta, T, rng)
    return EventPath(T, times)


def lln_statistic_hp(path: EventPath) -> float:
    """``N(T) / T``."""
    return len(path) / path.T


def fclt_statistic_hp(path: EventPath, params: HawkesParams) -> float:
    """``(N(T) - m T) / sqrt(lambda0 T / (1 - mu_hat)^3)`` with ``m = lambda0 / (1 - mu_hat)``."""
    one_minus = 1.0 - params.mu_hat
    centre = params.lambda0 * path.T / one_minus
    scale = math.sqrt(params.lambda0 * path.T / one_minus**3)
    return (len(path) - centre) / scale
