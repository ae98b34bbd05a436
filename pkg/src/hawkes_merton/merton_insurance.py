"""Optimal investment of an insurer's surplus with GCHP claims.

The claim stream ``G(t) = sum a(X_i)`` is replaced by its diffusion limit
``drift t + sigma_bar W_1(t)``. With a constant fraction ``pi`` of the
surplus held in a GBM asset ``dS = S (a dt + b dW)`` the surplus follows

    dR = [R (r + (a - r) pi) + (c - drift)] dt + sqrt(R^2 b^2 pi^2 + sigma_bar^2) dW_2

Exponential utility ``U(x) = -exp(-p x)`` gives a constant optimal fraction
(with ``x = u`` the initial capital):

    theta = x r + (c - drift)
    p     = (theta + sqrt(theta^2 + sigma_bar^2 (a - r)^2 / b^2)) / sigma_bar^2
    pi    = (a - r) / (x p b^2)
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.typing import NDArray

from .errors import ZeroVolatility
from .gchp import DiffusionParams, GCHPModel, diffusion_params, simulate_gchp


@dataclass(frozen=True)
class InsuranceModel:
    """Insurer with premium rate ``c``, initial capital ``u`` and claims from a GCHP.

    ``a``, ``b`` are the drift and volatility of the risky asset and ``r``
    the bank rate. ``params`` is the diffusion approximation of the claim
    stream; ``claims`` is optional and only needed for jump simulation.
    """

    u: float
    c: float
    a: float
    b: float
    r: float
    params: DiffusionParams
    claims: GCHPModel | None = None

    def __post_init__(self):
        if not self.u > 0:
            raise ValueError(f"initial capital u must be positive, got {self.u}")
        if not self.b > 0:
            raise ValueError(f"asset volatility b must be positive, got {self.b}")
        if not self.c > self.params.drift:
            raise ValueError(
                f"safety loading violated: c = {self.c} <= expected claim rate {self.params.drift}"
            )
        if self.claims is not None and np.any(self.claims.chain.a < 0):
            raise ValueError("claim marks must be non-negative")

    @classmethod
    def from_claims(cls, claims: GCHPModel, u: float, c: float, a: float, b: float, r: float) -> "InsuranceModel":
        return cls(u=u, c=c, a=a, b=b, r=r, params=diffusion_params(claims), claims=claims)

    @property
    def drift_claims(self) -> float:
        return self.params.drift

    @property
    def sigma_bar(self) -> float:
        return self.params.sigma_bar

    @property
    def safety_loading_margin(self) -> float:
        return self.c - self.params.drift


@dataclass(frozen=True)
class InsuranceSolution:
    theta: float
    p: float
    pi: float
    p_constraint_ok: bool

    def to_dict(self, model: InsuranceModel) -> dict:
        return {
            "theta": self.theta,
            "p": self.p,
            "p_constraint_ok": self.p_constraint_ok,
            "pi": self.pi,
            "sigma_bar": model.sigma_bar,
            "drift_claims": model.drift_claims,
            "safety_loading_margin": model.safety_loading_margin,
        }


def theta(model: InsuranceModel, x: float | None = None) -> float:
    """``x r + (c - drift)``; ``x`` defaults to the initial capital."""
    x = model.u if x is None else x
    return x * model.r + (model.c - model.drift_claims)


def solve_p(model: InsuranceModel) -> float:
    """Positive root of ``sigma_bar^2 p^2 - 2 theta p - (a - r)^2 / b^2 = 0``."""
    s2 = model.sigma_bar**2
    if s2 == 0.0:
        raise ZeroVolatility("sigma_bar = 0: risk-aversion parameter undefined")
    th = theta(model)
    return (th + math.sqrt(th**2 + s2 * (model.a - model.r) ** 2 / model.b**2)) / s2


def p_constraint_ok(model: InsuranceModel, p: float) -> bool:
    """Whether ``0 < p < 2 u r / sigma_bar^2`` holds."""
    return 0.0 < p < 2.0 * model.u * model.r / model.sigma_bar**2


def _closed_form_pi(excess: float, x, b: float, sigma_bar: float, th):
    return sigma_bar**2 * excess / (x * b * (th * b + np.sqrt(th**2 * b**2 + sigma_bar**2 * excess**2)))


def optimal_fraction_insurance(model: InsuranceModel) -> InsuranceSolution:
    if model.sigma_bar == 0.0:
        raise ZeroVolatility("sigma_bar = 0: optimal fraction undefined")
    th = theta(model)
    p = solve_p(model)
    pi = float(_closed_form_pi(model.a - model.r, model.u, model.b, model.sigma_bar, th))
    return InsuranceSolution(theta=th, p=p, pi=pi, p_constraint_ok=p_constraint_ok(model, p))


def poisson_optimal_fraction(lambda0: float, second_moment: float, c: float, u: float, r: float,
                             a: float, b: float, first_moment: float) -> float:
    """Optimal fraction when claims are compound Poisson with i.i.d. sizes.

    Evaluates the general closed form with ``sigma_bar^2 = lambda0 E[X^2]``
    and ``drift = lambda0 E[X]``.
    """
    if not second_moment > 0 or not b > 0 or not u > 0:
        raise ValueError("need E[X^2] > 0, b > 0 and u > 0")
    drift = lambda0 * first_moment
    if not c > drift:
        raise ValueError(f"safety loading violated: c = {c} <= lambda0 E[X] = {drift}")
    th = u * r + (c - drift)
    return float(_closed_form_pi(a - r, u, b, math.sqrt(lambda0 * second_moment), th))


def generator_coefficients(model: InsuranceModel, pi: float, x: float) -> tuple[float, float]:
    """First- and second-order coefficients of the surplus generator at level ``x``."""
    first = x * (model.r + (model.a - model.r) * pi) + (model.c - model.drift_claims)
    second = 0.5 * (x**2 * model.b**2 * pi**2 + model.sigma_bar**2)
    return first, second


def hjb_first_order_check(model: InsuranceModel, solution: InsuranceSolution) -> float:
    """Residual of the first-order condition for ``pi`` at ``x = u``.

    For ``v = -exp(-p x)`` the ``pi``-dependent part of the generator
    applied to ``v``, divided by ``p exp(-p x)``, is
    ``h(pi) = x (a - r) pi - (p / 2) x^2 b^2 pi^2``. Returns the larger of
    ``|h'(pi)|`` and the gap between ``pi`` and the vertex of ``h``.
    """
    x, p = model.u, solution.p
    excess = model.a - model.r
    slope = x * excess - p * x**2 * model.b**2 * solution.pi
    vertex = excess / (x * p * model.b**2)
    return max(abs(slope), abs(vertex - solution.pi))


def hjb_objective(model: InsuranceModel, p: float, pi: float, x: float | None = None) -> float:
    """``h(pi)`` from :func:`hjb_first_order_check`."""
    x = model.u if x is None else x
    return x * (model.a - model.r) * pi - 0.5 * p * x**2 * model.b**2 * pi**2


@dataclass(frozen=True, eq=False)
class SurplusPath:
    """Surplus on a uniform grid; values after ruin are frozen at the ruin level."""

    times: NDArray[np.float64]
    surplus: NDArray[np.float64]
    ruined: NDArray[np.bool_]
    ruin_time: float | None

    @property
    def terminal(self) -> float:
        return float(self.surplus[-1])

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["step", "time", "surplus", "ruined"])
            for k, (t, x, z) in enumerate(zip(self.times, self.surplus, self.ruined)):
                w.writerow([k, format(t, ".17g"), format(x, ".17g"), int(z)])
        return path


def _feedback_pi(model: InsuranceModel, x: NDArray[np.float64]) -> NDArray[np.float64]:
    x = np.maximum(x, 1e-12)
    th = x * model.r + (model.c - model.drift_claims)
    return _closed_form_pi(model.a - model.r, x, model.b, model.sigma_bar, th)


def _diffusion_block(model: InsuranceModel, pi: float, T: float, Z: NDArray[np.float64],
                     scheme: str, feedback: bool):
    """Step a block of paths; ``Z`` has shape (n_paths, n_steps).

    Returns (surplus grid values, index of first ruined grid point or -1).
    """
    n_paths, n_steps = Z.shape
    dt = T / n_steps
    sq = math.sqrt(dt)
    k = model.c - model.drift_claims
    s2 = model.sigma_bar**2
    b2 = model.b**2
    R = np.empty((n_paths, n_steps + 1))
    R[:, 0] = model.u
    ruin_idx = np.full(n_paths, -1, dtype=np.int64)
    alive = np.ones(n_paths, dtype=bool)
    x = R[:, 0].copy()
    pis = np.full(n_paths, float(pi))
    for j in range(n_steps):
        if feedback:
            pis = _feedback_pi(model, x)
        kappa = model.r + (model.a - model.r) * pis
        vol = np.sqrt(x**2 * b2 * pis**2 + s2)
        if scheme == "exponential":
            # affine drift integrated exactly over the step
            growth = np.exp(kappa * dt)
            phi = np.where(kappa != 0.0, np.expm1(kappa * dt) / np.where(kappa != 0.0, kappa, 1.0), dt)
            nxt = x * growth + k * phi + vol * sq * Z[:, j]
        else:
            nxt = x + (x * kappa + k) * dt + vol * sq * Z[:, j]
        x = np.where(alive, nxt, x)
        hit = alive & (x <= 0.0)
        ruin_idx[hit] = j + 1
        alive &= ~hit
        R[:, j + 1] = x
    return R, ruin_idx


def _check_grid(T: float, n_steps: int):
    if not T > 0 or n_steps < 1:
        raise ValueError("need T > 0 and n_steps >= 1")


def _surplus_path(times, R, ruin_idx, ruin_time=None) -> SurplusPath:
    ruined = np.zeros(times.size, dtype=bool)
    if ruin_idx >= 0:
        ruined[ruin_idx:] = True
        if ruin_time is None:
            ruin_time = float(times[ruin_idx])
    return SurplusPath(times, R, ruined, ruin_time)


def simulate_surplus_diffusion(model: InsuranceModel, pi: float, T: float, n_steps: int, seed,
                               scheme: str = "exponential", feedback: bool = False) -> SurplusPath:
    """Diffusion-approximated surplus on ``n_steps`` equal steps, absorbed at ``R <= 0``.

    ``scheme="exponential"`` integrates the affine drift exactly and freezes
    the diffusion coefficient at the left end of each step;
    ``scheme="euler"`` is plain Euler-Maruyama. ``feedback=True`` re-solves
    the closed-form fraction with ``x = R(t)`` at every step (``pi`` is then
    ignored); no optimality is claimed for it.
    """
    _check_grid(T, n_steps)
    if scheme not in ("exponential", "euler"):
        raise ValueError(f"unknown scheme {scheme!r}")
    Z = np.random.default_rng(seed).standard_normal(n_steps)
    R, idx = _diffusion_block(model, pi, T, Z[None, :], scheme, feedback)
    return _surplus_path(np.linspace(0.0, T, n_steps + 1), R[0], int(idx[0]))


def _jump_path(model: InsuranceModel, pi: float, T: float, n_steps: int, rng: np.random.Generator) -> SurplusPath:
    if model.claims is None:
        raise ValueError("jump simulation needs the claims GCHP model")
    claims = simulate_gchp(model.claims, T, rng)
    grid = np.linspace(0.0, T, n_steps + 1)
    # breakpoints: grid times and claim epochs; a claim is paid at the end of its interval
    pts = np.concatenate((grid, claims.times))
    is_grid = np.concatenate((np.ones(grid.size, bool), np.zeros(claims.times.size, bool)))
    pay = np.concatenate((np.zeros(grid.size), claims.marks))
    order = np.argsort(pts, kind="stable")
    pts, is_grid, pay = pts[order], is_grid[order], pay[order]
    h = np.diff(pts)
    kappa = model.r + (model.a - model.r) * pi
    vol = pi * model.b
    Z = rng.standard_normal(h.size)
    G = np.exp((kappa - 0.5 * vol**2) * h + vol * np.sqrt(h) * Z)
    d = model.c * h - pay[1:]
    # R_{j+1} = G_j R_j + d_j, solved in closed form via the running product
    P = np.concatenate(([1.0], np.cumprod(G)))
    R = P * (model.u + np.concatenate(([0.0], np.cumsum(d / P[1:]))))
    if np.all(G == 1.0):
        # pure premium/claim bookkeeping: avoid the division round trip
        R = model.u + np.concatenate(([0.0], np.cumsum(d)))
    hit = np.flatnonzero(R <= 0.0)
    ruin_time = None
    if hit.size:
        j = int(hit[0])
        ruin_time = float(pts[j])
        R[j:] = R[j]
    grid_R = R[is_grid]
    ruin_grid = -1
    if ruin_time is not None:
        ruin_grid = int(np.searchsorted(grid, ruin_time, side="left"))
    return _surplus_path(grid, grid_R, ruin_grid, ruin_time)


def simulate_surplus_jump(model: InsuranceModel, pi: float, T: float, n_steps: int, seed) -> SurplusPath:
    """Surplus with the actual GCHP claim jumps.

    Between breakpoints (grid times and claim epochs) the invested part
    takes an exact log-normal step and the premium accrues as ``c h``; each
    claim is deducted at its epoch. Ruin is detected at claim epochs and
    grid points, and ``ruin_time`` is the exact breakpoint where it
    happened. The grid index flagged as ruined is the first grid point at
    or after that time.
    """
    _check_grid(T, n_steps)
    return _jump_path(model, pi, T, n_steps, np.random.default_rng(seed))


@dataclass(frozen=True)
class RuinEstimate:
    probability: float
    stderr: float
    n_paths: int
    terminal_mean: float
    terminal_stderr: float


def surplus_terminals(model: InsuranceModel, pi: float, T: float, n_paths: int, n_steps: int, seed,
                      mode: str = "diffusion", block: int = 256, **kw):
    """Terminal surplus and ruin flag for paths ``seed + i``, ``i < n_paths``.

    Path ``i`` equals ``simulate_surplus_<mode>(model, pi, T, n_steps, seed + i)``.
    """
    _check_grid(T, n_steps)
    term = np.empty(n_paths)
    ruined = np.zeros(n_paths, dtype=bool)
    if mode == "diffusion":
        scheme = kw.get("scheme", "exponential")
        feedback = kw.get("feedback", False)
        for start in range(0, n_paths, block):
            stop = min(start + block, n_paths)
            Z = np.stack([np.random.default_rng(seed + i).standard_normal(n_steps) for i in range(start, stop)])
            R, idx = _diffusion_block(model, pi, T, Z, scheme, feedback)
            term[start:stop] = R[:, -1]
            ruined[start:stop] = idx >= 0
    elif mode == "jump":
        for i in range(n_paths):
            path = _jump_path(model, pi, T, n_steps, np.random.default_rng(seed + i))
            term[i] = path.terminal
            ruined[i] = path.ruin_time is not None
    else:
        raise ValueError(f"mode must be 'diffusion' or 'jump', got {mode!r}")
    return term, ruined


def ruin_probability_mc(model: InsuranceModel, pi: float, T: float, n_paths: int, n_steps: int, seed,
                        mode: str = "diffusion") -> RuinEstimate:
    """Fraction of paths ruined before ``T`` with its binomial standard error."""
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    term, ruined = surplus_terminals(model, pi, T, n_paths, n_steps, seed, mode)
    q = float(ruined.mean())
    se = math.sqrt(q * (1 - q) / n_paths)
    tse = float(term.std(ddof=1) / math.sqrt(n_paths)) if n_paths > 1 else float("nan")
    return RuinEstimate(q, se, n_paths, float(term.mean()), tse)


def surplus_mean_ode(model: InsuranceModel, pi: float, t):
    """Solution of ``m' = kappa m + (c - drift)``, ``m(0) = u``, with ``kappa = r + (a - r) pi``.

    This is the surplus path when ``sigma_bar = 0`` and ``pi = 0``, and the
    mean surplus before absorption in general.
    """
    t = np.asarray(t, dtype=np.float64)
    kappa = model.r + (model.a - model.r) * pi
    k = model.c - model.drift_claims
    if kappa == 0.0:
        return model.u + k * t
    return model.u * np.exp(kappa * t) + k * np.expm1(kappa * t) / kappa
