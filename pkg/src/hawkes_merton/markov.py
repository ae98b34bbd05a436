"""Finite-state discrete-time Markov chains carrying real-valued marks.

States are labelled ``1..n`` at the public surface (simulation output,
``initial_state``); arrays are indexed from zero internally. All domain
meaning lives in the mark vector ``a``.
"""
from __future__ import annotations

import bisect
from dataclasses import dataclass
from functools import reduce
from math import gcd

import numpy as np
from numpy.typing import ArrayLike, NDArray

from .errors import InvalidState, NonErgodicChain, SolveFailure

ROW_SUM_TOL = 1e-12
RESIDUAL_TOL = 1e-10
# reciprocal condition number below which a solve is treated as singular
_RCOND_MIN = 1e-13


@dataclass(frozen=True, eq=False)
class MarkovChainSpec:
    """Transition matrix ``P`` plus the mark ``a(i)`` attached to each state.

    Parameters
    ----------
    P : (n, n) array_like
        Row-stochastic transition matrix, ``P[i, j] = P(X_{k+1}=j | X_k=i)``.
    a : (n,) array_like
        Mark value of each state (currency units per event).
    """

    P: NDArray[np.float64]
    a: NDArray[np.float64]

    def __init__(self, P: ArrayLike, a: ArrayLike):
        P = np.array(P, dtype=np.float64)
        a = np.array(a, dtype=np.float64).reshape(-1)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 1:
            raise ValueError(f"P must be a non-empty square matrix, got shape {P.shape}")
        if a.shape[0] != P.shape[0]:
            raise ValueError(f"a has {a.shape[0]} entries but P has {P.shape[0]} states")
        if not np.all(np.isfinite(P)) or np.any(P < 0.0) or np.any(P > 1.0):
            raise ValueError("entries of P must lie in [0, 1]")
        row_err = np.max(np.abs(P.sum(axis=1) - 1.0))
        if row_err > ROW_SUM_TOL:
            raise ValueError(f"rows of P must sum to 1 (max deviation {row_err:.3g})")
        if not np.all(np.isfinite(a)):
            raise ValueError("marks a must be finite")
        P.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "a", a)

    @property
    def n(self) -> int:
        return self.P.shape[0]

    def with_marks(self, a: ArrayLike) -> "MarkovChainSpec":
        return MarkovChainSpec(self.P, a)

    def __repr__(self) -> str:
        return f"MarkovChainSpec(P={self.P.tolist()}, a={self.a.tolist()})"


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """Invariant probability vector ``pi_star`` with ``pi_star @ P = pi_star``."""

    pi_star: NDArray[np.float64]

    def __post_init__(self):
        pi = np.array(self.pi_star, dtype=np.float64).reshape(-1)
        if np.any(pi < 0.0) or abs(pi.sum() - 1.0) > ROW_SUM_TOL:
            raise ValueError("stationary distribution must be non-negative and sum to 1")
        pi.setflags(write=False)
        object.__setattr__(self, "pi_star", pi)

    def matrix(self) -> NDArray[np.float64]:
        """The matrix whose every row equals ``pi_star``."""
        return np.tile(self.pi_star, (self.pi_star.size, 1))


def _support_graph(P: NDArray[np.float64]) -> list[list[int]]:
    return [list(np.flatnonzero(row > 0.0)) for row in P]


def _bfs_levels(adj: list[list[int]], start: int = 0) -> list[int]:
    level = [-1] * len(adj)
    level[start] = 0
    frontier = [start]
    while frontier:
        nxt = []
        for u in frontier:
            for v in adj[u]:
                if level[v] < 0:
                    level[v] = level[u] + 1
                    nxt.append(v)
        frontier = nxt
    return level


def is_ergodic(chain: MarkovChainSpec) -> bool:
    """Irreducible and aperiodic.

    Irreducibility: state 0 reaches every state in the support graph and in
    its reverse (a single strongly connected component). The period is the
    gcd of ``level[u] + 1 - level[v]`` over all edges ``u -> v`` of a BFS
    level assignment, which equals the gcd of all cycle lengths.
    """
    adj = _support_graph(chain.P)
    rev: list[list[int]] = [[] for _ in adj]
    for u, nbrs in enumerate(adj):
        for v in nbrs:
            rev[v].append(u)
    level = _bfs_levels(adj)
    if min(level) < 0 or min(_bfs_levels(rev)) < 0:
        return False
    period = reduce(gcd, (level[u] + 1 - level[v] for u, nbrs in enumerate(adj) for v in nbrs), 0)
    return period == 1


def _checked_solve(A: NDArray[np.float64], b: NDArray[np.float64]) -> NDArray[np.float64]:
    if 1.0 / np.linalg.cond(A, 1) < _RCOND_MIN:
        raise SolveFailure("linear system is numerically singular")
    try:
        return np.linalg.solve(A, b)
    except np.linalg.LinAlgError as exc:
        raise SolveFailure(str(exc)) from exc


def stationary_distribution(chain: MarkovChainSpec) -> StationaryDistribution:
    """Solve ``pi P = pi`` with the normalisation ``sum(pi) = 1``.

    The balance equations ``(P^T - I) pi = 0`` have rank ``n - 1`` for an
    ergodic chain; the last one is replaced by the normalisation row.
    """
    if not is_ergodic(chain):
        raise NonErgodicChain("chain is not irreducible and aperiodic")
    n = chain.n
    A = chain.P.T - np.eye(n)
    A[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    pi = _checked_solve(A, rhs)
    # round-off can leave tiny negatives on near-zero entries
    pi = np.clip(pi, 0.0, None)
    pi /= pi.sum()
    residual = np.max(np.abs(pi @ chain.P - pi))
    if residual > RESIDUAL_TOL:
        raise SolveFailure(f"stationary residual {residual:.3g} exceeds {RESIDUAL_TOL}")
    return StationaryDistribution(pi)


def fundamental_solve(chain: MarkovChainSpec, pi_star: StationaryDistribution, b: ArrayLike) -> NDArray[np.float64]:
    """Return ``g = (P + Pi* - I)^{-1} b``."""
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if b.shape[0] != chain.n:
        raise ValueError(f"b has {b.shape[0]} entries, chain has {chain.n} states")
    Z = chain.P + pi_star.matrix() - np.eye(chain.n)
    g = _checked_solve(Z, b)
    residual = np.max(np.abs(Z @ g - b), initial=0.0)
    if residual > RESIDUAL_TOL * max(1.0, np.max(np.abs(b), initial=0.0)):
        raise SolveFailure(f"fundamental-matrix residual {residual:.3g}")
    return g


def _rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


def simulate_chain(chain: MarkovChainSpec, n_steps: int, initial_state: int, seed) -> NDArray[np.int64]:
    """Sample ``X_1..X_{n_steps}`` started from ``X_0 = initial_state``.

    States are 1-based in both the argument and the result; the initial
    state itself is not included. ``seed`` may be an int or a
    ``numpy.random.Generator`` (consumed in place).
    """
    n = chain.n
    if not 1 <= int(initial_state) <= n:
        raise InvalidState(f"initial_state {initial_state} not in 1..{n}")
    if n_steps < 0:
        raise ValueError("n_steps must be non-negative")
    out = np.empty(n_steps, dtype=np.int64)
    if n_steps == 0:
        return out
    u = _rng(seed).random(n_steps)
    cum = [list(np.cumsum(row)[:-1]) for row in chain.P]
    state = int(initial_state) - 1
    for k in range(n_steps):
        # bisect over the first n-1 cumulative bounds keeps the index < n
        state = bisect.bisect_right(cum[state], u[k])
        out[k] = state
    out += 1
    return out


def draw_stationary_state(pi_star: StationaryDistribution, seed) -> int:
    """One 1-based state drawn from ``pi_star``."""
    cum = np.cumsum(pi_star.pi_star)[:-1]
    return int(np.searchsorted(cum, _rng(seed).random(), side="right")) + 1
