"""Closed-form analytics for socially weighted utilities in the congestion game,
plus a brute-force best-response oracle over a finite action grid.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .game import GameConfig, excess, intrinsic_reward, total_load, validate_profile, welfare

DEFAULT_GRID_POINTS = 81
TIE_TOL = 1e-9


@dataclass(frozen=True)
class SwaParams:
    lam: float
    cfg: GameConfig = field(default_factory=GameConfig)

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lambda must lie in [0, 1], got {self.lam!r}")


def swa_utility(p: SwaParams, x: Sequence[float], i: int) -> float:
    """(1 - lam) * R_i(x) + lam * W(x) / n."""
    x = validate_profile(p.cfg, x)
    r = intrinsic_reward(p.cfg, x, i)
    return (1.0 - p.lam) * r + p.lam * welfare(p.cfg, total_load(x)) / p.cfg.n


def utility_given_peers(p: SwaParams, a: float, peers_total: float) -> float:
    """Same value as :func:`swa_utility` when the other agents sum to ``peers_total``."""
    cfg = p.cfg
    X = a + peers_total
    over = excess(cfg, X)
    r = a - (cfg.beta / cfg.n) * over
    w = X - cfg.beta * over
    return (1.0 - p.lam) * r + p.lam * w / cfg.n


def marginal_incentive_overloaded(p: SwaParams) -> float:
    """Slope of the SWA utility in own demand while X > C."""
    n, beta, lam = p.cfg.n, p.cfg.beta, p.lam
    return (1.0 - lam) * (1.0 - beta / n) + (lam / n) * (1.0 - beta)


def marginal_incentive_underloaded(p: SwaParams) -> float:
    """Slope of the SWA utility in own demand while X < C; positive for every lambda."""
    return (1.0 - p.lam) + p.lam / p.cfg.n


def welfare_gradient(cfg: GameConfig) -> float:
    return 1.0 - cfg.beta


def critical_lambda(cfg: GameConfig) -> float:
    """Smallest social weight at which overloaded agents stop gaining from extra demand.

    GameConfig already enforces 1 < beta < n, so the result lies in (0, 1).
    """
    if not 1 < cfg.beta < cfg.n:
        raise ValueError(f"threshold undefined outside 1 < beta < n (beta={cfg.beta}, n={cfg.n})")
    return (cfg.n - cfg.beta) / (cfg.n - 1)


def critical_lambda_for(n: int, beta: float) -> float:
    """Threshold from raw (n, beta); raises ValueError outside the dilemma regime."""
    if n < 2:
        raise ValueError(f"n must be >= 2, got {n}")
    if not beta > 1:
        raise ValueError(f"requires beta > 1, got beta={beta}")
    if not beta < n:
        raise ValueError(f"requires beta < n, got beta={beta}, n={n}")
    return (n - beta) / (n - 1)


def default_grid(cfg: GameConfig, points: int = DEFAULT_GRID_POINTS) -> np.ndarray:
    return np.linspace(0.0, cfg.x_max, points)


def argmax_smallest(values: Sequence[float], utilities: Sequence[float], tol: float = TIE_TOL) -> int:
    """Index of the smallest value whose utility is within ``tol`` of the maximum."""
    best = max(utilities)
    cut = best - tol * max(1.0, abs(best))
    winner = None
    for j, (v, u) in enumerate(zip(values, utilities)):
        if u >= cut and (winner is None or v < values[winner]):
            winner = j
    return winner


def best_response(p: SwaParams, peers_total: float, grid: Sequence[float]) -> float:
    grid = [float(g) for g in grid]
    if not grid:
        raise ValueError("best_response needs a nonempty grid")
    for g in grid:
        if not 0.0 <= g <= p.cfg.x_max:
            raise ValueError(f"grid point {g} outside [0, {p.cfg.x_max}]")
    utils = [utility_given_peers(p, a, peers_total) for a in grid]
    return grid[argmax_smallest(grid, utils)]


@dataclass
class DynamicsResult:
    profiles: List[Tuple[float, ...]]
    converged: bool
    rounds: int

    @property
    def final(self) -> Tuple[float, ...]:
        return self.profiles[-1]


def best_response_dynamics(
    p: SwaParams,
    initial: Sequence[float],
    grid: Optional[Sequence[float]] = None,
    max_rounds: int = 100,
) -> DynamicsResult:
    """Round-robin best responses until a full round leaves the profile unchanged.

    ``profiles`` holds the initial profile followed by the profile after each round.
    """
    if grid is None:
        grid = default_grid(p.cfg)
    x = list(validate_profile(p.cfg, initial))
    profiles = [tuple(x)]
    for r in range(1, max_rounds + 1):
        changed = False
        for i in range(p.cfg.n):
            peers = total_load(x) - x[i]
            br = best_response(p, peers, grid)
            if br != x[i]:
                x[i] = br
                changed = True
        profiles.append(tuple(x))
        if not changed:
            return DynamicsResult(profiles, True, r)
    return DynamicsResult(profiles, False, max_rounds)


def random_profile(cfg: GameConfig, grid: Sequence[float], rng: random.Random) -> Tuple[float, ...]:
    grid = list(grid)
    return tuple(float(rng.choice(grid)) for _ in range(cfg.n))
