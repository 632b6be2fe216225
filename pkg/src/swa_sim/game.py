"""Shared-resource congestion game.

Pure functions: a demand profile goes in, rewards, welfare and the overload
flag come out. All arithmetic is done in Python floats (64-bit).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Tuple

# Absolute/relative tolerance for every float comparison against capacity.
TOL = 1e-9


def close(a: float, b: float, tol: float = TOL) -> bool:
    return math.isclose(a, b, rel_tol=tol, abs_tol=tol)


@dataclass(frozen=True)
class GameConfig:
    """Environment constants.

    ``n`` agents share capacity ``C``; ``beta`` scales the penalty on excess
    load; every demand lies in ``[0, x_max]``; episodes last ``T`` steps.
    """

    n: int = 5
    C: float = 20.0
    beta: float = 1.6
    x_max: float = 8.0
    T: int = 20

    def __post_init__(self) -> None:
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 2:
            raise ValueError(f"n must be an integer >= 2, got {self.n!r}")
        if not self.C > 0:
            raise ValueError(f"capacity C must be > 0, got {self.C!r}")
        if not self.beta > 1:
            raise ValueError(f"beta must be > 1 for the dilemma regime, got {self.beta!r}")
        if not self.beta < self.n:
            raise ValueError(f"beta must be < n (requires beta < n), got beta={self.beta!r}, n={self.n}")
        if not self.x_max > 0:
            raise ValueError(f"x_max must be > 0, got {self.x_max!r}")
        if not self.n * self.x_max > self.C:
            raise ValueError(
                f"n * x_max must exceed C so overload is reachable "
                f"(n*x_max={self.n * self.x_max}, C={self.C})"
            )
        if isinstance(self.T, bool) or int(self.T) != self.T or self.T < 1:
            raise ValueError(f"T must be an integer >= 1, got {self.T!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "T", int(self.T))
        object.__setattr__(self, "C", float(self.C))
        object.__setattr__(self, "beta", float(self.beta))
        object.__setattr__(self, "x_max", float(self.x_max))


@dataclass(frozen=True)
class StepRecord:
    t: int
    x: Tuple[float, ...]
    X: float
    rewards: Tuple[float, ...]
    W: float
    overloaded: bool


def validate_profile(cfg: GameConfig, x: Sequence[float]) -> Tuple[float, ...]:
    """Return ``x`` as a tuple of floats, raising ValueError if it is not a valid profile."""
    if len(x) != cfg.n:
        raise ValueError(f"expected {cfg.n} demands, got {len(x)}")
    out = tuple(float(v) for v in x)
    for i, v in enumerate(out):
        if not (0.0 <= v <= cfg.x_max):
            raise ValueError(f"demand x[{i}]={v} outside [0, {cfg.x_max}]")
    return out


def excess(cfg: GameConfig, X: float) -> float:
    return max(0.0, X - cfg.C)


def is_overloaded(cfg: GameConfig, X: float) -> bool:
    # Grid demands such as 0.1*k do not sum exactly; a load within TOL of C is at capacity.
    return X > cfg.C and not close(X, cfg.C)


def total_load(x: Sequence[float]) -> float:
    return math.fsum(x)


def intrinsic_reward(cfg: GameConfig, x: Sequence[float], i: int) -> float:
    """Private reward of agent ``i`` (0-based): own demand minus its share of the overload penalty."""
    x = validate_profile(cfg, x)
    if not 0 <= i < cfg.n:
        raise IndexError(f"agent index {i} out of range for n={cfg.n}")
    return x[i] - (cfg.beta / cfg.n) * excess(cfg, total_load(x))


def welfare(cfg: GameConfig, X: float) -> float:
    if X < 0:
        raise ValueError(f"aggregate load must be >= 0, got {X}")
    return X - cfg.beta * excess(cfg, X)


def step(cfg: GameConfig, t: int, x: Sequence[float]) -> StepRecord:
    x = validate_profile(cfg, x)
    X = total_load(x)
    penalty = (cfg.beta / cfg.n) * excess(cfg, X)
    rewards = tuple(xi - penalty for xi in x)
    return StepRecord(
        t=t,
        x=x,
        X=X,
        rewards=rewards,
        W=welfare(cfg, X),
        overloaded=is_overloaded(cfg, X),
    )
