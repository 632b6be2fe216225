"""EMA belief over the mean demand and the normalized group score built on it."""
from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

from .game import GameConfig

DEFAULT_ALPHA = 0.3
DEFAULT_EPSILON = 1e-6


@dataclass(frozen=True)
class BeliefState:
    mu: float
    alpha: float = DEFAULT_ALPHA
    t: int = 0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in (0, 1], got {self.alpha!r}")
        if self.mu < 0:
            raise ValueError(f"mu must be >= 0, got {self.mu!r}")

    @classmethod
    def initial(cls, cfg: GameConfig, alpha: float = DEFAULT_ALPHA, mu0: Optional[float] = None) -> "BeliefState":
        """Start from ``mu0``, or from the fair share C/n when it is not given."""
        return cls(mu=cfg.C / cfg.n if mu0 is None else float(mu0), alpha=alpha)


def update_belief(b: BeliefState, xbar_prev: float, x_max: Optional[float] = None) -> BeliefState:
    if xbar_prev < 0 or (x_max is not None and xbar_prev > x_max):
        raise ValueError(f"mean demand {xbar_prev} outside [0, {x_max}]")
    mu = (1.0 - b.alpha) * b.mu + b.alpha * xbar_prev
    return replace(b, mu=mu, t=b.t + 1)


@dataclass(frozen=True)
class GroupScoreConfig:
    """Normalization and the two optional stabilizers.

    ``W_ref=None`` means "use C". ``margin`` shrinks the capacity used in the
    predicted penalty; ``gamma_center`` adds a quadratic pull towards it.
    """

    W_ref: Optional[float] = None
    epsilon: float = DEFAULT_EPSILON
    margin: float = 0.0
    gamma_center: float = 0.0

    def __post_init__(self) -> None:
        if self.W_ref is not None and not self.W_ref > 0:
            raise ValueError(f"W_ref must be > 0, got {self.W_ref!r}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be > 0, got {self.epsilon!r}")
        if self.margin < 0:
            raise ValueError(f"margin must be >= 0, got {self.margin!r}")
        if self.gamma_center < 0:
            raise ValueError(f"gamma_center must be >= 0, got {self.gamma_center!r}")

    def w_ref(self, cfg: GameConfig) -> float:
        return cfg.C if self.W_ref is None else self.W_ref

    def c_eff(self, cfg: GameConfig) -> float:
        c = cfg.C - self.margin
        if not c > 0:
            raise ValueError(f"effective capacity C - margin must be > 0, got {c}")
        return c

    def validate(self, cfg: GameConfig) -> None:
        self.c_eff(cfg)


def predicted_total(b: BeliefState, a: float, n: int, x_max: Optional[float] = None) -> float:
    if a < 0 or (x_max is not None and a > x_max):
        raise ValueError(f"candidate demand {a} outside [0, {x_max}]")
    return a + (n - 1) * b.mu


def predicted_welfare(cfg: GameConfig, gsc: GroupScoreConfig, Xhat: float) -> float:
    if Xhat < 0:
        raise ValueError(f"predicted load must be >= 0, got {Xhat}")
    c = gsc.c_eff(cfg)
    w = Xhat - cfg.beta * max(0.0, Xhat - c)
    if gsc.gamma_center:
        w -= gsc.gamma_center * (Xhat - c) ** 2
    return w


def group_score(cfg: GameConfig, gsc: GroupScoreConfig, Xhat: float) -> float:
    z = predicted_welfare(cfg, gsc, Xhat) / (gsc.w_ref(cfg) + gsc.epsilon)
    return min(1.0, max(0.0, z))
