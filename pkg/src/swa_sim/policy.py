"""Candidate generation, dual scoring and lambda-weighted selection."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .belief import BeliefState, GroupScoreConfig, group_score, predicted_total
from .game import GameConfig, close
from .theory import SwaParams, argmax_smallest, utility_given_peers

logger = logging.getLogger(__name__)

VARIANTS = ("swi_normalized", "exact_utility")
SOURCES = ("grid", "stochastic", "external")
DEFAULT_K = 7


@dataclass(frozen=True)
class AgentSpec:
    id: int
    lam: float
    variant: str = "swi_normalized"
    candidate_source: str = "stochastic"
    k: int = DEFAULT_K
    rng_seed: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"agent {self.id}: lambda must lie in [0, 1], got {self.lam!r}")
        if self.variant not in VARIANTS:
            raise ValueError(f"agent {self.id}: unknown variant {self.variant!r}, expected one of {VARIANTS}")
        if self.candidate_source not in SOURCES:
            raise ValueError(
                f"agent {self.id}: unknown candidate_source {self.candidate_source!r}, expected one of {SOURCES}"
            )
        if self.candidate_source in ("grid", "stochastic") and self.k < 2:
            raise ValueError(f"agent {self.id}: k must be >= 2, got {self.k}")


@dataclass(frozen=True)
class CandidateSet:
    values: Tuple[float, ...]
    fallback: bool = False


@dataclass(frozen=True)
class ScoredCandidate:
    """One audited candidate.

    For ``exact_utility`` agents ``s_self`` and ``s_group`` hold the predicted
    private reward and predicted welfare per agent instead of [0, 1] scores,
    so ``combined`` is the exact socially weighted utility.
    """

    a: float
    s_self: float
    s_group: float
    combined: float


def anchors(cfg: GameConfig) -> Tuple[float, ...]:
    return (0.0, cfg.C / cfg.n, cfg.x_max)


def _normalize(values: Iterable[float]) -> Tuple[float, ...]:
    out: List[float] = []
    for v in sorted(values):
        if out and close(out[-1], v):
            continue
        out.append(v)
    return tuple(out)


def clip_external(raw, cfg: GameConfig) -> List[float]:
    """Validate proposals from an external agent and clip them into [0, x_max].

    Raises ValueError for anything that is not a nonempty list of finite numbers.
    """
    if not isinstance(raw, (list, tuple)) or not raw:
        raise ValueError(f"expected a nonempty list of numbers, got {raw!r}")
    out = []
    for v in raw:
        if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
            raise ValueError(f"non-numeric candidate {v!r}")
        out.append(min(cfg.x_max, max(0.0, float(v))))
    return out


def generate_candidates(
    spec: AgentSpec,
    cfg: GameConfig,
    rng: Optional[np.random.Generator] = None,
    proposals=None,
) -> CandidateSet:
    """Build the candidate set for one decision.

    ``proposals`` carries the raw reply of an external agent (``None`` on
    timeout). Invalid or missing proposals fall back to the anchor set.
    """
    if spec.candidate_source == "grid":
        values = list(np.linspace(0.0, cfg.x_max, spec.k)) + list(anchors(cfg))
        return CandidateSet(_normalize(float(v) for v in values))
    if spec.candidate_source == "stochastic":
        if rng is None:
            raise ValueError("stochastic candidates need an rng")
        draws = rng.uniform(0.0, cfg.x_max, spec.k)
        return CandidateSet(_normalize([float(v) for v in draws] + list(anchors(cfg))))
    try:
        clipped = clip_external(proposals, cfg)
    except ValueError as exc:
        logger.warning("agent %d: external candidates rejected (%s); using anchors", spec.id, exc)
        return CandidateSet(_normalize(anchors(cfg)), fallback=True)
    return CandidateSet(_normalize(clipped + list(anchors(cfg))))


def score_self(cfg: GameConfig, a: float) -> float:
    if not 0.0 <= a <= cfg.x_max:
        raise ValueError(f"demand {a} outside [0, {cfg.x_max}]")
    return a / cfg.x_max


def score_candidates(
    spec: AgentSpec,
    cfg: GameConfig,
    gsc: GroupScoreConfig,
    belief: BeliefState,
    candidates: Sequence[float],
) -> List[ScoredCandidate]:
    lam = spec.lam
    scored = []
    if spec.variant == "swi_normalized":
        for a in candidates:
            s = score_self(cfg, a)
            g = group_score(cfg, gsc, predicted_total(belief, a, cfg.n, cfg.x_max))
            scored.append(ScoredCandidate(a, s, g, (1.0 - lam) * s + lam * g))
    else:
        p = SwaParams(lam, cfg)
        peers = (cfg.n - 1) * belief.mu
        for a in candidates:
            score_self(cfg, a)
            X = a + peers
            r = a - (cfg.beta / cfg.n) * max(0.0, X - cfg.C)
            w = (X - cfg.beta * max(0.0, X - cfg.C)) / cfg.n
            scored.append(ScoredCandidate(a, r, w, utility_given_peers(p, a, peers)))
    return scored


def select_swi(
    spec: AgentSpec,
    cfg: GameConfig,
    gsc: GroupScoreConfig,
    belief: BeliefState,
    candidates,
) -> Tuple[float, List[ScoredCandidate]]:
    """Pick the candidate with the highest combined score; ties go to the smallest demand."""
    values = candidates.values if isinstance(candidates, CandidateSet) else tuple(candidates)
    if not values:
        raise ValueError("select_swi needs at least one candidate")
    scored = score_candidates(spec, cfg, gsc, belief, values)
    j = argmax_smallest([c.a for c in scored], [c.combined for c in scored])
    return scored[j].a, scored

