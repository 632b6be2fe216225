"""Episode runner, lambda/beta sweeps and the metrics derived from them."""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from contextlib import ExitStack
from dataclasses import dataclass, field, replace
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .belief import DEFAULT_ALPHA, BeliefState, GroupScoreConfig, update_belief
from .bridge import BridgeError, BridgeSession
from .game import GameConfig, StepRecord, close, step
from .policy import AgentSpec, generate_candidates, select_swi
from .theory import critical_lambda

logger = logging.getLogger(__name__)

SEED_SCHEME = "splitmix64-counter-v1"
_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_INDEX_BITS = 21


def _mix64(z: int) -> int:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


def derive_cell_seed(master_seed: int, lambda_index: int, beta_index: int, seed_index: int) -> int:
    """64-bit seed for one sweep cell.

    The three indices are packed into a 63-bit counter, stepped through a
    SplitMix64 sequence keyed by the mixed master seed. Packing is injective and
    the finalizer is a bijection, so distinct cells never share a seed.
    """
    for name, v in (("lambda_index", lambda_index), ("beta_index", beta_index), ("seed_index", seed_index)):
        if not 0 <= v < (1 << _INDEX_BITS):
            raise ValueError(f"{name} must lie in [0, 2**{_INDEX_BITS}), got {v}")
    counter = (lambda_index << (2 * _INDEX_BITS)) | (beta_index << _INDEX_BITS) | seed_index
    key = _mix64(master_seed & _MASK64)
    return _mix64((key + (counter + 1) * _GOLDEN) & _MASK64)


@dataclass
class EpisodeResult:
    records: List[StepRecord]
    overload_rate: float
    mean_welfare: float
    mean_load: float
    seed: int
    config_echo: dict = field(default_factory=dict)
    fallbacks: int = 0


def make_agents(cfg: GameConfig, template: AgentSpec, lambdas: Optional[Sequence[float]] = None) -> List[AgentSpec]:
    """One spec per agent, copied from ``template``; ``lambdas`` gives per-agent weights."""
    if lambdas is None:
        lambdas = [template.lam] * cfg.n
    if len(lambdas) != cfg.n:
        raise ValueError(f"need {cfg.n} per-agent lambdas, got {len(lambdas)}")
    return [replace(template, id=i, lam=float(l)) for i, l in enumerate(lambdas)]


def _agent_rng(seed: int, spec: AgentSpec) -> np.random.Generator:
    if spec.rng_seed is not None:
        return np.random.default_rng(spec.rng_seed)
    return np.random.default_rng([seed, spec.id])


def run_episode(
    cfg: GameConfig,
    agents: Sequence[AgentSpec],
    gsc: Optional[GroupScoreConfig] = None,
    seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    mu0: Optional[float] = None,
    agent_command=None,
    bridge_timeout: float = 5.0,
    config_echo: Optional[dict] = None,
    on_step: Optional[Callable[[int, int, float, list], None]] = None,
) -> EpisodeResult:
    """Play one T-step episode.

    Every agent decides against its belief from the previous step, demands are
    applied jointly, then all beliefs absorb the realized mean demand.
    ``on_step(t, agent_id, choice, scored)`` receives each decision for audit.
    """
    gsc = gsc or GroupScoreConfig()
    gsc.validate(cfg)
    if len(agents) != cfg.n:
        raise ValueError(f"expected {cfg.n} agents, got {len(agents)}")
    if sorted(a.id for a in agents) != list(range(cfg.n)):
        raise ValueError("agent ids must be 0..n-1")
    agents = sorted(agents, key=lambda a: a.id)
    rngs = [_agent_rng(seed, a) for a in agents]
    beliefs = [BeliefState.initial(cfg, alpha, mu0) for _ in agents]
    records: List[StepRecord] = []
    fallbacks = 0

    with ExitStack() as stack:
        bridges: Dict[int, BridgeSession] = {}
        for a in agents:
            if a.candidate_source == "external":
                if agent_command is None:
                    raise ValueError(f"agent {a.id} uses external candidates but no agent command is set")
                bridges[a.id] = stack.enter_context(BridgeSession(agent_command, cfg, a.k, timeout=bridge_timeout))

        last: Optional[StepRecord] = None
        for t in range(1, cfg.T + 1):
            demands = []
            for a, rng, b in zip(agents, rngs, beliefs):
                proposals = None
                if a.id in bridges:
                    proposals = bridges[a.id].propose(
                        t,
                        a.id,
                        b.mu,
                        None if last is None else last.X,
                        None if last is None else last.rewards[a.id],
                    )
                cands = generate_candidates(a, cfg, rng, proposals)
                fallbacks += cands.fallback
                choice, scored = select_swi(a, cfg, gsc, b, cands)
                if on_step is not None:
                    on_step(t, a.id, choice, scored)
                demands.append(choice)
            last = step(cfg, t, demands)
            records.append(last)
            xbar = min(cfg.x_max, last.X / cfg.n)
            beliefs = [update_belief(b, xbar, cfg.x_max) for b in beliefs]

    if fallbacks:
        logger.warning("episode seed=%d: %d external proposals replaced by anchors", seed, fallbacks)
    T = len(records)
    return EpisodeResult(
        records=records,
        overload_rate=sum(r.overloaded for r in records) / T,
        mean_welfare=math.fsum(r.W for r in records) / T,
        mean_load=math.fsum(r.X for r in records) / T,
        seed=seed,
        config_echo=dict(config_echo or {}),
        fallbacks=fallbacks,
    )


@dataclass
class Cell:
    lam: float
    beta: float
    seed: int
    cell_seed: int
    lambda_star: float
    overload_rate: float = math.nan
    mean_welfare: float = math.nan
    mean_load: float = math.nan
    delta_welfare: float = math.nan
    fallbacks: int = 0
    error: Optional[str] = None


@dataclass
class SweepResult:
    cells: List[Cell]
    baseline_welfare: Dict[Tuple[float, int], float]
    master_seed: int
    seed_scheme: str = SEED_SCHEME

    def rows(self, beta: Optional[float] = None) -> List[Cell]:
        return [c for c in self.cells if beta is None or close(c.beta, beta)]


def run_cell(
    cfg: GameConfig,
    template: AgentSpec,
    gsc: GroupScoreConfig,
    lam: float,
    cell_seed: int,
    alpha: float = DEFAULT_ALPHA,
    mu0: Optional[float] = None,
    agent_command=None,
    bridge_timeout: float = 5.0,
) -> EpisodeResult:
    """One sweep cell, runnable on its own with the seed from :func:`derive_cell_seed`."""
    return run_episode(
        cfg,
        make_agents(cfg, replace(template, lam=lam)),
        gsc,
        seed=cell_seed,
        alpha=alpha,
        mu0=mu0,
        agent_command=agent_command,
        bridge_timeout=bridge_timeout,
    )


def _run_cell_safe(args):
    try:
        return run_cell(*args), None
    except BridgeError:
        raise
    except Exception as exc:  # recorded per cell
        return None, f"{type(exc).__name__}: {exc}"


def run_sweep(
    cfg_base: GameConfig,
    lambdas: Sequence[float],
    betas: Sequence[float],
    seeds: Sequence[int],
    template: AgentSpec,
    gsc: Optional[GroupScoreConfig] = None,
    master_seed: int = 0,
    alpha: float = DEFAULT_ALPHA,
    mu0: Optional[float] = None,
    agent_command=None,
    bridge_timeout: float = 5.0,
    workers: int = 1,
) -> SweepResult:
    """Run every (lambda, beta, seed) cell and attach welfare deltas.

    Each cell's seed comes from ``derive_cell_seed(master_seed, lambda index,
    beta index, seed)``. The welfare delta of a cell is measured against the
    lambda = 0 cell with the same beta and seed.
    """
    if not lambdas or not betas or not seeds:
        raise ValueError("lambdas, betas and seeds must all be nonempty")
    gsc = gsc or GroupScoreConfig()
    cells: List[Cell] = []
    jobs = []
    for bi, beta in enumerate(betas):
        cfg = replace(cfg_base, beta=float(beta))
        lstar = critical_lambda(cfg)
        for li, lam in enumerate(lambdas):
            for s in seeds:
                cs = derive_cell_seed(master_seed, li, bi, int(s))
                cells.append(Cell(float(lam), float(beta), int(s), cs, lstar))
                jobs.append((cfg, template, gsc, float(lam), cs, alpha, mu0, agent_command, bridge_timeout))

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_cell_safe, jobs))
    else:
        outcomes = [_run_cell_safe(j) for j in jobs]

    for cell, (res, err) in zip(cells, outcomes):
        if err is not None:
            logger.error("cell lambda=%g beta=%g seed=%d failed: %s", cell.lam, cell.beta, cell.seed, err)
            cell.error = err
            continue
        cell.overload_rate = res.overload_rate
        cell.mean_welfare = res.mean_welfare
        cell.mean_load = res.mean_load
        cell.fallbacks = res.fallbacks

    baseline: Dict[Tuple[float, int], float] = {}
    for c in cells:
        if c.lam == 0.0 and c.error is None:
            baseline[(c.beta, c.seed)] = c.mean_welfare
    if not any(l == 0.0 for l in lambdas):
        logger.warning("lambda=0 is not in the sweep; welfare deltas are omitted")
    for c in cells:
        base = baseline.get((c.beta, c.seed))
        if base is not None and c.error is None:
            c.delta_welfare = 0.0 if c.lam == 0.0 else c.mean_welfare - base

    cells.sort(key=lambda c: (c.beta, c.lam, c.seed))
    return SweepResult(cells, baseline, master_seed)


@dataclass
class Summary:
    lam: float
    beta: float
    lambda_star: float
    count: int
    overload_rate: float
    overload_min: float
    overload_max: float
    mean_welfare: float
    delta_welfare: float
    mean_load: float


def _nanmean(vals: List[float]) -> float:
    vals = [v for v in vals if not math.isnan(v)]
    return math.fsum(vals) / len(vals) if vals else math.nan


def summarize(sweep: SweepResult) -> List[Summary]:
    """Seed-averaged metrics per (beta, lambda), skipping failed cells."""
    groups: Dict[Tuple[float, float], List[Cell]] = {}
    for c in sweep.cells:
        groups.setdefault((c.beta, c.lam), []).append(c)
    out = []
    for (beta, lam), cs in sorted(groups.items()):
        ok = [c for c in cs if c.error is None]
        ors = [c.overload_rate for c in ok]
        out.append(
            Summary(
                lam=lam,
                beta=beta,
                lambda_star=cs[0].lambda_star,
                count=len(ok),
                overload_rate=_nanmean(ors),
                overload_min=min(ors) if ors else math.nan,
                overload_max=max(ors) if ors else math.nan,
                mean_welfare=_nanmean([c.mean_welfare for c in ok]),
                delta_welfare=_nanmean([c.delta_welfare for c in ok]),
                mean_load=_nanmean([c.mean_load for c in ok]),
            )
        )
    return out


def transition_point(summaries: Sequence[Summary], level: float = 0.5) -> Optional[float]:
    """Smallest lambda from which the seed-mean overload rate stays at or below ``level``."""
    rows = sorted(summaries, key=lambda s: s.lam)
    point = None
    for s in reversed(rows):
        if math.isnan(s.overload_rate) or s.overload_rate > level:
            break
        point = s.lam
    return point
