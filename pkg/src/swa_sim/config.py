"""Resolved run configuration: defaults < YAML file < command-line flags."""
from __future__ import annotations

import os
from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional

import yaml

from .belief import DEFAULT_ALPHA, DEFAULT_EPSILON, GroupScoreConfig
from .game import GameConfig
from .policy import DEFAULT_K, AgentSpec

OUTPUT_DIR_ENV = "SWA_OUTPUT_DIR"


class ConfigError(ValueError):
    pass


# file section -> keys it may hold
SECTIONS: Dict[str, tuple] = {
    "game": ("n", "C", "beta", "x_max", "T"),
    "sweep": ("lambdas", "betas", "seeds", "master_seed", "workers"),
    "run": ("lam", "seed", "agent_lambdas"),
    "belief": ("alpha", "mu0", "W_ref", "epsilon", "margin", "gamma_center"),
    "policy": ("variant", "candidate_source", "k", "agent_command", "bridge_timeout"),
    "output": ("output_dir", "name"),
}
# spellings accepted in files besides the field names
ALIASES = {"lambda": "lam", "dir": "output_dir"}


def _default_output_dir() -> str:
    return os.environ.get(OUTPUT_DIR_ENV, "results")


@dataclass(frozen=True)
class ResolvedConfig:
    n: int = 5
    C: float = 20.0
    beta: float = 1.6
    x_max: float = 8.0
    T: int = 20
    lambdas: List[float] = field(default_factory=lambda: [round(0.1 * i, 10) for i in range(11)])
    betas: Optional[List[float]] = None
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    master_seed: int = 0
    workers: int = 1
    lam: float = 0.0
    seed: int = 0
    agent_lambdas: Optional[List[float]] = None
    alpha: float = DEFAULT_ALPHA
    mu0: Optional[float] = None
    W_ref: Optional[float] = None
    epsilon: float = DEFAULT_EPSILON
    margin: float = 0.0
    gamma_center: float = 0.0
    variant: str = "swi_normalized"
    candidate_source: str = "stochastic"
    k: int = DEFAULT_K
    agent_command: Optional[str] = None
    bridge_timeout: float = 5.0
    output_dir: str = field(default_factory=_default_output_dir)
    name: str = "swa"

    # derived objects -------------------------------------------------------
    def game(self, beta: Optional[float] = None) -> GameConfig:
        return GameConfig(n=self.n, C=self.C, beta=self.beta if beta is None else beta, x_max=self.x_max, T=self.T)

    def group_score_config(self) -> GroupScoreConfig:
        return GroupScoreConfig(W_ref=self.W_ref, epsilon=self.epsilon, margin=self.margin, gamma_center=self.gamma_center)

    def agent_template(self, lam: Optional[float] = None) -> AgentSpec:
        return AgentSpec(
            id=0,
            lam=self.lam if lam is None else lam,
            variant=self.variant,
            candidate_source=self.candidate_source,
            k=self.k,
        )

    def sweep_betas(self) -> List[float]:
        return list(self.betas) if self.betas else [self.beta]

    def validate(self) -> "ResolvedConfig":
        """Check every module-level rule; raises ConfigError on the first violation."""
        try:
            for b in self.sweep_betas():
                cfg = self.game(b)
                self.group_score_config().validate(cfg)
            cfg = self.game()
            self.agent_template()
            if not self.lambdas:
                raise ValueError("lambdas must be nonempty")
            for l in self.lambdas:
                self.agent_template(l)
            if not self.seeds:
                raise ValueError("seeds must be nonempty")
            if any(int(s) != s or s < 0 for s in self.seeds):
                raise ValueError(f"seeds must be nonnegative integers, got {self.seeds}")
            if len(set(self.seeds)) != len(self.seeds):
                raise ValueError(f"seeds must be distinct, got {self.seeds}")
            if self.seed < 0:
                raise ValueError(f"seed must be >= 0, got {self.seed}")
            if self.agent_lambdas is not None:
                if len(self.agent_lambdas) != self.n:
                    raise ValueError(f"agent_lambdas needs {self.n} entries, got {len(self.agent_lambdas)}")
                for l in self.agent_lambdas:
                    self.agent_template(l)
            if not 0 < self.alpha <= 1:
                raise ValueError(f"alpha must lie in (0, 1], got {self.alpha}")
            if self.mu0 is not None and not 0 <= self.mu0 <= cfg.x_max:
                raise ValueError(f"mu0 must lie in [0, x_max], got {self.mu0}")
            if self.candidate_source == "external" and not self.agent_command:
                raise ValueError("candidate_source=external requires agent_command")
            if not self.bridge_timeout > 0:
                raise ValueError(f"bridge_timeout must be > 0, got {self.bridge_timeout}")
            if self.workers < 1:
                raise ValueError(f"workers must be >= 1, got {self.workers}")
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        return self

    # serialization ---------------------------------------------------------
    def to_dict(self) -> Dict[str, Dict[str, Any]]:
        """Nested form with defaults filled in; this is what output files echo."""
        flat = asdict(self)
        flat["betas"] = self.sweep_betas()
        if flat["mu0"] is None:
            flat["mu0"] = self.C / self.n
        if flat["W_ref"] is None:
            flat["W_ref"] = self.C
        return {sec: {k: flat[k] for k in keys} for sec, keys in SECTIONS.items()}


_INT = {"n", "T", "master_seed", "workers", "seed", "k"}
_FLOAT = {"C", "beta", "x_max", "lam", "alpha", "mu0", "W_ref", "epsilon", "margin", "gamma_center", "bridge_timeout"}
_FLOAT_LIST = {"lambdas", "betas", "agent_lambdas"}
_INT_LIST = {"seeds"}


def _as_int(v) -> int:
    if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
        raise ValueError(v)
    return int(v)


def _as_list(v) -> list:
    if isinstance(v, str):
        return [p for p in v.split(",") if p.strip()]
    return list(v) if isinstance(v, (list, tuple)) else [v]


def _coerce(values: Dict[str, Any]) -> Dict[str, Any]:
    out = {}
    for k, v in values.items():
        try:
            if v is None:
                out[k] = None
            elif k in _INT:
                out[k] = _as_int(v)
            elif k in _FLOAT:
                out[k] = float(v)
            elif k in _FLOAT_LIST:
                out[k] = [float(x) for x in _as_list(v)]
            elif k in _INT_LIST:
                out[k] = [_as_int(float(x) if isinstance(x, str) else x) for x in _as_list(v)]
            else:
                out[k] = str(v)
        except (TypeError, ValueError):
            raise ConfigError(f"bad value for {k}: {v!r}") from None
    return out


def flatten(data: Dict[str, Any]) -> Dict[str, Any]:
    """Nested file mapping -> flat field mapping. Unknown keys are errors."""
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a mapping")
    flat: Dict[str, Any] = {}
    for sec, body in data.items():
        if sec not in SECTIONS:
            raise ConfigError(f"unknown config section {sec!r}")
        if body is None:
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"section {sec!r} must be a mapping")
        for key, v in body.items():
            key = ALIASES.get(key, key)
            if key not in SECTIONS[sec]:
                raise ConfigError(f"unknown key {key!r} in section {sec!r}")
            flat[key] = v
    return flat


def load_file(path) -> Dict[str, Any]:
    with open(path) as fh:
        try:
            data = yaml.safe_load(fh) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    return flatten(data)


def resolve(path=None, overrides: Optional[Dict[str, Any]] = None) -> ResolvedConfig:
    values: Dict[str, Any] = {}
    if path is not None:
        values.update(load_file(path))
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return replace(ResolvedConfig(), **_coerce(values)).validate()


def from_dict(nested: Dict[str, Any]) -> ResolvedConfig:
    """Rebuild a config from the ``config`` block of a metadata file."""
    return replace(ResolvedConfig(), **_coerce(flatten(nested))).validate()
