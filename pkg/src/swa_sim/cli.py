"""Command line entry point: ``swa-sim {threshold,run,sweep,equilibrium,plot}``."""
from __future__ import annotations

import argparse
import logging
import random
import sys
from pathlib import Path

from .bridge import BridgeError
from .config import ConfigError, resolve
from .engine import Cell, SweepResult, derive_cell_seed, make_agents, run_episode, run_sweep, summarize, transition_point
from .game import GameConfig
from .plotting import KINDS, emit_plot
from .results import ResultsFormatError, fmt, steps_csv, write_results
from .theory import SwaParams, best_response_dynamics, critical_lambda, critical_lambda_for, default_grid, random_profile

EXIT_CONFIG = 2
EXIT_BRIDGE = 3
EXIT_IO = 4

log = logging.getLogger("swa_sim")


def _floats(s: str):
    return [float(v) for v in s.split(",") if v.strip()]


def _ints(s: str):
    return [int(v) for v in s.split(",") if v.strip()]


def _add_overrides(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=Path, help="YAML config file")
    g = p.add_argument_group("game")
    g.add_argument("--n", type=int)
    g.add_argument("--C", type=float)
    g.add_argument("--beta", type=float)
    g.add_argument("--x-max", dest="x_max", type=float)
    g.add_argument("--T", type=int)
    b = p.add_argument_group("belief / group score")
    b.add_argument("--alpha", type=float)
    b.add_argument("--mu0", type=float)
    b.add_argument("--W-ref", dest="W_ref", type=float)
    b.add_argument("--epsilon", type=float)
    b.add_argument("--margin", type=float)
    b.add_argument("--gamma-center", dest="gamma_center", type=float)
    a = p.add_argument_group("policy")
    a.add_argument("--variant", choices=["swi_normalized", "exact_utility"])
    a.add_argument("--candidate-source", dest="candidate_source", choices=["grid", "stochastic", "external"])
    a.add_argument("--k", type=int)
    a.add_argument("--agent-command", dest="agent_command")
    a.add_argument("--bridge-timeout", dest="bridge_timeout", type=float)
    o = p.add_argument_group("output")
    o.add_argument("--master-seed", dest="master_seed", type=int)
    o.add_argument("--output-dir", dest="output_dir", help="default: $SWA_OUTPUT_DIR or ./results")
    o.add_argument("--name")


_OVERRIDE_KEYS = (
    "n", "C", "beta", "x_max", "T", "alpha", "mu0", "W_ref", "epsilon", "margin", "gamma_center",
    "variant", "candidate_source", "k", "agent_command", "bridge_timeout", "master_seed", "output_dir", "name",
    "lambdas", "betas", "seeds", "workers", "lam", "seed", "agent_lambdas",
)


def _resolve(args):
    overrides = {k: getattr(args, k, None) for k in _OVERRIDE_KEYS}
    return resolve(args.config, overrides)


def cmd_threshold(args) -> int:
    try:
        lstar = critical_lambda_for(args.n, args.beta)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"lambda_star = {lstar:.6f}")
    print(f"regime: dilemma (1 < beta={args.beta:g} < n={args.n}); overload is self-reinforcing for "
          f"lambda < {lstar:.6f} and stable for lambda >= {lstar:.6f}")
    return 0


def _print_summary(sweep: SweepResult) -> None:
    summaries = summarize(sweep)
    print(f"{'beta':>6} {'lambda':>7} {'OR':>8} {'W':>10} {'dW':>10} {'load':>8}  lambda_star")
    for s in summaries:
        print(f"{s.beta:6.2f} {s.lam:7.2f} {s.overload_rate:8.3f} {s.mean_welfare:10.3f} "
              f"{s.delta_welfare:10.3f} {s.mean_load:8.3f}  {s.lambda_star:.6f}")
    for beta in sorted({s.beta for s in summaries}):
        tp = transition_point([s for s in summaries if s.beta == beta])
        print(f"beta={beta:g}: empirical transition lambda = {'none' if tp is None else f'{tp:g}'}")


def cmd_sweep(args) -> int:
    rc = _resolve(args)
    sweep = run_sweep(
        rc.game(),
        rc.lambdas,
        rc.sweep_betas(),
        rc.seeds,
        rc.agent_template(),
        rc.group_score_config(),
        master_seed=rc.master_seed,
        alpha=rc.alpha,
        mu0=rc.mu0,
        agent_command=rc.agent_command,
        bridge_timeout=rc.bridge_timeout,
        workers=rc.workers,
    )
    out = Path(rc.output_dir) / f"{rc.name}_sweep.csv"
    meta = write_results(sweep, out, rc.to_dict())
    _print_summary(sweep)
    print(f"wrote {out} and {meta}")
    return 0


def cmd_run(args) -> int:
    rc = _resolve(args)
    cfg = rc.game()
    agents = make_agents(cfg, rc.agent_template(), rc.agent_lambdas)
    cell_seed = derive_cell_seed(rc.master_seed, 0, 0, rc.seed)
    res = run_episode(
        cfg,
        agents,
        rc.group_score_config(),
        seed=cell_seed,
        alpha=rc.alpha,
        mu0=rc.mu0,
        agent_command=rc.agent_command,
        bridge_timeout=rc.bridge_timeout,
        config_echo=rc.to_dict(),
    )
    cell = Cell(rc.lam, cfg.beta, rc.seed, cell_seed, critical_lambda(cfg), res.overload_rate,
                res.mean_welfare, res.mean_load, 0.0 if rc.lam == 0 else float("nan"), res.fallbacks)
    sweep = SweepResult([cell], {}, rc.master_seed)
    out = Path(rc.output_dir) / f"{rc.name}_run.csv"
    meta = write_results(sweep, out, rc.to_dict(), {"agent_lambdas": [a.lam for a in agents]})
    steps = out.with_name(out.stem + "_steps.csv")
    steps.write_text(steps_csv(res.records, cfg.n))
    print(f"overload_rate = {fmt(res.overload_rate)}")
    print(f"mean_welfare = {fmt(res.mean_welfare)}")
    print(f"mean_load = {fmt(res.mean_load)}")
    if res.fallbacks:
        print(f"warning: {res.fallbacks} external proposals replaced by anchors", file=sys.stderr)
    print(f"wrote {out}, {meta} and {steps}")
    return 0


def cmd_equilibrium(args) -> int:
    try:
        cfg = GameConfig(n=args.n, C=args.C, beta=args.beta, x_max=args.x_max)
        p = SwaParams(args.lam, cfg)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    grid = default_grid(cfg, args.grid_points)
    if args.init == "zeros":
        init = (0.0,) * cfg.n
    elif args.init == "max":
        init = (cfg.x_max,) * cfg.n
    else:
        init = random_profile(cfg, grid, random.Random(args.seed))
    res = best_response_dynamics(p, init, grid, args.max_rounds)
    X = sum(res.final)
    print(f"initial = {', '.join(fmt(v) for v in init)}")
    print(f"final = {', '.join(fmt(v) for v in res.final)}")
    print(f"X = {fmt(X)}  C = {fmt(cfg.C)}  overloaded = {X > cfg.C + 1e-9}")
    print(f"converged = {res.converged}  rounds = {res.rounds}")
    print(f"lambda = {args.lam:g}  lambda_star = {critical_lambda(cfg):.6f}")
    return 0


def cmd_plot(args) -> int:
    out = args.out or Path(args.csv).with_name(Path(args.csv).stem + f"_{args.kind}.svg")
    emit_plot(args.csv, args.kind, out)
    print(f"wrote {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swa-sim", description="Socially weighted congestion game simulator")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("threshold", help="print the critical social weight")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("run", help="run a single episode")
    _add_overrides(p)
    p.add_argument("--lambda", dest="lam", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--agent-lambdas", dest="agent_lambdas", type=_floats, help="comma separated, one per agent")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("sweep", help="run a lambda x beta x seed grid")
    _add_overrides(p)
    p.add_argument("--lambdas", type=_floats)
    p.add_argument("--betas", type=_floats)
    p.add_argument("--seeds", type=_ints)
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("equilibrium", help="best-response dynamics on a demand grid")
    p.add_argument("--n", type=int, default=5)
    p.add_argument("--C", type=float, default=20.0)
    p.add_argument("--beta", type=float, default=1.6)
    p.add_argument("--x-max", dest="x_max", type=float, default=8.0)
    p.add_argument("--lambda", dest="lam", type=float, default=0.0)
    p.add_argument("--grid-points", type=int, default=81)
    p.add_argument("--max-rounds", type=int, default=100)
    p.add_argument("--init", choices=["zeros", "max", "random"], default="random")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_equilibrium)

    p = sub.add_parser("plot", help="render a results CSV as SVG")
    p.add_argument("csv", type=Path)
    p.add_argument("--kind", choices=sorted(KINDS), default="overload_vs_lambda")
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_plot)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except BridgeError as exc:
        print(f"agent bridge error: {exc}", file=sys.stderr)
        return EXIT_BRIDGE
    except ResultsFormatError as exc:
        print(f"malformed results: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
