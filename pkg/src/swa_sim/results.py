"""CSV and metadata serialization for sweep results."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional

from . import __version__
from .engine import SweepResult

HEADER = ["lambda", "beta", "seed", "overload_rate", "mean_welfare", "delta_welfare", "mean_load", "lambda_star"]
_DELTA_NOTE = "per-seed difference against the lambda=0 cell with the same beta and seed, then averaged"


class ResultsFormatError(ValueError):
    pass


def fmt(v: float) -> str:
    if math.isnan(v):
        return "nan"
    s = f"{v:.6f}"
    return "0.000000" if s == "-0.000000" else s


@dataclass(frozen=True)
class Row:
    lam: float
    beta: float
    seed: int
    overload_rate: float
    mean_welfare: float
    delta_welfare: float
    mean_load: float
    lambda_star: float


def rows_of(sweep: SweepResult) -> List[Row]:
    return [
        Row(c.lam, c.beta, c.seed, c.overload_rate, c.mean_welfare, c.delta_welfare, c.mean_load, c.lambda_star)
        for c in sorted(sweep.cells, key=lambda c: (c.beta, c.lam, c.seed))
    ]


def to_csv(sweep: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(HEADER)
    for r in rows_of(sweep):
        w.writerow(
            [fmt(r.lam), fmt(r.beta), str(r.seed), fmt(r.overload_rate), fmt(r.mean_welfare),
             fmt(r.delta_welfare), fmt(r.mean_load), fmt(r.lambda_star)]
        )
    return buf.getvalue()


def parse_csv(text: str) -> List[Row]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ResultsFormatError("empty results file") from None
    if header != HEADER:
        raise ResultsFormatError(f"row 1: expected header {','.join(HEADER)}, got {','.join(header)}")
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(HEADER):
            raise ResultsFormatError(f"row {lineno}: expected {len(HEADER)} fields, got {len(rec)}")
        try:
            vals = [float(v) for v in rec]
            seed = int(rec[2])
        except ValueError:
            raise ResultsFormatError(f"row {lineno}: non-numeric field in {rec!r}") from None
        rows.append(Row(vals[0], vals[1], seed, *vals[3:]))
    return rows


def read_csv(path) -> List[Row]:
    return parse_csv(Path(path).read_text())


def metadata(sweep: SweepResult, config: Optional[dict] = None, extra: Optional[dict] = None) -> Dict:
    thresholds = {}
    for c in sweep.cells:
        thresholds[fmt(c.beta)] = fmt(c.lambda_star)
    meta = {
        "build": f"swa_sim {__version__}",
        "config": config or {},
        "seed_scheme": sweep.seed_scheme,
        "master_seed": sweep.master_seed,
        "delta_welfare": _DELTA_NOTE,
        "lambda_star": thresholds,
        "fallbacks_total": sum(c.fallbacks for c in sweep.cells),
        "cells": [
            {
                "lambda": c.lam,
                "beta": c.beta,
                "seed": c.seed,
                "cell_seed": c.cell_seed,
                "fallbacks": c.fallbacks,
                "error": c.error,
            }
            for c in sorted(sweep.cells, key=lambda c: (c.beta, c.lam, c.seed))
        ],
    }
    if extra:
        meta.update(extra)
    return meta


def dump_metadata(meta: Dict) -> str:
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


def write_results(sweep: SweepResult, csv_path, config: Optional[dict] = None, extra: Optional[dict] = None) -> Path:
    """Write ``csv_path`` and its ``.meta.json`` sidecar; returns the sidecar path."""
    csv_path = Path(csv_path)
    csv_path.parent.mkdir(parents=True, exist_ok=True)
    csv_path.write_text(to_csv(sweep))
    meta_path = meta_path_for(csv_path)
    meta_path.write_text(dump_metadata(metadata(sweep, config, extra)))
    return meta_path


def meta_path_for(csv_path) -> Path:
    csv_path = Path(csv_path)
    return csv_path.with_name(csv_path.stem + ".meta.json")


def read_metadata(csv_path) -> Optional[Dict]:
    p = meta_path_for(csv_path)
    if not p.exists():
        return None
    return json.loads(p.read_text())


def steps_csv(records, n: int) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["t"] + [f"x{i}" for i in range(n)] + ["X", "W", "overloaded"])
    for r in records:
        w.writerow([r.t] + [fmt(v) for v in r.x] + [fmt(r.X), fmt(r.W), int(r.overloaded)])
    return buf.getvalue()
