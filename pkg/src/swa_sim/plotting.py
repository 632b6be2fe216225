"""SVG plots of sweep results: one curve per beta with a min-max band over seeds."""
from __future__ import annotations

import json
import logging
import math
from collections import defaultdict
from pathlib import Path
from typing import Dict, List, Optional

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .results import Row, read_csv, read_metadata  # noqa: E402

logger = logging.getLogger(__name__)

KINDS = {
    "overload_vs_lambda": ("overload_rate", "Overload rate (OR)"),
    "welfare_vs_lambda": ("delta_welfare", "Welfare change vs. baseline  W̄(λ) − W̄(0)"),
    "mean_welfare_vs_lambda": ("mean_welfare", "Episode-average welfare W̄"),
}


def _series(rows: List[Row], metric: str):
    by_beta: Dict[float, Dict[float, List[float]]] = defaultdict(lambda: defaultdict(list))
    stars: Dict[float, float] = {}
    for r in rows:
        stars[r.beta] = r.lambda_star
        by_beta[r.beta][r.lam].append(getattr(r, metric))
    out = {}
    for beta, per_lam in sorted(by_beta.items()):
        xs, mean, lo, hi = [], [], [], []
        for lam, vals in sorted(per_lam.items()):
            vals = [v for v in vals if not math.isnan(v)]
            if not vals:
                logger.warning("beta=%g lambda=%g: no valid seeds, point omitted", beta, lam)
                continue
            xs.append(lam)
            mean.append(math.fsum(vals) / len(vals))
            lo.append(min(vals))
            hi.append(max(vals))
        out[beta] = (xs, mean, lo, hi)
    return out, stars


def emit_plot(csv_path, kind: str, out_path, title: Optional[str] = None) -> Path:
    if kind not in KINDS:
        raise ValueError(f"unknown plot kind {kind!r}, expected one of {sorted(KINDS)}")
    rows = read_csv(csv_path)
    metric, ylabel = KINDS[kind]
    series, stars = _series(rows, metric)

    plt.rcParams["svg.hashsalt"] = "swa_sim"
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    colors = plt.rcParams["axes.prop_cycle"].by_key()["color"]
    for j, (beta, (xs, mean, lo, hi)) in enumerate(series.items()):
        c = colors[j % len(colors)]
        ax.plot(xs, mean, marker="o", color=c, label=f"β = {beta:g}")
        ax.fill_between(xs, lo, hi, color=c, alpha=0.2, linewidth=0)
        ax.axvline(stars[beta], color=c, linestyle="--", linewidth=1, label=f"λ* = {stars[beta]:.2f}")
    if kind == "welfare_vs_lambda":
        ax.axhline(0.0, color="0.5", linewidth=0.8)
    ax.set_xlabel("Social weight λ")
    ax.set_ylabel(ylabel)
    ax.set_xlim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()

    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    meta = read_metadata(csv_path)
    svg_meta = {"Date": None, "Creator": "swa_sim"}
    if meta is not None:
        svg_meta["Description"] = json.dumps(meta.get("config", {}), sort_keys=True)
    fig.savefig(out_path, format="svg", metadata=svg_meta)
    plt.close(fig)
    return out_path
