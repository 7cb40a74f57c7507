"""Run records, event logs, and table emission.

Every (method, seed) training cell produces one RunReport. The summary
table mirrors the usual presentation: one row per method with 100-scaled
per-seed scores, mean +/- sample std, and mean wall time; relative-gain
rows compare each distillation method against the same-seed baseline
student. A machine-readable results file carries everything, with wall
times isolated under timing keys so deterministic comparisons can drop
them.
"""

from __future__ import annotations

import copy
import csv
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError
from .metrics import GainSummary, relative_gains


@dataclass
class RunReport:
    method: str
    seed: int
    best_val_auprc: float
    test_auprc_macro: float
    test_auprc_per_relation: dict[str, float]
    wall_time_s: float
    event_log_path: str | None = None
    resolved_config: dict = field(default_factory=dict)
    error: str | None = None

    def __post_init__(self):
        if self.error:
            return
        values = [self.test_auprc_macro, self.best_val_auprc, *self.test_auprc_per_relation.values()]
        if any(not (0.0 <= v <= 1.0) for v in values):
            raise ValueError("AUPRC values must lie in [0, 1]")
        if self.test_auprc_per_relation:
            mean = float(np.mean(list(self.test_auprc_per_relation.values())))
            if abs(mean - self.test_auprc_macro) > 1e-12:
                raise ValueError("per-relation values must average to the macro value")

    def to_dict(self):
        return {
            "method": self.method,
            "seed": self.seed,
            "best_val_auprc": self.best_val_auprc,
            "test_auprc_macro": self.test_auprc_macro,
            "test_auprc_per_relation": dict(self.test_auprc_per_relation),
            "timing": {"wall_time_s": self.wall_time_s},
            "event_log_path": self.event_log_path,
            "resolved_config": self.resolved_config,
            "error": self.error,
        }

    @staticmethod
    def from_dict(d):
        return RunReport(
            method=d["method"],
            seed=int(d["seed"]),
            best_val_auprc=float(d["best_val_auprc"]),
            test_auprc_macro=float(d["test_auprc_macro"]),
            test_auprc_per_relation={k: float(v) for k, v in d["test_auprc_per_relation"].items()},
            wall_time_s=float(d.get("timing", {}).get("wall_time_s", 0.0)),
            event_log_path=d.get("event_log_path"),
            resolved_config=d.get("resolved_config", {}),
            error=d.get("error"),
        )


def write_event_log(path, trace):
    """Per-epoch CSV: schedule weights, loss components, LR, validation."""
    fields = [
        "epoch",
        "og_w",
        "pe_w",
        "pr_w",
        "lsp_w",
        "loss_og",
        "loss_pe",
        "loss_pr",
        "loss_lsp",
        "loss_total",
        "lr_multiplier",
        "val_auprc",
        "seconds",
    ]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(fields)
        for rec in trace:
            writer.writerow([repr(getattr(rec, f)) for f in fields])


def compute_gains(reports: list[RunReport], baseline_method: str = "baseline") -> dict[str, GainSummary]:
    """Per-method paired gains vs the baseline, over seeds where both ran."""
    ok = [r for r in reports if not r.error]
    base = {r.seed: r.test_auprc_macro for r in ok if r.method == baseline_method}
    gains = {}
    methods = sorted({r.method for r in ok if r.method not in (baseline_method, "teacher")})
    for m in methods:
        scores = {r.seed: r.test_auprc_macro for r in ok if r.method == m}
        shared = sorted(set(scores) & set(base))
        if not shared:
            continue
        gains[m] = relative_gains(
            {s: scores[s] for s in shared}, {s: base[s] for s in shared}
        )
    return gains


def _method_order(reports):
    seen = []
    for r in reports:
        if r.method not in seen:
            seen.append(r.method)
    return sorted(seen)


def emit_report(reports: list[RunReport], out_dir, gains: dict[str, GainSummary] | None = None):
    """Write summary.tsv (one row per method) and results.json (one record
    per run) under out_dir; returns their paths. Deterministic ordering."""
    if not reports:
        raise ConfigError("no reports to emit")
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    seeds = sorted({r.seed for r in reports})
    summary_path = os.path.join(out_dir, "summary.tsv")
    results_path = os.path.join(out_dir, "results.json")

    with open(summary_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, delimiter="\t")
        writer.writerow(
            ["Model"] + [f"Seed {s}" for s in seeds] + ["Mean±std", "Time (s)"]
        )
        for method in _method_order(reports):
            rows = {r.seed: r for r in reports if r.method == method}
            cells = []
            values = []
            for s in seeds:
                r = rows.get(s)
                if r is None or r.error:
                    cells.append("–")
                else:
                    cells.append(f"{100 * r.test_auprc_macro:.2f}")
                    values.append(100 * r.test_auprc_macro)
            if values:
                std = float(np.std(values, ddof=1)) if len(values) > 1 else 0.0
                mean_cell = f"{np.mean(values):.2f}±{std:.2f}"
                time_cell = f"{np.mean([rows[s].wall_time_s for s in seeds if s in rows and not rows[s].error]):.1f}"
            else:
                mean_cell = "–"
                time_cell = "–"
            writer.writerow([method] + cells + [mean_cell, time_cell])
        if gains:
            writer.writerow([])
            writer.writerow(["Relative gains vs baseline (100-scaled points)"])
            writer.writerow(["Model"] + [f"Seed {s}" for s in seeds] + ["Mean±std", ""])
            for method in sorted(gains):
                g = gains[method]
                cells = [f"{g.per_seed[s]:+.2f}" if s in g.per_seed else "–" for s in seeds]
                writer.writerow([method] + cells + [g.format(), ""])

    payload = {
        "runs": [r.to_dict() for r in sorted(reports, key=lambda r: (r.method, r.seed))],
        "gains": {
            m: {
                "mean": g.mean,
                "std": g.std,
                "n_seeds": g.n_seeds,
                "std_defined": g.std_defined,
                "per_seed": {str(s): v for s, v in sorted(g.per_seed.items())},
            }
            for m, g in sorted((gains or {}).items())
        },
    }
    with open(results_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return summary_path, results_path


def strip_timing(results_payload: dict) -> dict:
    """Copy of a results payload with timing keys and time-dependent paths removed."""
    out = copy.deepcopy(results_payload)
    for run in out.get("runs", []):
        run.pop("timing", None)
        cfg = run.get("resolved_config") or {}
        cfg.pop("wall_time_s", None)
    return out
