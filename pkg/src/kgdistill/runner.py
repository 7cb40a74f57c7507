"""Experiment plans and their execution.

A plan names a data source, a split recipe, a seed list, a shared training
config, and a list of method specs. Execution trains, per seed: the teacher,
the no-distillation baseline student, and one student per distillation
method, pairing every cell on the same split/teacher/seed; evaluates each
on the held-out test pool; and aggregates paired gains. Each (method, seed)
cell owns its checkpoint, event log, and report file, so a failed cell
never corrupts another and finished cells can be skipped on resume.
"""

from __future__ import annotations

import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

from .checkpoint import load_checkpoint, save_checkpoint
from .errors import ConfigError
from .graph import HeteroGraph, load_graph
from .metrics import GainSummary
from .model import TrainConfig
from .report import RunReport, compute_gains, emit_report, write_event_log
from .rng import rng_stream
from .splits import SplitSpec, split, sample_negatives, write_split_manifest
from .synthetic import generate_synthetic_kg
from .training import MethodSpec, evaluate_macro_auprc, train_baseline, train_method

TEACHER_CELL = "teacher"
BASELINE_CELL = "baseline"


@dataclass
class DataSpec:
    source: str = "synthetic"  # "synthetic" | "file"
    path: str | None = None
    n_types: int = 2
    n_relations: int = 2
    nodes_per_type: int = 200
    latent_dim: int = 8
    density: float = 0.02
    seed: int = 7
    schema: list[str] | None = None

    def validate(self):
        if self.source not in ("synthetic", "file"):
            raise ConfigError(f"unknown data source {self.source!r}")
        if self.source == "file" and not self.path:
            raise ConfigError("file data source needs a path")

    def to_dict(self):
        return dict(self.__dict__)

    @staticmethod
    def from_dict(d):
        spec = DataSpec(**d)
        spec.validate()
        return spec


@dataclass
class ExperimentPlan:
    data: DataSpec
    split: SplitSpec
    methods: list[MethodSpec]
    train: TrainConfig = field(default_factory=TrainConfig)
    seeds: list[int] = field(default_factory=lambda: [45, 46, 47, 48, 49])
    output_dir: str | None = None

    def validate(self):
        self.data.validate()
        self.train.validate()
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be non-empty and distinct")
        names = [m.name for m in self.methods]
        if len(set(names)) != len(names):
            raise ConfigError(f"method names must be distinct, got {names}")
        for m in self.methods:
            m.validate()
            if m.name in (TEACHER_CELL,):
                raise ConfigError(f"method name {m.name!r} is reserved")

    def kd_methods(self):
        return [m for m in self.methods if m.method != "baseline"]

    def to_dict(self):
        return {
            "data": self.data.to_dict(),
            "split": self.split.to_dict(),
            "methods": [m.to_dict() for m in self.methods],
            "train": self.train.to_dict(),
            "seeds": list(self.seeds),
            "output_dir": self.output_dir,
        }

    @staticmethod
    def from_dict(d):
        unknown = set(d) - {"data", "split", "methods", "train", "seeds", "output_dir"}
        if unknown:
            raise ConfigError(f"unknown plan keys: {sorted(unknown)}")
        plan = ExperimentPlan(
            data=DataSpec.from_dict(d.get("data", {})),
            split=SplitSpec.from_dict(d.get("split", {})),
            methods=[MethodSpec.from_dict(m) for m in d.get("methods", [])],
            train=TrainConfig.from_dict(d.get("train", {})),
            seeds=[int(s) for s in d.get("seeds", [45, 46, 47, 48, 49])],
            output_dir=d.get("output_dir"),
        )
        plan.validate()
        return plan


def build_graph(data: DataSpec) -> HeteroGraph:
    data.validate()
    if data.source == "file":
        return load_graph(data.path, schema=data.schema)
    graph, _factors = generate_synthetic_kg(
        data.n_types,
        data.n_relations,
        data.nodes_per_type,
        data.latent_dim,
        data.density,
        data.seed,
    )
    return graph


def _cell_paths(out_dir, name, seed):
    stem = f"{name}-{seed}"
    return (
        os.path.join(out_dir, f"{stem}.ckpt"),
        os.path.join(out_dir, f"{stem}.events.csv"),
        os.path.join(out_dir, f"{stem}.report.json"),
    )


def _save_cell(out_dir, name, seed, result, report, config, graph):
    ckpt, events, report_path = _cell_paths(out_dir, name, seed)
    save_checkpoint(
        ckpt,
        result.params,
        config=config,
        id_maps=graph.id_maps,
        extra={"method": name, "seed": seed, "best_epoch": result.best_epoch},
    )
    write_event_log(events, result.trace)
    with open(report_path, "w", encoding="utf-8") as fh:
        json.dump(report.to_dict(), fh, indent=2, sort_keys=True)


def _load_cell_report(out_dir, name, seed):
    _ckpt, _events, report_path = _cell_paths(out_dir, name, seed)
    with open(report_path, encoding="utf-8") as fh:
        return RunReport.from_dict(json.load(fh))


def _cell_complete(out_dir, name, seed):
    ckpt, _events, report_path = _cell_paths(out_dir, name, seed)
    return os.path.exists(ckpt) and os.path.exists(report_path)


def run_seed(plan: ExperimentPlan, out_dir: str, seed: int, resume: bool = False, graph=None):
    """Train and evaluate every cell of one seed; returns its RunReports."""
    if graph is None:
        graph = build_graph(plan.data)
    split_spec = replace(plan.split, seed=seed)
    splits = split(graph, split_spec)
    config = replace(plan.train, seed=seed)
    eval_corrupt = "src" if split_spec.mode == "node-holdout" else "dst"
    test_negs = sample_negatives(
        splits.train, splits.test, rng_stream(seed, "test-negatives"), corrupt=eval_corrupt
    )
    write_split_manifest(graph, splits.test, os.path.join(out_dir, f"test-triples-{seed}.tsv"))
    resolved_shared = {"split": split_spec.to_dict(), "train": config.to_dict()}

    reports = []
    teacher_params = None

    def evaluate(params):
        macro, per_rel = evaluate_macro_auprc(
            params, splits.train, splits.test, test_negs, split_spec.target_relations
        )
        return macro, per_rel

    def run_cell(name, trainer, resolved_method):
        nonlocal teacher_params
        if resume and _cell_complete(out_dir, name, seed):
            report = _load_cell_report(out_dir, name, seed)
            if name == TEACHER_CELL:
                teacher_params = load_checkpoint(_cell_paths(out_dir, name, seed)[0])[0]
            reports.append(report)
            return report
        try:
            result = trainer()
            macro, per_rel = evaluate(result.params)
            report = RunReport(
                method=name,
                seed=seed,
                best_val_auprc=result.best_val_auprc,
                test_auprc_macro=macro,
                test_auprc_per_relation=per_rel,
                wall_time_s=result.wall_time_s,
                event_log_path=f"{name}-{seed}.events.csv",
                resolved_config={**resolved_shared, "method": resolved_method},
            )
            _save_cell(out_dir, name, seed, result, report, config, graph)
            if name == TEACHER_CELL:
                teacher_params = result.params
        except Exception as exc:  # cell isolation: record, never propagate
            report = RunReport(
                method=name,
                seed=seed,
                best_val_auprc=0.0,
                test_auprc_macro=0.0,
                test_auprc_per_relation={},
                wall_time_s=0.0,
                resolved_config={**resolved_shared, "method": resolved_method},
                error=f"{type(exc).__name__}: {exc}\n{traceback.format_exc()}",
            )
        reports.append(report)
        return report

    run_cell(
        TEACHER_CELL,
        lambda: train_baseline(splits, config, dim=config.d_teacher),
        {"method": "baseline", "dim": config.d_teacher},
    )
    run_cell(
        BASELINE_CELL,
        lambda: train_baseline(splits, config),
        {"method": "baseline", "dim": config.d_student},
    )
    for spec in plan.kd_methods():
        if teacher_params is None:
            reports.append(
                RunReport(
                    method=spec.name,
                    seed=seed,
                    best_val_auprc=0.0,
                    test_auprc_macro=0.0,
                    test_auprc_per_relation={},
                    wall_time_s=0.0,
                    resolved_config={**resolved_shared, "method": spec.to_dict()},
                    error="teacher cell unavailable",
                )
            )
            continue
        teacher = teacher_params
        run_cell(
            spec.name, lambda: train_method(teacher, splits, config, spec), spec.to_dict()
        )
    return reports


def _run_seed_job(args):
    plan_dict, out_dir, seed, resume = args
    plan = ExperimentPlan.from_dict(plan_dict)
    return [r.to_dict() for r in run_seed(plan, out_dir, seed, resume=resume)]


def run_plan(plan: ExperimentPlan, out_dir, resume: bool = False, jobs: int = 1):
    """Execute the full plan; returns (reports, gains, exit_code)."""
    plan.validate()
    out_dir = str(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "plan.resolved.json"), "w", encoding="utf-8") as fh:
        json.dump(plan.to_dict(), fh, indent=2, sort_keys=True)

    reports: list[RunReport] = []
    if jobs > 1:
        args = [(plan.to_dict(), out_dir, s, resume) for s in plan.seeds]
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for chunk in pool.map(_run_seed_job, args):
                reports.extend(RunReport.from_dict(d) for d in chunk)
    else:
        graph = build_graph(plan.data)
        for seed in plan.seeds:
            reports.extend(run_seed(plan, out_dir, seed, resume=resume, graph=graph))

    gains = compute_gains(reports)
    emit_report(reports, out_dir, gains)
    failed = sum(1 for r in reports if r.error)
    if failed == 0:
        code = 0
    elif failed == len(reports):
        code = 3
    else:
        code = 2
    return reports, gains, code


def reaggregate(out_dir) -> tuple[list[RunReport], dict[str, GainSummary]]:
    """Rebuild summary tables from the per-cell report files in out_dir."""
    reports = []
    for fname in sorted(os.listdir(out_dir)):
        if fname.endswith(".report.json"):
            with open(os.path.join(out_dir, fname), encoding="utf-8") as fh:
                reports.append(RunReport.from_dict(json.load(fh)))
    if not reports:
        raise ConfigError(f"no cell reports under {out_dir}")
    gains = compute_gains(reports)
    emit_report(reports, out_dir, gains)
    return reports, gains
