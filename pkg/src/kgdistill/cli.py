"""Command-line entry point.

Subcommands:
  gen-data          write a synthetic KG as a 5-column edge list + manifest
  run               execute an experiment plan (teacher, baseline, methods)
  report            re-aggregate an output directory's cell reports
  inspect-schedule  print the per-epoch loss-weight triples of a schedule

Exit codes: 0 success, 1 usage error, 2 partial failure (some cells), 3
total failure. The default output root comes from --out, then the plan
file, then $KGDISTILL_OUTPUT_ROOT, then ./runs.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .curriculum import ScheduleSpec, default_bkd_curriculum, default_flykd_schedule, weights_at
from .errors import KgdistillError
from .graph import write_edge_list
from .runner import ExperimentPlan, run_plan, reaggregate
from .synthetic import generate_synthetic_kg
from .training import MethodSpec

OUTPUT_ROOT_ENV = "KGDISTILL_OUTPUT_ROOT"

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARTIAL = 2
EXIT_TOTAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _build_parser():
    parser = _Parser(prog="kgdistill", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="generate a synthetic KG edge-list file")
    gen.add_argument("--out", required=True, help="edge-list output path")
    gen.add_argument("--n-types", type=int, default=3)
    gen.add_argument("--n-relations", type=int, default=4)
    gen.add_argument("--nodes-per-type", type=int, default=500)
    gen.add_argument("--latent-dim", type=int, default=8)
    gen.add_argument("--density", type=float, default=0.02)
    gen.add_argument("--seed", type=int, default=7)

    run = sub.add_parser("run", help="execute an experiment plan")
    run.add_argument("--plan", help="plan file (JSON)")
    run.add_argument("--out", help="output directory")
    run.add_argument("--seeds", help="comma-separated seed list override")
    run.add_argument("--methods", help="comma-separated method override (default specs)")
    run.add_argument("--finetune-epochs", type=int)
    run.add_argument("--dry-run", action="store_true", help="validate and print schedules only")
    run.add_argument("--resume", action="store_true", help="skip cells with existing checkpoints")
    run.add_argument("--jobs", type=int, default=1, help="seeds trained in parallel")

    rep = sub.add_parser("report", help="re-aggregate existing cell reports")
    rep.add_argument("--results", required=True, help="output directory of a previous run")

    ins = sub.add_parser("inspect-schedule", help="print weight triples per epoch")
    ins.add_argument("--method", choices=["flykd", "bkd"], help="print a stock schedule")
    ins.add_argument("--spec", help="schedule spec file (JSON)")
    ins.add_argument("--total-epochs", type=int, default=100)
    return parser


def _cmd_gen_data(args) -> int:
    graph, factors = generate_synthetic_kg(
        args.n_types,
        args.n_relations,
        args.nodes_per_type,
        args.latent_dim,
        args.density,
        args.seed,
    )
    out_dir = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(out_dir, exist_ok=True)
    write_edge_list(graph, args.out, header_comment="synthetic KG; columns: src_type src_id relation dst_type dst_id")
    manifest = {
        "seed": args.seed,
        "density": args.density,
        "latent_dim": args.latent_dim,
        "node_counts": graph.node_counts,
        "relations": [
            {
                "name": r.name,
                "src_type": r.src_type,
                "dst_type": r.dst_type,
                "edges": graph.n_edges(r.name),
                "expected_edges": factors.expected_edges[r.name],
            }
            for r in graph.relations
        ],
    }
    with open(args.out + ".manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    print(f"wrote {graph.total_edges()} edges to {args.out}")
    return EXIT_OK


def _resolve_out_dir(args, plan_dict) -> str:
    if getattr(args, "out", None):
        return args.out
    if plan_dict.get("output_dir"):
        return plan_dict["output_dir"]
    root = os.environ.get(OUTPUT_ROOT_ENV)
    return os.path.join(root, "run") if root else os.path.join("runs", "run")


def _plan_from_args(args) -> tuple[ExperimentPlan, str]:
    plan_dict = {}
    if args.plan:
        with open(args.plan, encoding="utf-8") as fh:
            plan_dict = json.load(fh)
    if args.seeds:
        plan_dict["seeds"] = [int(s) for s in args.seeds.split(",")]
    if args.methods:
        plan_dict["methods"] = [{"method": m.strip()} for m in args.methods.split(",")]
    if args.finetune_epochs is not None:
        plan_dict.setdefault("train", {})["finetune_epochs"] = args.finetune_epochs
    out_dir = _resolve_out_dir(args, plan_dict)
    plan = ExperimentPlan.from_dict(plan_dict)
    return plan, out_dir


def _print_schedule(name, spec: ScheduleSpec):
    print(f"schedule {name}: policy={spec.policy} og_floor={spec.og_floor}")
    for frac, w in spec.keyframes:
        print(f"  keyframe {frac:.3f}: og={w[0]} pe={w[1]} pr={w[2]}")


def _cmd_run(args) -> int:
    plan, out_dir = _plan_from_args(args)
    if args.dry_run:
        total = max(plan.train.finetune_epochs, 1)
        print(f"plan ok: {len(plan.seeds)} seeds x {2 + len(plan.kd_methods())} cells -> {out_dir}")
        for spec in plan.methods:
            schedule = spec.curriculum
            if schedule is None and spec.method == "flykd":
                schedule = default_flykd_schedule(total)
            if schedule is None and spec.method == "bkd":
                schedule = default_bkd_curriculum(total)
            if schedule is not None:
                _print_schedule(spec.name, schedule.with_total_epochs(total))
        return EXIT_OK
    reports, gains, code = run_plan(plan, out_dir, resume=args.resume, jobs=args.jobs)
    for r in reports:
        status = "FAILED" if r.error else f"test AUPRC {100 * r.test_auprc_macro:.2f}"
        print(f"{r.method}-{r.seed}: {status}")
    for method, g in sorted(gains.items()):
        print(f"gain[{method} vs baseline]: {g.format()}")
    print(f"results under {out_dir}")
    return code


def _cmd_report(args) -> int:
    reports, gains = reaggregate(args.results)
    print(f"re-aggregated {len(reports)} cell reports under {args.results}")
    for method, g in sorted(gains.items()):
        print(f"gain[{method} vs baseline]: {g.format()}")
    return EXIT_OK


def _cmd_inspect_schedule(args) -> int:
    if args.spec:
        with open(args.spec, encoding="utf-8") as fh:
            spec = ScheduleSpec.from_dict(json.load(fh))
        spec = spec.with_total_epochs(args.total_epochs)
    elif args.method == "bkd":
        spec = default_bkd_curriculum(args.total_epochs)
    else:
        spec = default_flykd_schedule(args.total_epochs)
    _print_schedule(args.method or "custom", spec)
    print("epoch\tog\tpe\tpr")
    for epoch in range(spec.total_epochs + 1):
        w = weights_at(spec, epoch)
        print(f"{epoch}\t{w.og:.6f}\t{w.pe:.6f}\t{w.pr:.6f}")
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    handlers = {
        "gen-data": _cmd_gen_data,
        "run": _cmd_run,
        "report": _cmd_report,
        "inspect-schedule": _cmd_inspect_schedule,
    }
    try:
        return handlers[args.command](args)
    except (KgdistillError, FileNotFoundError, json.JSONDecodeError, ValueError) as exc:
        print(f"kgdistill {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
