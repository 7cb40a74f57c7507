import json
import os

import numpy as np
import pytest

from kgdistill.errors import ConfigError
from kgdistill.model import TrainConfig
from kgdistill.pseudo import RandomGraphSpec
from kgdistill.runner import DataSpec, ExperimentPlan, build_graph, run_plan
from kgdistill.splits import SplitSpec
from kgdistill.training import MethodSpec


def tiny_plan(out_dir, methods=None, seeds=(1, 2)):
    return ExperimentPlan(
        data=DataSpec(
            source="synthetic",
            n_types=2,
            n_relations=2,
            nodes_per_type=60,
            latent_dim=4,
            density=0.06,
            seed=13,
        ),
        split=SplitSpec(target_relations=["rel0"]),
        train=TrainConfig(
            d_teacher=12,
            d_student=6,
            pretrain_epochs=1,
            finetune_epochs=5,
            finetune_lr=0.002,
            plateau_window=3,
        ),
        methods=methods
        or [MethodSpec(method="baseline"), MethodSpec(method="flykd", random_graph=RandomGraphSpec(k=32))],
        seeds=list(seeds),
        output_dir=str(out_dir),
    )


class TestPlanValidation:
    def test_duplicate_seeds_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="seeds"):
            tiny_plan(tmp_path, seeds=(1, 1)).validate()

    def test_duplicate_method_names_rejected(self, tmp_path):
        methods = [
            MethodSpec(method="flykd", name="same"),
            MethodSpec(method="bkd", name="same"),
        ]
        with pytest.raises(ConfigError, match="distinct"):
            tiny_plan(tmp_path, methods=methods).validate()

    def test_reserved_name_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="reserved"):
            tiny_plan(tmp_path, methods=[MethodSpec(method="bkd", name="teacher")]).validate()

    def test_file_source_needs_path(self):
        with pytest.raises(ConfigError, match="path"):
            DataSpec(source="file").validate()

    def test_round_trip(self, tmp_path):
        plan = tiny_plan(tmp_path)
        again = ExperimentPlan.from_dict(plan.to_dict())
        assert again.to_dict() == plan.to_dict()


class TestCellIsolation:
    def test_failing_cell_recorded_others_survive(self, tmp_path):
        # random graph over a relation with no edges fails at generation
        bad = MethodSpec(
            method="flykd",
            name="flykd-bad",
            random_graph=RandomGraphSpec(k=16, relations=["rel-that-does-not-exist"]),
        )
        good = MethodSpec(method="flykd", name="flykd-good", random_graph=RandomGraphSpec(k=16))
        plan = tiny_plan(tmp_path, methods=[MethodSpec(method="baseline"), bad, good], seeds=(1,))
        reports, gains, code = run_plan(plan, tmp_path)
        assert code == 2  # partial failure
        by_name = {r.method: r for r in reports}
        assert by_name["flykd-bad"].error
        assert not by_name["flykd-good"].error
        assert "flykd-good" in gains
        assert "flykd-bad" not in gains
        # the failed cell left no checkpoint behind
        assert not os.path.exists(tmp_path / "flykd-bad-1.ckpt")
        assert os.path.exists(tmp_path / "flykd-good-1.ckpt")

    def test_resume_retries_failed_cells_only(self, tmp_path):
        bad = MethodSpec(
            method="flykd",
            name="flykd-bad",
            random_graph=RandomGraphSpec(k=16, relations=["nope"]),
        )
        plan = tiny_plan(tmp_path, methods=[MethodSpec(method="baseline"), bad], seeds=(1,))
        run_plan(plan, tmp_path)
        baseline_mtime = os.path.getmtime(tmp_path / "baseline-1.ckpt")

        fixed = MethodSpec(
            method="flykd", name="flykd-bad", random_graph=RandomGraphSpec(k=16)
        )
        plan2 = tiny_plan(tmp_path, methods=[MethodSpec(method="baseline"), fixed], seeds=(1,))
        reports, _gains, code = run_plan(plan2, tmp_path, resume=True)
        assert code == 0
        assert os.path.getmtime(tmp_path / "baseline-1.ckpt") == baseline_mtime
        assert os.path.exists(tmp_path / "flykd-bad-1.ckpt")


def test_build_graph_from_file_round_trip(tmp_path):
    from kgdistill.graph import write_edge_list

    g1 = build_graph(DataSpec(source="synthetic", nodes_per_type=40, density=0.05, seed=3))
    path = tmp_path / "kg.tsv"
    write_edge_list(g1, path)
    g2 = build_graph(DataSpec(source="file", path=str(path)))
    assert g2.total_edges() == g1.total_edges()


def test_split_manifest_written_per_seed(tmp_path):
    plan = tiny_plan(tmp_path, seeds=(1,))
    run_plan(plan, tmp_path)
    manifest = tmp_path / "test-triples-1.tsv"
    assert manifest.exists()
    lines = manifest.read_text().splitlines()
    assert lines and all(len(l.split("\t")) == 5 for l in lines)
