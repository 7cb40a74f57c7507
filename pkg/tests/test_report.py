import json

import numpy as np
import pytest

from kgdistill.errors import ConfigError
from kgdistill.report import (
    RunReport,
    compute_gains,
    emit_report,
    strip_timing,
    write_event_log,
)
from kgdistill.training import EpochRecord


def make_report(method, seed, macro, per_rel=None, error=None, wall=1.5):
    per_rel = per_rel if per_rel is not None else {"rel0": macro}
    return RunReport(
        method=method,
        seed=seed,
        best_val_auprc=macro,
        test_auprc_macro=macro,
        test_auprc_per_relation=per_rel,
        wall_time_s=wall,
        error=error,
    )


class TestRunReport:
    def test_macro_consistency_enforced(self):
        with pytest.raises(ValueError, match="average"):
            RunReport(
                method="m",
                seed=1,
                best_val_auprc=0.5,
                test_auprc_macro=0.9,
                test_auprc_per_relation={"a": 0.5, "b": 0.5},
                wall_time_s=0.0,
            )

    def test_range_enforced(self):
        with pytest.raises(ValueError):
            make_report("m", 1, 1.7)

    def test_round_trip(self):
        r = make_report("flykd", 45, 0.75, per_rel={"a": 0.7, "b": 0.8})
        again = RunReport.from_dict(r.to_dict())
        assert again == r


class TestGains:
    def test_pairing_and_exclusions(self):
        reports = [
            make_report("baseline", 1, 0.70),
            make_report("baseline", 2, 0.60),
            make_report("teacher", 1, 0.90),  # never in gains
            make_report("teacher", 2, 0.90),
            make_report("flykd", 1, 0.72),
            make_report("flykd", 2, 0.63),
            make_report("bkd", 1, 0.69),  # seed 2 missing: single-seed gain
        ]
        gains = compute_gains(reports)
        assert set(gains) == {"flykd", "bkd"}
        assert gains["flykd"].mean == pytest.approx(2.5)
        assert gains["flykd"].per_seed == {1: pytest.approx(2.0), 2: pytest.approx(3.0)}
        assert gains["bkd"].n_seeds == 1

    def test_failed_cells_dropped(self):
        reports = [
            make_report("baseline", 1, 0.70),
            make_report("flykd", 1, 0.72),
            make_report("flykd", 2, 0.0, error="boom"),
            make_report("baseline", 2, 0.60),
        ]
        gains = compute_gains(reports)
        assert gains["flykd"].n_seeds == 1


class TestEmitReport:
    def reports(self):
        return [
            make_report("baseline", 45, 0.70),
            make_report("baseline", 46, 0.72),
            make_report("flykd", 45, 0.73),
            make_report("flykd", 46, 0.74),
        ]

    def test_row_counts(self, tmp_path):
        reports = self.reports()
        summary, results = emit_report(reports, tmp_path, compute_gains(reports))
        lines = [l for l in open(summary).read().splitlines() if l.strip()]
        # header + 2 method rows + gains header x2 + 1 gain row
        assert sum(1 for l in lines if l.startswith(("baseline", "flykd"))) == 3
        payload = json.load(open(results))
        assert len(payload["runs"]) == 4
        assert "flykd" in payload["gains"]

    def test_reemit_byte_identical(self, tmp_path):
        reports = self.reports()
        d1, d2 = tmp_path / "one", tmp_path / "two"
        s1, r1 = emit_report(reports, d1, compute_gains(reports))
        s2, r2 = emit_report(reports, d2, compute_gains(reports))
        assert open(s1, "rb").read() == open(s2, "rb").read()
        assert open(r1, "rb").read() == open(r2, "rb").read()

    def test_empty_input_rejected(self, tmp_path):
        with pytest.raises(ConfigError):
            emit_report([], tmp_path)

    def test_strip_timing_removes_wall_times(self, tmp_path):
        reports = self.reports()
        _s, results = emit_report(reports, tmp_path, None)
        payload = json.load(open(results))
        stripped = strip_timing(payload)
        assert all("timing" not in run for run in stripped["runs"])
        assert all("timing" in run for run in payload["runs"])


def test_event_log_round_trips_floats(tmp_path):
    rec = EpochRecord(
        epoch=0,
        og_w=1.0,
        pe_w=0.1234567890123456,
        pr_w=0.0,
        lsp_w=0.0,
        loss_og=0.6931471805599453,
        loss_pe=0.0,
        loss_pr=0.0,
        loss_lsp=0.0,
        loss_total=0.6931471805599453,
        lr_multiplier=1.0,
        val_auprc=0.5,
        seconds=0.01,
    )
    p = tmp_path / "events.csv"
    write_event_log(p, [rec])
    lines = p.read_text().splitlines()
    assert len(lines) == 2
    header = lines[0].split(",")
    row = lines[1].split(",")
    rec_map = dict(zip(header, row))
    assert float(rec_map["loss_og"]) == rec.loss_og
    assert float(rec_map["pe_w"]) == rec.pe_w
