"""Experiment orchestration: config parsing, determinism, persistence."""

import json
import math

import pytest

from coverlab import harness

SEED = 31337


def strip_wall(records):
    return [{k: v for k, v in r.items() if k != "wall_time"} for r in records]


def test_config_parsing(tmp_path):
    cfg_file = tmp_path / "exp.cfg"
    cfg_file.write_text(
        "# a comment\n"
        "experiment=srw-cover\n"
        "seed=42\n"
        "workers=2\n"
        "srw.r=30,60\n"
        "srw.samples=10\n"
        "srw.engine=excursion\n")
    cfg = harness.ExperimentConfig.from_file(str(cfg_file))
    assert cfg.experiment == "srw-cover"
    assert cfg.seed == 42
    assert cfg.workers == 2
    assert cfg.parameters["r"] == [30.0, 60.0]
    assert cfg.parameters["samples"] == 10
    assert cfg.parameters["engine"] == "excursion"


def test_config_validation_rejects_small_radius():
    cfg = harness.ExperimentConfig("srw-cover", {"r": 4, "samples": 1}, seed=1)
    with pytest.raises(ValueError):
        cfg.validate()


def test_config_validation_rejects_unknown_experiment():
    with pytest.raises(ValueError):
        harness.ExperimentConfig("warp-drive", {}, seed=1).validate()


def test_run_experiment_deterministic_records():
    cfg = lambda workers: harness.ExperimentConfig(
        "exit-time", {"r": 30, "samples": 6}, seed=SEED, workers=workers)
    rec1, sum1 = harness.run_experiment(cfg(1))
    rec2, sum2 = harness.run_experiment(cfg(1))
    rec3, sum3 = harness.run_experiment(cfg(2))
    assert strip_wall(rec1) == strip_wall(rec2) == strip_wall(rec3)
    assert sum1 == sum2 == sum3


def test_records_written_as_jsonl(tmp_path):
    out = tmp_path / "records.jsonl"
    cfg = harness.ExperimentConfig("hitting",
                                   {"rho": 1, "r": 2, "P": 4, "samples": 200},
                                   seed=SEED, output_path=str(out))
    records, summary = harness.run_experiment(cfg)
    lines = out.read_text().strip().splitlines()
    assert [json.loads(ln) for ln in lines] == records
    csv_lines = (tmp_path / "records.jsonl.summary.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + len(summary)
    for rec in records:
        assert rec["schema"] == harness.SCHEMA_VERSION
        assert rec["experiment"] == "hitting"
        assert not rec["budget_exceeded"]


def test_summarize_is_pure():
    cfg = harness.ExperimentConfig("iid-cover",
                                   {"r": 12, "k": 8, "samples": 8}, seed=SEED)
    records, summary = harness.run_experiment(cfg)
    assert harness.summarize(records, "iid-cover") == summary


def test_srw_cover_summary_groups_by_radius():
    cfg = harness.ExperimentConfig(
        "srw-cover", {"r": [8, 9], "samples": 3, "engine": "excursion"},
        seed=SEED)
    records, summary = harness.run_experiment(cfg)
    assert len(records) == 6
    assert [row["r"] for row in summary] == [8.0, 9.0]
    for row in summary:
        assert row["count"] == 3
        assert row["q05"] <= row["median"] <= row["q95"]


def test_series_scan_records():
    cfg = harness.ExperimentConfig(
        "series-scan",
        {"lam": [0.2, 0.25, 0.3], "alpha": 1.05, "eps1": 0, "eps2": 0},
        seed=SEED)
    records, _ = harness.run_experiment(cfg)
    by_key = {(r["lam"], r["side"]): r for r in records}
    assert not by_key[(0.2, "lower")]["converges"]
    assert not by_key[(0.25, "lower")]["converges"]
    assert by_key[(0.3, "lower")]["converges"]
    assert by_key[(0.3, "lower")]["exponent"] == pytest.approx(1.2, rel=1e-12)


def test_lil_statistic_formula():
    # (ln R)^2 / (ln n * ln ln ln n) at the documented instance
    val = harness.lil_statistic(10 ** 6, 5.0)
    want = math.log(5.0) ** 2 / (math.log(10 ** 6)
                                 * math.log(math.log(math.log(10 ** 6))))
    assert val == pytest.approx(want, rel=1e-12)
    assert val == pytest.approx(0.1942, abs=5e-5)
    assert harness.lil_statistic(10 ** 6, 1.0) == 0.0


def test_lil_statistic_report_running_max():
    cfg = harness.ExperimentConfig(
        "lil-statistic", {"alpha": 1.5, "budget": 200_000, "samples": 1},
        seed=SEED)
    records, _ = harness.run_experiment(cfg)
    rows = harness.lil_statistic_report(records)
    assert rows
    maxes = [row["running_max"] for row in rows]
    assert maxes == sorted(maxes)
    for row in rows:
        assert row["statistic"] <= row["running_max"] + 1e-15
