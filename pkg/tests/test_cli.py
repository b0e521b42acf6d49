import json
from pathlib import Path

import pandas as pd
import pytest

import main_batch
import main_gen
import main_search
import main_trace
import main_verify
from src.result_aggregator import BATCH_COLUMNS, SUMMARY_COLUMNS

TRACE_DIR = Path(__file__).parent.parent / "tasks" / "trace"
FAST = ["--budget-restarts", "1", "--budget-iters", "5"]


@pytest.fixture(autouse=True)
def results_in_tmp(tmp_path, monkeypatch):
    monkeypatch.setenv("DYADICBENCH_RESULTS_DIR", str(tmp_path / "results"))
    monkeypatch.delenv("DYADICBENCH_RESTARTS", raising=False)
    monkeypatch.delenv("DYADICBENCH_ITERS", raising=False)
    monkeypatch.delenv("DYADICBENCH_TOL", raising=False)


def read_stdout(capsys):
    return json.loads(capsys.readouterr().out)


def test_gen_prints_instance(capsys):
    assert main_gen.main(["--seed", "1", "--depth", "1", "--r", "inf"]) == 0
    data = read_stdout(capsys)
    assert data["dimension"] == 1 and data["depth"] == 1
    assert data["r"] == "inf"


@pytest.mark.parametrize(
    "flags",
    [["--lambda-preset", "sawyer:2"], ["--p", "1"], ["--lambda-preset", "bogus"]],
)
def test_gen_rejects_bad_parameters(flags):
    assert main_gen.main(flags) == 2


def test_gen_then_verify(tmp_path, capsys):
    instance = tmp_path / "inst.json"
    assert main_gen.main(["--seed", "3", "--lambda-preset", "random", "--weights", "lognormal", "--out", str(instance)]) == 0
    capsys.readouterr()

    copy = tmp_path / "report.json"
    assert main_verify.main([str(instance), "--out", str(copy), *FAST]) == 0
    report = read_stdout(capsys)
    assert report["passed"] is True
    assert json.loads(copy.read_text(encoding="utf-8")) == report
    saved = list((tmp_path / "results" / "verify").glob("*/inst_report.json"))
    assert len(saved) == 1


def test_verify_bad_input(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps({"dimension": 1}), encoding="utf-8")
    assert main_verify.main([str(broken)]) == 2
    assert main_verify.main([str(tmp_path / "missing.json")]) == 2


def test_verify_requires_instance_or_dataset():
    with pytest.raises(SystemExit):
        main_verify.main([])


def test_verify_dataset(capsys):
    assert main_verify.main(["--dataset", *FAST]) == 0
    metrics = read_stdout(capsys)
    assert metrics["total_cases"] == 4
    assert metrics["matched_cases"] == 4
    assert metrics["passed_reports"] == 4
    assert metrics["mismatches"] == []


def test_trace_hand_example(capsys):
    code = main_trace.main(
        [
            str(TRACE_DIR / "instance_unit_d1_L2.json"),
            str(TRACE_DIR / "f_1119.json"),
            str(TRACE_DIR / "g_unit.json"),
        ]
    )
    assert code == 0
    data = read_stdout(capsys)
    assert data["pairing"] == pytest.approx(9.0)
    assert data["split_total"] == pytest.approx(9.0)
    assert data["passed"] is True
    assert [m["cube"] for m in data["families"]["F"]["members"]] == ["0:0", "2:3"]


def test_trace_bad_coefficients(tmp_path):
    bad = tmp_path / "g.json"
    bad.write_text(json.dumps([1.0, 2.0]), encoding="utf-8")
    code = main_trace.main(
        [str(TRACE_DIR / "instance_unit_d1_L2.json"), str(TRACE_DIR / "f_1119.json"), str(bad)]
    )
    assert code == 2


def test_batch_fixed_parameters(tmp_path):
    out = tmp_path / "batch.csv"
    assert main_batch.main(["--seeds", "0:3", "--depth", "1", "--lambda-preset", "random", "--out", str(out), *FAST]) == 0
    frame = pd.read_csv(out)
    assert list(frame.columns) == BATCH_COLUMNS
    assert list(frame["seed"]) == [0, 1, 2]
    assert frame["pass"].all()
    summary = pd.read_csv(tmp_path / "batch_summary.csv")
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert list(summary["instances"]) == [3]


def test_batch_sweep_default_output(tmp_path):
    assert main_batch.main(["--seeds", "0:2", "--sweep", *FAST]) == 0
    files = list((tmp_path / "results" / "batch").glob("*/batch.csv"))
    assert len(files) == 1
    assert len(pd.read_csv(files[0])) == 2


def test_batch_empty_range_writes_header(tmp_path):
    out = tmp_path / "empty.csv"
    assert main_batch.main(["--seeds", "5:5", "--out", str(out)]) == 0
    assert out.read_text(encoding="utf-8").strip() == ",".join(BATCH_COLUMNS)


def test_batch_bad_seed_range():
    assert main_batch.main(["--seeds", "a:b"]) == 2


@pytest.mark.parametrize("flags", [["--p", "1.0"], ["--r", "0.5"], ["--lambda-preset", "sawyer:5"]])
def test_batch_bad_parameters_exit_before_running(tmp_path, flags):
    out = tmp_path / "bad.csv"
    assert main_batch.main(["--seeds", "0:3", "--out", str(out), *flags]) == 2
    assert not out.exists()


def test_parse_seed_range():
    assert main_batch.parse_seed_range("2:5") == range(2, 5)
    assert main_batch.parse_seed_range("7") == range(7, 8)


def test_search_without_iterations(tmp_path, capsys):
    out = tmp_path / "search"
    assert main_search.main(["--iterations", "0", "--out", str(out), *FAST]) == 0
    summary = read_stdout(capsys)
    assert summary["evaluations"] == 1
    assert summary["best_instance"]["depth"] == 2
    assert (out / "rank_1_instance.json").exists()
    assert (out / "rank_1_report.json").exists()
    assert not (out / "rank_2_instance.json").exists()


def test_search_with_restarts(tmp_path, capsys):
    out = tmp_path / "search"
    code = main_search.main(
        ["--iterations", "4", "--patience", "1", "--top-k", "3", "--depth", "1", "--out", str(out), *FAST]
    )
    assert code == 0
    summary = read_stdout(capsys)
    assert summary["evaluations"] == 5
    assert summary["best_ratio"] > 0
    assert len(list(out.glob("rank_*_instance.json"))) == 3


def test_search_bad_preset():
    assert main_search.main(["--iterations", "0", "--lambda-preset", "sawyer:5"]) == 2


def test_batch_single_trivial_seed(tmp_path):
    out = tmp_path / "trivial.csv"
    assert main_batch.main(["--seeds", "0:1", "--depth", "0", "--out", str(out), *FAST]) == 0
    frame = pd.read_csv(out)
    assert len(frame) == 1
    assert frame.loc[0, "C"] == pytest.approx(1.0)
    assert bool(frame.loc[0, "pass"]) is True


def test_batch_is_deterministic(tmp_path):
    first, second = tmp_path / "first.csv", tmp_path / "second.csv"
    flags = ["--seeds", "0:3", "--sweep", *FAST]
    assert main_batch.main([*flags, "--out", str(first)]) == 0
    assert main_batch.main([*flags, "--out", str(second), "--workers", "2"]) == 0
    pd.testing.assert_frame_equal(
        pd.read_csv(first).drop(columns=["wall_clock_s"]),
        pd.read_csv(second).drop(columns=["wall_clock_s"]),
    )
