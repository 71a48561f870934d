import json

import pytest

from pathstat.cli import main
from pathstat.pathcore import read_path_file


def run(args):
    return main([str(a) for a in args])


def test_generate_writes_readable_path(tmp_path):
    out = tmp_path / "path.txt"
    assert run(["generate", "--spec", "sine(theta=1.5707963267948966),L=16",
                "--out", out]) == 0
    path = read_path_file(str(out))
    assert path.length == 16
    assert path.values[1] == pytest.approx(1.0)


def test_analyze_constant_passes(tmp_path):
    code = run(["analyze", "generate:constant(2),L=1000",
                "--out-dir", tmp_path])
    assert code == 0
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["overall_pass"] is True
    assert report["propertyT"]["verdict"] is True
    assert report["ergodicity"]["verdict"] == "ConsistentWithErgodic"
    assert (tmp_path / "density_trajectories.csv").exists()


def test_analyze_monotone_exits_2_with_tightness_fail(tmp_path):
    code = run(["analyze", "generate:monotone(1),L=10000",
                "--out-dir", tmp_path])
    assert code == 2
    report = json.loads((tmp_path / "report.json").read_text())
    assert report["propertyT"]["verdict"] is False
    assert report["propertyE"]["pass"] is False


def test_analyze_nan_row_exits_1(tmp_path, capsys):
    bad = tmp_path / "bad.txt"
    bad.write_text("1\n2\nnan\n")
    assert run(["analyze", bad, "--out-dir", tmp_path]) == 1
    assert "line 3" in capsys.readouterr().err


def test_analyze_reruns_byte_identical(tmp_path):
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    for d in (dir_a, dir_b):
        assert run(["analyze", "generate:ar1(0.5),L=5000,seed=9",
                    "--out-dir", d]) == 0
    assert (dir_a / "report.json").read_bytes() == \
        (dir_b / "report.json").read_bytes()
    assert (dir_a / "density_trajectories.csv").read_bytes() == \
        (dir_b / "density_trajectories.csv").read_bytes()


def test_config_file_overrides_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"k_max": 1}))
    assert run(["analyze", "generate:constant(2),L=500", "--k-max", "2",
                "--config", cfg, "--out-dir", tmp_path]) == 0
    report = json.loads((tmp_path / "report.json").read_text())
    ks = {v["k"] for v in report["propertyE"]["verdicts"]}
    assert ks == {1}


def test_config_file_rejects_unknown_keys(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run(["analyze", "generate:constant(2),L=500",
                "--config", cfg, "--out-dir", tmp_path]) == 1
    assert "bogus" in capsys.readouterr().err


def test_env_seed_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv("PATHSTAT_SEED", "123")
    out_a = tmp_path / "a.txt"
    out_b = tmp_path / "b.txt"
    run(["generate", "--spec", "iid_normal(0,1),L=50", "--out", out_a])
    run(["generate", "--spec", "iid_normal(0,1),L=50,seed=123", "--out", out_b])
    assert out_a.read_bytes() == out_b.read_bytes()


def test_testbench_summary_and_csv(tmp_path):
    tests = tmp_path / "tests.json"
    tests.write_text(json.dumps([
        {"kind": "threshold_exceedance", "n": 20,
         "tau": 1.6448536269514722 / 20 ** 0.5, "alpha": 0.05},
        {"kind": "mean_split", "n": 20, "alpha": 0.05,
         "calibration": {"generator": "iid_normal(0,1),L=20",
                         "replicates": 2000, "seed": 4}},
    ]))
    code = run(["testbench", "generate:iid_normal(0,1),L=100000,seed=5",
                "--tests", tests, "--out-dir", tmp_path])
    assert code == 0
    summary = json.loads((tmp_path / "testbench_summary.json").read_text())
    assert len(summary["tests"]) == 2
    for entry in summary["tests"]:
        assert entry["compliant"] is True
        csv_lines = (tmp_path / entry["indicators_csv"]).read_text().splitlines()
        assert csv_lines[0] == "offset,indicator"
        assert len(csv_lines) == 100000 - 20 + 1 + 1


def test_testbench_flags_trend(tmp_path):
    tests = tmp_path / "tests.json"
    tests.write_text(json.dumps(
        [{"kind": "mean_split", "n": 20, "tau": 0.9, "alpha": 0.05}]))
    assert run(["testbench", "generate:monotone(1),L=20000",
                "--tests", tests, "--out-dir", tmp_path]) == 0
    summary = json.loads((tmp_path / "testbench_summary.json").read_text())
    assert summary["tests"][0]["upper_density"] == 1.0
    assert summary["tests"][0]["compliant"] is False


def test_testbench_empty_tests_is_usage_error(tmp_path, capsys):
    tests = tmp_path / "tests.json"
    tests.write_text("[]")
    assert run(["testbench", "generate:constant(1),L=100",
                "--tests", tests, "--out-dir", tmp_path]) == 1


def test_testbench_infeasible_window_is_error(tmp_path):
    tests = tmp_path / "tests.json"
    tests.write_text(json.dumps(
        [{"kind": "mean_split", "n": 500, "tau": 0.1, "alpha": 0.05}]))
    assert run(["testbench", "generate:constant(1),L=100",
                "--tests", tests, "--out-dir", tmp_path]) == 1


def test_montecarlo_small_table(tmp_path):
    code = run(["montecarlo", "--generators", "constant(2),L=2000",
                "monotone(1),L=2000", "--replicates", "3", "--seed", "0",
                "--out-dir", tmp_path])
    assert code == 0
    table = json.loads((tmp_path / "montecarlo.json").read_text())["table"]
    by_kind = {row["generator"].split("(")[0]: row for row in table}
    assert by_kind["constant"]["fraction"] == 1.0
    assert by_kind["monotone"]["fraction"] == 0.0


def test_contract_dump_and_trace(tmp_path):
    out = tmp_path / "contraction.json"
    trace = tmp_path / "trace.json"
    code = run(["contract", "generate:block_mixture(0,5),L=50000,seed=1",
                "--cell", "4", "6", "--threshold", "0.75",
                "--m-schedule", "4,8,16,32", "--out", out, "--trace", trace,
                "--out-dir", tmp_path])
    assert code == 0
    payload = json.loads(out.read_text())
    assert payload["failed"] is False
    assert payload["validation"]["passed"] is True
    blocks = payload["contraction"]["blocks"]
    assert all(e >= s for s, e in blocks)
    trace_payload = json.loads(trace.read_text())
    assert set(trace_payload["v0"]) == {"4", "8", "16", "32"}


def test_contract_unreadable_input_is_error(tmp_path, capsys):
    assert run(["contract", tmp_path / "missing.txt",
                "--cell", "0", "1"]) == 1
