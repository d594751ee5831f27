"""Command-line surface: exit codes, manifests, and config resolution."""

import csv
import json

import pytest

from sentalpha.bo_rfe import read_selection
from sentalpha.cli import main
from sentalpha.manifest import file_sha256


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    code = main(["synth", "--out", str(out), "--n-days", "120", "--seed", "3"])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def ingest_dir(tmp_path_factory, synth_dir):
    out = tmp_path_factory.mktemp("ingest")
    code = main([
        "ingest", "--out", str(out),
        "--bars", str(synth_dir / "bars.csv"),
        "--tweets", str(synth_dir / "tweets.csv"),
    ])
    assert code == 0
    return out


def read_manifest(out_dir):
    return json.loads((out_dir / "manifest.json").read_text())


# -- synth ---------------------------------------------------------------------

def test_synth_outputs_and_manifest(synth_dir):
    for name in ("bars.csv", "tweets.csv", "ground_truth.json",
                 "manifest.json"):
        assert (synth_dir / name).exists()
    manifest = read_manifest(synth_dir)
    assert manifest["command"] == "synth"
    assert manifest["seed"] == 3
    assert manifest["config"]["n_days"] == 120
    assert sorted(manifest["outputs"]) == [
        "bars.csv", "ground_truth.json", "tweets.csv"]
    assert manifest["tool"]["name"] == "sentalpha"


def test_synth_same_seed_same_bytes(tmp_path, synth_dir):
    again = tmp_path / "again"
    code = main(["synth", "--out", str(again), "--n-days", "120",
                 "--seed", "3"])
    assert code == 0
    for name in ("bars.csv", "tweets.csv", "ground_truth.json"):
        assert (again / name).read_bytes() == (synth_dir / name).read_bytes()


def test_synth_rejects_bad_start(tmp_path, capsys):
    code = main(["synth", "--out", str(tmp_path / "x"), "--n-days", "120",
                 "--start", "2024-01-02"])
    assert code == 2
    assert "Monday" in capsys.readouterr().err


# -- ingest ---------------------------------------------------------------------

def test_ingest_outputs_and_digests(synth_dir, ingest_dir):
    assert (ingest_dir / "aligned.csv").exists()
    assert (ingest_dir / "sentiment.csv").exists()
    manifest = read_manifest(ingest_dir)
    assert manifest["command"] == "ingest"
    assert manifest["inputs"]["bars"]["sha256"] == file_sha256(
        synth_dir / "bars.csv")
    assert manifest["inputs"]["tweets"]["sha256"] == file_sha256(
        synth_dir / "tweets.csv")
    assert sorted(manifest["outputs"]) == ["aligned.csv", "sentiment.csv"]


def test_ingest_malformed_bars_exits_2_with_line(tmp_path, capsys, synth_dir):
    bad = tmp_path / "bad.csv"
    lines = (synth_dir / "bars.csv").read_text().splitlines()
    lines[3] = lines[3].replace(",", ",oops", 1)
    bad.write_text("\n".join(lines) + "\n")
    code = main(["ingest", "--out", str(tmp_path / "o"), "--bars", str(bad),
                 "--tweets", str(synth_dir / "tweets.csv")])
    assert code == 2
    err = capsys.readouterr().err
    assert "error:" in err
    assert "line 4" in err


def test_ingest_missing_file_exits_2(tmp_path, capsys):
    code = main(["ingest", "--out", str(tmp_path / "o"),
                 "--bars", str(tmp_path / "none.csv"),
                 "--tweets", str(tmp_path / "none2.csv")])
    assert code == 2
    assert "error:" in capsys.readouterr().err


def test_missing_required_flag_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["ingest", "--out", "/tmp/x"])
    assert exc.value.code == 2


# -- analyze ---------------------------------------------------------------------

def test_analyze_writes_report(tmp_path, ingest_dir):
    out = tmp_path / "analysis"
    code = main(["analyze", "--out", str(out), "--data", str(ingest_dir),
                 "--max-lag", "10"])
    assert code == 0
    rows = list(csv.reader((out / "correlations.csv").open()))
    assert rows[0] == ["kind", "series_x", "series_y", "lag", "value"]
    assert len(rows) > 20
    assert (out / "leadlag.svg").exists()
    assert (out / "acf.svg").exists()
    manifest = read_manifest(out)
    assert manifest["config"]["max_lag"] == 10


# -- select ----------------------------------------------------------------------

@pytest.fixture(scope="module")
def select_dir(tmp_path_factory, ingest_dir):
    out = tmp_path_factory.mktemp("select")
    code = main([
        "select", "--out", str(out), "--data", str(ingest_dir),
        "--iterations", "3", "--train-days", "60", "--test-days", "15",
        "--theta-min", "5", "--theta-max", "10", "--seed", "1",
    ])
    assert code == 0
    return out


def test_select_outputs(select_dir):
    result = read_selection(select_dir / "selection.json")
    assert 1 <= result.gamma <= 10  # default base set has ten features
    assert 5 <= result.theta <= 10
    assert len(result.features) == result.gamma
    assert len(result.evaluations) == 3
    trace = list(csv.reader((select_dir / "selection_trace.csv").open()))
    assert len(trace) == 1 + 3
    assert (select_dir / "selection_trace.svg").exists()


# -- backtest ---------------------------------------------------------------------

def test_backtest_single_builtin(tmp_path, ingest_dir):
    out = tmp_path / "bt"
    code = main([
        "backtest", "--out", str(out), "--data", str(ingest_dir),
        "--strategies", "borfe2", "--test-days", "10", "--batch-size", "5",
        "--seed", "2",
    ])
    assert code == 0
    rows = list(csv.reader((out / "comparison.csv").open()))
    assert rows[0][0] == "strategy"
    assert [r[0] for r in rows[1:]] == ["borfe2"]
    assert (out / "borfe2_daily.csv").exists()
    assert (out / "borfe2_batches.csv").exists()
    assert (out / "cum_pnl.svg").exists()
    assert (out / "batch_f1.svg").exists()
    daily = list(csv.reader((out / "borfe2_daily.csv").open()))
    assert len(daily) > 1


def test_backtest_selection_strategy(tmp_path, ingest_dir, select_dir):
    out = tmp_path / "bt_sel"
    code = main([
        "backtest", "--out", str(out), "--data", str(ingest_dir),
        "--strategies", "borfe2", "--selection",
        str(select_dir / "selection.json"), "--test-days", "8",
    ])
    assert code == 0
    rows = list(csv.reader((out / "comparison.csv").open()))
    assert [r[0] for r in rows[1:]] == ["borfe2", "selected"]
    manifest = read_manifest(out)
    assert "selection" in manifest["inputs"]


def test_backtest_window_sweep_names(tmp_path, ingest_dir):
    out = tmp_path / "bt_sweep"
    code = main([
        "backtest", "--out", str(out), "--data", str(ingest_dir),
        "--strategies", "borfe2", "--windows", "20,30", "--test-days", "6",
    ])
    assert code == 0
    rows = list(csv.reader((out / "comparison.csv").open()))
    assert [r[0] for r in rows[1:]] == ["borfe2@w20", "borfe2@w30"]
    assert (out / "borfe2@w20_daily.csv").exists()


def test_backtest_unknown_strategy_exits_2(tmp_path, capsys, ingest_dir):
    code = main(["backtest", "--out", str(tmp_path / "o"), "--data",
                 str(ingest_dir), "--strategies", "alpha9"])
    assert code == 2
    assert "unknown strategy" in capsys.readouterr().err


# -- config resolution -------------------------------------------------------------

def test_config_file_under_flags(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n_days": 90, "seed": 7}))
    out = tmp_path / "from_config"
    assert main(["synth", "--out", str(out), "--config", str(cfg)]) == 0
    manifest = read_manifest(out)
    assert manifest["config"]["n_days"] == 90  # config file beats the default
    assert manifest["seed"] == 7

    out2 = tmp_path / "flag_wins"
    assert main(["synth", "--out", str(out2), "--config", str(cfg),
                 "--n-days", "60"]) == 0
    assert read_manifest(out2)["config"]["n_days"] == 60  # flag beats config
    assert read_manifest(out2)["seed"] == 7


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert "sentalpha" in capsys.readouterr().out
