import json
import math
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from marketmoments.cli import main, parse_duration

TICKS_CSV = "time,value,volume\n1.0,12.0,3.0\n2.0,2.0,1.0\n"
DEALS_CSV = ("agent,time,value\n"
             "alice,0.5,2.0\nbob,1.0,4.0\nalice,1.5,6.0\n")


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def _genspec_doc(n=200, seed=5, target=0.0):
    return {
        "n_ticks": n, "time_step": 0.1, "seed": seed,
        "target_corr_cu": target,
        "value_dist": {"kind": "lognormal", "mu": 1.0, "sigma": 0.5},
        "volume_dist": {"kind": "lognormal", "mu": 0.2, "sigma": 0.4},
    }


def _composite_doc(**extra):
    doc = {
        "components": [
            {"label": "sales", "beta": 3.0, "mean": 4.0,
             "volatility": 8.0 / 3.0},
            {"label": "expenses", "beta": -2.0, "mean": 2.0, "volatility": 1.0},
        ],
        "correlations": [{"pair": ["sales", "expenses"], "value": 1.0}],
    }
    doc.update(extra)
    return doc


# ---------------------------------------------------------------------------
# parse_duration
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("text,want", [
    ("250ms", 0.25), ("1.5s", 1.5), ("2m", 120.0), ("1h", 3600.0),
    ("1d", 86400.0), ("42", 42.0), (" 3s ", 3.0),
])
def test_parse_duration(text, want):
    assert parse_duration(text) == want


@pytest.mark.parametrize("bad", ["", "abc", "-1s", "0", "1w", "nan"])
def test_parse_duration_rejects(bad):
    import argparse
    with pytest.raises(argparse.ArgumentTypeError):
        parse_duration(bad)


# ---------------------------------------------------------------------------
# analyze
# ---------------------------------------------------------------------------

def test_analyze_worked_fixture(tmp_path, capsys):
    inp = _write(tmp_path, "ticks.csv", TICKS_CSV)
    out = tmp_path / "reports"
    assert main(["analyze", str(inp), "--window", "10s",
                 "--output", str(out)]) == 0
    files = sorted(out.iterdir())
    assert [f.name for f in files] == ["window_000000.json"]
    doc = json.loads(files[0].read_text())
    assert doc["kind"] == "analyze"
    assert doc["price_direct"]["mean"] == 3.5
    assert doc["price_direct"]["volatility"] == 0.45
    assert doc["price_closed_form"]["volatility"] == 0.45
    assert doc["price_path_gap"] <= 1e-12
    assert doc["gaussians"]["price"] == {"mean": 3.5, "variance": 0.45}
    assert "returns_direct" not in doc
    assert "wrote 1 window report(s)" in capsys.readouterr().out


def test_analyze_multiple_windows(tmp_path):
    rows = ["time,value,volume"] + [f"{0.25 * i},{2.0 + i},1.0" for i in range(20)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    out = tmp_path / "rep"
    assert main(["analyze", str(inp), "--window", "1s",
                 "--output", str(out)]) == 0
    files = sorted(out.iterdir())
    assert len(files) == 5
    first = json.loads(files[0].read_text())
    assert first["window"] == {"center": 0.5, "width": 1.0, "lo": 0.0, "hi": 1.0}
    assert first["n_ticks"] == 4


def test_analyze_with_lag(tmp_path):
    rows = ["time,value,volume"] + [f"{i}.0,{4.0 * (i + 1)},2.0" for i in range(6)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    out = tmp_path / "rep"
    assert main(["analyze", str(inp), "--window", "2s", "--lag", "2s",
                 "--output", str(out)]) == 0
    docs = [json.loads(p.read_text()) for p in sorted(out.iterdir())]
    assert "returns_direct" not in docs[0]  # nothing 2s back yet
    assert docs[0]["n_unresolved"] == 2
    assert any("return section empty" in w for w in docs[0]["warnings"])
    later = docs[1]
    assert later["n_unresolved"] == 0
    assert later["lag"] == 2.0
    assert later["returns_path_gap"] <= 1e-9
    # window [2,4): values 12,16; past prices at t=0,1 are 2,4 -> past
    # values 4,8 -> mean return 28/12
    assert later["returns_direct"]["mean"] == pytest.approx(28.0 / 12.0)
    assert "return" in later["gaussians"]


def test_returns_subcommand_requires_lag(tmp_path):
    inp = _write(tmp_path, "t.csv", TICKS_CSV)
    with pytest.raises(SystemExit) as exc:
        main(["returns", str(inp), "--window", "10s",
              "--output", str(tmp_path / "o")])
    assert exc.value.code == 2


def test_returns_subcommand_runs(tmp_path):
    rows = ["time,value,volume"] + [f"{i}.0,{4.0 * (i + 1)},2.0" for i in range(6)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    out = tmp_path / "rep"
    assert main(["returns", str(inp), "--window", "2s", "--lag", "1s",
                 "--output", str(out)]) == 0
    doc = json.loads((sorted(out.iterdir())[1]).read_text())
    assert doc["kind"] == "returns"
    assert "returns_direct" in doc


def test_analyze_empty_input_fails(tmp_path, capsys):
    inp = _write(tmp_path, "empty.csv", "time,value,volume\n")
    assert main(["analyze", str(inp), "--window", "1s",
                 "--output", str(tmp_path / "rep")]) == 3
    assert "no ticks" in capsys.readouterr().err


def test_analyze_bad_data_exit_3(tmp_path, capsys):
    inp = _write(tmp_path, "bad.csv", "time,value,volume\n1.0,2.0,-1.0\n")
    assert main(["analyze", str(inp), "--window", "1s",
                 "--output", str(tmp_path / "rep")]) == 3
    assert "volume" in capsys.readouterr().err


def test_analyze_missing_file_exit_3(tmp_path):
    assert main(["analyze", str(tmp_path / "nope.csv"), "--window", "1s",
                 "--output", str(tmp_path / "rep")]) == 3


def test_analyze_strict_unresolved_lag_exit_4(tmp_path):
    inp = _write(tmp_path, "t.csv", TICKS_CSV)
    args = ["analyze", str(inp), "--window", "10s", "--lag", "1h",
            "--output", str(tmp_path / "rep")]
    assert main(args) == 0  # warning only
    assert main(args + ["--strict"]) == 4


def test_analyze_strict_zero_mean_price_exit_4(tmp_path):
    inp = _write(tmp_path, "t.csv",
                 "time,value,volume\n1.0,-5.0,1.0\n2.0,5.0,1.0\n")
    args = ["analyze", str(inp), "--window", "10s",
            "--output", str(tmp_path / "rep")]
    assert main(args) == 0
    doc = json.loads((tmp_path / "rep" / "window_000000.json").read_text())
    assert doc["price_direct"]["cv_sq"] == {"degenerate": "nan"}
    assert any("CV undefined" in w for w in doc["warnings"])
    assert main(args + ["--strict"]) == 4


def test_analyze_gap_flag(tmp_path):
    rows = ["time,value,volume"] + [f"0.{i},{2.0 + 0.1 * i},1.0" for i in range(8)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    out = tmp_path / "rep"
    assert main(["analyze", str(inp), "--window", "1s", "--gap",
                 "--output", str(out)]) == 0
    doc = json.loads((out / "window_000000.json").read_text())
    assert set(doc["gap"]) == {"ks_statistic", "excess_skewness",
                               "excess_kurtosis"}


def test_analyze_threads_do_not_change_bytes(tmp_path):
    rows = ["time,value,volume"] + [
        f"{0.05 * i},{1.0 + (i % 7) * 0.25},{1.0 + (i % 3)}" for i in range(400)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    outs = []
    for threads in ("1", "3"):
        out = tmp_path / f"rep{threads}"
        assert main(["analyze", str(inp), "--window", "1s", "--lag", "2s",
                     "--threads", threads, "--output", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]


def test_analyze_small_chunks_do_not_change_bytes(tmp_path):
    rows = ["time,value,volume"] + [
        f"{0.1 * i},{1.0 + (i % 5) * 0.5},1.5" for i in range(100)]
    inp = _write(tmp_path, "t.csv", "\n".join(rows) + "\n")
    outs = []
    for chunk in ("7", "1000000"):
        out = tmp_path / f"rep{chunk}"
        assert main(["analyze", str(inp), "--window", "1s", "--lag", "3s",
                     "--chunk-rows", chunk, "--output", str(out)]) == 0
        outs.append({p.name: p.read_bytes() for p in out.iterdir()})
    assert outs[0] == outs[1]


# ---------------------------------------------------------------------------
# aggregate
# ---------------------------------------------------------------------------

def test_aggregate_fixture(tmp_path):
    inp = _write(tmp_path, "deals.csv", DEALS_CSV)
    out = tmp_path / "rep"
    assert main(["aggregate", str(inp), "--window", "10s",
                 "--output", str(out)]) == 0
    doc = json.loads((out / "window_000000.json").read_text())
    agg = doc["aggregate"]
    assert agg["k"] == 3
    assert agg["total"] == 12.0
    assert agg["agg_volatility"] == pytest.approx(24.0, rel=1e-12)
    assert doc["cv_transfer"]["agg_cv_sq"] == pytest.approx(1 / 6, rel=1e-12)
    assert doc["cv_transfer"]["gap"] <= 1e-12


def test_aggregate_strict_zero_mean_exit_4(tmp_path):
    inp = _write(tmp_path, "deals.csv",
                 "agent,time,value\na,0.5,-2.0\nb,1.0,2.0\n")
    args = ["aggregate", str(inp), "--window", "10s",
            "--output", str(tmp_path / "rep")]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 4


def test_aggregate_empty_input(tmp_path):
    inp = _write(tmp_path, "deals.csv", "agent,time,value\n")
    assert main(["aggregate", str(inp), "--window", "1s",
                 "--output", str(tmp_path / "rep")]) == 3


# ---------------------------------------------------------------------------
# composite
# ---------------------------------------------------------------------------

def test_composite_fixture(tmp_path):
    spec = _write(tmp_path, "spec.json", json.dumps(_composite_doc()))
    out = tmp_path / "composite.json"
    assert main(["composite", "--spec", str(spec), "--output", str(out)]) == 0
    doc = json.loads(out.read_text())
    comp = doc["composite"]
    assert comp["mean"] == 8.0
    assert comp["volatility"] == pytest.approx(16.0, rel=1e-12)
    assert comp["cv_sq"] == pytest.approx(0.25, rel=1e-12)
    assert comp["theta"]["sales"] == pytest.approx(2.25, rel=1e-12)
    assert comp["phi"]["sales|expenses"] == pytest.approx(-0.75, rel=1e-12)
    assert "oracle" not in doc


def test_composite_with_oracle(tmp_path):
    doc = _composite_doc(oracle={"draws": 50_000, "seed": 3})
    spec = _write(tmp_path, "spec.json", json.dumps(doc))
    out = tmp_path / "composite.json"
    assert main(["composite", "--spec", str(spec), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    oracle = rep["oracle"]
    assert oracle["draws"] == 50_000
    se = 16.0 * math.sqrt(2.0 / 50_000)
    assert abs(oracle["sample_variance"] - 16.0) <= 3 * se


def test_composite_zero_mean(tmp_path):
    doc = _composite_doc()
    doc["components"][0]["beta"] = 1.0
    doc["components"][0]["mean"] = 2.0
    doc["components"][1]["beta"] = 1.0
    doc["components"][1]["mean"] = -2.0
    doc["correlations"][0]["value"] = 0.0
    spec = _write(tmp_path, "spec.json", json.dumps(doc))
    out = tmp_path / "c.json"
    assert main(["composite", "--spec", str(spec), "--output", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert "composite" not in rep
    assert any("mean is zero" in w for w in rep["warnings"])
    assert main(["composite", "--spec", str(spec), "--output", str(out),
                 "--strict"]) == 4


def test_composite_missing_pair_exit_3(tmp_path):
    doc = _composite_doc()
    doc["correlations"] = []
    spec = _write(tmp_path, "spec.json", json.dumps(doc))
    assert main(["composite", "--spec", str(spec),
                 "--output", str(tmp_path / "c.json")]) == 3


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def test_simulate_round_trip(tmp_path):
    spec = _write(tmp_path, "gen.json", json.dumps(_genspec_doc()))
    out = tmp_path / "ticks.csv"
    assert main(["simulate", "--genspec", str(spec), "--output", str(out)]) == 0
    meta = json.loads((tmp_path / "ticks.csv.meta.json").read_text())
    assert meta["seed"] == 5
    assert "PCG64" in meta["generator"]
    rep = tmp_path / "rep"
    assert main(["analyze", str(out), "--window", "2s", "--lag", "1s",
                 "--output", str(rep)]) == 0
    doc = json.loads((rep / "window_000000.json").read_text())
    assert doc["seed_provenance"]["seed"] == 5
    assert doc["seed_provenance"]["genspec"]["n_ticks"] == 200


def test_simulate_deterministic_bytes(tmp_path):
    spec = _write(tmp_path, "gen.json", json.dumps(_genspec_doc(seed=11)))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["simulate", "--genspec", str(spec), "--output", str(a)]) == 0
    assert main(["simulate", "--genspec", str(spec), "--output", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_simulate_seed_override(tmp_path):
    spec = _write(tmp_path, "gen.json", json.dumps(_genspec_doc(seed=11)))
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["simulate", "--genspec", str(spec), "--output", str(a)])
    main(["simulate", "--genspec", str(spec), "--seed", "12",
          "--output", str(b)])
    assert a.read_bytes() != b.read_bytes()
    meta = json.loads((tmp_path / "b.csv.meta.json").read_text())
    assert meta["seed"] == 12


def test_simulate_infeasible_spec_exit_3(tmp_path, capsys):
    doc = _genspec_doc(target=0.99)
    doc["value_dist"] = {"kind": "lognormal", "mu": 0.0, "sigma": 0.3}
    doc["volume_dist"] = {"kind": "lognormal", "mu": 0.0, "sigma": 3.0}
    spec = _write(tmp_path, "gen.json", json.dumps(doc))
    assert main(["simulate", "--genspec", str(spec),
                 "--output", str(tmp_path / "t.csv")]) == 3
    assert "attainable range" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# check + process-level behaviour
# ---------------------------------------------------------------------------

def test_check_ticks(tmp_path, capsys):
    inp = _write(tmp_path, "t.csv", TICKS_CSV)
    assert main(["check", str(inp)]) == 0
    assert "ok: 2 tick(s)" in capsys.readouterr().out


def test_check_deals(tmp_path, capsys):
    inp = _write(tmp_path, "d.csv", DEALS_CSV)
    assert main(["check", str(inp), "--kind", "deals"]) == 0
    out = capsys.readouterr().out
    assert "3 deal(s)" in out and "2 agent(s)" in out


def test_check_rejects_malformed(tmp_path, capsys):
    inp = _write(tmp_path, "t.csv", "time,value,volume\n1.0,x,1.0\n")
    assert main(["check", str(inp)]) == 3
    assert "line 2" in capsys.readouterr().err


def test_usage_error_exit_2():
    proc = subprocess.run(
        [sys.executable, "-m", "marketmoments.cli", "analyze"],
        capture_output=True, text=True)
    assert proc.returncode == 2


def test_version_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "marketmoments.cli", "--version"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("marketmoments 0.1.0")


def test_console_script_installed():
    proc = subprocess.run(["marketmoments", "--version"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "report schema 1" in proc.stdout


def test_threads_env_var(tmp_path):
    import os
    inp = _write(tmp_path, "t.csv", TICKS_CSV)
    out = tmp_path / "rep"
    env_before = os.environ.get("MARKETMOMENTS_THREADS")
    os.environ["MARKETMOMENTS_THREADS"] = "2"
    try:
        assert main(["analyze", str(inp), "--window", "10s",
                     "--output", str(out)]) == 0
    finally:
        if env_before is None:
            del os.environ["MARKETMOMENTS_THREADS"]
        else:
            os.environ["MARKETMOMENTS_THREADS"] = env_before
    assert (out / "window_000000.json").is_file()
