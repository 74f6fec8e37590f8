import csv
import io
import json

import pytest

from aoipreempt import PreemptionPolicy, SystemConfig, aoi_sum, stationary_distribution
from aoipreempt.cli import main
from aoipreempt.opt import optimize
from aoipreempt.sim import SimConfig, simulate, simulate_reduced
from aoipreempt.sweep import preset, rows_to_csv, run_sweep

FIG3A = {"sensors": 2, "processes": 2, "lambda": [1, 1], "mu": 2, "correlation": [[1, 0.5], [0.5, 1]]}


def _write(tmp_path, doc, name="cfg.json"):
    f = tmp_path / name
    f.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(f)


def _run(argv, capsys):
    rc = main(argv)
    out, err = capsys.readouterr()
    return rc, out, err


def test_analyze_unit(tmp_path, capsys):
    f = _write(tmp_path, {"sensors": 1, "processes": 1, "lambda": [1], "mu": 1, "correlation": [[1]], "preemption": [1]})
    rc, out, _ = _run(["analyze", f], capsys)
    assert rc == 0 and json.loads(out)["total"] == 2.0


def test_analyze_matches_library(tmp_path, capsys):
    f = _write(tmp_path, FIG3A)
    rc, out, _ = _run(["analyze", f, "--preemption", "0.5,0.5"], capsys)
    doc = json.loads(out)
    cfg = SystemConfig([1, 1], 2, [[1, 0.5], [0.5, 1]])
    pol = PreemptionPolicy([0.5, 0.5])
    rep = aoi_sum(cfg, pol)
    assert doc["per_process"] == rep.per_process.tolist() and doc["total"] == rep.total
    assert doc["stationary"][1] == stationary_distribution(cfg, pol, 1).as_array().tolist()


def test_malformed_json_exit_2(tmp_path, capsys):
    rc, _, err = _run(["analyze", _write(tmp_path, "{oops")], capsys)
    assert rc == 2 and "malformed JSON" in err


@pytest.mark.parametrize(
    "doc",
    [
        {**FIG3A, "lambda": [1, -1]},
        {**FIG3A, "unknown": 1},
        {**FIG3A, "correlation": [[0, 0], [0, 0]]},
    ],
)
def test_invalid_config_exit_2(tmp_path, capsys, doc):
    rc, _, _ = _run(["analyze", _write(tmp_path, doc), "--preemption", "1"], capsys)
    assert rc == 2


def test_missing_policy_exit_2(tmp_path, capsys):
    rc, _, err = _run(["analyze", _write(tmp_path, FIG3A)], capsys)
    assert rc == 2 and "preemption" in err


def test_missing_file_exit_2(tmp_path, capsys):
    assert _run(["analyze", str(tmp_path / "nope.json")], capsys)[0] == 2


def test_simulate_json_matches_library(tmp_path, capsys):
    doc = {**FIG3A, "preemption": [0.5, 0.5], "sim": {"horizon": 5000, "replications": 4, "seed": 3}}
    rc, out, _ = _run(["simulate", _write(tmp_path, doc)], capsys)
    assert rc == 0
    got = json.loads(out)
    cfg = SystemConfig([1, 1], 2, [[1, 0.5], [0.5, 1]])
    res = simulate(cfg, PreemptionPolicy([0.5, 0.5]), SimConfig(horizon=5000, replications=4, seed=3))
    assert got["aoi_mean"] == res.aoi_mean.tolist()
    assert got["counts"] == res.counts


def test_simulate_flags_override(tmp_path, capsys):
    doc = {**FIG3A, "preemption": [1, 1], "sim": {"horizon": 5000, "replications": 4, "seed": 3}}
    rc, out, _ = _run(["simulate", _write(tmp_path, doc), "--horizon", "2000", "--reps", "2", "--seed", "7", "--warmup", "10"], capsys)
    got = json.loads(out)
    assert got["sim"] == {"horizon": 2000.0, "warmup": 10.0, "seed": 7, "replications": 2}
    cfg = SystemConfig([1, 1], 2, [[1, 0.5], [0.5, 1]])
    res = simulate(cfg, PreemptionPolicy([1, 1]), SimConfig(horizon=2000, warmup=10, replications=2, seed=7))
    assert got["aoi_mean"] == res.aoi_mean.tolist()


def test_simulate_csv_and_reduced(tmp_path, capsys):
    doc = {**FIG3A, "preemption": [0.2, 0.7]}
    out_path = tmp_path / "sim.csv"
    rc, _, _ = _run(["simulate", _write(tmp_path, doc), "--horizon", "3000", "--reps", "2", "--reduced", "1", "--format", "csv", "--out", str(out_path)], capsys)
    assert rc == 0
    table = list(csv.reader(io.StringIO(out_path.read_text())))
    assert table[0] == ["replication", "process", "aoi", "pi0", "pi1", "pi2"]
    assert [r[1] for r in table[1:]] == ["1", "1"]
    cfg = SystemConfig([1, 1], 2, [[1, 0.5], [0.5, 1]])
    res = simulate_reduced(cfg, PreemptionPolicy([0.2, 0.7]), 1, SimConfig(horizon=3000, replications=2))
    assert [float(r[2]) for r in table[1:]] == res.per_replication_aoi[:, 0].tolist()


def test_simulate_bad_horizon(tmp_path, capsys):
    doc = {**FIG3A, "preemption": [1, 1]}
    assert _run(["simulate", _write(tmp_path, doc), "--horizon", "-5"], capsys)[0] == 2


def test_simulate_unknown_sim_key(tmp_path, capsys):
    doc = {**FIG3A, "preemption": [1, 1], "sim": {"length": 5}}
    assert _run(["simulate", _write(tmp_path, doc)], capsys)[0] == 2


def test_optimize_output(tmp_path, capsys):
    rc, out, _ = _run(["optimize", _write(tmp_path, FIG3A), "--epsilon", "0.01"], capsys)
    assert rc == 0
    doc = json.loads(out)
    assert set(doc) == {"p_star", "objective", "lower_bound", "gap", "iterations", "nodes", "certified", "theorem2_bound"}
    res = optimize(SystemConfig([1, 1], 2, [[1, 0.5], [0.5, 1]]), 0.01)
    assert doc == res.to_dict()


def test_bound_output(tmp_path, capsys):
    doc = {"sensors": 2, "processes": 2, "lambda": [1, 1], "mu": 1, "correlation": [[1, 1], [1, 1]]}
    rc, out, _ = _run(["bound", _write(tmp_path, doc), "--epsilon", "0.1"], capsys)
    assert rc == 0 and json.loads(out)["theorem2_bound"] == 20


def test_sweep_preset_matches_library(tmp_path, capsys):
    out = tmp_path / "f6.csv"
    gp = tmp_path / "f6.gp"
    rc, _, _ = _run(["sweep", "--preset", "fig6a", "--out", str(out), "--gnuplot", str(gp)], capsys)
    assert rc == 0
    spec = preset("fig6a")
    assert out.read_text() == rows_to_csv(spec, run_sweep(spec))
    assert str(out) in gp.read_text()


def test_sweep_spec_file(tmp_path, capsys):
    spec = {
        "parameter": "mu", "values": [1, 2, 4], "base": {**FIG3A, "preemption": [1, 1]},
        "outputs": ["analysis", "simulation"], "sim": {"horizon": 2000, "replications": 2},
    }
    rc, out, _ = _run(["sweep", "--spec", _write(tmp_path, spec)], capsys)
    assert rc == 0
    table = list(csv.DictReader(io.StringIO(out)))
    assert [float(r["value"]) for r in table] == [1.0, 2.0, 4.0]
    rc2, out2, _ = _run(["sweep", "--spec", _write(tmp_path, spec)], capsys)
    assert out2 == out


def test_sweep_invalid_spec(tmp_path, capsys):
    spec = {"parameter": "mu", "values": [2, 1], "base": {**FIG3A, "preemption": [1, 1]}}
    assert _run(["sweep", "--spec", _write(tmp_path, spec)], capsys)[0] == 2


def test_fig5a_beats_baselines(capsys):
    rc, out, _ = _run(["sweep", "--preset", "fig5a"], capsys)
    for r in csv.DictReader(io.StringIO(out)):
        assert float(r["aoi_sum_opt"]) <= min(float(r["aoi_sum_p0"]), float(r["aoi_sum_p1"]))
