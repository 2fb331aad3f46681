import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from lord import cli
from lord.core import ConsistencyError
from lord.harness import RESULT_FIELDS, read_results, summarize
from lord.problems import get_problem

SMALL = ["--n-pop", "40", "--max-fes", "200"]


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


@pytest.fixture(scope="module")
def sym_artifact(tmp_path_factory):
    out = tmp_path_factory.mktemp("run") / "r.json"
    assert run_cli("run", "--problem", "sym-part-simple", "--seed", 7, "--n-pop", 200, "--max-fes", 600, "--out", out) == 0
    return out


def strip_wall(doc):
    doc = dict(doc)
    doc.pop("wall_ms")
    return doc


def test_run_writes_full_population(sym_artifact):
    art = json.loads(sym_artifact.read_text())
    assert len(art["final_ps"]) == 200 and len(art["final_ps"][0]) == 2
    assert art["config"]["seed"] == 7
    assert art["report"]["igdx"] is not None and art["report"]["rhv"] is not None


def test_run_is_deterministic_apart_from_wall_time(sym_artifact, tmp_path):
    again = tmp_path / "again.json"
    run_cli("run", "--problem", "sym-part-simple", "--seed", 7, "--n-pop", 200, "--max-fes", 600, "--out", again)
    assert strip_wall(json.loads(again.read_text())) == strip_wall(json.loads(sym_artifact.read_text()))


def test_run_polygon_lord2_reports_both_spaces(tmp_path):
    out = tmp_path / "p.json"
    code = run_cli("run", "--problem", "polygon", "--m", 3, "--algo", "lord2", "--n-pop", 210, "--max-fes", 630, "--out", out)
    assert code == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["igdx"] > 0 and rep["igdf"] > 0


@pytest.mark.parametrize(
    "argv",
    [
        ["run", "--problem", "nope", "--out", "x.json"],
        ["run", "--problem", "sym-part-simple", "--alpha-l", "2", "--out", "x.json"],
        ["run", "--problem", "sym-part-simple", "--algo", "nsga2", "--out", "x.json"],
        ["run", "--problem", "sym-part-simple"],
        ["bench", "--problems", "sym-part-simple", "--runs", "0", "--out", "x.csv"],
        ["stats", "missing.csv"],
        ["export", "missing.json"],
        [],
    ],
)
def test_usage_errors_exit_one(argv, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    with pytest.raises(SystemExit) as info:
        sys.exit(cli.main(argv))
    assert info.value.code == 1


def test_consistency_failure_exits_three(monkeypatch, tmp_path):
    def broken(spec, cfg):
        raise ConsistencyError("eigenvalue count disagrees")

    monkeypatch.setattr(cli, "execute", broken)
    assert run_cli("run", "--problem", "sym-part-simple", "--out", tmp_path / "x.json") == 3


def test_bench_grid_and_header(tmp_path):
    out = tmp_path / "bench.csv"
    code = run_cli("bench", "--problems", "sym-part-simple", "omni-test", "--runs", 3, "--base-seed", 10, *SMALL, "--out", out)
    assert code == 0
    with out.open() as fh:
        assert fh.readline().strip() == ",".join(RESULT_FIELDS)
    rows = read_results(out)
    assert len(rows) == 6
    assert [(r["problem"], r["run"], r["seed"]) for r in rows] == [
        (p, r, 10 + r) for p in ("sym-part-simple", "omni-test") for r in range(3)
    ]
    assert all(r["fes"] <= 200 + 40 for r in rows)


def test_bench_is_reproducible_and_lossless(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for out in (a, b):
        run_cli("bench", "--problems", "sym-part-simple", "--runs", 2, *SMALL, "--out", out)
    ra, rb = read_results(a), read_results(b)
    for x, y in zip(ra, rb):
        assert all(x[k] == y[k] for k in ("igdx", "igdf", "rhv", "rpsp", "cm", "nsx"))
    with a.open() as fh:
        cell = next(csv.DictReader(fh))["igdx"]
    assert repr(float(cell)) == repr(ra[0]["igdx"])
    assert float(cell) == float("%.17g" % float(cell))


def test_bench_parallel_matches_serial(tmp_path):
    s, p = tmp_path / "s.csv", tmp_path / "p.csv"
    run_cli("bench", "--problems", "sym-part-simple", "--runs", 2, *SMALL, "--out", s)
    run_cli("bench", "--problems", "sym-part-simple", "--runs", 2, *SMALL, "--jobs", 2, "--out", p)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
    assert strip(read_results(s)) == strip(read_results(p))


PLUGIN = '''
import numpy as np
from lord.core import BoxBounds
from lord.problems import ProblemDef


def exploding():
    def evaluator(x):
        raise RuntimeError("evaluator crashed")
    return ProblemDef("exploding", 2, 2, BoxBounds(np.zeros(2), np.ones(2)), evaluator)
'''


def test_bench_partial_failure_keeps_finished_rows(tmp_path, monkeypatch, capsys):
    (tmp_path / "boom_plugin.py").write_text(PLUGIN)
    monkeypatch.syspath_prepend(str(tmp_path))
    out = tmp_path / "partial.csv"
    code = run_cli("bench", "--problems", "sym-part-simple", "boom_plugin:exploding", "--runs", 2, *SMALL, "--out", out)
    assert code == 2
    rows = read_results(out)
    assert [r["problem"] for r in rows] == ["sym-part-simple"] * 2
    assert "boom_plugin:exploding" in capsys.readouterr().err


def write_rows(path, rows):
    with path.open("w", newline="") as fh:
        w = csv.DictWriter(fh, RESULT_FIELDS)
        w.writeheader()
        w.writerows(rows)


def synthetic(problem, algo, igdx_values):
    return [
        {"problem": problem, "algo": algo, "run": r, "seed": r, "igdx": v, "igdf": 0.5, "rhv": "", "rpsp": "", "cm": "", "nsx": "", "fes": 100, "wall_ms": 1.0}
        for r, v in enumerate(igdx_values)
    ]


def test_stats_against_hand_calculation(tmp_path, capsys):
    path = tmp_path / "rows.csv"
    lord_vals = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0]
    lord2_vals = [11.0, 12.0, 13.0, 14.0, 15.0, 16.0]
    write_rows(path, synthetic("p", "lord", lord_vals) + synthetic("p", "lord2", lord2_vals))
    lines, tally = summarize(read_results(path), baseline="lord")
    by = {(ln.algo, ln.metric): ln for ln in lines}
    assert by["lord", "igdx"].mean == 3.5
    assert by["lord", "igdx"].std == pytest.approx(np.sqrt(17.5 / 5), abs=1e-15)
    assert by["lord2", "igdx"].mark == "+"
    assert by["lord2", "igdf"].std == 0.0 and by["lord2", "igdf"].mark == "~"
    assert tally == {"lord2": {"+": 1, "-": 0, "~": 1}}
    assert run_cli("stats", path, "--baseline", "lord2") == 0
    text = capsys.readouterr().out
    assert "(-)" in text and "+/-/~ vs lord2 for lord: 0/1/1" in text


def test_stats_with_too_few_runs_omits_marks(tmp_path, caplog):
    path = tmp_path / "few.csv"
    write_rows(path, synthetic("p", "lord", [1.0, 2.0]) + synthetic("p", "lord2", [3.0, 4.0]))
    lines, tally = summarize(read_results(path), baseline="lord")
    assert all(ln.mark is None for ln in lines) and tally == {}
    assert "significance omitted" in caplog.text


def test_export_round_trip(sym_artifact, tmp_path):
    assert run_cli("export", sym_artifact, "--out-dir", tmp_path, "--prefix", "sym") == 0
    ps = np.loadtxt(tmp_path / "sym_ps.csv", delimiter=",", skiprows=1)
    pf = np.loadtxt(tmp_path / "sym_pf.csv", delimiter=",", skiprows=1)
    assert ps.shape == (200, 3) and pf.shape == (200, 3)
    labels = ps[:, 2].astype(int)
    assert labels.min() == 0 and set(labels) == set(range(labels.max() + 1))
    assert np.array_equal(labels, pf[:, 2].astype(int))
    problem = get_problem("sym-part-simple")
    assert np.array_equal(problem.evaluate_many(ps[:, :2]), pf[:, :2])
    art = json.loads(sym_artifact.read_text())
    assert np.array_equal(ps[:, :2], np.array(art["final_ps"]))


def test_module_entry_point_help():
    out = subprocess.run([sys.executable, "-m", "lord", "bench", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "--base-seed" in out.stdout
