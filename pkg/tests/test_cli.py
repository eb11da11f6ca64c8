import csv
import io
import json

import numpy as np
import pytest

from cyberqubo import Weights, import_qubo, load_graph, save_graph
from cyberqubo.cli import ConfigError, RunConfig, config_from_dict, main

from helpers import graph, score_space_minimum

SMALL = graph([2, 3, 4], [(0, 1), (1, 2), (0, 2, 2.0)], [(True, False), (False, False), (False, True)], max_score=4)
W = (1.0, 0.2, 0.5, 0.3, 1.0)
WARG = ",".join(map(str, W))


@pytest.fixture
def small_graph(tmp_path):
    p = tmp_path / "g.json"
    p.write_bytes(save_graph(SMALL))
    return p


def run(*argv):
    return main([str(a) for a in argv])


def files(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


# -- generate ------------------------------------------------------------------------


def test_generate_preset(tmp_path):
    assert run("generate", "--preset", "it255", "--seed", 0, "--out", tmp_path, "--dot") == 0
    g = load_graph((tmp_path / "graph.json").read_bytes())
    assert g.n_nodes == 255
    assert (tmp_path / "graph.dot").read_text().startswith("graph")


def test_generate_single_node_spec(tmp_path):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"layers": [{"name": "solo", "count": 1}], "seed": 3}))
    assert run("generate", spec, "--out", tmp_path, "--name", "one") == 0
    g = load_graph((tmp_path / "one.json").read_bytes())
    assert g.n_nodes == 1 and not g.edges


def test_generate_bad_spec_exits_2(tmp_path, capsys):
    spec = tmp_path / "spec.json"
    spec.write_text(json.dumps({"layers": [{"name": "a", "count": -1}]}))
    assert run("generate", spec, "--out", tmp_path) == 2
    assert "layers[0]" in capsys.readouterr().err
    spec.write_text("{not json")
    assert run("generate", spec, "--out", tmp_path) == 2


# -- solve ------------------------------------------------------------------------------


def test_solve_exhaustive_matches_oracle(tmp_path, small_graph):
    out = tmp_path / "o"
    assert run("solve", "--graph", small_graph, "--K", 4, "--weights", WARG, "--solver", "exhaustive",
               "--out", out) == 0
    sol = json.loads((out / "solution.json").read_text())
    e, combo = score_space_minimum(SMALL, Weights(*W), 4)
    assert sol["energy"] == pytest.approx(e, rel=1e-9, abs=1e-9)
    assert tuple(sol["decoded_scores"]) == combo
    for name in ("config.json", "trace.csv", "report.json", "report.csv", "nodes.csv", "timing.json",
                 "transitions/L.csv"):
        assert (out / name).exists(), name


def test_solve_unknown_solver(tmp_path, small_graph, capsys):
    assert run("solve", "--graph", small_graph, "--solver", "nope", "--out", tmp_path) == 2
    assert "nope" in capsys.readouterr().err


def test_solve_missing_graph(tmp_path):
    assert run("solve", "--graph", tmp_path / "absent.json", "--out", tmp_path) == 2


def test_solve_outputs_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run("solve", "--preset", "it255", "--seed", 1, "--solver", "tabu", "--out", d) == 0
    fa, fb = files(a), files(b)
    assert fa.keys() == fb.keys()
    for name in fa:
        if name == "timing.json":
            continue
        if name == "trace.csv":
            ra = list(csv.DictReader(io.StringIO(fa[name].decode())))
            rb = list(csv.DictReader(io.StringIO(fb[name].decode())))
            strip = lambda rows: [{k: v for k, v in r.items() if k != "wall_ms"} for r in rows]
            assert strip(ra) == strip(rb)
            continue
        assert fa[name] == fb[name], name


def test_config_file_and_overrides(tmp_path, small_graph):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"graph": {"file": "g.json"}, "K": 4, "weights": list(W),
                               "solver": {"name": "anneal", "params": {"restarts": 2}}}))
    out = tmp_path / "o"
    assert run("solve", "-c", cfg, "--solver", "exhaustive", "--out", out) == 0
    written = json.loads((out / "config.json").read_text())
    assert written["solver"]["name"] == "exhaustive" and written["K"] == 4


def test_config_validation():
    with pytest.raises(ConfigError, match="K"):
        config_from_dict({"K": 0})
    with pytest.raises(ConfigError):
        config_from_dict({"unknown": 1})
    assert isinstance(config_from_dict({}), RunConfig)


# -- recurse / bench ----------------------------------------------------------------


def test_recurse_isolated_stable(tmp_path):
    g = tmp_path / "g.json"
    g.write_bytes(save_graph(graph([6])))
    assert run("recurse", "--graph", g, "--weights", "1,0,0,0,0", "--iters", 5, "--out", tmp_path) == 0
    tr = json.loads((tmp_path / "recursion.json").read_text())
    assert tr["classification"] == "stable" and tr["fixed_point_iteration"] == 1
    assert len((tmp_path / "recursion.csv").read_text().splitlines()) == 1 + 1 + 5


def test_recurse_zero_iters(tmp_path, small_graph):
    assert run("recurse", "--graph", small_graph, "--iters", 0, "--out", tmp_path) == 2


def test_bench_single_and_ordering(tmp_path):
    assert run("bench", "--sizes", 10, "--solvers", "tabu", "--out", tmp_path / "one") == 0
    rows = list(csv.DictReader(open(tmp_path / "one" / "bench.csv")))
    assert len(rows) == 1 and float(rows[0]["deviation_pct"]) == 0.0
    assert run("bench", "--sizes", "20,10", "--solvers", "tabu,hybrid", "--seeds", "1,0",
               "--param", "max_rounds=2", "--out", tmp_path / "two") == 0
    rows = list(csv.DictReader(open(tmp_path / "two" / "bench.csv")))
    keys = [(int(r["n_nodes"]), r["solver"], int(r["seed"])) for r in rows]
    assert keys == sorted(keys) and len(keys) == 8


# -- exports -------------------------------------------------------------------------


def test_export_qubo_round_trip(tmp_path, small_graph):
    assert run("export-qubo", "--graph", small_graph, "--K", 4, "--weights", WARG, "--out", tmp_path) == 0
    q = import_qubo((tmp_path / "problem.qubo").read_bytes())
    assert q.n_vars == 12
    e, _ = score_space_minimum(SMALL, Weights(*W), 4)
    X = ((np.arange(2 ** 12)[:, None] >> np.arange(12)) & 1).astype(float)
    assert q.energies(X).min() == pytest.approx(e, abs=1e-8)


def test_export_dot_with_solution(tmp_path, small_graph):
    assert run("solve", "--graph", small_graph, "--K", 4, "--solver", "tabu", "--out", tmp_path) == 0
    assert run("export-dot", "--graph", small_graph, "--solution", tmp_path / "solution.json",
               "--out", tmp_path) == 0
    assert "fillcolor" in (tmp_path / "graph.dot").read_text()
    bad = tmp_path / "bad.json"
    bad.write_text("{}")
    assert run("export-dot", "--graph", small_graph, "--solution", bad, "--out", tmp_path) == 2


def test_recurse_preset_series(tmp_path):
    assert run("recurse", "--preset", "it255", "--solver", "tabu", "--out", tmp_path) == 0
    rows = list(csv.DictReader(open(tmp_path / "recursion.csv")))
    assert len(rows) == 21 and rows[0]["iteration"] == "0"   # initial + 20 iterations


def test_solve_triangle_golden(tmp_path, small_graph):
    """The report's final scores and transitions agree with the oracle's minimiser."""
    assert run("solve", "--graph", small_graph, "--K", 4, "--weights", WARG, "--solver", "exhaustive",
               "--out", tmp_path) == 0
    _, combo = score_space_minimum(SMALL, Weights(*W), 4)
    report = json.loads((tmp_path / "report.json").read_text())
    m = np.zeros((10, 10), int)   # reports span the full score range of a loaded graph
    for i, f in zip(SMALL.initial_scores(), combo):
        m[i - 1, f - 1] += 1
    got = [[int(v) for v in row[1:]] for row in csv.reader(open(tmp_path / "transitions" / "L.csv"))][1:]
    assert got == m.tolist()
    rows = list(csv.DictReader(open(tmp_path / "nodes.csv")))
    assert tuple(int(r["final"]) for r in rows) == combo
    assert report["global"]["mean_final"] == pytest.approx(np.mean(combo))
