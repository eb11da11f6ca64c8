import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cyberqubo import ScoreEncoding, Weights, assemble, decode, encode, generate_layered, it255_spec, scaled_spec
from cyberqubo.qubo import QuboModel
from cyberqubo.solvers import (EXHAUSTIVE_CAP, SOLVERS, SolverError, SolverRequest, TabuWalk, get_solver,
                               resolve_budget, solve, trace_to_csv)
from cyberqubo.solvers._kernels import anneal_run
from cyberqubo.solvers.anneal import temperature_schedule
from cyberqubo.solvers.base import csr_arrays
from cyberqubo.solvers.tabu import effective_tenure

from helpers import graph, random_instance, score_space_minimum, triangle

FAST = {"tabu": {}, "anneal": {"restarts": 5, "sweeps": 200}, "hybrid": {"max_rounds": 3}, "exhaustive": {}}


def _req(q, seed=0, **kw):
    return SolverRequest(q, seed=seed, **kw)


def _check_solution(q, sol):
    assert sol.energy == pytest.approx(q.energy(sol.assignment), rel=1e-9, abs=1e-12)
    res = decode(q.encoding, sol.assignment)
    assert res.valid and np.array_equal(res.scores, sol.decoded_scores)
    best = [e for _, e, _ in sol.trace]
    assert all(b <= a + 1e-9 * (1 + abs(a)) for a, b in zip(best, best[1:]))


# -- exhaustive -------------------------------------------------------------------


def test_exhaustive_single_node():
    q = assemble(graph([2]), Weights(1, 0, 0, 0, 0), ScoreEncoding((0,), 2))
    s = solve("exhaustive", _req(q))
    assert list(s.decoded_scores) == [2]
    assert s.energy == pytest.approx(0.0, abs=1e-12)


def test_exhaustive_matches_score_space_enumeration():
    g = triangle((1, 3, 2))
    w = Weights(0.8, 0.2, 0.6, 0.3, 1.0)
    q = assemble(g, w, ScoreEncoding(g.node_ids, 3))
    s = solve("exhaustive", _req(q))
    e, combo = score_space_minimum(g, w, 3)
    assert s.energy == pytest.approx(e, rel=1e-9)
    assert tuple(s.decoded_scores) == combo


def test_exhaustive_null_objective():
    g = triangle()
    q = assemble(g, Weights(0, 0, 0, 0, 0), ScoreEncoding(g.node_ids, 3))
    s = solve("exhaustive", _req(q))
    assert s.repairs == 0 and s.energy == 0.0


def test_exhaustive_refuses_large():
    q = assemble(graph([1, 2, 3]), encoding=ScoreEncoding((0, 1, 2), 9))
    with pytest.raises(SolverError, match=str(EXHAUSTIVE_CAP)):
        solve("exhaustive", _req(q))
    with pytest.raises(SolverError, match="cap of 4"):
        solve("exhaustive", _req(q, params={"cap": 4}))


# -- shared properties -----------------------------------------------------------------


@pytest.mark.parametrize("name", sorted(SOLVERS))
def test_triangle_reaches_oracle(name):
    g = triangle((1, 4, 2))
    w = Weights(1, 0.1, 0.5, 0.5, 1)
    q = assemble(g, w, ScoreEncoding(g.node_ids, 4))
    e, _ = score_space_minimum(g, w, 4)
    s = solve(name, _req(q, params=FAST[name] | ({"restarts": 50} if name == "anneal" else {})))
    _check_solution(q, s)
    assert s.energy == pytest.approx(e, rel=1e-9)


@settings(max_examples=15)
@given(st.integers(0, 10 ** 6), st.sampled_from(["tabu", "anneal", "hybrid"]))
def test_heuristics_never_beat_oracle(seed, name):
    g, w, q = random_instance(np.random.default_rng(seed), 3, 3)
    opt = solve("exhaustive", _req(q)).energy
    s = solve(name, _req(q, seed=seed, params=FAST[name]))
    _check_solution(q, s)
    assert s.energy >= opt - 1e-9 * (1 + abs(opt))


@pytest.mark.parametrize("name", ["tabu", "anneal", "hybrid"])
def test_determinism(name):
    q = assemble(generate_layered(scaled_spec(30, seed=1)))
    a = solve(name, _req(q, seed=7, params=FAST[name]))
    b = solve(name, _req(q, seed=7, params=FAST[name]))
    assert a.to_dict() == b.to_dict()
    assert np.array_equal(a.assignment, b.assignment)


def test_unknown_solver():
    with pytest.raises(KeyError, match="unknown solver"):
        get_solver("qpu")


def test_request_validation():
    q = assemble(graph([1]))
    with pytest.raises(ValueError):
        SolverRequest(q, max_iter=-1)
    with pytest.raises(ValueError):
        SolverRequest(q, time_limit=0)
    with pytest.raises(ValueError, match="length"):
        SolverRequest(q, initial=np.zeros(3)).start_bits()


def test_trace_csv_format():
    text = trace_to_csv([(0, -1.5, 0.25), (10, -2.0, 1.0)])
    assert text.splitlines() == ["iteration,best_energy,wall_ms", "0,-1.5,0.250", "10,-2.0,1.000"]


# -- tabu -----------------------------------------------------------------------------


def test_tabu_zero_iterations_returns_initial():
    g = triangle((2, 3, 1))
    q = assemble(g)
    s = solve("tabu", _req(q, max_iter=0))
    assert list(s.decoded_scores) == [2, 3, 1]
    assert s.iterations == 0


def test_tabu_zero_iterations_repairs_invalid_start():
    g = triangle((2, 3, 1))
    q = assemble(g, encoding=ScoreEncoding(g.node_ids, 4))
    x = encode(q.encoding, [2, 3, 1])
    x[0:4] = 0          # node 0 empty
    x[4:8] = 1          # node 1 saturated
    s = solve("tabu", _req(q, max_iter=0, initial=x, params={"move": "flip"}))
    assert s.repairs == 2
    assert list(s.decoded_scores) == [2, 1, 1]


@pytest.mark.parametrize("move", ["swap", "flip"])
def test_tabu_moves_match_oracle(move):
    hits = 0
    for seed in range(20):
        g, w, q = random_instance(np.random.default_rng(seed), 3, 4)
        opt = solve("exhaustive", _req(q)).energy
        s = solve("tabu", _req(q, seed=seed, params={"move": move}))
        hits += s.energy <= opt + 1e-9 * (1 + abs(opt))
    assert hits >= 19


def test_tabu_flip_on_bare_qubo():
    # x0 + x1 - 3 x0 x1: optimum both on
    q = QuboModel(np.array([1.0, 1.0]), np.array([[0.0, -3.0], [0.0, 0.0]]))
    s = solve("tabu", _req(q))
    assert list(s.assignment) == [1, 1] and s.decoded_scores is None
    assert s.metadata["move"] == "flip"
    with pytest.raises(ValueError, match="one-hot"):
        solve("tabu", _req(q, params={"move": "swap"}))


def test_tenure_cap():
    assert effective_tenure(10, 8) == 2
    assert effective_tenure(10, 400) == 10
    assert effective_tenure(10, 1) == 1


def test_tabu_walk_offer_and_reset():
    q = assemble(triangle())
    start = encode(q.encoding, [2, 5, 8])
    walk = TabuWalk(q, start)
    better = encode(q.encoding, [4, 5, 6])
    e0, e1 = q.energy(start), q.energy(better)
    assert e1 < e0 and walk.best_energy == e0
    assert walk.offer(better, e1)
    assert not walk.offer(start, e0)
    walk.reset_to(start)
    assert walk.best_energy == e1 and np.array_equal(walk.best_x, better)


# -- anneal ---------------------------------------------------------------------------


def test_temperature_schedule():
    t = temperature_schedule(10.0, 0.1, 5)
    assert t[0] == pytest.approx(10.0) and t[-1] == pytest.approx(0.1)
    assert np.all(np.diff(t) < 0)
    assert np.all(temperature_schedule(0, 0, 4) == 0)


def test_anneal_single_node():
    q = assemble(graph([6]), Weights(1, 0, 0, 0, 0))
    s = solve("anneal", _req(q, params={"restarts": 3, "sweeps": 50}))
    assert list(s.decoded_scores) == [6]


@given(st.integers(0, 2 ** 31 - 1))
def test_zero_temperature_is_greedy_descent(seed):
    rng = np.random.default_rng(seed)
    g, w, q = random_instance(rng, 3, 3)
    indptr, indices, data, linear = csr_arrays(q)
    x = rng.integers(0, 2, q.n_vars).astype(np.int8)
    e0 = q.energy(x)
    rel, xb = anneal_run(indptr, indices, data, linear, x.copy(), np.zeros(30), 1, seed)
    assert rel <= 0.0
    assert q.energy(xb) == pytest.approx(e0 + rel, abs=1e-9)
    # a greedy fixed point admits no strictly improving flip
    assert min(q.delta_energy(xb, i) for i in range(q.n_vars)) >= -1e-9


@pytest.mark.slow
def test_anneal_triangle_hundred_shots():
    g = triangle((1, 4, 2))
    w = Weights(1, 0.1, 0.5, 0.5, 1)
    q = assemble(g, w, ScoreEncoding(g.node_ids, 4))
    e, _ = score_space_minimum(g, w, 4)
    hits = sum(solve("anneal", _req(q, seed=k, params={"restarts": 100, "sweeps": 200})).energy
               == pytest.approx(e, rel=1e-9) for k in range(100))
    assert hits >= 99


def test_anneal_best_restart_metadata():
    q = assemble(triangle())
    s = solve("anneal", _req(q, seed=3, params={"restarts": 4, "sweeps": 100}))
    assert -1 <= s.metadata["best_restart"] < 4
    assert s.metadata["restarts"] == 4


# -- hybrid ---------------------------------------------------------------------------


def test_budget_presets():
    assert resolve_budget("30s") == 30.0 and resolve_budget("180s") == 180.0
    assert resolve_budget("min") is None and resolve_budget(None) is None
    assert resolve_budget("2.5s") == 2.5
    with pytest.raises(ValueError):
        resolve_budget(-1)


def test_hybrid_minimum_budget_behaves_like_tabu():
    q = assemble(generate_layered(scaled_spec(40, seed=2)))
    t = solve("tabu", _req(q, seed=1))
    h = solve("hybrid", _req(q, seed=1))
    assert h.metadata["rounds"] <= 1
    assert h.energy <= t.energy + 1e-9 * (1 + abs(t.energy))
    assert np.mean(h.decoded_scores) == pytest.approx(np.mean(t.decoded_scores), rel=0.06)


def test_hybrid_more_rounds_never_hurt():
    q = assemble(generate_layered(scaled_spec(60, seed=3)))
    short = solve("hybrid", _req(q, params={"max_rounds": 1}))
    long = solve("hybrid", _req(q, params={"max_rounds": 15}))
    assert long.energy <= short.energy + 1e-9 * (1 + abs(short.energy))


def test_hybrid_respects_wall_clock():
    q = assemble(generate_layered(scaled_spec(60, seed=0)))
    s = solve("hybrid", _req(q, time_limit=0.5))
    assert 0.4 <= s.wall_time <= 0.7
    assert s.metadata["budget_s"] == 0.5


def test_hybrid_rejects_bad_subproblem_size():
    q = assemble(triangle())
    with pytest.raises(ValueError, match="subproblem"):
        solve("hybrid", _req(q, params={"subproblem_size": 30}))


def test_hybrid_bare_qubo():
    rng = np.random.default_rng(5)
    n = 14
    Q = np.triu(rng.normal(size=(n, n)), 1)
    q = QuboModel(rng.normal(size=n), Q)
    s = solve("hybrid", _req(q, params={"max_rounds": 4, "subproblem_size": 8}))
    opt = solve("exhaustive", _req(q)).energy
    assert s.energy >= opt - 1e-9
    assert s.metadata["rounds"] == 4
