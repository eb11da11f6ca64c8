"""The nine acceptance criteria, each at its stated tolerance.

Every test records a one-line verdict in ``conftest.ACCEPTANCE`` before it
asserts, so the terminal summary lists all criteria even when some fail.
"""

import json
import time

import numpy as np
import pytest

from cyberqubo import (ScoreEncoding, Weights, amplify_node_influence, assemble, decode, encode, export_qubo,
                       generate_layered, import_qubo, it255_spec, load_graph, save_graph)
from cyberqubo.analysis import recursive_minimize, scaling_bench
from cyberqubo.solvers import RemoteSampler, SolverRequest, exact_minimum, solve

from conftest import ACCEPTANCE
from helpers import direct_energy, graph, random_instance, valid_assignments
from test_remote import Stub


def record(k: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[k] = (bool(ok), detail)
    assert ok, detail


def _random_graph(rng, n_max=4, K_max=4):
    n = int(rng.integers(1, n_max + 1))
    K = int(rng.integers(1, K_max + 1))
    scores = rng.integers(1, K + 1, n)
    flags = [tuple(rng.random(2) < 0.4) for _ in range(n)]
    edges = [(a, b, float(rng.uniform(0.1, 5.0))) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.6]
    w = Weights(*rng.uniform(-2.0, 2.0, 5))
    return graph(scores, edges, flags, max_score=K), w, K


# -- 1 ------------------------------------------------------------------------------------


def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    worst, checked = 0.0, 0
    for _ in range(250):
        g, w, K = _random_graph(rng)
        q = assemble(g, w, ScoreEncoding(g.node_ids, K))
        for combo, bits in valid_assignments(q.encoding):
            ref = direct_energy(g, dict(zip(g.node_ids, combo)), w)
            worst = max(worst, abs(q.energy(bits) - ref) / max(1.0, abs(ref)))
            checked += 1
    dt = time.perf_counter() - t0
    record(1, worst <= 1e-9 and dt < 10.0,
           f"250 graphs, {checked} assignments, max rel err {worst:.1e}, {dt:.1f}s")


# -- 2 ------------------------------------------------------------------------------------


def test_criterion_2_penalty_validity():
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    bad, sizes = 0, []
    for _ in range(50):
        while True:
            g, w, K = _random_graph(rng, n_max=4, K_max=4)
            if g.n_nodes * K <= 12 and g.n_nodes * K >= 4:
                break
        q = assemble(g, w, ScoreEncoding(g.node_ids, K))
        _, bits = exact_minimum(q)
        bad += not decode(q.encoding, bits).valid
        sizes.append(q.n_vars)
    dt = time.perf_counter() - t0
    record(2, bad == 0 and dt < 30.0, f"50 instances ({min(sizes)}-{max(sizes)} vars), {bad} invalid minima, {dt:.1f}s")


# -- 3 ------------------------------------------------------------------------------------


def test_criterion_3_heuristic_quality():
    rng = np.random.default_rng(3)
    t0 = time.perf_counter()
    hits = {"tabu": 0, "anneal": 0}
    for k in range(100):
        _, _, q = random_instance(rng, n_nodes=3, K=4)
        best, _ = exact_minimum(q)
        for name in hits:
            e = solve(name, SolverRequest(q, seed=k)).energy
            hits[name] += abs(e - best) <= 1e-9 * max(1.0, abs(best))
    dt = time.perf_counter() - t0
    record(3, min(hits.values()) >= 95 and dt < 60.0,
           f"tabu {hits['tabu']}/100, anneal {hits['anneal']}/100, {dt:.1f}s")


# -- 4 and 5 ----------------------------------------------------------------------------------


@pytest.fixture(scope="module")
def exception_scenario():
    g = generate_layered(it255_spec(seed=0))
    ex = g.metadata["exception_node"]
    base = solve("tabu", SolverRequest(assemble(g), seed=0)).decoded_scores
    amp = solve("tabu", SolverRequest(assemble(amplify_node_influence(g, ex, 5.0)), seed=0)).decoded_scores
    return g, ex, base, amp


def test_criterion_4_exception_absorption(exception_scenario):
    g, ex, base, _ = exception_scenario
    pos = g.position[ex]
    nb = [g.position[j] for j in g.neighbors[ex]]
    is_ = g.initial_scores()
    fs_ex, nb_is, nb_fs = int(base[pos]), is_[nb].mean(), base[nb].mean()
    record(4, fs_ex < 8 and nb_fs > nb_is,
           f"exception IS 8 -> FS {fs_ex}; {len(nb)} neighbours mean {nb_is:.2f} -> {nb_fs:.2f}")


def test_criterion_5_influence_amplification(exception_scenario):
    g, _, base, amp = exception_scenario
    std0 = g.initial_scores().std()
    record(5, amp.mean() > base.mean() and amp.std() > std0,
           f"final mean {base.mean():.2f} -> {amp.mean():.2f} amplified; std {std0:.2f} initial, "
           f"{amp.std():.2f} amplified final")


# -- 6 ------------------------------------------------------------------------------------


def test_criterion_6_hybrid_deviation():
    t0 = time.perf_counter()
    recs = scaling_bench([50, 100, 255, 500], ["tabu", "hybrid"], time_limits={"hybrid": 5.0})
    dev = {r.n_nodes: r.deviation_pct for r in recs if r.solver == "hybrid"}
    dt = time.perf_counter() - t0
    worst = max(abs(d) for d in dev.values())
    record(6, worst <= 6.0 and dt < 900.0,
           "deviation % " + ", ".join(f"{n}: {d:+.2f}" for n, d in dev.items()) + f"; {dt:.0f}s")


# -- 7 ------------------------------------------------------------------------------------


def test_criterion_7_recursion():
    rng = np.random.default_rng(7)
    classes = set()
    for _ in range(10):
        g, _, K = _random_graph(rng, n_max=3, K_max=3)
        tr = recursive_minimize(g, "exhaustive", 20, weights=Weights(*rng.uniform(-1, 1, 5)), K=K)
        classes.add(tr.classification)
        assert 1 <= len(tr.iterations) <= 20
    iso = recursive_minimize(graph([5]), "tabu", weights=Weights(1, 0, 0, 0, 0))
    g = generate_layered(it255_spec(seed=0))
    classical = recursive_minimize(g, "tabu", 20)
    series = classical.mean_series()
    hybrid = recursive_minimize(g, "hybrid", 20, solver_params={"max_rounds": 20})
    ok = (iso.classification == "stable" and iso.fixed_point_iteration == 1 and len(series) == 20
          and all(np.isfinite(series)))

    def desc(tr):
        fp = f"@{tr.fixed_point_iteration}" if tr.fixed_point_iteration else ""
        return f"{tr.classification}{fp}, mean {tr.initial.mean:.2f} -> {tr.mean_series()[-1]:.2f}"

    # the classical-diverges / hybrid-stabilises contrast is reported, not asserted
    contrast = classical.classification == "divergent" and hybrid.classification == "stable"
    record(7, ok, f"isolated {iso.classification}@{iso.fixed_point_iteration}; 255-node tabu {desc(classical)} "
                  f"({len(series)} points); hybrid {desc(hybrid)}; contrast observed: {contrast}; "
                  f"random fixtures {sorted(classes)}")


# -- 8 ------------------------------------------------------------------------------------


def test_criterion_8_scaling():
    scaling_bench([20], ["tabu", "hybrid"], solver_params={"hybrid": {"max_rounds": 1}})  # compile / cache load
    sizes = [50, 100, 200, 400]
    times = []
    for n in sizes:
        runs = scaling_bench([n], ["tabu"]) + scaling_bench([n], ["tabu"])
        times.append(min(r.wall_time for r in runs))
    increasing = all(a < b for a, b in zip(times, times[1:]))
    budget = 2.0
    hyb = scaling_bench([200], ["hybrid"], solver_params={"hybrid": {"budget": budget}})[0].wall_time
    within = abs(hyb - budget) <= 0.2 * budget
    record(8, increasing and within,
           "tabu s " + ", ".join(f"{n}: {t:.3f}" for n, t in zip(sizes, times))
           + f"; hybrid {hyb:.2f}s for a {budget:.0f}s budget")


# -- 9 ------------------------------------------------------------------------------------


def test_criterion_9_determinism_and_round_trips():
    g = generate_layered(it255_spec(seed=4))
    q = assemble(g)
    params = {"tabu": {}, "anneal": {"restarts": 2}, "hybrid": {"max_rounds": 3}}
    same = all(json.dumps(solve(n, SolverRequest(q, seed=9, params=p)).to_dict(), sort_keys=True)
               == json.dumps(solve(n, SolverRequest(q, seed=9, params=p)).to_dict(), sort_keys=True)
               for n, p in params.items())
    gen_same = save_graph(generate_layered(it255_spec(seed=4))) == save_graph(g)

    blob = save_graph(g)
    g2 = load_graph(blob)
    graph_rt = save_graph(g2) == blob and g2 == g
    qb = export_qubo(q)
    q2 = import_qubo(qb)
    qubo_rt = export_qubo(q2) == qb and q2 == q
    x = encode(q.encoding, g.initial_scores())
    qubo_rt = qubo_rt and q2.energy(x) == q.energy(x)

    small = assemble(generate_layered(it255_spec(seed=4)))
    down = solve("hybrid", SolverRequest(small, seed=1, params={
        "max_rounds": 3, "sampler": RemoteSampler("http://127.0.0.1:9/none", timeout=0.5)}))
    with Stub("wrong") as stub:
        bad = solve("hybrid", SolverRequest(small, seed=1, params={
            "max_rounds": 2, "sampler": RemoteSampler(stub.url)}))
    plain = solve("hybrid", SolverRequest(small, seed=1, params={"max_rounds": 3}))
    m1, m2 = down.metadata, bad.metadata
    fallback = (m1["fallbacks"] == m1["rounds"] == 3 and m1["remote_calls"] == 0
                and m1["remote_stats"] == {"calls": 3, "failures": 3, "mismatches": 0}
                and m2["fallbacks"] == 2 and m2["remote_stats"] == {"calls": 2, "failures": 2, "mismatches": 2}
                and down.energy == plain.energy)
    record(9, same and gen_same and graph_rt and qubo_rt and fallback,
           f"seeded runs identical {same and gen_same}; graph round trip {graph_rt}; QUBO round trip {qubo_rt}; "
           f"fallback accounting {fallback}")
