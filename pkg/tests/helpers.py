"""Independent reference implementations and shared fixtures for the tests.

Nothing here reuses the package's assembly code: the objective is evaluated
term by term from its definition with plain loops, and minima are found by
enumerating score vectors rather than bit strings.
"""

from __future__ import annotations

import itertools

import numpy as np
from hypothesis import strategies as st

from cyberqubo import EdgeSpec, InfrastructureGraph, NodeSpec, ScoreEncoding, Weights, assemble, encode


def direct_energy(g: InfrastructureGraph, fs: dict[int, int], w: Weights, *, all_pairs: bool = False,
                  critical: set[int] | None = None) -> float:
    """The weighted five-term objective evaluated from its definition."""
    nodes = {n.id: n for n in g.nodes}
    adj: dict[int, list[int]] = {i: [] for i in nodes}
    for e in g.edges:
        adj[e.a].append(e.b)
        adj[e.b].append(e.a)

    h1 = sum(n.initial_score * (n.initial_score - fs[i]) ** 2 for i, n in nodes.items())
    h2 = -sum(e.strength * fs[e.a] * fs[e.b] for e in g.edges)
    h3 = 0.0
    for i, nb in adj.items():
        if nb:
            h3 += (fs[i] - sum(fs[j] for j in nb) / len(nb)) ** 2
    flags = {i: int(n.no_update) + int(n.internet) for i, n in nodes.items()}
    if all_pairs:
        pairs = list(itertools.combinations(sorted(nodes), 2))
    else:
        pairs = [(e.a, e.b) for e in g.edges]
    h4 = -sum((flags[i] + flags[j]) * (fs[i] + fs[j]) for i, j in pairs)
    if critical is None:
        critical = {i for i, n in nodes.items() if n.initial_score >= 7}
    h5 = -sum(fs[i] for i in critical)
    l1, l2, l3, l4, l5 = w.as_tuple()
    return l1 * h1 + l2 * h2 + l3 * h3 + l4 * h4 + l5 * h5


def score_space_minimum(g: InfrastructureGraph, w: Weights, K: int) -> tuple[float, tuple[int, ...]]:
    """Minimum of the direct objective over all K^n score vectors (first wins ties)."""
    ids = sorted(n.id for n in g.nodes)
    best = None
    for combo in itertools.product(range(1, K + 1), repeat=len(ids)):
        e = direct_energy(g, dict(zip(ids, combo)), w)
        if best is None or e < best[0] - 1e-12 * (1 + abs(best[0])):
            best = (e, combo)
    return best


def brute_force_qubo(q) -> float:
    """Minimum over every bit string, by dense enumeration."""
    n = q.n_vars
    X = ((np.arange(2 ** n)[:, None] >> np.arange(n)) & 1).astype(np.float64)
    return float(q.energies(X).min())


def graph(scores, edges=(), flags=None, max_score=10) -> InfrastructureGraph:
    """Small single-layer graph from scores and (a, b[, s]) edge tuples."""
    flags = flags or [(False, False)] * len(scores)
    nodes = tuple(NodeSpec(i, "L", int(s), bool(f[0]), bool(f[1])) for i, (s, f) in enumerate(zip(scores, flags)))
    es = tuple(EdgeSpec(e[0], e[1], e[2] if len(e) > 2 else 1.0) for e in edges)
    return InfrastructureGraph(nodes, es, ("L",), {}, max_score)


def triangle(scores=(2, 5, 8)) -> InfrastructureGraph:
    return graph(scores, [(0, 1), (1, 2), (0, 2, 2.0)])


def valid_assignments(enc: ScoreEncoding):
    for combo in itertools.product(range(1, enc.K + 1), repeat=enc.n_nodes):
        yield combo, encode(enc, combo)


@st.composite
def small_graphs(draw, max_nodes=4, max_score=10):
    n = draw(st.integers(1, max_nodes))
    scores = draw(st.lists(st.integers(1, max_score), min_size=n, max_size=n))
    flags = draw(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=n, max_size=n))
    pairs = list(itertools.combinations(range(n), 2))
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True, max_size=len(pairs))) if pairs else []
    strengths = draw(st.lists(st.floats(0.1, 5.0), min_size=len(chosen), max_size=len(chosen)))
    return graph(scores, [(a, b, s) for (a, b), s in zip(chosen, strengths)], flags, max_score)


weights_st = st.builds(
    Weights,
    *[st.floats(-2.0, 2.0, allow_nan=False).map(lambda v: round(v, 6)) for _ in range(5)],
)


def random_instance(rng: np.random.Generator, n_nodes: int = 3, K: int = 4):
    """Random small graph, weights and encoding for solver-quality checks."""
    scores = rng.integers(1, K + 1, n_nodes)
    flags = [tuple(rng.random(2) < 0.3) for _ in range(n_nodes)]
    edges = [(a, b, float(rng.uniform(0.5, 2.0))) for a, b in itertools.combinations(range(n_nodes), 2)
             if rng.random() < 0.7]
    g = graph(scores, edges, flags, max_score=K)
    w = Weights(*rng.uniform(0.1, 1.0, 5).round(3))
    return g, w, assemble(g, w, ScoreEncoding(g.node_ids, K))
