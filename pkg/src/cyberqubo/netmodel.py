"""Attributed infrastructure graphs, layered generators and their serialisation.

A graph is an undirected set of components (nodes) carrying an initial risk
score and two exposure flags, joined by links of positive strength. Graphs
are immutable values; every transformation returns a new graph.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from typing import Any, Iterable, Sequence

import numpy as np

MAX_SCORE = 10

# Layer sizes of the 255-node reference infrastructure, in hierarchy order.
IT255_LAYERS: tuple[tuple[str, int], ...] = (
    ("workstation", 100),
    ("security1", 30),
    ("network", 30),
    ("security2", 30),
    ("server", 20),
    ("security3", 30),
    ("database", 15),
)
SECURITY_LAYERS = frozenset({"security1", "security2", "security3"})
# Layer that hosts the planted exception in the presets: the central tier.
CENTRAL_LAYER = "network"


class GraphValidationError(ValueError):
    """Raised for malformed graphs, documents or generator specs.

    ``path`` points at the offending element, e.g. ``edges[3]``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


@dataclass(frozen=True)
class NodeSpec:
    id: int
    layer: str
    initial_score: int
    no_update: bool = False
    internet: bool = False

    @property
    def flag_count(self) -> int:
        return int(self.no_update) + int(self.internet)


@dataclass(frozen=True)
class EdgeSpec:
    a: int
    b: int
    strength: float = 1.0

    @property
    def key(self) -> tuple[int, int]:
        return (min(self.a, self.b), max(self.a, self.b))


@dataclass(frozen=True, eq=False)
class InfrastructureGraph:
    nodes: tuple[NodeSpec, ...]
    edges: tuple[EdgeSpec, ...]
    layers: tuple[str, ...]
    metadata: dict[str, Any] = field(default_factory=dict)
    max_score: int = MAX_SCORE

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))
        object.__setattr__(self, "edges", tuple(self.edges))
        object.__setattr__(self, "layers", tuple(self.layers))
        self.validate()

    def validate(self) -> None:
        layer_set = set(self.layers)
        if len(layer_set) != len(self.layers):
            raise GraphValidationError("duplicate layer label", "layers")
        seen: set[int] = set()
        for k, n in enumerate(self.nodes):
            path = f"nodes[{k}]"
            if not isinstance(n.id, (int, np.integer)) or n.id < 0:
                raise GraphValidationError(f"node id must be a non-negative integer, got {n.id!r}", path)
            if n.id in seen:
                raise GraphValidationError(f"duplicate node id {n.id}", path)
            seen.add(n.id)
            if n.layer not in layer_set:
                raise GraphValidationError(f"layer {n.layer!r} not declared in layers", path)
            if not 1 <= n.initial_score <= self.max_score:
                raise GraphValidationError(f"score out of range [1,{self.max_score}]: {n.initial_score}", path)
        pairs: set[tuple[int, int]] = set()
        for k, e in enumerate(self.edges):
            path = f"edges[{k}]"
            if e.a == e.b:
                raise GraphValidationError(f"self loop on node {e.a}", path)
            for end in (e.a, e.b):
                if end not in seen:
                    raise GraphValidationError(f"edge ({e.a},{e.b}) references missing node {end}", path)
            if not (e.strength > 0 and np.isfinite(e.strength)):
                raise GraphValidationError(f"edge strength must be positive, got {e.strength}", path)
            if e.key in pairs:
                raise GraphValidationError(f"duplicate edge ({e.a},{e.b})", path)
            pairs.add(e.key)

    # -- lookups -----------------------------------------------------------

    @cached_property
    def node_ids(self) -> tuple[int, ...]:
        return tuple(sorted(n.id for n in self.nodes))

    @cached_property
    def position(self) -> dict[int, int]:
        """Node id -> row index in the canonical (id-sorted) ordering."""
        return {nid: i for i, nid in enumerate(self.node_ids)}

    @cached_property
    def _by_id(self) -> dict[int, NodeSpec]:
        return {n.id: n for n in self.nodes}

    def node(self, node_id: int) -> NodeSpec:
        try:
            return self._by_id[node_id]
        except KeyError:
            raise KeyError(f"unknown node id {node_id}") from None

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @cached_property
    def neighbors(self) -> dict[int, tuple[int, ...]]:
        adj: dict[int, list[int]] = {nid: [] for nid in self.node_ids}
        for e in self.edges:
            adj[e.a].append(e.b)
            adj[e.b].append(e.a)
        return {k: tuple(sorted(v)) for k, v in adj.items()}

    def degree(self, node_id: int) -> int:
        return len(self.neighbors[node_id])

    def initial_scores(self) -> np.ndarray:
        """Initial scores in canonical node order."""
        return np.array([self._by_id[i].initial_score for i in self.node_ids], dtype=np.int64)

    def layer_of(self) -> list[str]:
        return [self._by_id[i].layer for i in self.node_ids]

    # -- transforms --------------------------------------------------------

    def canonical(self) -> "InfrastructureGraph":
        nodes = sorted(self.nodes, key=lambda n: n.id)
        edges = sorted((EdgeSpec(*e.key, float(e.strength)) for e in self.edges), key=lambda e: e.key)
        return InfrastructureGraph(tuple(nodes), tuple(edges), self.layers, dict(self.metadata), self.max_score)

    def with_scores(self, scores: Sequence[int] | np.ndarray) -> "InfrastructureGraph":
        """Copy of the graph whose initial scores are replaced (canonical order)."""
        scores = [int(s) for s in scores]
        if len(scores) != self.n_nodes:
            raise ValueError(f"expected {self.n_nodes} scores, got {len(scores)}")
        new_nodes = tuple(replace(self._by_id[nid], initial_score=s) for nid, s in zip(self.node_ids, scores))
        return InfrastructureGraph(new_nodes, self.edges, self.layers, dict(self.metadata), self.max_score)

    def with_node(self, node_id: int, **changes) -> "InfrastructureGraph":
        self.node(node_id)
        nodes = tuple(replace(n, **changes) if n.id == node_id else n for n in self.nodes)
        return InfrastructureGraph(nodes, self.edges, self.layers, dict(self.metadata), self.max_score)

    def __eq__(self, other):
        if not isinstance(other, InfrastructureGraph):
            return NotImplemented
        a, b = self.canonical(), other.canonical()
        return (a.nodes, a.edges, a.layers, a.metadata, a.max_score) == (
            b.nodes, b.edges, b.layers, b.metadata, b.max_score)

    __hash__ = None


# -- generators ---------------------------------------------------------------


@dataclass(frozen=True)
class LayerSpec:
    """One layer of a layered topology.

    ``intra`` is ``"full"``, ``"none"`` or a positive int m, meaning isolated
    fully-connected subnetworks of m consecutive nodes.
    ``fixed_score`` pins every node of the layer instead of sampling.
    """

    name: str
    count: int
    intra: str | int = "full"
    fixed_score: int | None = None


@dataclass(frozen=True)
class ExceptionSpec:
    """A single high-risk node planted in an otherwise calm network.

    ``node`` is an explicit id, or None to draw one uniformly from the
    ``eligible_layers`` (default: every layer without a fixed score).
    """

    score: int = 8
    node: int | None = None
    eligible_layers: tuple[str, ...] | None = None
    strength_multiplier: float = 1.0
    no_update: bool | None = None
    internet: bool | None = None


@dataclass(frozen=True)
class LayeredGenSpec:
    layers: tuple[LayerSpec, ...]
    inter_prob: float = 0.1
    score_range: tuple[int, int] = (1, 4)
    exception: ExceptionSpec | None = None
    seed: int = 0
    max_score: int = MAX_SCORE
    name: str = "layered"

    def validate(self) -> None:
        if not self.layers:
            raise GraphValidationError("at least one layer is required", "layers")
        names = [l.name for l in self.layers]
        if len(set(names)) != len(names):
            raise GraphValidationError("duplicate layer names", "layers")
        for k, l in enumerate(self.layers):
            path = f"layers[{k}]"
            if l.count <= 0:
                raise GraphValidationError(f"layer {l.name!r} needs a positive node count", path)
            if isinstance(l.intra, str):
                if l.intra not in ("full", "none"):
                    raise GraphValidationError(f"unknown intra rule {l.intra!r}", path)
            elif int(l.intra) <= 0:
                raise GraphValidationError("subnetwork size must be positive", path)
            if l.fixed_score is not None and not 1 <= l.fixed_score <= self.max_score:
                raise GraphValidationError(f"score out of range [1,{self.max_score}]", path)
        if not 0.0 <= self.inter_prob <= 1.0:
            raise GraphValidationError(f"probability outside [0,1]: {self.inter_prob}", "inter_prob")
        lo, hi = self.score_range
        if not 1 <= lo <= hi <= self.max_score:
            raise GraphValidationError(f"bad score range {self.score_range}", "score_range")
        ex = self.exception
        if ex is not None:
            if not 1 <= ex.score <= self.max_score:
                raise GraphValidationError(f"score out of range [1,{self.max_score}]", "exception.score")
            if ex.strength_multiplier < 1:
                raise GraphValidationError("strength multiplier must be >= 1", "exception.strength_multiplier")
            if ex.eligible_layers is not None and not set(ex.eligible_layers) <= set(names):
                raise GraphValidationError("unknown eligible layer", "exception.eligible_layers")


def generate_layered(spec: LayeredGenSpec) -> InfrastructureGraph:
    """Build a seeded layered topology.

    Node ids are assigned consecutively layer by layer. All randomness flows
    through one PCG64 stream in a fixed order (scores, inter-layer edges,
    exception placement), so a seed reproduces the graph exactly.
    """
    spec.validate()
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    lo, hi = spec.score_range

    nodes: list[NodeSpec] = []
    members: list[list[int]] = []
    nid = 0
    for l in spec.layers:
        ids = list(range(nid, nid + l.count))
        nid += l.count
        members.append(ids)
        if l.fixed_score is None:
            scores = rng.integers(lo, hi + 1, size=l.count)
        else:
            scores = np.full(l.count, l.fixed_score)
        nodes.extend(NodeSpec(i, l.name, int(s)) for i, s in zip(ids, scores))

    edges: dict[tuple[int, int], float] = {}
    for l, ids in zip(spec.layers, members):
        if l.intra == "none":
            continue
        block = len(ids) if l.intra == "full" else int(l.intra)
        for start in range(0, len(ids), block):
            group = ids[start:start + block]
            for x in range(len(group)):
                for y in range(x + 1, len(group)):
                    edges[(group[x], group[y])] = 1.0
    for upper, lower in zip(members, members[1:]):
        hits = rng.random((len(upper), len(lower))) < spec.inter_prob
        for x, y in zip(*np.nonzero(hits)):
            edges[(upper[x], lower[y])] = 1.0

    metadata: dict[str, Any] = {"generator": spec.name, "seed": spec.seed}
    ex = spec.exception
    if ex is not None:
        if ex.node is not None:
            target = ex.node
            if not 0 <= target < nid:
                raise GraphValidationError(f"exception node {target} does not exist", "exception.node")
        else:
            eligible = ex.eligible_layers or tuple(l.name for l in spec.layers if l.fixed_score is None)
            if not eligible:
                eligible = tuple(l.name for l in spec.layers)
            pool = [i for l, ids in zip(spec.layers, members) if l.name in eligible for i in ids]
            target = pool[int(rng.integers(len(pool)))]
        node = nodes[target]
        nodes[target] = replace(
            node,
            initial_score=ex.score,
            no_update=node.no_update if ex.no_update is None else ex.no_update,
            internet=node.internet if ex.internet is None else ex.internet,
        )
        if ex.strength_multiplier != 1.0:
            for key in edges:
                if target in key:
                    edges[key] *= ex.strength_multiplier
        metadata["exception_node"] = target

    edge_specs = tuple(EdgeSpec(a, b, s) for (a, b), s in sorted(edges.items()))
    return InfrastructureGraph(tuple(nodes), edge_specs, tuple(l.name for l in spec.layers), metadata, spec.max_score)


CENTRAL_EXCEPTION = ExceptionSpec(eligible_layers=(CENTRAL_LAYER,))


def it255_spec(seed: int = 0, exception: ExceptionSpec | None = CENTRAL_EXCEPTION, inter_prob: float = 0.1,
               security_count: int = 30) -> LayeredGenSpec:
    """The 255-node layered infrastructure with one risky exception.

    By default the exception sits at a random node of the central network
    tier; pass ``ExceptionSpec()`` to draw it from every unfixed layer.
    """
    layers = []
    for name, count in IT255_LAYERS:
        if name in SECURITY_LAYERS:
            layers.append(LayerSpec(name, security_count, "full", fixed_score=1))
        elif name == "workstation":
            layers.append(LayerSpec(name, count, 10))
        else:
            layers.append(LayerSpec(name, count, "full"))
    return LayeredGenSpec(tuple(layers), inter_prob=inter_prob, exception=exception, seed=seed, name="it255")


def scaled_layers(n_nodes: int) -> list[tuple[str, int]]:
    """Split ``n_nodes`` across the seven reference layers in 255-node proportions."""
    if n_nodes < len(IT255_LAYERS):
        raise GraphValidationError(f"need at least {len(IT255_LAYERS)} nodes, got {n_nodes}", "n_nodes")
    total = sum(c for _, c in IT255_LAYERS)
    raw = np.array([c * n_nodes / total for _, c in IT255_LAYERS])
    counts = np.maximum(np.floor(raw).astype(int), 1)
    # largest remainder, ties broken by layer order
    order = np.argsort(-(raw - np.floor(raw)), kind="stable")
    k = 0
    while counts.sum() < n_nodes:
        counts[order[k % len(order)]] += 1
        k += 1
    while counts.sum() > n_nodes:
        counts[int(np.argmax(counts))] -= 1
    return [(name, int(c)) for (name, _), c in zip(IT255_LAYERS, counts)]


def scaled_spec(n_nodes: int, seed: int = 0, exception: ExceptionSpec | None = CENTRAL_EXCEPTION,
                inter_prob: float = 0.1, subnet_size: int = 10) -> LayeredGenSpec:
    """Layered instance of arbitrary size with the reference layer mix."""
    layers = []
    for name, count in scaled_layers(n_nodes):
        if name in SECURITY_LAYERS:
            layers.append(LayerSpec(name, count, "full", fixed_score=1))
        elif name == "workstation":
            layers.append(LayerSpec(name, count, min(subnet_size, count)))
        else:
            layers.append(LayerSpec(name, count, "full"))
    return LayeredGenSpec(tuple(layers), inter_prob=inter_prob, exception=exception, seed=seed,
                          name=f"scaled{n_nodes}")


def amplify_node_influence(g: InfrastructureGraph, node_id: int, factor: float = 5.0) -> InfrastructureGraph:
    """Multiply the strength of every link touching ``node_id`` by ``factor``."""
    g.node(node_id)
    if not factor >= 1:
        raise ValueError(f"amplification factor must be >= 1, got {factor}")
    edges = tuple(
        EdgeSpec(e.a, e.b, e.strength * factor) if node_id in (e.a, e.b) else e for e in g.edges
    )
    meta = dict(g.metadata)
    meta["amplified_node"] = node_id
    meta["amplification"] = factor
    return InfrastructureGraph(g.nodes, edges, g.layers, meta, g.max_score)


# -- serialisation ------------------------------------------------------------


def graph_to_dict(g: InfrastructureGraph) -> dict[str, Any]:
    c = g.canonical()
    return {
        "layers": list(c.layers),
        "nodes": [
            {"id": int(n.id), "layer": n.layer, "is": int(n.initial_score),
             "no_update": bool(n.no_update), "internet": bool(n.internet)}
            for n in c.nodes
        ],
        "edges": [{"a": int(e.a), "b": int(e.b), "s": float(e.strength)} for e in c.edges],
        "metadata": dict(c.metadata),
    }


def save_graph(g: InfrastructureGraph) -> bytes:
    return (json.dumps(graph_to_dict(g), indent=1, sort_keys=False) + "\n").encode("utf-8")


def _expect(obj, kind, path, what):
    if kind is int:
        ok = isinstance(obj, int) and not isinstance(obj, bool)
    elif kind is float:
        ok = isinstance(obj, (int, float)) and not isinstance(obj, bool)
    else:
        ok = isinstance(obj, kind)
    if not ok:
        raise GraphValidationError(f"{what} must be {getattr(kind, '__name__', kind)}, got {type(obj).__name__}", path)
    return obj


def graph_from_dict(doc: Any, max_score: int = MAX_SCORE) -> InfrastructureGraph:
    _expect(doc, dict, "", "document")
    for key in ("layers", "nodes", "edges"):
        if key not in doc:
            raise GraphValidationError(f"missing key {key!r}", key)
    unknown = set(doc) - {"layers", "nodes", "edges", "metadata"}
    if unknown:
        raise GraphValidationError(f"unknown keys {sorted(unknown)}", "")
    layers = [_expect(l, str, f"layers[{k}]", "layer") for k, l in enumerate(_expect(doc["layers"], list, "layers", "layers"))]
    nodes = []
    for k, n in enumerate(_expect(doc["nodes"], list, "nodes", "nodes")):
        path = f"nodes[{k}]"
        _expect(n, dict, path, "node")
        missing = {"id", "layer", "is", "no_update", "internet"} - set(n)
        if missing:
            raise GraphValidationError(f"missing keys {sorted(missing)}", path)
        nodes.append(NodeSpec(
            _expect(n["id"], int, f"{path}.id", "id"),
            _expect(n["layer"], str, f"{path}.layer", "layer"),
            _expect(n["is"], int, f"{path}.is", "is"),
            _expect(n["no_update"], bool, f"{path}.no_update", "no_update"),
            _expect(n["internet"], bool, f"{path}.internet", "internet"),
        ))
    edges = []
    for k, e in enumerate(_expect(doc["edges"], list, "edges", "edges")):
        path = f"edges[{k}]"
        _expect(e, dict, path, "edge")
        missing = {"a", "b", "s"} - set(e)
        if missing:
            raise GraphValidationError(f"missing keys {sorted(missing)}", path)
        edges.append(EdgeSpec(
            _expect(e["a"], int, f"{path}.a", "a"),
            _expect(e["b"], int, f"{path}.b", "b"),
            float(_expect(e["s"], float, f"{path}.s", "s")),
        ))
    metadata = _expect(doc.get("metadata", {}), dict, "metadata", "metadata")
    return InfrastructureGraph(tuple(nodes), tuple(edges), tuple(layers), dict(metadata), max_score).canonical()


def load_graph(data: bytes | str, max_score: int = MAX_SCORE) -> InfrastructureGraph:
    try:
        doc = json.loads(data)
    except json.JSONDecodeError as exc:
        raise GraphValidationError(f"invalid JSON: {exc}") from exc
    return graph_from_dict(doc, max_score)


_EXCEPTION_KEYS = {"score", "node", "eligible_layers", "strength_multiplier", "no_update", "internet"}


def _exception_from_dict(d: Any, path: str) -> ExceptionSpec | None:
    if d is None:
        return None
    _expect(d, dict, path, "exception")
    unknown = set(d) - _EXCEPTION_KEYS
    if unknown:
        raise GraphValidationError(f"unknown keys {sorted(unknown)}", path)
    kw = dict(d)
    if "eligible_layers" in kw and kw["eligible_layers"] is not None:
        kw["eligible_layers"] = tuple(_expect(kw["eligible_layers"], list, f"{path}.eligible_layers", "eligible_layers"))
    for key in ("score", "node"):
        if kw.get(key) is not None:
            _expect(kw[key], int, f"{path}.{key}", key)
    if "strength_multiplier" in kw:
        kw["strength_multiplier"] = float(_expect(kw["strength_multiplier"], float, f"{path}.strength_multiplier",
                                                  "strength_multiplier"))
    return ExceptionSpec(**kw)


def spec_from_dict(d: Any, path: str = "") -> LayeredGenSpec:
    """Generator spec from JSON.

    Either a preset, ``{"preset": "it255" | "scaled", "n_nodes": .., "seed": ..,
    "exception": {..} | null, "inter_prob": ..}``, or an explicit
    ``{"layers": [{"name", "count", "intra", "fixed_score"}], ...}`` spec with
    the fields of :class:`LayeredGenSpec`.
    """
    _expect(d, dict, path, "generator spec")
    p = (path + ".") if path else ""
    seed = _expect(d.get("seed", 0), int, p + "seed", "seed")
    # presets plant the central exception unless told otherwise; explicit specs plant none
    ex = _exception_from_dict(d["exception"], p + "exception") if "exception" in d else None
    inter = float(_expect(d.get("inter_prob", 0.1), float, p + "inter_prob", "inter_prob"))
    if "preset" in d:
        unknown = set(d) - {"preset", "seed", "exception", "inter_prob", "n_nodes"}
        if unknown:
            raise GraphValidationError(f"unknown keys {sorted(unknown)}", path)
        preset = d["preset"]
        if "exception" not in d:
            ex = CENTRAL_EXCEPTION
        if preset == "it255":
            spec = it255_spec(seed=seed, exception=ex, inter_prob=inter)
        elif preset == "scaled":
            if "n_nodes" not in d:
                raise GraphValidationError("missing key 'n_nodes'", p + "n_nodes")
            spec = scaled_spec(_expect(d["n_nodes"], int, p + "n_nodes", "n_nodes"), seed=seed, exception=ex,
                               inter_prob=inter)
        else:
            raise GraphValidationError(f"unknown preset {preset!r}", p + "preset")
        spec.validate()
        return spec
    unknown = set(d) - {"layers", "seed", "exception", "inter_prob", "score_range", "max_score", "name"}
    if unknown:
        raise GraphValidationError(f"unknown keys {sorted(unknown)}", path)
    if "layers" not in d:
        raise GraphValidationError("missing key 'layers' (or 'preset')", p + "layers")
    layers = []
    for k, l in enumerate(_expect(d["layers"], list, p + "layers", "layers")):
        lp = f"{p}layers[{k}]"
        _expect(l, dict, lp, "layer")
        for key in ("name", "count"):
            if key not in l:
                raise GraphValidationError(f"missing key {key!r}", lp)
        unknown = set(l) - {"name", "count", "intra", "fixed_score"}
        if unknown:
            raise GraphValidationError(f"unknown keys {sorted(unknown)}", lp)
        intra = l.get("intra", "full")
        if not isinstance(intra, str):
            _expect(intra, int, lp + ".intra", "intra")
        fixed = l.get("fixed_score")
        if fixed is not None:
            _expect(fixed, int, lp + ".fixed_score", "fixed_score")
        layers.append(LayerSpec(_expect(l["name"], str, lp + ".name", "name"),
                                _expect(l["count"], int, lp + ".count", "count"), intra, fixed))
    rng = _expect(d.get("score_range", [1, 4]), list, p + "score_range", "score_range")
    if len(rng) != 2:
        raise GraphValidationError("score_range needs two values", p + "score_range")
    spec = LayeredGenSpec(
        tuple(layers), inter_prob=inter,
        score_range=(_expect(rng[0], int, p + "score_range[0]", "score"), _expect(rng[1], int, p + "score_range[1]", "score")),
        exception=ex, seed=seed,
        max_score=_expect(d.get("max_score", MAX_SCORE), int, p + "max_score", "max_score"),
        name=_expect(d.get("name", "layered"), str, p + "name", "name"),
    )
    spec.validate()
    return spec


# -- DOT export ---------------------------------------------------------------


def score_color(score: float, max_score: int = MAX_SCORE) -> str:
    """Hex colour on a green (1) to red (max_score) ramp through yellow."""
    t = 0.0 if max_score <= 1 else min(max((score - 1) / (max_score - 1), 0.0), 1.0)
    r = int(round(255 * min(1.0, 2 * t)))
    g = int(round(255 * min(1.0, 2 * (1 - t))))
    return f"#{r:02x}{g:02x}00"


def to_dot(g: InfrastructureGraph, scores: Iterable[int] | None = None, name: str = "infrastructure") -> str:
    """Graphviz DOT text; colour and size follow the score (initial unless given)."""
    values = list(g.initial_scores() if scores is None else scores)
    lines = [f"graph {name} {{", "  node [shape=circle, style=filled, fontsize=8];"]
    for li, layer in enumerate(g.layers):
        lines.append(f"  subgraph cluster_{li} {{")
        lines.append(f'    label="{layer}";')
        for nid, s in zip(g.node_ids, values):
            if g.node(nid).layer != layer:
                continue
            size = 0.2 + 0.06 * s
            lines.append(
                f'    {nid} [label="{nid}", fillcolor="{score_color(s, g.max_score)}", '
                f'width={size:.2f}, height={size:.2f}];'
            )
        lines.append("  }")
    for e in g.canonical().edges:
        attr = "" if e.strength == 1.0 else f" [penwidth={min(1 + e.strength, 8):.2f}]"
        lines.append(f"  {e.a} -- {e.b}{attr};")
    lines.append("}")
    return "\n".join(lines) + "\n"
