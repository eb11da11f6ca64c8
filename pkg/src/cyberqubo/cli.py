"""Command-line front end.

Every command reads an optional JSON run config (``--config``); explicit flags
override values from the file, which override built-in defaults. Output files
are written under ``--out``. Exit codes: 0 success, 1 runtime failure,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any

from .analysis import bench_csv, bench_timing_csv, recursive_minimize, scaling_bench, transition_report
from .encoding import ScoreEncoding
from .netmodel import (GraphValidationError, InfrastructureGraph, amplify_node_influence, generate_layered,
                       load_graph, save_graph, spec_from_dict, to_dot)
from .qubo import Weights, assemble, export_qubo
from .solvers import SOLVERS, RemoteSampler, SolverRequest, get_solver, resolve_budget

DEFAULT_GENERATOR = {"preset": "it255", "seed": 0}


class ConfigError(ValueError):
    pass


@dataclass
class SolverConfig:
    name: str = "tabu"
    params: dict[str, Any] = field(default_factory=dict)
    max_iter: int | None = None
    time_limit: float | None = None
    budget: str | float | None = None


@dataclass
class AnalysisConfig:
    report: bool = True
    recurse: int = 20
    h5_frozen: bool = False
    bench_sizes: list[int] = field(default_factory=lambda: [50, 100, 200, 400])
    bench_solvers: list[str] = field(default_factory=lambda: ["tabu", "hybrid"])
    bench_seeds: list[int] = field(default_factory=lambda: [0])


@dataclass
class RunConfig:
    """Declarative description of one run.

    ``graph`` is either ``{"file": path}`` or ``{"generator": spec}``; exactly
    one of the two. ``amplify`` optionally names a node (or ``"exception"``)
    whose links are strengthened by ``factor`` before solving.
    """

    graph: dict[str, Any] = field(default_factory=lambda: {"generator": dict(DEFAULT_GENERATOR)})
    weights: list[float] = field(default_factory=lambda: list(Weights().as_tuple()))
    K: int = 10
    penalty: float | None = None
    solver: SolverConfig = field(default_factory=SolverConfig)
    analysis: AnalysisConfig = field(default_factory=AnalysisConfig)
    amplify: dict[str, Any] | None = None
    seed: int = 0
    out: str = "."
    base_dir: str = field(default=".", repr=False)

    def validate(self) -> None:
        keys = set(self.graph)
        if len(keys & {"file", "generator"}) != 1 or keys - {"file", "generator"}:
            raise ConfigError("graph: give exactly one of 'file' or 'generator'")
        if self.solver.name not in SOLVERS:
            raise ConfigError(f"solver.name: unknown solver {self.solver.name!r}; choose from {sorted(SOLVERS)}")
        try:
            Weights.from_sequence(self.weights)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"weights: {exc}") from None
        if not isinstance(self.K, int) or self.K < 1:
            raise ConfigError(f"K: must be a positive integer, got {self.K!r}")
        if self.penalty is not None and not self.penalty > 0:
            raise ConfigError(f"penalty: must be positive, got {self.penalty!r}")
        if self.analysis.recurse < 1:
            raise ConfigError(f"analysis.recurse: must be >= 1, got {self.analysis.recurse}")
        for name in self.analysis.bench_solvers:
            if name not in SOLVERS:
                raise ConfigError(f"analysis.bench_solvers: unknown solver {name!r}")
        if self.solver.budget is not None:
            try:
                resolve_budget(self.solver.budget)
            except ValueError as exc:
                raise ConfigError(f"solver.budget: {exc}") from None
        if self.amplify is not None:
            if "node" not in self.amplify:
                raise ConfigError("amplify: missing 'node'")
            if not float(self.amplify.get("factor", 5.0)) >= 1:
                raise ConfigError("amplify.factor: must be >= 1")

    def to_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d.pop("base_dir")
        d.pop("out")
        return d


def _build(cls, d: Any, path: str):
    if not isinstance(d, dict):
        raise ConfigError(f"{path}: expected an object")
    names = {f.name for f in fields(cls)} - {"base_dir"}
    unknown = set(d) - names
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    return cls(**d)


def config_from_dict(d: Any, base_dir: str = ".") -> RunConfig:
    if not isinstance(d, dict):
        raise ConfigError("config: expected a JSON object")
    d = dict(d)
    if "solver" in d:
        d["solver"] = _build(SolverConfig, d["solver"], "solver")
    if "analysis" in d:
        d["analysis"] = _build(AnalysisConfig, d["analysis"], "analysis")
    cfg = _build(RunConfig, d, "config")
    cfg.base_dir = base_dir
    cfg.validate()
    return cfg


def load_config(path: str | None) -> RunConfig:
    if path is None:
        return RunConfig()
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path}: invalid JSON: {exc}") from None
    return config_from_dict(doc, str(p.parent))


def apply_overrides(cfg: RunConfig, args: argparse.Namespace) -> RunConfig:
    """Flags win over the config file."""
    try:
        _apply(cfg, args)
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"bad flag value: {exc}") from None
    cfg.validate()
    return cfg


def _apply(cfg: RunConfig, args: argparse.Namespace) -> None:
    get = lambda name: getattr(args, name, None)
    if get("graph") is not None:
        cfg.graph = {"file": str(Path(args.graph).resolve())}
    if get("preset") is not None:
        gen = {"preset": args.preset, "seed": cfg.seed if get("seed") is None else args.seed}
        if get("nodes") is not None:
            gen["n_nodes"] = args.nodes
        cfg.graph = {"generator": gen}
    if get("seed") is not None:
        cfg.seed = args.seed
    if get("solver") is not None:
        cfg.solver.name = args.solver
    if get("weights") is not None:
        cfg.weights = [float(v) for v in args.weights.split(",")]
    if get("K") is not None:
        cfg.K = args.K
    if get("penalty") is not None:
        cfg.penalty = args.penalty
    if get("max_iter") is not None:
        cfg.solver.max_iter = args.max_iter
    if get("time_limit") is not None:
        cfg.solver.time_limit = args.time_limit
    if get("budget") is not None:
        cfg.solver.budget = args.budget
    for kv in get("param") or []:
        key, _, value = kv.partition("=")
        if not key or not _:
            raise ConfigError(f"--param expects key=value, got {kv!r}")
        try:
            cfg.solver.params[key] = json.loads(value)
        except json.JSONDecodeError:
            cfg.solver.params[key] = value
    if get("amplify") is not None:
        node = args.amplify if args.amplify == "exception" else int(args.amplify)
        cfg.amplify = {"node": node, "factor": args.factor if get("factor") is not None else 5.0}
    if get("iters") is not None:
        cfg.analysis.recurse = args.iters
    if get("h5_frozen"):
        cfg.analysis.h5_frozen = True
    if get("sizes") is not None:
        cfg.analysis.bench_sizes = [int(v) for v in args.sizes.split(",")]
    if get("solvers") is not None:
        cfg.analysis.bench_solvers = args.solvers.split(",")
    if get("seeds") is not None:
        cfg.analysis.bench_seeds = [int(v) for v in args.seeds.split(",")]
    if get("out") is not None:
        cfg.out = args.out


# -- helpers ------------------------------------------------------------------


def load_input_graph(cfg: RunConfig) -> InfrastructureGraph:
    if "file" in cfg.graph:
        path = Path(cfg.base_dir) / cfg.graph["file"]
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise ConfigError(f"cannot read graph {path}: {exc.strerror}") from None
        g = load_graph(data)
    else:
        g = generate_layered(spec_from_dict(cfg.graph["generator"], "graph.generator"))
    if cfg.amplify is not None:
        node = cfg.amplify["node"]
        if node == "exception":
            if "exception_node" not in g.metadata:
                raise ConfigError("amplify.node: graph has no exception node")
            node = g.metadata["exception_node"]
        try:
            g = amplify_node_influence(g, int(node), float(cfg.amplify.get("factor", 5.0)))
        except KeyError:
            raise ConfigError(f"amplify.node: no node {node}") from None
    return g


def build_request(cfg: RunConfig, g: InfrastructureGraph, seed: int | None = None) -> SolverRequest:
    q = assemble(g, Weights.from_sequence(cfg.weights), ScoreEncoding(g.node_ids, cfg.K, cfg.penalty))
    params = dict(cfg.solver.params)
    if cfg.solver.budget is not None:
        params["budget"] = cfg.solver.budget
    if cfg.solver.name == "hybrid" and "sampler" not in params:
        sampler = RemoteSampler.from_env()
        if sampler is not None:
            params["sampler"] = sampler
    return SolverRequest(q, seed=cfg.seed if seed is None else seed, max_iter=cfg.solver.max_iter,
                         time_limit=cfg.solver.time_limit, params=params)


def _write(out: Path, name: str, data: str | bytes) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_bytes(data.encode("utf-8") if isinstance(data, str) else data)
    return path


def _json(obj: Any) -> str:
    return json.dumps(obj, indent=1, sort_keys=True) + "\n"


# -- commands -----------------------------------------------------------------


def cmd_generate(args) -> int:
    if args.spec is not None:
        try:
            doc = json.loads(Path(args.spec).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read spec {args.spec}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"spec {args.spec}: invalid JSON: {exc}") from None
    else:
        doc = {"preset": args.preset or "it255"}
        if args.nodes is not None:
            doc["n_nodes"] = args.nodes
    if args.seed is not None:
        doc["seed"] = args.seed
    g = generate_layered(spec_from_dict(doc))
    out = Path(args.out)
    _write(out, args.name + ".json", save_graph(g))
    if args.dot:
        _write(out, args.name + ".dot", to_dot(g))
    print(f"wrote {g.n_nodes} nodes, {len(g.edges)} edges to {out / (args.name + '.json')}")
    return 0


def cmd_solve(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    g = load_input_graph(cfg)
    req = build_request(cfg, g)
    sol = get_solver(cfg.solver.name)(req)
    out = Path(cfg.out)
    _write(out, "config.json", _json(cfg.to_dict()))
    _write(out, "solution.json", _json(sol.to_dict()))
    _write(out, "trace.csv", sol.trace_csv())
    if cfg.analysis.report:
        report = transition_report(g, sol)
        _write(out, "report.json", report.to_json())
        _write(out, "report.csv", report.summary_csv())
        _write(out, "nodes.csv", report.nodes_csv())
        for m in report.matrices:
            _write(out / "transitions", f"{m.layer}.csv", m.to_csv())
    _write(out, "timing.json", _json({"wall_time_s": sol.wall_time, "iterations": sol.iterations}))
    s = sol.decoded_scores
    print(f"{sol.solver_name}: energy {sol.energy:.6f}, mean risk {s.mean():.3f} -> {out}")
    return 0


def cmd_recurse(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    g = load_input_graph(cfg)
    req = build_request(cfg, g)
    t0 = time.perf_counter()
    trace = recursive_minimize(g, cfg.solver.name, cfg.analysis.recurse, weights=Weights.from_sequence(cfg.weights),
                               h5_frozen=cfg.analysis.h5_frozen, seed=cfg.seed, K=cfg.K,
                               solver_params=req.params, max_iter=cfg.solver.max_iter,
                               time_limit=cfg.solver.time_limit)
    out = Path(cfg.out)
    _write(out, "config.json", _json(cfg.to_dict()))
    _write(out, "recursion.json", trace.to_json())
    _write(out, "recursion.csv", trace.series_csv())
    _write(out, "timing.json", _json({"wall_time_s": time.perf_counter() - t0}))
    fp = f"@{trace.fixed_point_iteration}" if trace.fixed_point_iteration else ""
    print(f"{trace.classification}{fp} after {len(trace.iterations)} iterations -> {out}")
    return 0


def cmd_bench(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    a = cfg.analysis
    params = {name: dict(cfg.solver.params) for name in a.bench_solvers if name == cfg.solver.name}
    limits = {}
    if cfg.solver.budget is not None and "hybrid" in a.bench_solvers:
        params.setdefault("hybrid", {})["budget"] = cfg.solver.budget
    if cfg.solver.time_limit is not None:
        limits = {name: cfg.solver.time_limit for name in a.bench_solvers}
    recs = scaling_bench(a.bench_sizes, a.bench_solvers, a.bench_seeds, weights=Weights.from_sequence(cfg.weights),
                         solver_params=params, time_limits=limits)
    out = Path(cfg.out)
    _write(out, "config.json", _json(cfg.to_dict()))
    _write(out, "bench.csv", bench_csv(recs))
    _write(out, "bench_timing.csv", bench_timing_csv(recs))
    print(f"{len(recs)} records -> {out / 'bench.csv'}")
    return 0


def cmd_export_dot(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    g = load_input_graph(cfg)
    scores = None
    if args.solution is not None:
        try:
            doc = json.loads(Path(args.solution).read_text())
            scores = doc["decoded_scores"]
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise ConfigError(f"cannot read decoded scores from {args.solution}: {exc}") from None
        if scores is None or len(scores) != g.n_nodes:
            raise ConfigError(f"{args.solution}: decoded scores do not match the graph")
    _write(Path(cfg.out), args.name + ".dot", to_dot(g, scores))
    return 0


def cmd_export_qubo(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    g = load_input_graph(cfg)
    q = build_request(cfg, g).qubo
    _write(Path(cfg.out), args.name + ".qubo", export_qubo(q))
    print(f"{q.n_vars} variables, {q.quadratic.nnz} couplings, P = {q.encoding.penalty:g}")
    return 0


# -- parser -------------------------------------------------------------------


def _common(p: argparse.ArgumentParser, solver: bool = True) -> None:
    p.add_argument("-c", "--config", help="JSON run config")
    p.add_argument("--out", help="output directory (default: config value or .)")
    p.add_argument("--seed", type=int)
    src = p.add_mutually_exclusive_group()
    src.add_argument("--graph", help="graph JSON file")
    src.add_argument("--preset", choices=["it255", "scaled"])
    p.add_argument("--nodes", type=int, help="node count for the scaled preset")
    p.add_argument("--weights", help="five comma-separated term weights")
    p.add_argument("--K", type=int, help="number of score levels")
    p.add_argument("--penalty", type=float, help="one-hot penalty (default: derived)")
    p.add_argument("--amplify", help="node id, or 'exception', whose links are strengthened")
    p.add_argument("--factor", type=float, help="amplification factor (default 5)")
    if solver:
        p.add_argument("--solver", help=f"one of {', '.join(sorted(SOLVERS))}")
        p.add_argument("--max-iter", type=int)
        p.add_argument("--time-limit", type=float)
        p.add_argument("--budget", help="hybrid budget: min, 30s, 180s or seconds")
        p.add_argument("--param", action="append", metavar="KEY=VALUE", help="solver parameter (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cyberqubo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a generated graph")
    p.add_argument("spec", nargs="?", help="generator spec JSON (default: preset)")
    p.add_argument("--preset", choices=["it255", "scaled"])
    p.add_argument("--nodes", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", default=".")
    p.add_argument("--name", default="graph")
    p.add_argument("--dot", action="store_true", help="also write a DOT rendering")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("solve", help="solve and write solution, report and trace")
    _common(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("recurse", help="recursive minimisation")
    _common(p)
    p.add_argument("--iters", type=int)
    p.add_argument("--h5-frozen", action="store_true", help="keep the original critical set")
    p.set_defaults(func=cmd_recurse)

    p = sub.add_parser("bench", help="scaling benchmark")
    _common(p)
    p.add_argument("--sizes", help="comma-separated node counts")
    p.add_argument("--solvers", help="comma-separated solver names")
    p.add_argument("--seeds", help="comma-separated instance seeds")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("export-dot", help="write a DOT rendering")
    _common(p, solver=False)
    p.add_argument("--solution", help="solution.json whose decoded scores colour the nodes")
    p.add_argument("--name", default="graph")
    p.set_defaults(func=cmd_export_dot)

    p = sub.add_parser("export-qubo", help="write the assembled QUBO in text form")
    _common(p, solver=False)
    p.add_argument("--name", default="problem")
    p.set_defaults(func=cmd_export_qubo)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, GraphValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # runtime failure
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
