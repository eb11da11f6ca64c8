"""Result artefacts: transition matrices, risk statistics, recursion and scaling runs.

All standard deviations are population values (divide by N).
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Sequence

import numpy as np

from .encoding import ScoreEncoding
from .netmodel import InfrastructureGraph, generate_layered, scaled_spec
from .qubo import CRITICAL_SCORE, Weights, assemble
from .solvers import Solution, SolverRequest, get_solver

REPORT_SCHEMA = "cyberqubo-report 1"
RECURSION_SCHEMA = "cyberqubo-recursion 1"
BENCH_COLUMNS = ("n_nodes", "solver", "seed", "mean_final", "deviation_pct", "energy")

CLASSIFICATIONS = ("stable", "divergent", "oscillating", "max-iters")


def _stats(values) -> tuple[float, float]:
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        return 0.0, 0.0
    return float(v.mean()), float(v.std())


def _scores_of(solution) -> np.ndarray:
    if isinstance(solution, Solution):
        if solution.decoded_scores is None:
            raise ValueError("solution carries no decoded scores")
        return np.asarray(solution.decoded_scores, dtype=np.int64)
    return np.asarray(solution, dtype=np.int64)


# -- transition report ----------------------------------------------------------


@dataclass
class TransitionMatrix:
    """``counts[i-1, f-1]`` = nodes of ``layer`` moving from initial score i to final score f."""

    layer: str
    counts: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.ndim != 2 or self.counts.shape[0] != self.counts.shape[1]:
            raise ValueError("transition counts must be a square matrix")
        if (self.counts < 0).any():
            raise ValueError("transition counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def unchanged(self) -> int:
        return int(np.trace(self.counts))

    def to_csv(self) -> str:
        """Grid with initial scores as rows and final scores as columns."""
        K = self.counts.shape[0]
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["initial\\final"] + [str(f) for f in range(1, K + 1)])
        for i in range(K):
            w.writerow([str(i + 1)] + [str(int(c)) for c in self.counts[i]])
        return buf.getvalue()

    def to_dict(self) -> dict[str, Any]:
        return {"layer": self.layer, "counts": self.counts.tolist()}

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "TransitionMatrix":
        return cls(d["layer"], np.array(d["counts"], dtype=np.int64))

    def __eq__(self, other):
        if not isinstance(other, TransitionMatrix):
            return NotImplemented
        return self.layer == other.layer and np.array_equal(self.counts, other.counts)


def transition_matrix(layer: str, initial, final, K: int) -> TransitionMatrix:
    counts = np.zeros((K, K), dtype=np.int64)
    np.add.at(counts, (np.asarray(initial) - 1, np.asarray(final) - 1), 1)
    return TransitionMatrix(layer, counts)


@dataclass
class ScoreStats:
    n: int
    mean_initial: float
    std_initial: float
    mean_final: float
    std_final: float

    @classmethod
    def of(cls, initial, final) -> "ScoreStats":
        mi, si = _stats(initial)
        mf, sf = _stats(final)
        return cls(len(initial), mi, si, mf, sf)


@dataclass
class RiskReport:
    K: int
    matrices: list[TransitionMatrix]
    global_stats: ScoreStats
    layer_stats: dict[str, ScoreStats]
    nodes: list[tuple[int, str, int, int]]
    solver: dict[str, Any] = field(default_factory=dict)

    def matrix(self, layer: str) -> TransitionMatrix:
        for m in self.matrices:
            if m.layer == layer:
                return m
        raise KeyError(layer)

    @property
    def initial_scores(self) -> np.ndarray:
        return np.array([n[2] for n in self.nodes], dtype=np.int64)

    @property
    def final_scores(self) -> np.ndarray:
        return np.array([n[3] for n in self.nodes], dtype=np.int64)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA,
            "K": self.K,
            "global": vars(self.global_stats).copy(),
            "layers": {k: vars(v).copy() for k, v in self.layer_stats.items()},
            "matrices": [m.to_dict() for m in self.matrices],
            "nodes": [{"id": i, "layer": l, "is": s0, "fs": s1} for i, l, s0, s1 in self.nodes],
            "solver": self.solver,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RiskReport":
        if d.get("schema") != REPORT_SCHEMA:
            raise ValueError(f"unsupported report schema {d.get('schema')!r}")
        return cls(
            K=int(d["K"]),
            matrices=[TransitionMatrix.from_dict(m) for m in d["matrices"]],
            global_stats=ScoreStats(**d["global"]),
            layer_stats={k: ScoreStats(**v) for k, v in d["layers"].items()},
            nodes=[(int(n["id"]), n["layer"], int(n["is"]), int(n["fs"])) for n in d["nodes"]],
            solver=dict(d.get("solver", {})),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RiskReport":
        return cls.from_dict(json.loads(text))

    def nodes_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["id", "layer", "initial", "final"])
        w.writerows(self.nodes)
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["scope", "n", "mean_initial", "std_initial", "mean_final", "std_final"])
        rows = [("global", self.global_stats)] + list(self.layer_stats.items())
        for scope, s in rows:
            w.writerow([scope, s.n] + [f"{v:.6f}" for v in (s.mean_initial, s.std_initial, s.mean_final, s.std_final)])
        return buf.getvalue()


def transition_report(g: InfrastructureGraph, solution, solver_info: dict[str, Any] | None = None) -> RiskReport:
    """Compare the graph's initial scores with a solution's final scores, per layer."""
    final = _scores_of(solution)
    initial = g.initial_scores()
    if final.shape != initial.shape:
        raise ValueError(f"expected {initial.size} final scores, got {final.size}")
    K = g.max_score
    if final.size and (final.min() < 1 or final.max() > K):
        raise ValueError(f"final scores outside [1,{K}]")
    layers = np.array(g.layer_of(), dtype=object)
    matrices, layer_stats = [], {}
    for name in g.layers:
        mask = layers == name
        if not mask.any():
            continue
        matrices.append(transition_matrix(name, initial[mask], final[mask], K))
        layer_stats[name] = ScoreStats.of(initial[mask], final[mask])
    info = dict(solver_info or {})
    if isinstance(solution, Solution):
        info.setdefault("solver", solution.solver_name)
        info.setdefault("seed", solution.seed)
        info.setdefault("energy", solution.energy)
        info.setdefault("repairs", solution.repairs)
    nodes = [(int(i), str(l), int(a), int(b)) for i, l, a, b in zip(g.node_ids, layers, initial, final)]
    return RiskReport(K, matrices, ScoreStats.of(initial, final), layer_stats, nodes, info)


# -- recursive minimisation -----------------------------------------------------------


class RecursionFailure(RuntimeError):
    def __init__(self, iteration: int, cause: BaseException):
        super().__init__(f"solver failed at recursion iteration {iteration}: {cause}")
        self.iteration = iteration


@dataclass
class RecursionStep:
    iteration: int
    mean: float
    std: float
    scores: np.ndarray


@dataclass
class RecursionTrace:
    initial: RecursionStep
    iterations: list[RecursionStep]
    classification: str
    fixed_point_iteration: int | None = None
    n_iters: int = 20
    max_score: int = 10

    @property
    def saturated(self) -> bool:
        """True when the last scores sit at the top of the scale everywhere."""
        last = self.iterations[-1].scores if self.iterations else self.initial.scores
        return bool(last.size) and bool((last == self.max_score).all())

    def mean_series(self, pad: bool = True) -> list[float]:
        """Mean risk per iteration, 1..n_iters.

        A fixed point is absorbing (the next problem is identical to the last
        one), so with ``pad`` an early stop is extended with its final value.
        Padding is not applied after an oscillation.
        """
        means = [s.mean for s in self.iterations]
        if pad and self.classification == "stable" and means:
            means += [means[-1]] * (self.n_iters - len(means))
        return means

    def to_dict(self) -> dict[str, Any]:
        step = lambda s: {"iteration": s.iteration, "mean": s.mean, "std": s.std,
                          "scores": [int(v) for v in s.scores]}
        return {
            "schema": RECURSION_SCHEMA,
            "classification": self.classification,
            "fixed_point_iteration": self.fixed_point_iteration,
            "n_iters": self.n_iters,
            "max_score": self.max_score,
            "saturated": self.saturated,
            "initial": step(self.initial),
            "iterations": [step(s) for s in self.iterations],
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RecursionTrace":
        if d.get("schema") != RECURSION_SCHEMA:
            raise ValueError(f"unsupported recursion schema {d.get('schema')!r}")
        step = lambda s: RecursionStep(int(s["iteration"]), float(s["mean"]), float(s["std"]),
                                       np.array(s["scores"], dtype=np.int64))
        return cls(step(d["initial"]), [step(s) for s in d["iterations"]], d["classification"],
                   d["fixed_point_iteration"], int(d["n_iters"]), int(d["max_score"]))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    def series_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["iteration", "mean", "std"])
        w.writerow([0, f"{self.initial.mean:.6f}", f"{self.initial.std:.6f}"])
        stds = [s.std for s in self.iterations]
        means = self.mean_series(pad=True)
        stds += [stds[-1]] * (len(means) - len(stds)) if stds else []
        for t, (m, s) in enumerate(zip(means, stds), start=1):
            w.writerow([t, f"{m:.6f}", f"{s:.6f}"])
        return buf.getvalue()


SolverFn = Callable[[SolverRequest], Solution]


def _resolve_solver(solver: str | SolverFn) -> SolverFn:
    return get_solver(solver) if isinstance(solver, str) else solver


def classify(means: Sequence[float], fixed_point: int | None, cycled: bool) -> str:
    if fixed_point is not None:
        return "stable"
    if cycled:
        return "oscillating"
    m = np.asarray(means, dtype=np.float64)
    if m.size >= 2 and m[-1] > m[0] and (np.diff(m) >= -1e-12).all():
        return "divergent"
    return "max-iters"


def recursive_minimize(g: InfrastructureGraph, solver: str | SolverFn = "tabu", n_iters: int = 20, *,
                       weights: Weights | None = None, h5_frozen: bool = False, seed: int = 0,
                       K: int | None = None, solver_params: dict[str, Any] | None = None,
                       max_iter: int | None = None, time_limit: float | None = None) -> RecursionTrace:
    """Feed each iteration's final scores back in as the next initial scores.

    Every iteration rebuilds the QUBO (edges and flags unchanged) and solves it
    with the same seed. The critical set of the fifth term follows the current
    scores unless ``h5_frozen`` keeps the original one. Stops early at a fixed
    point or when an earlier score vector recurs.
    """
    if n_iters < 1:
        raise ValueError(f"n_iters must be >= 1, got {n_iters}")
    run = _resolve_solver(solver)
    K = K or g.max_score
    frozen = {i for i, s in zip(g.node_ids, g.initial_scores()) if s >= CRITICAL_SCORE} if h5_frozen else None
    prev = g.initial_scores()
    initial = RecursionStep(0, *_stats(prev), prev.copy())
    seen = {prev.tobytes(): 0}
    steps: list[RecursionStep] = []
    fixed_point, cycled = None, False
    for t in range(1, n_iters + 1):
        gt = g.with_scores(prev)
        q = assemble(gt, weights, ScoreEncoding(gt.node_ids, K), h5_critical=frozen)
        try:
            sol = run(SolverRequest(q, seed=seed, max_iter=max_iter, time_limit=time_limit,
                                    params=dict(solver_params or {})))
        except Exception as exc:
            raise RecursionFailure(t, exc) from exc
        cur = _scores_of(sol)
        steps.append(RecursionStep(t, *_stats(cur), cur.copy()))
        if np.array_equal(cur, prev):
            fixed_point = t
            break
        key = cur.tobytes()
        if key in seen:
            cycled = True
            break
        seen[key] = t
        prev = cur
    cls = classify([initial.mean] + [s.mean for s in steps], fixed_point, cycled)
    return RecursionTrace(initial, steps, cls, fixed_point, n_iters, K)


# -- scaling benchmark -------------------------------------------------------------------


@dataclass
class BenchRecord:
    n_nodes: int
    solver: str
    seed: int
    wall_time: float
    mean_final: float
    energy: float
    deviation_pct: float | None = None

    def row(self) -> list[str]:
        dev = "" if self.deviation_pct is None else f"{self.deviation_pct:.6f}"
        return [str(self.n_nodes), self.solver, str(self.seed), f"{self.mean_final:.6f}", dev, repr(self.energy)]


def deviation_pct(value: float, reference: float) -> float:
    return (value - reference) / reference * 100.0


def scaling_bench(sizes: Iterable[int], solvers: Sequence[str] = ("tabu", "hybrid"), seeds: Iterable[int] = (0,), *,
                  reference: str = "tabu", weights: Weights | None = None,
                  solver_params: dict[str, dict[str, Any]] | None = None,
                  time_limits: dict[str, float] | None = None,
                  instance: Callable[[int, int], InfrastructureGraph] | None = None,
                  progress: Callable[[BenchRecord], None] | None = None) -> list[BenchRecord]:
    """Run each solver on a seeded layered instance per (size, seed).

    Deviation is the mean-final-risk difference against ``reference`` on the
    same instance, in percent; it stays None when the reference is not run.
    Records come back sorted by (size, solver, seed).
    """
    make = instance or (lambda n, s: generate_layered(scaled_spec(n, seed=s)))
    params = solver_params or {}
    limits = time_limits or {}
    records: list[BenchRecord] = []
    for n in sorted(set(int(s) for s in sizes)):
        for seed in seeds:
            g = make(n, seed)
            q = assemble(g, weights)
            batch = {}
            for name in solvers:
                sol = get_solver(name)(SolverRequest(q, seed=seed, time_limit=limits.get(name),
                                                     params=dict(params.get(name, {}))))
                rec = BenchRecord(g.n_nodes, name, seed, sol.wall_time, float(np.mean(sol.decoded_scores)),
                                  sol.energy)
                batch[name] = rec
                if progress:
                    progress(rec)
            if reference in batch:
                ref = batch[reference].mean_final
                for rec in batch.values():
                    rec.deviation_pct = 0.0 if rec.solver == reference else deviation_pct(rec.mean_final, ref)
            records.extend(batch.values())
    records.sort(key=lambda r: (r.n_nodes, r.solver, r.seed))
    return records


def bench_csv(records: Sequence[BenchRecord]) -> str:
    """Deterministic columns only; wall times go to :func:`bench_timing_csv`."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(BENCH_COLUMNS)
    w.writerows(r.row() for r in records)
    return buf.getvalue()


def bench_timing_csv(records: Sequence[BenchRecord]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n_nodes", "solver", "seed", "wall_time_s"])
    w.writerows([r.n_nodes, r.solver, r.seed, f"{r.wall_time:.6f}"] for r in records)
    return buf.getvalue()
