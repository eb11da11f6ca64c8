from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ..encoding import decode, encode, repair
from ..qubo import QuboModel

# Hybrid time-budget presets, seconds. "min" is resolved by the solver.
BUDGET_PRESETS = {"min": None, "30s": 30.0, "180s": 180.0}


class SolverError(RuntimeError):
    pass


@dataclass
class SolverRequest:
    qubo: QuboModel
    seed: int = 0
    max_iter: int | None = None
    time_limit: float | None = None
    params: dict[str, Any] = field(default_factory=dict)
    initial: np.ndarray | None = None

    def __post_init__(self):
        if self.max_iter is not None and self.max_iter < 0:
            raise ValueError(f"max_iter must be >= 0, got {self.max_iter}")
        if self.time_limit is not None and not self.time_limit > 0:
            raise ValueError(f"time_limit must be positive, got {self.time_limit}")

    def start_bits(self) -> np.ndarray:
        q = self.qubo
        if self.initial is not None:
            x = np.asarray(self.initial, dtype=np.int8).copy()
            if x.shape != (q.n_vars,):
                raise ValueError("initial assignment has the wrong length")
            return x
        if q.encoding is not None and q.initial_scores is not None:
            return encode(q.encoding, q.initial_scores)
        return np.zeros(q.n_vars, dtype=np.int8)


@dataclass
class Solution:
    assignment: np.ndarray
    energy: float
    decoded_scores: np.ndarray | None
    repairs: int
    wall_time: float
    iterations: int
    solver_name: str
    seed: int
    metadata: dict[str, Any] = field(default_factory=dict)
    trace: list[tuple[int, float, float]] = field(default_factory=list)

    def to_dict(self, include_timing: bool = False) -> dict[str, Any]:
        d = {
            "solver": self.solver_name,
            "seed": self.seed,
            "energy": self.energy,
            "iterations": self.iterations,
            "repairs": self.repairs,
            "decoded_scores": None if self.decoded_scores is None else [int(s) for s in self.decoded_scores],
            "assignment": "".join(str(int(b)) for b in self.assignment),
            "metadata": self.metadata,
        }
        if include_timing:
            d["wall_time"] = self.wall_time
        return d

    def trace_csv(self) -> str:
        return trace_to_csv(self.trace)


def trace_to_csv(trace) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "best_energy", "wall_ms"])
    for it, e, ms in trace:
        w.writerow([int(it), repr(float(e)), f"{ms:.3f}"])
    return buf.getvalue()


class Clock:
    def __init__(self, limit: float | None = None):
        self.t0 = time.perf_counter()
        self.limit = limit

    def elapsed(self) -> float:
        return time.perf_counter() - self.t0

    def ms(self) -> float:
        return 1000.0 * self.elapsed()

    def remaining(self) -> float:
        return np.inf if self.limit is None else self.limit - self.elapsed()

    def expired(self) -> bool:
        return self.limit is not None and self.elapsed() >= self.limit


def finalize(q: QuboModel, bits, *, solver_name: str, seed: int, wall_time: float, iterations: int,
             metadata: dict | None = None, trace=None) -> Solution:
    """Decode (repairing when needed) and re-evaluate the energy exactly."""
    x = np.asarray(bits, dtype=np.int8).copy()
    scores = None
    repairs = 0
    if q.encoding is not None:
        res = decode(q.encoding, x)
        if res.valid:
            scores = res.scores
        else:
            scores, repairs = repair(q.encoding, x, q.initial_scores)
            x = encode(q.encoding, scores)
    return Solution(
        assignment=x,
        energy=q.energy(x),
        decoded_scores=scores,
        repairs=repairs,
        wall_time=wall_time,
        iterations=iterations,
        solver_name=solver_name,
        seed=seed,
        metadata=metadata or {},
        trace=list(trace or []),
    )


def csr_arrays(q: QuboModel):
    W = q.symmetric
    return (W.indptr.astype(np.int64), W.indices.astype(np.int64), W.data.astype(np.float64),
            q.linear.astype(np.float64))


def intra_blocks(q: QuboModel) -> np.ndarray:
    """``W`` restricted to each node's own level block, shape (n_nodes, K, K)."""
    K = q.encoding.K
    W = q.symmetric.tocoo()
    same = (W.row // K) == (W.col // K)
    out = np.zeros((q.encoding.n_nodes, K, K))
    out[W.row[same] // K, W.row[same] % K, W.col[same] % K] = W.data[same]
    return out


def valid_start(q: QuboModel, bits: np.ndarray) -> np.ndarray:
    """``bits`` if one-hot valid, otherwise its repaired encoding."""
    if q.encoding is None or decode(q.encoding, bits).valid:
        return bits
    scores, _ = repair(q.encoding, bits, q.initial_scores)
    return encode(q.encoding, scores)
