"""Tabu search with incremental local fields.

Two neighbourhoods are available. ``swap`` (the default whenever the QUBO
carries a one-hot encoding) moves one node to another risk level, so every
visited state is valid. ``flip`` toggles single bits and relies on the
penalty term to steer back to valid states; it is the only option for bare
QUBOs.
"""

from __future__ import annotations

import numpy as np

from ..qubo import QuboModel
from ._kernels import local_fields, tabu_steps, tabu_swap_steps
from .base import Clock, SolverRequest, csr_arrays, finalize, intra_blocks, valid_start

DEFAULT_TENURE = 10
CHUNK = 2048


def default_iterations(n_vars: int) -> int:
    return max(1000, 40 * n_vars)


def default_stall(n_vars: int) -> int:
    return max(200, 4 * n_vars)


def default_move(q: QuboModel) -> str:
    return "swap" if q.encoding is not None else "flip"


def effective_tenure(tenure: int, n_vars: int) -> int:
    # a tenure close to n freezes tiny problems
    return max(1, min(int(tenure), n_vars // 4))


class TabuWalk:
    """Resumable tabu search state; the hybrid solver drives one of these.

    ``jitter`` (flip moves only) randomises each tabu period by up to that many
    extra moves; it defaults to the tenure.
    """

    def __init__(self, q: QuboModel, x0: np.ndarray, tenure: int = DEFAULT_TENURE, seed: int = 0,
                 move: str | None = None, jitter: int | None = None):
        self.q = q
        self.move = move or default_move(q)
        if self.move not in ("swap", "flip"):
            raise ValueError(f"unknown tabu move {self.move!r}")
        if self.move == "swap" and q.encoding is None:
            raise ValueError("swap moves need a one-hot encoding")
        self.indptr, self.indices, self.data, self.linear = csr_arrays(q)
        self.tenure = effective_tenure(tenure, q.n_vars)
        self.jitter = self.tenure if jitter is None else int(jitter)
        self.rng = np.random.default_rng(seed)
        x0 = np.asarray(x0, dtype=np.int8)
        if self.move == "swap":
            self.K = q.encoding.K
            self.intra = intra_blocks(q)
            x0 = valid_start(q, x0)
        self.best_x = x0.copy()
        e0 = q.energy(self.best_x)
        self.state = np.array([0.0, e0, e0, 0.0])
        self.trace: list[tuple[int, float, float]] = []
        self.reset_to(self.best_x)

    @property
    def iterations(self) -> int:
        return int(self.state[0])

    @property
    def best_energy(self) -> float:
        return float(self.state[2])

    def reset_to(self, bits: np.ndarray) -> None:
        """Move the walker to ``bits`` with a cleared tabu list; best-so-far is kept."""
        self.x = np.asarray(bits, dtype=np.int8).copy()
        self.field = local_fields(self.indptr, self.indices, self.data, self.linear, self.x)
        self.tabu_until = np.zeros(self.x.size, dtype=np.int64)
        if self.move == "swap":
            self.level = self.x.reshape(-1, self.K).argmax(axis=1).astype(np.int64)
        e = self.q.energy(self.x)
        self.state[1] = e
        self.state[3] = self.state[0]
        if e < self.state[2]:
            self.state[2] = e
            self.best_x[:] = self.x

    def offer(self, bits: np.ndarray, e: float) -> bool:
        """Record an externally found state if it beats the best so far."""
        if e < self.state[2] - 1e-9 * (1.0 + abs(self.state[2])):
            self.state[2] = e
            self.best_x[:] = bits
            return True
        return False

    def run(self, n_steps: int, stall_limit: int, clock: Clock) -> bool:
        """Run up to ``n_steps`` moves; True if stopped by stall or clock."""
        done = 0
        if not self.trace:
            self.trace.append((self.iterations, self.best_energy, clock.ms()))
        while done < n_steps:
            if clock.expired():
                return True
            step = min(CHUNK, n_steps - done)
            before = self.iterations
            prev_best = self.best_energy
            seed = int(self.rng.integers(2 ** 31))
            if self.move == "swap":
                stalled = tabu_swap_steps(self.indptr, self.indices, self.data, self.intra, self.K, self.x,
                                          self.field, self.level, self.tabu_until, self.state, self.best_x,
                                          step, self.tenure, stall_limit, seed)
            else:
                stalled = tabu_steps(self.indptr, self.indices, self.data, self.x, self.field, self.tabu_until,
                                     self.state, self.best_x, step, self.tenure, stall_limit, seed, self.jitter)
            done += self.iterations - before
            if self.best_energy < prev_best:
                self.trace.append((self.iterations, self.best_energy, clock.ms()))
            if stalled:
                return True
        return False


def solve_tabu(req: SolverRequest):
    q = req.qubo
    p = req.params
    clock = Clock(req.time_limit)
    n_iter = req.max_iter if req.max_iter is not None else int(p.get("iterations", default_iterations(q.n_vars)))
    stall = int(p.get("stall", default_stall(q.n_vars)))
    walk = TabuWalk(q, req.start_bits(), int(p.get("tenure", DEFAULT_TENURE)), req.seed, p.get("move"),
                    p.get("jitter"))
    if n_iter > 0:
        walk.run(n_iter, stall, clock)
    walk.trace.append((walk.iterations, walk.best_energy, clock.ms()))
    return finalize(q, walk.best_x, solver_name="tabu", seed=req.seed, wall_time=clock.elapsed(),
                    iterations=walk.iterations, trace=walk.trace,
                    metadata={"tenure": walk.tenure, "stall_limit": stall, "move": walk.move,
                              **({"jitter": walk.jitter} if walk.move == "flip" else {})})
