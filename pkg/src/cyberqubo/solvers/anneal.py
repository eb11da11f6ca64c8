"""Multi-restart simulated annealing, a classical stand-in for an annealing sampler."""

from __future__ import annotations

import numpy as np

from ._kernels import anneal_run
from .base import Clock, SolverRequest, csr_arrays, finalize

DEFAULT_RESTARTS = 20
DEFAULT_SWEEPS = 1000
DEFAULT_T1 = 1e-3


def temperature_schedule(t0: float, t1: float, steps: int) -> np.ndarray:
    """Geometric ladder from t0 to t1; all zeros when either end is non-positive."""
    if steps <= 0:
        return np.zeros(0)
    if t0 <= 0 or t1 <= 0:
        return np.zeros(steps) if t0 <= 0 and t1 <= 0 else np.linspace(max(t0, 0), max(t1, 0), steps)
    return np.geomspace(t0, t1, steps)


def solve_anneal(req: SolverRequest):
    q = req.qubo
    p = req.params
    clock = Clock(req.time_limit)
    sweeps = req.max_iter if req.max_iter is not None else int(p.get("sweeps", DEFAULT_SWEEPS))
    restarts = int(p.get("restarts", DEFAULT_RESTARTS))
    t0 = float(p.get("t0", q.max_abs_coefficient()))
    t1 = float(p.get("t1", DEFAULT_T1))
    temps = temperature_schedule(t0, t1, sweeps)
    random_start = bool(p.get("random_start", True))

    indptr, indices, data, linear = csr_arrays(q)
    children = np.random.SeedSequence(req.seed).spawn(max(restarts, 1))
    best_x = req.start_bits()
    best_e = q.energy(best_x)
    best_shot = -1
    trace = [(0, best_e, clock.ms())]
    done = 0
    for shot, child in enumerate(children[:restarts]):
        if clock.expired():
            break
        rng = np.random.default_rng(child)
        x = rng.integers(0, 2, q.n_vars).astype(np.int8) if random_start else req.start_bits()
        _, xb = anneal_run(indptr, indices, data, linear, x, temps, 1, int(rng.integers(2 ** 31)))
        e = q.energy(xb)
        done += 1
        # strict improvement keeps the lowest restart index on ties
        if e < best_e - 1e-9 * (1.0 + abs(best_e)):
            best_e, best_x, best_shot = e, xb.copy(), shot
            trace.append(((shot + 1) * sweeps, best_e, clock.ms()))
    trace.append((done * sweeps, best_e, clock.ms()))
    return finalize(q, best_x, solver_name="anneal", seed=req.seed, wall_time=clock.elapsed(),
                    iterations=done * sweeps, trace=trace,
                    metadata={"restarts": done, "t0": t0, "t1": t1, "best_restart": best_shot})
