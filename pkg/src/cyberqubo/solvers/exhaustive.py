from __future__ import annotations

import numpy as np

from ..qubo import QuboModel
from ._kernels import gray_code_minimum
from .base import Clock, SolverError, SolverRequest, csr_arrays, finalize

EXHAUSTIVE_CAP = 24


def exact_minimum(q: QuboModel, cap: int = EXHAUSTIVE_CAP) -> tuple[float, np.ndarray]:
    """Global minimum energy and its bit vector over all 2^n states."""
    if q.n_vars > cap:
        raise SolverError(f"exhaustive search refused: {q.n_vars} variables exceeds cap of {cap}")
    if q.n_vars == 0:
        return q.offset, np.zeros(0, dtype=np.int8)
    indptr, indices, data, linear = csr_arrays(q)
    _, bits = gray_code_minimum(indptr, indices, data, linear, q.n_vars)
    return q.energy(bits), bits


def solve_exhaustive(req: SolverRequest):
    cap = int(req.params.get("cap", EXHAUSTIVE_CAP))
    clock = Clock()
    e, bits = exact_minimum(req.qubo, cap)
    return finalize(req.qubo, bits, solver_name="exhaustive", seed=req.seed, wall_time=clock.elapsed(),
                    iterations=1 << req.qubo.n_vars, trace=[(1 << req.qubo.n_vars, e, clock.ms())])
