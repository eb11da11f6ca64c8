"""Time-budgeted decomposition solver.

A tabu walk works on the full problem. Between walk segments the solver cuts
out a small subproblem around the most promising region, clamps everything
else to the incumbent, solves the fragment exactly (or hands it to a remote
sampler) and keeps the result when it lowers the energy. The loop runs until
the wall-clock budget is spent.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp

from ..qubo import QuboModel
from .base import BUDGET_PRESETS, Clock, SolverRequest, finalize, intra_blocks
from .exhaustive import EXHAUSTIVE_CAP, exact_minimum
from .remote import RemoteSampler, RemoteSamplerError
from .tabu import DEFAULT_TENURE, TabuWalk, default_iterations, default_stall

DEFAULT_SUBPROBLEM = 20


def resolve_budget(budget) -> float | None:
    """Seconds for a numeric budget or preset name; None means the ``min`` preset."""
    if budget is None:
        return None
    if isinstance(budget, str):
        if budget in BUDGET_PRESETS:
            return BUDGET_PRESETS[budget]
        if budget.endswith("s"):
            budget = budget[:-1]
        budget = float(budget)
    budget = float(budget)
    if not budget > 0:
        raise ValueError(f"time budget must be positive, got {budget}")
    return budget


class _Selector:
    """Chooses subproblem variables at the incumbent.

    With a one-hot encoding, nodes are ranked by the best energy change of
    moving that node alone to another level; the top unused node is grown
    with its most strongly coupled neighbours, whole level blocks at a time.
    Without an encoding, raw variables are ranked by |single-flip delta|.
    """

    def __init__(self, q: QuboModel, size: int, memory: int):
        self.q = q
        self.size = size
        self.recent: deque[int] = deque(maxlen=max(memory, 1))
        enc = q.encoding
        self.K = enc.K if enc is not None else None
        if self.K is not None and self.K <= size:
            n_nodes = enc.n_nodes
            self.intra = intra_blocks(q)
            agg = sp.csr_matrix((np.ones(q.n_vars), (np.arange(q.n_vars), np.arange(q.n_vars) // self.K)),
                                shape=(q.n_vars, n_nodes))
            self.coupling = (agg.T @ abs(q.symmetric) @ agg).tocsr()
            self.coupling.setdiag(0)
            self.coupling.eliminate_zeros()
        else:
            self.K = None

    def _node_gains(self, x, field):
        K = self.K
        xb = x.reshape(-1, K)
        hb = field.reshape(-1, K)
        on = xb.argmax(axis=1)
        rows = np.arange(xb.shape[0])
        h_on = hb[rows, on]
        w_on = self.intra[rows, on, :]
        gain = hb - h_on[:, None] - w_on
        gain[rows, on] = np.inf
        gain[xb.sum(axis=1) != 1] = -np.inf   # invalid blocks are top priority
        return gain.min(axis=1)

    def select(self, x, field) -> np.ndarray:
        if self.K is None:
            delta = np.abs(np.where(x == 0, field, -field))
            order = np.argsort(-delta, kind="stable")
            fresh = [int(i) for i in order if i not in self.recent]
            chosen = (fresh + [int(i) for i in order if i in self.recent])[: self.size]
            self.recent.extend(chosen)
            return np.array(sorted(chosen), dtype=np.int64)
        gains = self._node_gains(x, field)
        order = np.argsort(gains, kind="stable")
        seed = next((int(p) for p in order if p not in self.recent), int(order[0]))
        nodes = [seed]
        row = self.coupling.getrow(seed)
        nbrs = row.indices[np.argsort(-row.data, kind="stable")]
        per_sub = max(1, self.size // self.K)
        for p in nbrs:
            if len(nodes) >= per_sub:
                break
            nodes.append(int(p))
        self.recent.append(seed)
        return np.concatenate([np.arange(p * self.K, (p + 1) * self.K) for p in sorted(nodes)])


def _solve_fragment(sub: QuboModel, sampler: RemoteSampler | None, meta: dict):
    if sampler is not None:
        try:
            res = sampler.sample(sub)
            meta["remote_calls"] += 1
            k = int(np.argmin(res.energies))
            return res.samples[k], res.energies[k]
        except RemoteSamplerError as exc:
            meta["fallbacks"] += 1
            meta["last_remote_error"] = type(exc).__name__
    e, y = exact_minimum(sub, EXHAUSTIVE_CAP)
    return y, e


def solve_hybrid(req: SolverRequest):
    q = req.qubo
    p = req.params
    limit = req.time_limit if req.time_limit is not None else resolve_budget(p.get("budget", "min"))
    max_rounds = p.get("max_rounds")
    if limit is None and max_rounds is None:
        max_rounds = 1
    size = int(p.get("subproblem_size", DEFAULT_SUBPROBLEM))
    if not 1 <= size <= EXHAUSTIVE_CAP:
        raise ValueError(f"subproblem size must be in [1,{EXHAUSTIVE_CAP}], got {size}")
    sampler = p.get("sampler")
    clock = Clock(limit)

    walk = TabuWalk(q, req.start_bits(), int(p.get("tenure", DEFAULT_TENURE)), req.seed, p.get("move"),
                    p.get("jitter"))
    first_iters = req.max_iter if req.max_iter is not None else int(p.get("iterations", default_iterations(q.n_vars)))
    stall = int(p.get("stall", default_stall(q.n_vars)))
    segment = int(p.get("segment_iterations", max(200, q.n_vars)))
    selector = _Selector(q, size, int(p.get("memory", max(1, q.n_vars // max(size, 1) // 2))))
    meta = {"rounds": 0, "improvements": 0, "remote_calls": 0, "fallbacks": 0,
            "budget_s": limit, "subproblem_size": size}

    walk.run(first_iters, stall, clock)
    while not clock.expired() and q.n_vars > 0:
        if max_rounds is not None and meta["rounds"] >= int(max_rounds):
            break
        x_inc = walk.best_x.copy()
        field = q.local_fields(x_inc)
        chosen = selector.select(x_inc, field)
        sub = q.subproblem(chosen, x_inc)
        y, e = _solve_fragment(sub, sampler, meta)
        meta["rounds"] += 1
        candidate = x_inc.copy()
        candidate[chosen] = y
        if walk.offer(candidate, q.energy(candidate)):
            meta["improvements"] += 1
            walk.trace.append((walk.iterations, walk.best_energy, clock.ms()))
            walk.reset_to(walk.best_x)
        else:
            walk.state[3] = walk.state[0]
        if max_rounds is not None and meta["rounds"] >= int(max_rounds):
            break
        walk.run(segment, segment, clock)
    if sampler is not None:
        meta["remote_stats"] = dict(sampler.stats)
    walk.trace.append((walk.iterations, walk.best_energy, clock.ms()))
    return finalize(q, walk.best_x, solver_name="hybrid", seed=req.seed, wall_time=clock.elapsed(),
                    iterations=walk.iterations, trace=walk.trace, metadata=meta)
