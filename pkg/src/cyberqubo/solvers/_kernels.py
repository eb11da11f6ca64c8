"""Compiled inner loops shared by the solvers.

All kernels work on the symmetric zero-diagonal coupling matrix in CSR form
(``indptr, indices, data``) plus the linear vector, and keep a per-variable
local field ``h_i = Q_ii + sum_j W_ij x_j`` so a flip costs O(row degree).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def _flip(i, x, field, indptr, indices, data):
    if x[i] == 0:
        x[i] = 1
        sign = 1.0
    else:
        x[i] = 0
        sign = -1.0
    for k in range(indptr[i], indptr[i + 1]):
        field[indices[k]] += sign * data[k]


@njit(cache=True)
def local_fields(indptr, indices, data, linear, x):
    n = linear.size
    field = linear.copy()
    for i in range(n):
        if x[i] != 0:
            for k in range(indptr[i], indptr[i + 1]):
                field[indices[k]] += data[k]
    return field


@njit(cache=True)
def tabu_steps(indptr, indices, data, x, field, tabu_until, state, best_x,
               n_steps, tenure, stall_limit, seed, jitter=0):
    """Advance a single-flip tabu search by up to ``n_steps`` moves.

    ``state`` is ``[iteration, current_energy, best_energy, last_improvement]``
    (float64) and is updated in place together with ``x``, ``field``,
    ``tabu_until`` and ``best_x``. Each flip stays tabu for ``tenure`` plus a
    uniform draw from ``[0, jitter]`` moves, which breaks short cycles.
    Returns True when the stall limit stopped the run.
    """
    np.random.seed(seed)
    n = x.size
    it = int(state[0])
    cur = state[1]
    best = state[2]
    last = int(state[3])
    stalled = False
    for _ in range(n_steps):
        if stall_limit > 0 and it - last >= stall_limit:
            stalled = True
            break
        move = -1
        move_d = np.inf
        ties = 0
        for i in range(n):
            d = field[i] if x[i] == 0 else -field[i]
            if tabu_until[i] > it and not (cur + d < best - 1e-9 * (1.0 + abs(best))):
                continue
            if d < move_d:
                move_d = d
                move = i
                ties = 1
            elif d == move_d:
                ties += 1
                if np.random.randint(ties) == 0:
                    move = i
        it += 1
        if move < 0:
            continue
        _flip(move, x, field, indptr, indices, data)
        cur += move_d
        tabu_until[move] = it + tenure + (np.random.randint(jitter + 1) if jitter > 0 else 0)
        if cur < best - 1e-9 * (1.0 + abs(best)):
            best = cur
            last = it
            best_x[:] = x
    state[0] = it
    state[1] = cur
    state[2] = best
    state[3] = last
    return stalled


@njit(cache=True)
def anneal_run(indptr, indices, data, linear, x, temperatures, sweeps_per_temp, seed):
    """Metropolis single-flip sweeps over a temperature ladder.

    A non-positive temperature accepts only non-increasing moves. Returns the
    best energy change relative to the start and the matching state.
    """
    np.random.seed(seed)
    n = x.size
    field = local_fields(indptr, indices, data, linear, x)
    cur = 0.0
    best = 0.0
    best_x = x.copy()
    for t in range(temperatures.size):
        T = temperatures[t]
        for _ in range(sweeps_per_temp):
            for i in range(n):
                d = field[i] if x[i] == 0 else -field[i]
                if d <= 0.0:
                    accept = True
                elif T > 0.0:
                    accept = np.random.random() < np.exp(-d / T)
                else:
                    accept = False
                if accept:
                    _flip(i, x, field, indptr, indices, data)
                    cur += d
            if cur < best - 1e-12 * (1.0 + abs(best)):
                best = cur
                best_x[:] = x
    return best, best_x


@njit(cache=True)
def gray_code_minimum(indptr, indices, data, linear, n):
    """Exact minimum over all 2^n states by Gray-code enumeration.

    Returns ``(best_energy_without_offset, best_state_bits)``; the first state
    in Gray order wins ties. Energies are accumulated with Kahan summation.
    """
    x = np.zeros(n, dtype=np.int8)
    field = linear.copy()
    e = 0.0
    comp = 0.0
    best = 0.0
    best_code = 0
    total = 1 << n
    for k in range(1, total):
        # index of the lowest set bit of k
        i = 0
        v = k
        while (v & 1) == 0:
            v >>= 1
            i += 1
        d = field[i] if x[i] == 0 else -field[i]
        _flip(i, x, field, indptr, indices, data)
        y = d - comp
        t = e + y
        comp = (t - e) - y
        e = t
        if e < best - 1e-12 * (1.0 + abs(best)):
            best = e
            best_code = k ^ (k >> 1)
    out = np.zeros(n, dtype=np.int8)
    for i in range(n):
        out[i] = (best_code >> i) & 1
    return best, out


@njit(cache=True)
def tabu_swap_steps(indptr, indices, data, intra, K, x, field, level, tabu_until, state, best_x,
                    n_steps, tenure, stall_limit, seed):
    """Tabu search whose moves relocate one node to another level.

    Moving node p from level a to b costs ``h_b - h_a - W_ab`` and keeps the
    one-hot structure intact. Returning p to a is tabu for ``tenure`` moves
    unless it beats the best energy. Same state protocol as ``tabu_steps``.
    """
    np.random.seed(seed)
    n_nodes = level.size
    it = int(state[0])
    cur = state[1]
    best = state[2]
    last = int(state[3])
    stalled = False
    for _ in range(n_steps):
        if stall_limit > 0 and it - last >= stall_limit:
            stalled = True
            break
        mp = -1
        mb = -1
        move_d = np.inf
        ties = 0
        for p in range(n_nodes):
            base = p * K
            a = level[p]
            ha = field[base + a]
            for b in range(K):
                if b == a:
                    continue
                d = field[base + b] - ha - intra[p, a, b]
                if tabu_until[base + b] > it and not (cur + d < best - 1e-9 * (1.0 + abs(best))):
                    continue
                if d < move_d:
                    move_d = d
                    mp = p
                    mb = b
                    ties = 1
                elif d == move_d:
                    ties += 1
                    if np.random.randint(ties) == 0:
                        mp = p
                        mb = b
        it += 1
        if mp < 0:
            continue
        base = mp * K
        a = level[mp]
        _flip(base + a, x, field, indptr, indices, data)
        _flip(base + mb, x, field, indptr, indices, data)
        level[mp] = mb
        cur += move_d
        tabu_until[base + a] = it + tenure
        if cur < best - 1e-9 * (1.0 + abs(best)):
            best = cur
            last = it
            best_x[:] = x
    state[0] = it
    state[1] = cur
    state[2] = best
    state[3] = last
    return stalled
