"""One-hot encoding of discrete risk levels into binary variables.

Node at canonical position p and level l (1-based) owns variable
``p * K + (l - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class ScoreEncoding:
    node_ids: tuple[int, ...]
    K: int = 10
    penalty: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "node_ids", tuple(int(i) for i in self.node_ids))
        if self.K < 1:
            raise ValueError(f"K must be >= 1, got {self.K}")
        if self.penalty is not None and not self.penalty > 0:
            raise ValueError(f"one-hot penalty must be positive, got {self.penalty}")

    @property
    def n_nodes(self) -> int:
        return len(self.node_ids)

    @property
    def num_vars(self) -> int:
        return self.n_nodes * self.K

    @property
    def levels(self) -> np.ndarray:
        return np.arange(1, self.K + 1, dtype=np.float64)

    def position(self, node_id: int) -> int:
        try:
            return self._positions[node_id]
        except KeyError:
            raise KeyError(f"unknown node id {node_id}") from None

    @property
    def _positions(self) -> dict[int, int]:
        cache = self.__dict__.get("_pos_cache")
        if cache is None:
            cache = {nid: i for i, nid in enumerate(self.node_ids)}
            object.__setattr__(self, "_pos_cache", cache)
        return cache

    def var_index(self, node_id: int, level: int) -> int:
        if not 1 <= level <= self.K:
            raise ValueError(f"level {level} outside [1,{self.K}]")
        return self.position(node_id) * self.K + level - 1

    def var_label(self, var: int) -> tuple[int, int]:
        """Inverse of :meth:`var_index`: ``(node_id, level)``."""
        p, r = divmod(int(var), self.K)
        return self.node_ids[p], r + 1

    def with_penalty(self, penalty: float) -> "ScoreEncoding":
        return ScoreEncoding(self.node_ids, self.K, penalty)


@dataclass(frozen=True)
class DecodeResult:
    scores: np.ndarray | None
    invalid: tuple[tuple[int, int], ...] = ()   # (node_id, number of set bits)

    @property
    def valid(self) -> bool:
        return not self.invalid


def _score_vector(enc: ScoreEncoding, scores) -> np.ndarray:
    if isinstance(scores, Mapping):
        missing = set(enc.node_ids) - set(scores)
        if missing:
            raise ValueError(f"missing scores for nodes {sorted(missing)[:5]}")
        scores = [scores[i] for i in enc.node_ids]
    arr = np.asarray(scores, dtype=np.int64)
    if arr.shape != (enc.n_nodes,):
        raise ValueError(f"expected {enc.n_nodes} scores, got shape {arr.shape}")
    return arr


def encode(enc: ScoreEncoding, scores: Sequence[int] | Mapping[int, int] | np.ndarray) -> np.ndarray:
    """One-hot bit vector for per-node scores (canonical order or id mapping)."""
    arr = _score_vector(enc, scores)
    bad = np.flatnonzero((arr < 1) | (arr > enc.K))
    if bad.size:
        p = int(bad[0])
        raise ValueError(f"score {arr[p]} of node {enc.node_ids[p]} outside [1,{enc.K}]")
    bits = np.zeros(enc.num_vars, dtype=np.int8)
    bits[np.arange(enc.n_nodes) * enc.K + arr - 1] = 1
    return bits


def _blocks(enc: ScoreEncoding, bits) -> np.ndarray:
    arr = np.asarray(bits)
    if arr.shape != (enc.num_vars,):
        raise ValueError(f"assignment length {arr.size} does not match {enc.num_vars} variables")
    return arr.reshape(enc.n_nodes, enc.K) != 0


def decode(enc: ScoreEncoding, bits) -> DecodeResult:
    """Scores if every node has exactly one bit set, else the offending nodes."""
    blocks = _blocks(enc, bits)
    counts = blocks.sum(axis=1)
    bad = np.flatnonzero(counts != 1)
    if bad.size:
        return DecodeResult(None, tuple((enc.node_ids[p], int(counts[p])) for p in bad))
    return DecodeResult(blocks.argmax(axis=1).astype(np.int64) + 1)


def repair(enc: ScoreEncoding, bits, previous: Sequence[int] | np.ndarray | None = None) -> tuple[np.ndarray, int]:
    """Force a valid score per node.

    Nodes with several bits keep the lowest set level; empty nodes fall back
    to ``previous`` (level 1 when absent). Returns ``(scores, n_repaired)``.
    """
    blocks = _blocks(enc, bits)
    counts = blocks.sum(axis=1)
    scores = blocks.argmax(axis=1).astype(np.int64) + 1
    empty = counts == 0
    if empty.any():
        prev = np.ones(enc.n_nodes, dtype=np.int64) if previous is None else np.asarray(previous, dtype=np.int64)
        scores[empty] = prev[empty]
    return scores, int(np.count_nonzero(counts != 1))


def onehot_penalty_terms(enc: ScoreEncoding, penalty: float | None = None):
    """``P * (sum_l x_{i,l} - 1)^2`` per node, expanded on binary variables.

    Returns ``(linear, quadratic, offset)`` where ``quadratic`` is a strictly
    upper-triangular COO matrix.
    """
    P = enc.penalty if penalty is None else penalty
    if P is None or not P > 0:
        raise ValueError(f"one-hot penalty must be positive, got {P}")
    K, n = enc.K, enc.n_nodes
    linear = np.full(enc.num_vars, -float(P))
    ku, lu = np.triu_indices(K, k=1)
    base = (np.arange(n) * K)[:, None]
    rows = (base + ku).ravel()
    cols = (base + lu).ravel()
    quad = sp.coo_matrix((np.full(rows.size, 2.0 * P), (rows, cols)), shape=(enc.num_vars, enc.num_vars))
    return linear, quad, float(P) * n
