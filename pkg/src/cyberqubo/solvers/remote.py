"""HTTP adapter for an external sampler (e.g. an annealing service).

Wire protocol: POST the QUBO text format as the request body; the service
answers ``{"samples": [[0, 1, ...], ...], "energies": [...]}``. Every returned
energy is checked against a local re-evaluation and mismatching samples are
dropped.
"""

from __future__ import annotations

import json
import os
import urllib.error
import urllib.request
from dataclasses import dataclass, field

import numpy as np

from ..qubo import QuboModel, export_qubo

ENV_VAR = "CYBERQUBO_SAMPLER_URL"


class RemoteSamplerError(RuntimeError):
    pass


class SamplerUnavailable(RemoteSamplerError):
    pass


class MalformedResponse(RemoteSamplerError):
    pass


class EnergyMismatch(RemoteSamplerError):
    def __init__(self, discarded: int):
        self.discarded = discarded
        super().__init__(f"all {discarded} returned samples failed energy validation")


@dataclass
class RemoteResult:
    samples: list[np.ndarray]
    energies: list[float]
    discarded: int = 0


def _post(endpoint: str, body: bytes, timeout: float) -> bytes:
    req = urllib.request.Request(endpoint, data=body, method="POST",
                                 headers={"Content-Type": "text/plain; charset=ascii"})
    try:
        with urllib.request.urlopen(req, timeout=timeout) as resp:
            return resp.read()
    except (urllib.error.URLError, OSError, ValueError) as exc:
        raise SamplerUnavailable(f"sampler at {endpoint} unreachable: {exc}") from exc


def remote_sample(q: QuboModel, endpoint: str, timeout: float = 10.0, rtol: float = 1e-9) -> RemoteResult:
    raw = _post(endpoint, export_qubo(q), timeout)
    try:
        doc = json.loads(raw)
        samples = doc["samples"]
        energies = doc["energies"]
    except (ValueError, KeyError, TypeError) as exc:
        raise MalformedResponse(f"bad sampler response: {exc}") from exc
    if not isinstance(samples, list) or not isinstance(energies, list) or len(samples) != len(energies):
        raise MalformedResponse("samples and energies must be lists of equal length")
    if not samples:
        raise MalformedResponse("response carries no samples")
    kept, kept_e, discarded = [], [], 0
    for s, e in zip(samples, energies):
        try:
            x = np.asarray(s, dtype=np.int8)
            e = float(e)
        except (TypeError, ValueError) as exc:
            raise MalformedResponse(f"non-numeric sample: {exc}") from exc
        if x.shape != (q.n_vars,) or np.any((x != 0) & (x != 1)):
            raise MalformedResponse(f"sample is not a {q.n_vars}-bit vector")
        local = q.energy(x)
        if abs(local - e) > rtol * max(1.0, abs(local)):
            discarded += 1
            continue
        kept.append(x)
        kept_e.append(local)
    if not kept:
        raise EnergyMismatch(discarded)
    return RemoteResult(kept, kept_e, discarded)


@dataclass
class RemoteSampler:
    """Stateful client that counts calls, failures and discarded samples."""

    endpoint: str
    timeout: float = 10.0
    stats: dict[str, int] = field(default_factory=lambda: {"calls": 0, "failures": 0, "mismatches": 0})

    @classmethod
    def from_env(cls, timeout: float = 10.0) -> "RemoteSampler | None":
        url = os.environ.get(ENV_VAR)
        return cls(url, timeout) if url else None

    def sample(self, q: QuboModel) -> RemoteResult:
        self.stats["calls"] += 1
        try:
            res = remote_sample(q, self.endpoint, self.timeout)
        except EnergyMismatch as exc:
            self.stats["failures"] += 1
            self.stats["mismatches"] += exc.discarded
            raise
        except RemoteSamplerError:
            self.stats["failures"] += 1
            raise
        self.stats["mismatches"] += res.discarded
        return res
