from .anneal import solve_anneal
from .base import BUDGET_PRESETS, Solution, SolverError, SolverRequest, finalize, trace_to_csv
from .exhaustive import EXHAUSTIVE_CAP, exact_minimum, solve_exhaustive
from .hybrid import resolve_budget, solve_hybrid
from .remote import (ENV_VAR, EnergyMismatch, MalformedResponse, RemoteResult, RemoteSampler,
                     RemoteSamplerError, SamplerUnavailable, remote_sample)
from .tabu import TabuWalk, solve_tabu

SOLVERS = {
    "exhaustive": solve_exhaustive,
    "tabu": solve_tabu,
    "anneal": solve_anneal,
    "hybrid": solve_hybrid,
}


def get_solver(name: str):
    try:
        return SOLVERS[name]
    except KeyError:
        raise KeyError(f"unknown solver {name!r}; choose from {sorted(SOLVERS)}") from None


def solve(name: str, req: SolverRequest) -> Solution:
    return get_solver(name)(req)
