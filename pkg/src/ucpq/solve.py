"""Desk-scale QUBO minimisation: exhaustive Gray-code search and annealing."""
from __future__ import annotations

import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .instance import UcpInstance
from .qubo import QuboMatrix, qubo_energy, raw_energy
from .reference import Schedule, Violation, check_feasible, start_flag_violations, true_cost
from .tailored import CompiledQubo, decode

__all__ = [
    "SolveResult",
    "AnnealParams",
    "SolutionReport",
    "SizeGuardError",
    "brute_force",
    "simulated_annealing",
    "solve_and_report",
    "bitstring",
    "worker_count",
    "ACCEPTANCE_ANNEAL",
]

EXHAUSTIVE_LIMIT = 30
TIE_CAP = 1024
REL_TOL = 1e-9


class SizeGuardError(ValueError):
    pass


def worker_count() -> int:
    """Thread cap from UCPQ_THREADS (0 or unset = all cores)."""
    try:
        n = int(os.environ.get("UCPQ_THREADS", "0"))
    except ValueError:
        n = 0
    return n if n > 0 else (os.cpu_count() or 1)


def bitstring(x) -> str:
    return "".join(str(int(b)) for b in x)


def _tol(e: float) -> float:
    return REL_TOL * max(1.0, abs(e))


@dataclass
class SolveResult:
    best_energy: float
    best_raw: float
    minimizers: list[tuple[int, ...]]
    evaluations: int
    solver: str
    seed: Optional[int] = None
    overflow: bool = False
    restart_energies: Optional[tuple[float, ...]] = None
    wall_time: float = field(default=0.0, compare=False)

    def hits(self, target: float) -> int:
        """Number of restarts whose best energy equals ``target``."""
        return sum(abs(e - target) <= _tol(target) for e in self.restart_energies or ())

    def to_dict(self) -> dict:
        d = asdict(self)
        d["minimizers"] = [bitstring(x) for x in self.minimizers]
        return d


def _exact_minimizers(q: QuboMatrix, states) -> tuple[float, list[tuple[int, ...]]]:
    scored = [(raw_energy(q, x), tuple(x)) for x in set(map(tuple, states))]
    best = min(e for e, _ in scored)
    keep = sorted(x for e, x in scored if abs(e - best) <= _tol(best))
    return best, keep


def _mask_bits(mask: int, n: int) -> tuple[int, ...]:
    return tuple((mask >> b) & 1 for b in range(n))


def brute_force(c: CompiledQubo | QuboMatrix) -> SolveResult:
    """Global minimum over all 2**n states.

    States are visited in Gray-code order with an O(degree) energy update
    per flip. The range is cut into a fixed number of chunks (independent
    of thread count) which run in parallel; ties are listed in ascending
    lexicographic order, at most 1024 of them.
    """
    q = c.matrix if isinstance(c, CompiledQubo) else c
    n = q.n
    if n > EXHAUSTIVE_LIMIT:
        raise SizeGuardError(f"exhaustive search limited to {EXHAUSTIVE_LIMIT} variables, got {n}")
    t0 = time.perf_counter()
    if n == 0:
        return SolveResult(q.offset, 0.0, [()], 1, "exhaustive", wall_time=0.0)
    diag, indptr, indices, weights = q.adjacency()
    total = 1 << n
    chunk_bits = min(n, 6) if n > 16 else 0
    size = total >> chunk_bits
    bounds = [(k * size, (k + 1) * size) for k in range(1 << chunk_bits)]

    def run(b):
        return _kernels.gray_search(diag, indptr, indices, weights, b[0], b[1], TIE_CAP, REL_TOL)

    if len(bounds) > 1 and worker_count() > 1:
        with ThreadPoolExecutor(worker_count()) as pool:
            parts = list(pool.map(run, bounds))
    else:
        parts = [run(b) for b in bounds]
    best = min(p[0] for p in parts)
    states = []
    overflow = False
    for pbest, ties, n_ties, over in parts:
        if pbest <= best + _tol(best):
            states += [_mask_bits(int(m), n) for m in ties[:n_ties]]
            overflow |= bool(over)
    raw, mins = _exact_minimizers(q, states)
    if len(mins) > TIE_CAP:
        mins, overflow = mins[:TIE_CAP], True
    return SolveResult(
        best_energy=raw + q.offset,
        best_raw=raw,
        minimizers=mins,
        evaluations=total,
        solver="exhaustive",
        overflow=overflow,
        wall_time=time.perf_counter() - t0,
    )


@dataclass(frozen=True)
class AnnealParams:
    restarts: int = 50
    sweeps_per_restart: int = 1000
    temp_initial: float = 1.0
    temp_final: float = 0.01
    seed: int = 0
    schedule: str = "geometric"
    exchange_moves: bool = True

    def __post_init__(self):
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.sweeps_per_restart < 1:
            raise ValueError("sweeps_per_restart must be >= 1")
        if not 0 < self.temp_final < self.temp_initial:
            raise ValueError("need 0 < temp_final < temp_initial")
        if self.schedule != "geometric":
            raise ValueError(f"unsupported schedule {self.schedule!r}")

    @classmethod
    def for_matrix(cls, q: QuboMatrix, **overrides) -> "AnnealParams":
        """Temperatures bracketing the coefficient scale of ``q``."""
        mags = [abs(v) for v in q.entries.values()] or [1.0]
        kw = dict(temp_initial=10 * max(mags), temp_final=1e-2 * min(mags))
        kw.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kw)

    def temperatures(self) -> np.ndarray:
        if self.sweeps_per_restart == 1:
            return np.array([self.temp_initial])
        return np.geomspace(self.temp_initial, self.temp_final, self.sweeps_per_restart)


ACCEPTANCE_ANNEAL = AnnealParams(restarts=100, sweeps_per_restart=500,
                                 temp_initial=2e5, temp_final=0.1, seed=0)


def restart_stream(seed: int, restart: int) -> np.random.Generator:
    """Counter-based stream keyed by (seed, restart): order-independent."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(restart,))))


def exchange_pairs(q: QuboMatrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Positively coupled pairs, in key order.

    A positive coupling penalises both bits being set, which is how
    one-of-several constraints appear; flipping such a pair together when
    the bits differ moves between states that satisfy it without crossing
    the penalty.
    """
    pairs = [(i, j, v) for (i, j), v in sorted(q.entries.items()) if i != j and v > 0]
    return (
        np.array([p[0] for p in pairs], dtype=np.int64),
        np.array([p[1] for p in pairs], dtype=np.int64),
        np.array([p[2] for p in pairs], dtype=np.float64),
    )


def simulated_annealing(c: CompiledQubo | QuboMatrix, p: AnnealParams) -> SolveResult:
    """Restarted annealing with a geometric temperature schedule.

    Each sweep proposes single-bit flips in index order followed by pair
    exchanges along positive couplings (see :func:`exchange_pairs`;
    ``exchange_moves=False`` leaves plain single-flip Metropolis).
    Restart ``r`` draws from its own stream keyed by ``(seed, r)``, so the
    result does not depend on thread count or restart order.
    """
    q = c.matrix if isinstance(c, CompiledQubo) else c
    n = q.n
    t0 = time.perf_counter()
    diag, indptr, indices, weights = q.adjacency()
    if p.exchange_moves:
        pi, pj, pw = exchange_pairs(q)
    else:
        pi = pj = np.zeros(0, dtype=np.int64)
        pw = np.zeros(0)
    temps = p.temperatures()

    def run(r: int):
        rng = restart_stream(p.seed, r)
        x0 = rng.integers(0, 2, n, dtype=np.int8)
        u = rng.random((p.sweeps_per_restart, n))
        u2 = rng.random((p.sweeps_per_restart, len(pi)))
        bx, _ = _kernels.anneal(diag, indptr, indices, weights, pi, pj, pw, x0, u, u2, temps)
        return tuple(int(b) for b in bx)

    restarts = range(p.restarts)
    if n and worker_count() > 1 and p.restarts > 1:
        with ThreadPoolExecutor(worker_count()) as pool:
            states = list(pool.map(run, restarts))
    else:
        states = [run(r) for r in restarts]
    energies = tuple(raw_energy(q, x) for x in states)
    raw, mins = _exact_minimizers(q, states)
    return SolveResult(
        best_energy=raw + q.offset,
        best_raw=raw,
        minimizers=mins,
        evaluations=p.restarts * p.sweeps_per_restart * n,
        solver="anneal",
        seed=p.seed,
        restart_energies=tuple(e + q.offset for e in energies),
        wall_time=time.perf_counter() - t0,
    )


@dataclass
class SolutionReport:
    result: SolveResult
    decoded: Schedule
    violations: list[Violation]
    objective: float
    penalty_part: float

    @property
    def feasible(self) -> bool:
        return not self.violations

    @property
    def true_cost(self) -> Optional[float]:
        return self.objective if self.feasible else None

    def to_dict(self) -> dict:
        return {
            "result": self.result.to_dict(),
            "bitstring": bitstring(self.result.minimizers[0]),
            "decoded": self.decoded.to_dict(),
            "feasible": self.feasible,
            "violations": [v.to_dict() for v in self.violations],
            "true_cost": self.true_cost,
            "penalty_part": self.penalty_part,
        }


def solve_and_report(
    c: CompiledQubo,
    inst: UcpInstance,
    solver: str = "exhaustive",
    params: Optional[AnnealParams] = None,
) -> SolutionReport:
    """Solve, decode the best state and check it against the MILP semantics.

    Violations include start flags set without a rising edge, so an empty
    list coincides with a zero penalty part.
    """
    if solver == "exhaustive":
        res = brute_force(c)
    elif solver == "anneal":
        res = simulated_annealing(c, params or AnnealParams.for_matrix(c.matrix))
    else:
        raise ValueError(f"unknown solver {solver!r}")
    x = res.minimizers[0]
    sched = decode(x, c.layout, inst)
    viol = check_feasible(inst, sched) + start_flag_violations(inst, sched)
    objective = true_cost(inst, sched)
    return SolutionReport(res, sched, viol, objective, qubo_energy(c.matrix, x) - objective)
