"""Ground truth under MILP semantics.

Feasibility checking, true cost, per-step dispatch and exhaustive search
over on/off patterns. Nothing here touches a QUBO, so it can serve as an
independent oracle for the compilers.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from .instance import UcpInstance, UnitSpec, step_count

__all__ = [
    "Schedule",
    "Violation",
    "Dispatch",
    "OptimalResult",
    "check_feasible",
    "start_flag_violations",
    "rising_edges",
    "true_cost",
    "dispatch_cost",
    "enumerate_optimal",
    "schedule_from_on",
]

KINDS = ("demand", "min_gen", "max_gen", "start_logic", "min_up", "min_down", "gen_coupling")
ENUMERATION_LIMIT = 24


@dataclass(frozen=True)
class Schedule:
    """T x I trajectories, indexed ``[t][i]``."""

    on: tuple[tuple[int, ...], ...]
    start: tuple[tuple[int, ...], ...]
    gen: tuple[tuple[float, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "on", tuple(tuple(int(v) for v in r) for r in self.on))
        object.__setattr__(self, "start", tuple(tuple(int(v) for v in r) for r in self.start))
        object.__setattr__(self, "gen", tuple(tuple(float(v) for v in r) for r in self.gen))

    @property
    def time_steps(self) -> int:
        return len(self.on)

    def to_dict(self) -> dict:
        return {"on": [list(r) for r in self.on], "start": [list(r) for r in self.start],
                "gen": [list(r) for r in self.gen]}

    def table(self, inst: UcpInstance) -> str:
        head = "t  " + "  ".join(f"{u.name:>14}" for u in inst.units)
        lines = [head]
        for t in range(self.time_steps):
            cells = []
            for i in range(len(inst.units)):
                mark = "*" if self.start[t][i] else " "
                state = "on " if self.on[t][i] else "off"
                cells.append(f"{state}{mark} {self.gen[t][i]:>9g}")
            lines.append(f"{t:<2} " + "  ".join(f"{c:>14}" for c in cells))
        return "\n".join(lines)


@dataclass(frozen=True)
class Violation:
    kind: str
    t: int
    i: Optional[int]
    magnitude: float
    detail: str = ""

    def __str__(self) -> str:
        unit = "" if self.i is None else f" unit={self.i}"
        return f"t={self.t}{unit} {self.kind}: {self.detail}"

    def to_dict(self) -> dict:
        return {"kind": self.kind, "t": self.t, "i": self.i,
                "magnitude": self.magnitude, "detail": self.detail}


def _check_size(inst: UcpInstance, rows: Sequence[Sequence], what: str) -> None:
    if len(rows) != inst.time_steps or any(len(r) != inst.n_units for r in rows):
        raise ValueError(
            f"{what} must be {inst.time_steps} x {inst.n_units}"
        )


def _demand_tol(rd: float) -> float:
    return 1e-9 * max(1.0, abs(rd))


def _prev_on(inst: UcpInstance, on, t: int, i: int) -> int:
    return on[t - 1][i] if t > 0 else int(inst.units[i].initial_on)


def rising_edges(inst: UcpInstance, on) -> tuple[tuple[int, ...], ...]:
    """start[t][i] = on[t][i] and not on[t-1][i] (pre-horizon from initial_on)."""
    return tuple(
        tuple(int(on[t][i] and not _prev_on(inst, on, t, i)) for i in range(inst.n_units))
        for t in range(inst.time_steps)
    )


def _on_grid(unit: UnitSpec, g: float) -> bool:
    m = (g - unit.min_gen) / unit.step_size
    k = round(m)
    return abs(m - k) <= 1e-9 * max(1.0, abs(m)) and 0 <= k <= step_count(unit)


def check_feasible(inst: UcpInstance, s: Schedule) -> list[Violation]:
    """All MILP constraint violations of ``s``; empty means feasible.

    Minimum up/down times are checked on maximal runs and gaps. A run or gap
    cut off by the end of the horizon is never too short, and a run carried
    over from ``initial_on`` has no start inside the horizon so it is not
    checked.
    """
    for rows, what in ((s.on, "on"), (s.start, "start"), (s.gen, "gen")):
        _check_size(inst, rows, what)
    T, I = inst.time_steps, inst.n_units
    out: list[Violation] = []
    for t in range(T):
        total = sum(s.gen[t])
        rd = inst.residual_demand[t]
        if abs(total - rd) > _demand_tol(rd):
            out.append(Violation("demand", t, None, abs(total - rd),
                                 f"generation {total:g} != demand {rd:g}"))
        for i, u in enumerate(inst.units):
            on, g = s.on[t][i], s.gen[t][i]
            tol = 1e-9 * max(1.0, u.max_gen)
            if u.discrete and not on and g > tol:
                out.append(Violation("gen_coupling", t, i, g,
                                     f"unit off but generating {g:g}"))
                continue
            if g < on * u.min_gen - tol:
                out.append(Violation("min_gen", t, i, on * u.min_gen - g,
                                     f"gen {g:g} < {on * u.min_gen:g}"))
            if g > on * u.max_gen + tol:
                out.append(Violation("max_gen", t, i, g - on * u.max_gen,
                                     f"gen {g:g} > {on * u.max_gen:g}"))
            if u.discrete and on and not _on_grid(u, g):
                out.append(Violation("gen_coupling", t, i, 1.0,
                                     f"gen {g:g} off the step grid"))
            rise = on - _prev_on(inst, s.on, t, i)
            if s.start[t][i] < rise:
                out.append(Violation("start_logic", t, i, rise - s.start[t][i],
                                     "unit starts without start flag"))
    for i, u in enumerate(inst.units):
        col = [s.on[t][i] for t in range(T)]
        for kind, state, need in (("min_up", 1, u.min_up), ("min_down", 0, u.min_down)):
            t = 0
            while t < T:
                if col[t] != state:
                    t += 1
                    continue
                begin = t
                while t < T and col[t] == state:
                    t += 1
                length = t - begin
                before = col[begin - 1] if begin > 0 else int(u.initial_on)
                # only runs/gaps that begin with a switch inside the horizon
                switched = before != state
                if switched and t < T and length < need:
                    label = "run" if state else "gap"
                    out.append(Violation(kind, begin, i, need - length,
                                         f"{label} length {length} < {need}"))
    return out


def start_flag_violations(inst: UcpInstance, s: Schedule) -> list[Violation]:
    """Start flags set where no rising edge occurs (allowed by the MILP, never optimal)."""
    edges = rising_edges(inst, s.on)
    return [
        Violation("start_logic", t, i, 1.0, "start flag without rising edge")
        for t in range(inst.time_steps)
        for i in range(inst.n_units)
        if s.start[t][i] > edges[t][i]
    ]


def true_cost(inst: UcpInstance, s: Schedule) -> float:
    _check_size(inst, s.gen, "gen")
    _check_size(inst, s.start, "start")
    return sum(
        u.var_cost * s.gen[t][i] + u.start_cost * s.start[t][i]
        for t in range(inst.time_steps)
        for i, u in enumerate(inst.units)
    )


@dataclass(frozen=True)
class Dispatch:
    """Cheapest generation for a fixed on/off pattern.

    ``infeasible_at`` is the first time step whose demand cannot be met;
    ``gen`` and ``cost`` are then ``None``.
    """

    gen: Optional[tuple[tuple[float, ...], ...]]
    cost: Optional[float]
    infeasible_at: Optional[int] = None

    @property
    def feasible(self) -> bool:
        return self.infeasible_at is None


def _levels(u: UnitSpec) -> list[float]:
    return [u.min_gen + m * u.step_size for m in range(step_count(u) + 1)]


def _dispatch_step(inst: UcpInstance, on_row: Sequence[int], rd: float):
    units = inst.units
    committed = [i for i in range(len(units)) if on_row[i]]
    disc = [i for i in committed if units[i].discrete]
    cont = sorted((i for i in committed if not units[i].discrete),
                  key=lambda i: (units[i].var_cost, i))
    best = None
    for combo in itertools.product(*(_levels(units[i]) for i in disc)):
        gen = [0.0] * len(units)
        for i, g in zip(disc, combo):
            gen[i] = g
        for i in cont:
            gen[i] = units[i].min_gen
        rest = rd - sum(gen)
        if rest < -_demand_tol(rd):
            continue
        for i in cont:
            add = min(max(rest, 0.0), units[i].max_gen - units[i].min_gen)
            gen[i] += add
            rest -= add
        if abs(rest) > _demand_tol(rd):
            continue
        cost = sum(units[i].var_cost * gen[i] for i in committed)
        if best is None or cost < best[1]:
            best = (tuple(gen), cost)
    return best


def dispatch_cost(inst: UcpInstance, on_pattern: Sequence[Sequence[int]]) -> Dispatch:
    """Minimum variable cost meeting demand exactly for a fixed commitment.

    Continuous units get their min_gen and the remainder is filled in
    ascending var_cost order (ties by unit index). Units with a step size are
    restricted to their step grid, which is searched exhaustively.
    """
    _check_size(inst, on_pattern, "on pattern")
    gens = []
    cost = 0.0
    for t, row in enumerate(on_pattern):
        res = _dispatch_step(inst, row, inst.residual_demand[t])
        if res is None:
            return Dispatch(None, None, infeasible_at=t)
        gens.append(res[0])
        cost += res[1]
    return Dispatch(tuple(gens), cost)


def schedule_from_on(inst: UcpInstance, on, gen=None) -> Schedule:
    if gen is None:
        gen = [[u.max_gen * on[t][i] for i, u in enumerate(inst.units)]
               for t in range(inst.time_steps)]
    return Schedule(on, rising_edges(inst, on), gen)


@dataclass
class OptimalResult:
    best_cost: Optional[float]
    schedules: list[Schedule] = field(default_factory=list)
    explored: int = 0

    @property
    def feasible(self) -> bool:
        return self.best_cost is not None

    def to_dict(self) -> dict:
        return {"best_cost": self.best_cost, "explored": self.explored,
                "schedules": [s.to_dict() for s in self.schedules]}


def _unit_trajectories(inst: UcpInstance, i: int) -> list[tuple[int, ...]]:
    """On-trajectories of one unit satisfying its min up/down times."""
    T = inst.time_steps
    u = inst.units[i]
    probe = UcpInstance(inst.name, T, (u,), (0.0,) * T)
    keep = []
    for bits in itertools.product((0, 1), repeat=T):
        on = tuple((b,) for b in bits)
        s = schedule_from_on(probe, on, gen=[(0.0,)] * T)
        if not any(v.kind in ("min_up", "min_down") for v in check_feasible(probe, s)):
            keep.append(bits)
    return keep


def enumerate_optimal(inst: UcpInstance) -> OptimalResult:
    """All cost-minimal feasible schedules with starts at rising edges.

    Minimizers come back in lexicographic order of the flattened
    (t-major, i-minor) on-pattern.
    """
    T, I = inst.time_steps, inst.n_units
    if T * I > ENUMERATION_LIMIT:
        raise ValueError(f"T*I = {T * I} exceeds enumeration limit {ENUMERATION_LIMIT}")
    per_unit = [_unit_trajectories(inst, i) for i in range(I)]
    best: Optional[float] = None
    winners: list[Schedule] = []
    explored = 0
    for combo in itertools.product(*per_unit):
        explored += 1
        on = tuple(tuple(combo[i][t] for i in range(I)) for t in range(T))
        d = dispatch_cost(inst, on)
        if not d.feasible:
            continue
        edges = rising_edges(inst, on)
        cost = d.cost + sum(u.start_cost * edges[t][i]
                            for t in range(T) for i, u in enumerate(inst.units))
        if best is None or cost < best - _cost_tol(cost):
            best, winners = cost, []
        if abs(cost - best) <= _cost_tol(cost):
            winners.append(Schedule(on, edges, d.gen))
    winners.sort(key=lambda s: tuple(itertools.chain.from_iterable(s.on)))
    return OptimalResult(best, winners, explored)


def _cost_tol(c: float) -> float:
    return 1e-9 * max(1.0, abs(c))
