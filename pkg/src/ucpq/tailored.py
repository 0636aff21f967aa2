"""Tailored penalty QUBO for unit commitment.

Variables are the on/start flags per (time step, unit), plus
logarithmically encoded generation steps for units with a ``step_size``.
Constraints enter as penalty terms weighted by factors A (demand),
B (start logic), C (minimum up time) and D (minimum down time); none of
them introduces slack variables.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import _expr as ex
from .instance import InstanceError, UcpInstance, ValidationReport, step_count, validate_instance
from .qubo import QuboMatrix
from .reference import Schedule

__all__ = [
    "PenaltyFactors",
    "PenaltyError",
    "VariableLayout",
    "CompiledQubo",
    "PAPER_PENALTIES",
    "default_penalties",
    "validate_penalties",
    "build_layout",
    "encoding_weights",
    "compile_tailored",
    "decode",
    "cost_upper_bound",
]


class PenaltyError(ValueError):
    pass


@dataclass(frozen=True)
class PenaltyFactors:
    A: float
    B: float
    C: float
    D: float

    @classmethod
    def parse(cls, text: str) -> "PenaltyFactors":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError(f"expected four comma-separated factors A,B,C,D, got {text!r}")
        vals = [float(p) for p in parts]
        return cls(*(int(v) if v.is_integer() else v for v in vals))

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.A, self.B, self.C, self.D)

    def scaled(self, k: float) -> "PenaltyFactors":
        return PenaltyFactors(self.A * k, self.B * k, self.C * k, self.D * k)

    def to_dict(self) -> dict:
        return {"A": self.A, "B": self.B, "C": self.C, "D": self.D}


PAPER_PENALTIES = PenaltyFactors(1900, 97, 96, 96)


def cost_upper_bound(inst: UcpInstance) -> float:
    """Running every unit at max_gen and starting it at every step."""
    T = inst.time_steps
    return (
        sum(u.var_cost * u.max_gen for u in inst.units) * T
        + sum(u.start_cost for u in inst.units) * T
    )


def default_penalties(inst: UcpInstance) -> PenaltyFactors:
    T, I = inst.time_steps, inst.n_units
    per_slot = sum(u.var_cost * u.max_gen + u.start_cost for u in inst.units) * T
    U = 1 + math.ceil(per_slot / (T * I))
    B = U * max(u.min_down for u in inst.units) + 1
    A = 2 * (cost_upper_bound(inst) + B * T * I) + U * T
    return PenaltyFactors(A, B, U, U)


def validate_penalties(p: PenaltyFactors, inst: UcpInstance) -> ValidationReport:
    rep = ValidationReport()
    for name, v in p.to_dict().items():
        if not v > 0:
            rep.error(f"penalties.{name}", f"must be > 0, got {v}")
    max_down = max((u.min_down for u in inst.units), default=1)
    if not p.B > p.D * max_down:
        rep.error(
            "penalties.B",
            f"B={p.B:g} must exceed D*max(min_down)={p.D:g}*{max_down}={p.D * max_down:g}",
        )
    upper = cost_upper_bound(inst)
    if p.A < upper:
        rep.warning(
            "penalties.A",
            f"A={p.A:g} below the cost upper bound {upper:g}; demand penalty may be outweighed",
        )
    return rep


def encoding_weights(max_steps: int) -> list[int]:
    """Bounded binary encoding of 0..max_steps with bit_length(max_steps) bits.

    Weights 1, 2, ..., 2**(d-2) and a final weight that caps the sum at
    ``max_steps`` exactly.
    """
    if max_steps < 1:
        return []
    d = max_steps.bit_length()
    return [1 << k for k in range(d - 1)] + [max_steps - ((1 << (d - 1)) - 1)]


@dataclass(frozen=True)
class VariableLayout:
    """Bijection between qubit indices and (role, t, i, k).

    On-flags come first (t-major, i-minor), then start flags in the same
    order, then generation bits ordered (t, i, k), then any extra
    variables (slacks of the generic formulation).
    """

    T: int
    I: int
    gen_widths: tuple[int, ...]
    extra: tuple[tuple[str, int, int, int], ...] = ()
    _gen_prefix: tuple[int, ...] = field(init=False, repr=False, compare=False)
    _extra_index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        prefix = [0]
        for d in self.gen_widths:
            prefix.append(prefix[-1] + d)
        object.__setattr__(self, "_gen_prefix", tuple(prefix))
        object.__setattr__(
            self, "_extra_index", {lab: self.base + k for k, lab in enumerate(self.extra)}
        )

    @property
    def gen_bits_per_step(self) -> int:
        return self._gen_prefix[-1]

    @property
    def base(self) -> int:
        return self.T * (2 * self.I + self.gen_bits_per_step)

    @property
    def total(self) -> int:
        return self.base + len(self.extra)

    def _check(self, t: int, i: int) -> None:
        if not (0 <= t < self.T and 0 <= i < self.I):
            raise IndexError(f"(t={t}, i={i}) outside {self.T} x {self.I}")

    def on(self, t: int, i: int) -> int:
        self._check(t, i)
        return t * self.I + i

    def start(self, t: int, i: int) -> int:
        self._check(t, i)
        return self.T * self.I + t * self.I + i

    def gen(self, t: int, i: int, k: int) -> int:
        self._check(t, i)
        if not 0 <= k < self.gen_widths[i]:
            raise IndexError(f"gen bit {k} outside width {self.gen_widths[i]} of unit {i}")
        return 2 * self.T * self.I + t * self.gen_bits_per_step + self._gen_prefix[i] + k

    def slack(self, role: str, t: int, i: int, k: int = 0) -> int:
        return self._extra_index[(role, t, i, k)]

    def label(self, idx: int) -> tuple[str, int, int, int]:
        """Inverse map: qubit index to (role, t, i, k)."""
        if not 0 <= idx < self.total:
            raise IndexError(f"qubit {idx} outside layout of {self.total}")
        TI = self.T * self.I
        if idx < TI:
            return ("on", idx // self.I, idx % self.I, 0)
        if idx < 2 * TI:
            r = idx - TI
            return ("start", r // self.I, r % self.I, 0)
        if idx < self.base:
            r = idx - 2 * TI
            t, r = divmod(r, self.gen_bits_per_step)
            for i in range(self.I):
                if r < self._gen_prefix[i + 1]:
                    return ("gen", t, i, r - self._gen_prefix[i])
        return self.extra[idx - self.base]

    def to_dict(self) -> dict:
        d = {
            "T": self.T,
            "I": self.I,
            "gen_widths": list(self.gen_widths),
            "ordering": "on,start,gen; t-major, i-minor",
        }
        if self.extra:
            d["extra"] = [list(lab) for lab in self.extra]
        return d


def build_layout(inst: UcpInstance) -> VariableLayout:
    widths = tuple(step_count(u).bit_length() if u.discrete else 0 for u in inst.units)
    return VariableLayout(inst.time_steps, inst.n_units, widths)


@dataclass
class CompiledQubo:
    matrix: QuboMatrix
    layout: VariableLayout
    penalties: PenaltyFactors
    formulation: str
    instance_name: str

    def sidecar(self) -> dict:
        return {
            "formulation": self.formulation,
            "instance": self.instance_name,
            "penalties": self.penalties.to_dict(),
            "layout": self.layout.to_dict(),
        }


def on_expr(inst: UcpInstance, layout: VariableLayout, t: int, i: int) -> ex.Expr:
    """on_{t,i}; before the horizon it is the constant initial state."""
    if t < 0:
        return ex.const(int(inst.units[i].initial_on))
    return {layout.on(t, i): 1}


def power_expr(inst: UcpInstance, layout: VariableLayout, t: int, i: int) -> ex.Expr:
    u = inst.units[i]
    if not u.discrete:
        return {layout.on(t, i): u.max_gen}
    e: ex.Expr = {layout.on(t, i): u.min_gen}
    for k, w in enumerate(encoding_weights(step_count(u))):
        e[layout.gen(t, i, k)] = w * u.step_size
    return e


def add_objective(q: QuboMatrix, inst: UcpInstance, layout: VariableLayout) -> None:
    for t in range(inst.time_steps):
        for i, u in enumerate(inst.units):
            ex.add_linear(q, power_expr(inst, layout, t, i), u.var_cost)
            q.add_linear(layout.start(t, i), u.start_cost)


def add_demand_penalty(q: QuboMatrix, inst: UcpInstance, layout: VariableLayout, A: float) -> None:
    for t in range(inst.time_steps):
        e = ex.add(*(power_expr(inst, layout, t, i) for i in range(inst.n_units)),
                   ex.const(-inst.residual_demand[t]))
        ex.add_square(q, e, A)


def up_window(inst: UcpInstance, t: int, i: int) -> range:
    return range(t, min(t + inst.units[i].min_up, inst.time_steps))


def down_window(inst: UcpInstance, t: int, i: int, literal: bool = False) -> range:
    return range(t if literal else t + 1, min(t + inst.units[i].min_down, inst.time_steps))


def _check(inst: UcpInstance, p: PenaltyFactors) -> None:
    rep = validate_instance(inst)
    if not rep.ok:
        raise InstanceError("; ".join(str(i) for i in rep.errors))
    rep = validate_penalties(p, inst)
    if not rep.ok:
        raise PenaltyError("; ".join(str(i) for i in rep.errors))


def compile_tailored(
    inst: UcpInstance,
    p: PenaltyFactors,
    check: bool = True,
    literal_down_window: bool = False,
) -> CompiledQubo:
    """Expand objective and penalty terms A-D into a QUBO.

    The min-down window starts one step after the shutdown by default: the
    product at the shutdown step itself is zero whenever the start flag is
    consistent (on_t = 0 there), and otherwise only rewards a missing start
    flag by D per window step. ``literal_down_window=True`` keeps that
    product; with B = D*min_down + 1 a dropped start then costs a net 1,
    less than typical start costs, and the minimum goes infeasible.

    ``check=False`` skips instance and penalty validation, for demonstrating
    what goes wrong with bad factors.
    """
    if check:
        _check(inst, p)
    layout = build_layout(inst)
    q = QuboMatrix(layout.total)
    add_objective(q, inst, layout)
    add_demand_penalty(q, inst, layout, p.A)
    for t in range(inst.time_steps):
        for i in range(inst.n_units):
            on = on_expr(inst, layout, t, i)
            prev = on_expr(inst, layout, t - 1, i)
            st = {layout.start(t, i): 1}
            # B: zero iff start == on_t and not on_{t-1}
            ex.add_product(q, on, ex.sub(ex.ONE, prev), p.B)
            ex.add_product(q, st, ex.sub(ex.add(prev, ex.ONE), on), 2 * p.B)
            ex.add_linear(q, st, -p.B)
            # C: a start must be followed by a full (horizon-clipped) run
            win = up_window(inst, t, i)
            ex.add_linear(q, st, p.C * len(win))
            for tau in win:
                ex.add_product(q, st, on_expr(inst, layout, tau, i), -p.C)
            # D: after a shutdown the unit stays off for min_down steps
            shut = ex.sub(ex.add(st, prev), on)
            for tau in down_window(inst, t, i, literal_down_window):
                ex.add_product(q, shut, on_expr(inst, layout, tau, i), p.D)
            if inst.units[i].discrete:
                bits = {layout.gen(t, i, k): 1 for k in range(layout.gen_widths[i])}
                ex.add_product(q, ex.sub(ex.ONE, on), bits, p.A)
    return CompiledQubo(q, layout, p, "tailored", inst.name)


def decode(x: Sequence[int], layout: VariableLayout, inst: UcpInstance) -> Schedule:
    """Read on/start flags and generation levels out of a bitstring."""
    if len(x) != layout.total:
        raise ValueError(f"bitstring has length {len(x)}, layout expects {layout.total}")
    T, I = layout.T, layout.I
    on = [[int(x[layout.on(t, i)]) for i in range(I)] for t in range(T)]
    start = [[int(x[layout.start(t, i)]) for i in range(I)] for t in range(T)]
    gen = []
    for t in range(T):
        row = []
        for i, u in enumerate(inst.units):
            if u.discrete:
                weights = encoding_weights(step_count(u))
                steps = sum(w * int(x[layout.gen(t, i, k)]) for k, w in enumerate(weights))
                row.append(u.min_gen * on[t][i] + steps * u.step_size)
            else:
                row.append(u.max_gen * on[t][i])
        gen.append(row)
    return Schedule(on, start, gen)


def encode(schedule: Schedule, layout: VariableLayout, inst: UcpInstance) -> Optional[list[int]]:
    """Bitstring for a schedule, or None if a generation level is not encodable.

    Extra (slack) variables are left at 0.
    """
    x = [0] * layout.total
    for t in range(layout.T):
        for i, u in enumerate(inst.units):
            x[layout.on(t, i)] = schedule.on[t][i]
            x[layout.start(t, i)] = schedule.start[t][i]
            if not u.discrete:
                continue
            g = schedule.gen[t][i] - u.min_gen * schedule.on[t][i]
            m = round(g / u.step_size)
            if m < 0 or abs(m * u.step_size - g) > 1e-9 * max(1.0, abs(g)):
                return None
            for k, w in reversed(list(enumerate(encoding_weights(step_count(u))))):
                if m >= w:
                    x[layout.gen(t, i, k)] = 1
                    m -= w
            if m:
                return None
    return x
