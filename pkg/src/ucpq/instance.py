"""Unit-commitment instances: data model, validation and JSON I/O."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Optional

import jsonschema

__all__ = [
    "UnitSpec",
    "UcpInstance",
    "Issue",
    "ValidationReport",
    "InstanceError",
    "validate_instance",
    "load_instance",
    "save_instance",
    "paper_example",
    "step_count",
]


class InstanceError(ValueError):
    """Raised for unparseable, schema-violating or invalid instances."""

    def __init__(self, message: str, path: str = ""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class UnitSpec:
    name: str
    min_gen: float
    max_gen: float
    min_up: int
    min_down: int
    start_cost: float
    var_cost: float
    step_size: Optional[float] = None
    initial_on: bool = False

    def __post_init__(self):
        for attr in ("min_gen", "max_gen", "start_cost", "var_cost"):
            object.__setattr__(self, attr, float(getattr(self, attr)))
        if self.step_size is not None:
            object.__setattr__(self, "step_size", float(self.step_size))
        object.__setattr__(self, "initial_on", bool(self.initial_on))

    @property
    def discrete(self) -> bool:
        return self.step_size is not None


@dataclass(frozen=True)
class UcpInstance:
    name: str
    time_steps: int
    units: tuple[UnitSpec, ...]
    residual_demand: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "units", tuple(self.units))
        object.__setattr__(
            self, "residual_demand", tuple(float(r) for r in self.residual_demand)
        )

    @property
    def n_units(self) -> int:
        return len(self.units)

    @property
    def discrete(self) -> bool:
        return any(u.discrete for u in self.units)


def step_count(unit: UnitSpec) -> int:
    """Number of whole steps between min_gen and max_gen (0 for non-discrete units)."""
    if unit.step_size is None:
        return 0
    ratio = (unit.max_gen - unit.min_gen) / unit.step_size
    # guard against 0.3/0.1 == 2.9999999999999996
    return int(math.floor(ratio + 1e-9))


@dataclass(frozen=True)
class Issue:
    severity: str  # "error" | "warning"
    path: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity}: {self.path}: {self.message}"


@dataclass
class ValidationReport:
    issues: list[Issue] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not any(i.severity == "error" for i in self.issues)

    @property
    def errors(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "error"]

    @property
    def warnings(self) -> list[Issue]:
        return [i for i in self.issues if i.severity == "warning"]

    def error(self, path: str, message: str) -> None:
        self.issues.append(Issue("error", path, message))

    def warning(self, path: str, message: str) -> None:
        self.issues.append(Issue("warning", path, message))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "issues": [
                {"severity": i.severity, "path": i.path, "message": i.message}
                for i in self.issues
            ],
        }


def _is_int(v) -> bool:
    return isinstance(v, int) or (isinstance(v, float) and v.is_integer())


def validate_instance(inst: UcpInstance) -> ValidationReport:
    """Collect every violated parameter-domain rule of ``inst``.

    Errors make the instance unusable; warnings flag instances that are
    valid but cannot meet demand or will be compiled in a lossy way.
    """
    rep = ValidationReport()
    T = inst.time_steps
    if not _is_int(T) or T < 1:
        rep.error("time_steps", f"must be an integer >= 1, got {T!r}")
    if len(inst.residual_demand) != T:
        rep.error(
            "residual_demand",
            f"expected {T} entries, got {len(inst.residual_demand)}",
        )
    for t, rd in enumerate(inst.residual_demand):
        if not math.isfinite(rd) or rd < 0:
            rep.error(f"residual_demand[{t}]", f"must be finite and >= 0, got {rd}")
    if not inst.units:
        rep.error("units", "at least one unit is required")

    seen: set[str] = set()
    for k, u in enumerate(inst.units):
        p = f"units[{k}]"
        if u.name in seen:
            rep.error(f"{p}.name", f"duplicate unit name {u.name!r}")
        seen.add(u.name)
        if u.min_gen < 0:
            rep.error(p, f"{u.name}: min_gen must be >= 0, got {u.min_gen:g}")
        if u.min_gen > u.max_gen:
            rep.error(
                p, f"{u.name}: min_gen {u.min_gen:g} exceeds max_gen {u.max_gen:g}"
            )
        for attr in ("min_up", "min_down"):
            v = getattr(u, attr)
            if not _is_int(v) or v < 1:
                rep.error(f"{p}.{attr}", f"{u.name}: must be an integer >= 1, got {v!r}")
        for attr in ("start_cost", "var_cost"):
            v = getattr(u, attr)
            if v < 0:
                rep.error(f"{p}.{attr}", f"{u.name}: must be >= 0, got {v:g}")
        if u.step_size is not None:
            if u.step_size <= 0:
                rep.error(f"{p}.step_size", f"{u.name}: must be > 0, got {u.step_size:g}")
            elif u.step_size > u.max_gen - u.min_gen + 1e-12:
                rep.error(
                    f"{p}.step_size",
                    f"{u.name}: step {u.step_size:g} exceeds max_gen - min_gen "
                    f"= {u.max_gen - u.min_gen:g}",
                )
        elif u.min_gen < u.max_gen:
            rep.warning(
                p,
                f"{u.name}: no step_size, QUBO compilation runs it at max_gen "
                "whenever on",
            )

    cap = sum(u.max_gen for u in inst.units)
    for t, rd in enumerate(inst.residual_demand):
        if rd > cap:
            rep.warning(
                f"residual_demand[{t}]",
                f"demand unreachable at t={t}: {rd:g} > total capacity {cap:g}",
            )
    return rep


_NUM = {"type": "number"}
_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "time_steps", "residual_demand", "units"],
    "properties": {
        "name": {"type": "string"},
        "time_steps": {"type": "integer", "minimum": 1},
        "residual_demand": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "units": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": [
                    "name", "min_gen", "max_gen", "min_up", "min_down",
                    "start_cost", "var_cost",
                ],
                "properties": {
                    "name": {"type": "string"},
                    "min_gen": {"type": "number", "minimum": 0},
                    "max_gen": _NUM,
                    "min_up": {"type": "integer", "minimum": 1},
                    "min_down": {"type": "integer", "minimum": 1},
                    "start_cost": {"type": "number", "minimum": 0},
                    "var_cost": {"type": "number", "minimum": 0},
                    "step_size": {"type": ["number", "null"], "exclusiveMinimum": 0},
                    "initial_on": {"type": "boolean"},
                },
            },
        },
    },
}

_UNIT_KEYS = (
    "name", "min_gen", "max_gen", "min_up", "min_down",
    "start_cost", "var_cost", "step_size", "initial_on",
)


def _json_path(err: jsonschema.ValidationError) -> str:
    out = ""
    for part in err.absolute_path:
        out += f"[{part}]" if isinstance(part, int) else (f".{part}" if out else part)
    return out


def load_instance(text: str | bytes) -> UcpInstance:
    """Parse instance JSON; raises :class:`InstanceError` naming the bad field."""
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise InstanceError(f"invalid JSON: {e.msg} (line {e.lineno}, column {e.colno})") from e
    err = jsonschema.exceptions.best_match(
        jsonschema.Draft202012Validator(_SCHEMA).iter_errors(data)
    )
    if err is not None:
        path = _json_path(err)
        if err.validator == "required":
            missing = [k for k in err.validator_value if k not in err.instance]
            path = ".".join(filter(None, [path, missing[0]])) if missing else path
        raise InstanceError(err.message, path or "<root>")
    units = []
    for u in data["units"]:
        units.append(
            UnitSpec(
                name=u["name"],
                min_gen=u["min_gen"],
                max_gen=u["max_gen"],
                min_up=int(u["min_up"]),
                min_down=int(u["min_down"]),
                start_cost=u["start_cost"],
                var_cost=u["var_cost"],
                step_size=u.get("step_size"),
                initial_on=u.get("initial_on", False),
            )
        )
    return UcpInstance(
        name=data["name"],
        time_steps=int(data["time_steps"]),
        units=tuple(units),
        residual_demand=tuple(data["residual_demand"]),
    )


def instance_to_dict(inst: UcpInstance) -> dict:
    units = []
    for u in inst.units:
        d = {k: getattr(u, k) for k in _UNIT_KEYS}
        if d["step_size"] is None:
            del d["step_size"]
        units.append(d)
    return {
        "name": inst.name,
        "time_steps": inst.time_steps,
        "residual_demand": list(inst.residual_demand),
        "units": units,
    }


def save_instance(inst: UcpInstance) -> str:
    """Canonical JSON text (fixed key order, 2-space indent, trailing LF)."""
    rep = validate_instance(inst)
    if not rep.ok:
        raise InstanceError("; ".join(str(i) for i in rep.errors))
    return json.dumps(instance_to_dict(inst), indent=2, ensure_ascii=False) + "\n"


def paper_example() -> UcpInstance:
    """Two all-or-nothing thermal units over five time steps."""
    return UcpInstance(
        name="paper-example",
        time_steps=5,
        units=(
            UnitSpec("Unit 0", 1, 1, 1, 1, start_cost=50, var_cost=30),
            UnitSpec("Unit 1", 1, 1, 2, 1, start_cost=25, var_cost=45),
        ),
        residual_demand=(1, 2, 1, 2, 1),
    )
