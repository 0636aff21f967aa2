"""How the penalty factors shape the QUBO minimum.

Part 1 sweeps B on the two-unit example (A, C, D fixed at 1900, 96, 96)
with both min-down window variants and reports the brute-force minimum,
whether it decodes feasible, and its true cost. Compilation skips the
B > D*max(min_down) gate so the region below it is visible.

Part 2 draws random all-or-nothing instances and reports how often the
brute-force argmin under default_penalties is feasible and optimal.

    python scripts/penalty_study.py --b 50 90 96 97 120 200 --instances 200
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field

import numpy as np

from ucpq import (
    PenaltyFactors,
    UcpInstance,
    UnitSpec,
    brute_force,
    check_feasible,
    compile_tailored,
    decode,
    default_penalties,
    enumerate_optimal,
    paper_example,
    true_cost,
)
from ucpq.reference import start_flag_violations


@dataclass
class PenaltyStudyConfig:
    b_values: list[float] = field(default_factory=lambda: [50, 90, 96, 97, 120, 200, 400])
    a: float = 1900
    c: float = 96
    d: float = 96
    instances: int = 200
    seed: int = 11


def sweep_b(cfg: PenaltyStudyConfig):
    inst = paper_example()
    for literal in (False, True):
        for b in cfg.b_values:
            c = compile_tailored(inst, PenaltyFactors(cfg.a, b, cfg.c, cfg.d), check=False,
                                 literal_down_window=literal)
            r = brute_force(c)
            s = decode(r.minimizers[0], c.layout, inst)
            ok = not (check_feasible(inst, s) or start_flag_violations(inst, s))
            yield literal, b, r.best_energy, ok, true_cost(inst, s)


def _instance(rng: np.random.Generator) -> UcpInstance:
    T = int(rng.integers(2, 5))
    I = int(rng.integers(1, 3))
    units = []
    for i in range(I):
        g = int(rng.integers(1, 4))
        units.append(UnitSpec(f"u{i}", g, g, int(rng.integers(1, 4)), int(rng.integers(1, 4)),
                              int(rng.integers(0, 61)), int(rng.integers(0, 51)),
                              initial_on=bool(rng.integers(0, 2))))
    cap = sum(u.max_gen for u in units)
    rd = tuple(float(rng.integers(0, cap + 1)) for _ in range(T))
    return UcpInstance("rand", T, tuple(units), rd)


def default_argmin_quality(cfg: PenaltyStudyConfig) -> dict:
    rng = np.random.default_rng(cfg.seed)
    counts = {"instances": 0, "reference_feasible": 0, "argmin_feasible": 0, "argmin_optimal": 0}
    for _ in range(cfg.instances):
        inst = _instance(rng)
        ref = enumerate_optimal(inst)
        c = compile_tailored(inst, default_penalties(inst))
        r = brute_force(c)
        s = decode(r.minimizers[0], c.layout, inst)
        feasible = not (check_feasible(inst, s) or start_flag_violations(inst, s))
        counts["instances"] += 1
        counts["reference_feasible"] += ref.feasible
        counts["argmin_feasible"] += ref.feasible and feasible
        counts["argmin_optimal"] += ref.feasible and feasible and true_cost(inst, s) == ref.best_cost
    return counts


def main(argv=None) -> int:
    d = PenaltyStudyConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--b", type=float, nargs="+", default=d.b_values)
    ap.add_argument("--instances", type=int, default=d.instances)
    ap.add_argument("--seed", type=int, default=d.seed)
    a = ap.parse_args(argv)
    cfg = PenaltyStudyConfig(b_values=a.b, instances=a.instances, seed=a.seed)

    print(f"B sweep on the two-unit example (A={cfg.a:g}, C={cfg.c:g}, D={cfg.d:g})")
    print(f"{'window':<9}{'B':>7}{'min energy':>12}{'feasible':>10}{'cost':>7}")
    for literal, b, e, ok, cost in sweep_b(cfg):
        print(f"{'literal' if literal else 'shifted':<9}{b:>7g}{e:>12g}{'yes' if ok else 'no':>10}{cost:>7g}")
    print()
    q = default_argmin_quality(cfg)
    print(f"default penalties on {q['instances']} random instances:")
    print(f"  feasible schedule exists     {q['reference_feasible']}")
    print(f"  QUBO argmin feasible          {q['argmin_feasible']}")
    print(f"  QUBO argmin at true optimum   {q['argmin_optimal']}")
    sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
