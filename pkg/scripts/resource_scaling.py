"""Qubit and coupling counts of both formulations as the instance grows.

Writes one CSV row per (T, I, replicate) to stdout or --out:

    python scripts/resource_scaling.py --T 2 4 8 16 --I 1 2 4 --reps 5
"""
from __future__ import annotations

import argparse
import csv
import sys
from dataclasses import dataclass, field

import numpy as np

from ucpq import UcpInstance, UnitSpec, compile_generic, compile_tailored, default_penalties, matrix_metrics


@dataclass
class ScalingConfig:
    horizons: list[int] = field(default_factory=lambda: [2, 4, 8, 16, 24])
    unit_counts: list[int] = field(default_factory=lambda: [1, 2, 3, 5])
    reps: int = 3
    seed: int = 7
    max_min_up: int = 4
    max_min_down: int = 4


def random_fleet(rng: np.random.Generator, T: int, I: int, cfg: ScalingConfig) -> UcpInstance:
    units = []
    for i in range(I):
        g = int(rng.integers(1, 6))
        units.append(UnitSpec(
            f"u{i}", g, g,
            min_up=int(rng.integers(1, cfg.max_min_up + 1)),
            min_down=int(rng.integers(1, cfg.max_min_down + 1)),
            start_cost=int(rng.integers(0, 100)),
            var_cost=int(rng.integers(1, 60)),
        ))
    cap = sum(u.max_gen for u in units)
    rd = tuple(float(rng.integers(0, cap + 1)) for _ in range(T))
    return UcpInstance(f"fleet-{T}x{I}", T, tuple(units), rd)


def rows(cfg: ScalingConfig):
    rng = np.random.default_rng(cfg.seed)
    for T in cfg.horizons:
        for I in cfg.unit_counts:
            for rep in range(cfg.reps):
                inst = random_fleet(rng, T, I, cfg)
                p = default_penalties(inst)
                t = matrix_metrics(compile_tailored(inst, p).matrix)
                g = matrix_metrics(compile_generic(inst, p)[0].matrix)
                yield {
                    "T": T, "I": I, "rep": rep,
                    "tailored_vars": t.n, "tailored_couplings": t.couplings,
                    "tailored_density": round(t.density, 6), "tailored_max_incident": t.max_incident,
                    "generic_vars": g.n, "generic_couplings": g.couplings,
                    "generic_density": round(g.density, 6), "generic_max_incident": g.max_incident,
                    "var_ratio": round(g.n / t.n, 4),
                    "coupling_ratio": round(g.couplings / t.couplings, 4) if t.couplings else "",
                }


def main(argv=None) -> int:
    d = ScalingConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--T", type=int, nargs="+", default=d.horizons)
    ap.add_argument("--I", type=int, nargs="+", default=d.unit_counts)
    ap.add_argument("--reps", type=int, default=d.reps)
    ap.add_argument("--seed", type=int, default=d.seed)
    ap.add_argument("--out")
    a = ap.parse_args(argv)
    cfg = ScalingConfig(a.T, a.I, a.reps, a.seed)
    out = open(a.out, "w", newline="") if a.out else sys.stdout
    try:
        w = None
        for r in rows(cfg):
            if w is None:
                w = csv.DictWriter(out, fieldnames=list(r), lineterminator="\n")
                w.writeheader()
            w.writerow(r)
    finally:
        if a.out:
            out.close()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
