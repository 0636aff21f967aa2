"""Hit rate of the annealer on the worked example versus sweep budget.

For each sweep count and seed, runs the restarted annealer on the
two-unit example (penalties 1900,97,96,96) and counts restarts that end at
the exhaustive optimum. Also reports the same numbers with the pair
exchange moves switched off, to show what they buy.

    python scripts/anneal_study.py --sweeps 50 100 250 500 1000 --seeds 0 1 2
"""
from __future__ import annotations

import argparse
import csv
import sys
import time
from dataclasses import dataclass, field

from ucpq import PAPER_PENALTIES, AnnealParams, brute_force, compile_tailored, paper_example, simulated_annealing


@dataclass
class AnnealStudyConfig:
    sweeps: list[int] = field(default_factory=lambda: [50, 100, 250, 500, 1000])
    seeds: list[int] = field(default_factory=lambda: [0, 1, 2])
    restarts: int = 100
    temp_initial: float = 2e5
    temp_final: float = 0.1


def run(cfg: AnnealStudyConfig):
    c = compile_tailored(paper_example(), PAPER_PENALTIES)
    target = brute_force(c).best_energy
    for exchange in (True, False):
        for sweeps in cfg.sweeps:
            for seed in cfg.seeds:
                p = AnnealParams(cfg.restarts, sweeps, cfg.temp_initial, cfg.temp_final, seed,
                                 exchange_moves=exchange)
                t0 = time.perf_counter()
                r = simulated_annealing(c, p)
                yield {
                    "moves": "flip+exchange" if exchange else "flip only",
                    "sweeps": sweeps, "seed": seed,
                    "restarts": cfg.restarts, "hits": r.hits(target),
                    "best_energy": r.best_energy,
                    "seconds": round(time.perf_counter() - t0, 3),
                }


def main(argv=None) -> int:
    d = AnnealStudyConfig()
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sweeps", type=int, nargs="+", default=d.sweeps)
    ap.add_argument("--seeds", type=int, nargs="+", default=d.seeds)
    ap.add_argument("--restarts", type=int, default=d.restarts)
    a = ap.parse_args(argv)
    cfg = AnnealStudyConfig(a.sweeps, a.seeds, a.restarts)
    w = None
    for row in run(cfg):
        if w is None:
            w = csv.DictWriter(sys.stdout, fieldnames=list(row), lineterminator="\n")
            w.writeheader()
        w.writerow(row)
        sys.stdout.flush()
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
