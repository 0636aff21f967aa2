"""Command-line front end: ``ucpq validate|compile|solve|compare|export|reproduce-paper``.

Exit codes: 0 success, 1 infeasible or suboptimal result, 2 usage or
validation error, 3 internal error. With ``--json`` a single JSON document
goes to stdout and diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional

from .generic import PUBLISHED_FIGURES, compare_formulations, compile_generic
from .instance import (
    InstanceError,
    UcpInstance,
    load_instance,
    paper_example,
    save_instance,
    validate_instance,
)
from .qubo import EXPORT_FORMATS, export_matrix, matrix_metrics
from .reference import check_feasible, start_flag_violations, true_cost
from .solve import AnnealParams, SizeGuardError, bitstring, brute_force, solve_and_report
from .tailored import (
    PAPER_PENALTIES,
    CompiledQubo,
    PenaltyError,
    PenaltyFactors,
    compile_tailored,
    decode,
    default_penalties,
)
from .qubo import qubo_energy, raw_energy

log = logging.getLogger("ucpq")

OK, BAD_RESULT, USAGE, INTERNAL = 0, 1, 2, 3
BUILTIN = "@paper"


class UsageError(Exception):
    pass


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj, indent=2) + "\n")


def read_instance(path: str) -> UcpInstance:
    if path == BUILTIN:
        return paper_example()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror or e}") from e
    try:
        return load_instance(text)
    except InstanceError as e:
        raise UsageError(f"{path}: {e}") from e


def _valid_instance(path: str) -> UcpInstance:
    inst = read_instance(path)
    rep = validate_instance(inst)
    for issue in rep.issues:
        log.warning("%s: %s", issue.path, issue.message)
    if not rep.ok:
        raise UsageError(f"{path}: instance is invalid")
    return inst


def _penalties(args, inst: UcpInstance) -> PenaltyFactors:
    if getattr(args, "penalties", None):
        try:
            return PenaltyFactors.parse(args.penalties)
        except ValueError as e:
            raise UsageError(str(e)) from e
    return default_penalties(inst)


def _compile(args, inst: UcpInstance) -> CompiledQubo:
    p = _penalties(args, inst)
    try:
        if args.formulation == "generic":
            return compile_generic(inst, p)[0]
        return compile_tailored(inst, p, literal_down_window=args.literal_down_window)
    except PenaltyError as e:
        raise UsageError(f"penalty rule violated: {e}") from e
    except (InstanceError, ValueError) as e:
        raise UsageError(str(e)) from e


def cmd_validate(args) -> int:
    inst = read_instance(args.instance)
    rep = validate_instance(inst)
    if args.json:
        _emit(rep.to_dict())
    else:
        for issue in rep.issues:
            print(issue)
        print("ok" if rep.ok else "invalid")
    return OK if rep.ok else USAGE


def _published_note(c: CompiledQubo, inst: UcpInstance) -> Optional[str]:
    if inst != paper_example():
        return None
    v, k = PUBLISHED_FIGURES[c.formulation]
    return f"published figures for this example: {v} variables, {k} interactions"


def cmd_compile(args) -> int:
    inst = _valid_instance(args.instance)
    c = _compile(args, inst)
    m = matrix_metrics(c.matrix)
    note = _published_note(c, inst)
    written = []
    if args.out:
        out = Path(args.out)
        out.write_text(export_matrix(c.matrix, args.format) + "\n", encoding="utf-8")
        side = out.with_name(out.name + ".sidecar.json")
        side.write_text(json.dumps(c.sidecar(), indent=2) + "\n", encoding="utf-8")
        written = [str(out), str(side)]
    if args.json:
        _emit({"metrics": m.__dict__, "offset": c.matrix.offset, "sidecar": c.sidecar(),
               "written": written, "note": note})
    else:
        print(m.line())
        print(f"couplings={m.couplings} offset={c.matrix.offset:g}")
        if note:
            print(f"note: {note} (couplings here are counted after exact cancellation)")
        for w in written:
            print(f"wrote {w}")
    return OK


def _anneal_params(args, c: CompiledQubo) -> AnnealParams:
    return AnnealParams.for_matrix(
        c.matrix,
        restarts=args.restarts,
        sweeps_per_restart=args.sweeps,
        temp_initial=args.temp_initial,
        temp_final=args.temp_final,
        seed=args.seed,
    )


def cmd_solve(args) -> int:
    inst = _valid_instance(args.instance)
    c = _compile(args, inst)
    solvers = ["exhaustive", "anneal"] if args.solver == "both" else [args.solver]
    reports = {}
    try:
        for s in solvers:
            params = _anneal_params(args, c) if s == "anneal" else None
            reports[s] = solve_and_report(c, inst, s, params)
    except SizeGuardError as e:
        raise UsageError(str(e)) from e
    best = min(reports.values(), key=lambda r: r.result.best_energy)
    status = OK if best.feasible and abs(best.penalty_part) <= 1e-9 * max(1, abs(best.objective)) else BAD_RESULT
    if args.json:
        _emit({k: r.to_dict() for k, r in reports.items()} | {"exit": status})
        return status
    for name, r in reports.items():
        res = r.result
        print(f"solver      {name}")
        print(f"bitstring   {bitstring(res.minimizers[0])}")
        print(f"energy      {res.best_energy:g}")
        print(f"raw energy  {res.best_raw:g}")
        if name == "anneal":
            print(f"seed        {res.seed}")
            print(f"hits        {res.hits(res.best_energy)}/{len(res.restart_energies)}")
        print(f"feasible    {'yes' if r.feasible else 'no'}")
        print(f"cost        {r.objective:g}")
        print(f"penalty     {r.penalty_part:g}")
        print(r.decoded.table(inst))
        for v in r.violations:
            print(f"  violation: {v}")
        print()
    if len(reports) == 2:
        gap = reports["anneal"].result.best_energy - reports["exhaustive"].result.best_energy
        print(f"anneal gap to exhaustive: {gap:g}")
    return status


def cmd_compare(args) -> int:
    inst = _valid_instance(args.instance)
    if inst.discrete:
        raise UsageError("compare needs all-or-nothing units; generic formulation has no step encoding")
    p = _penalties(args, inst)
    try:
        rep = compare_formulations(inst, p)
    except PenaltyError as e:
        raise UsageError(f"penalty rule violated: {e}") from e
    if args.json:
        _emit(rep.to_dict())
    else:
        print(rep.table())
    return OK


def cmd_export(args) -> int:
    inst = _valid_instance(args.instance)
    if args.format == "instance":
        text = save_instance(inst)
    else:
        text = export_matrix(_compile(args, inst).matrix, args.format) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return OK


def reproduce_checks(p: PenaltyFactors = PAPER_PENALTIES) -> list[dict]:
    """Every number of the worked example, recomputed."""
    inst = paper_example()
    optimum = "01111011010110000100"
    runner_up = "01110111010110001000"
    checks: list[dict] = []

    def check(name, expected, actual, hard=True):
        checks.append({"name": name, "expected": expected, "actual": actual,
                       "status": ("pass" if expected == actual else ("fail" if hard else "note"))})

    max_down = max(u.min_down for u in inst.units)
    check("penalty rule B > D*max(min_down)", True, p.B > p.D * max_down)
    c = compile_tailored(inst, p, check=False)
    q = c.matrix
    m = matrix_metrics(q)
    x_opt = [int(b) for b in optimum]
    x_sub = [int(b) for b in runner_up]
    res = brute_force(c)
    check("brute-force minimizer", [optimum], [bitstring(x) for x in res.minimizers])
    check("minimum energy", 370, res.best_energy)
    check("minimum raw energy", -20530, res.best_raw)
    check("optimal bitstring energy", 370, qubo_energy(q, x_opt))
    check("optimal bitstring raw energy", -20530, raw_energy(q, x_opt))
    check("offset A*sum(rd^2)", 20900, q.offset)
    s_opt = decode(x_opt, c.layout, inst)
    check("optimal schedule feasible", True, not check_feasible(inst, s_opt))
    check("optimal schedule cost", 370, true_cost(inst, s_opt))
    s_sub = decode(x_sub, c.layout, inst)
    check("runner-up schedule feasible", True, not (check_feasible(inst, s_sub)
                                                     or start_flag_violations(inst, s_sub)))
    check("runner-up cost", 410, true_cost(inst, s_sub))
    check("runner-up raw energy", -20490, raw_energy(q, x_sub))
    check("variables", 20, m.n)
    check("nonzero entries", 55, m.nnz)
    check("cells", 400, m.cells)
    check("density", 0.1375, m.density)
    check("max nonzeros per row/column", 5, m.max_incident)
    check("couplings (published count; convention differs)",
          PUBLISHED_FIGURES["tailored"][1], m.couplings, hard=False)
    return checks


def cmd_reproduce(args) -> int:
    p = PenaltyFactors.parse(args.penalties) if args.penalties else PAPER_PENALTIES
    checks = reproduce_checks(p)
    failed = any(c["status"] == "fail" for c in checks)
    if args.json:
        _emit({"penalties": p.to_dict(), "checks": checks, "ok": not failed})
    else:
        for c in checks:
            print(f"[{c['status'].upper():4}] {c['name']}: expected {c['expected']}, got {c['actual']}")
        print("all hard checks passed" if not failed else "some checks FAILED")
    return BAD_RESULT if failed else OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ucpq", description="Unit commitment to QUBO compiler and solver")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    inst_help = f"instance JSON file, or {BUILTIN} for the built-in two-unit example"

    def with_instance(p):
        p.add_argument("instance", help=inst_help)
        p.add_argument("--json", action="store_true", help="machine-readable output")

    def with_penalties(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--penalties", metavar="A,B,C,D", help="explicit penalty factors")
        g.add_argument("--auto", action="store_true", help="derive factors from the instance (default)")

    def with_formulation(p):
        p.add_argument("--formulation", choices=("tailored", "generic"), default="tailored")
        p.add_argument("--literal-down-window", action="store_true",
                       help="include the shutdown step itself in the min-down window")

    p = sub.add_parser("validate", help="check an instance file")
    with_instance(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("compile", help="build the QUBO and print matrix statistics")
    with_instance(p)
    with_formulation(p)
    with_penalties(p)
    p.add_argument("--out", help="write the matrix here (plus <out>.sidecar.json)")
    p.add_argument("--format", choices=EXPORT_FORMATS, default="coo")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("solve", help="compile, minimise, decode and verify")
    with_instance(p)
    with_formulation(p)
    with_penalties(p)
    p.add_argument("--solver", choices=("exhaustive", "anneal", "both"), default="exhaustive")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--restarts", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--temp-initial", type=float)
    p.add_argument("--temp-final", type=float)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("compare", help="tailored vs generic resource table")
    with_instance(p)
    with_penalties(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("export", help="write a compiled matrix or the canonical instance JSON")
    p.add_argument("instance", help=inst_help)
    with_formulation(p)
    with_penalties(p)
    p.add_argument("--format", choices=EXPORT_FORMATS + ("instance",), default="coo")
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("reproduce-paper", help="recompute every number of the worked example")
    p.add_argument("--penalties", metavar="A,B,C,D", help="override factors (default 1900,97,96,96)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: Optional[list[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return USAGE if e.code else OK
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UsageError as e:
        log.error("%s", e)
        return USAGE
    except Exception:
        log.exception("internal error")
        return INTERNAL


if __name__ == "__main__":
    sys.exit(main())
