"""Command-line front end: ``tapaug gen|solve|compare|check``.

Exit codes: 0 ok, 1 invalid or infeasible input, 2 a check failed,
3 oracle budget exceeded.  Rationals are always printed as ``p/q``.
"""

from __future__ import annotations

import argparse
import enum
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from .certify import (FractionalAssignment, audit_solve, check_lp0, format_assignment,
                      matching_polytope_member, parse_assignment, potential, shadow_minimalize)
from .gens import FIXTURES, TightFamilyError, gen_clawpath, gen_fixture, gen_random_stemless, gen_tight
from .instance import InstanceError, Link, TapInstance, mklink, parse_instance, serialize
from .oracle import BudgetExceeded, opt_cover
from .solver import MatchingState, SolveError, solve

BUDGET_ENV = "TAPAUG_ORACLE_BUDGET"
DEFAULT_BUDGET = 1_000_000


class ExitStatus(enum.IntEnum):
    OK = 0
    INVALID_INPUT = 1
    CHECK_FAILED = 2
    BUDGET_EXCEEDED = 3


def rat(q: Fraction | int) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def default_budget() -> int:
    raw = os.environ.get(BUDGET_ENV)
    if raw is None:
        return DEFAULT_BUDGET
    try:
        return int(raw)
    except ValueError:
        raise SystemExit(f"{BUDGET_ENV} must be an integer, got {raw!r}")


def parse_matching(text: str) -> list[Link]:
    out = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3 or parts[0] != "m":
            raise InstanceError(f"expected 'm <u> <v>', got {raw.strip()!r}", lineno)
        try:
            out.append(mklink(int(parts[1]), int(parts[2])))
        except ValueError:
            raise InstanceError(f"bad node id in {raw.strip()!r}", lineno) from None
    return out


def _read_instance(path: str) -> TapInstance:
    try:
        return parse_instance(Path(path).read_text())
    except InstanceError as exc:
        where = f"{path}:{exc.line}" if exc.line else path
        raise _InputError(f"{where}: {exc}") from None


class _InputError(Exception):
    pass


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    x = None
    try:
        if args.family == "fixture":
            inst = gen_fixture(args.name)
            label = args.name
        elif args.family == "tight":
            inst = gen_tight(args.k, args.biconnected)
            label = f"tight k={args.k}" + (" biconnected" if args.biconnected else "")
        elif args.family == "clawpath":
            inst, x = gen_clawpath(args.k)
            label = f"clawpath k={args.k}"
        else:
            inst = gen_random_stemless(args.nodes, args.seed, args.links)
            label = f"random n={args.nodes} seed={args.seed}"
    except TightFamilyError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.CHECK_FAILED
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    text = serialize(inst)
    summary = f"{label}: nodes={inst.node_count} links={len(inst.links)}"
    if args.out:
        Path(args.out).write_text(text)
        summary += f" -> {args.out}"
    else:
        sys.stdout.write(text)
    if x is not None:
        xpath = args.assignment_out or (f"{args.out}.x" if args.out else None)
        if xpath:
            Path(xpath).write_text(format_assignment(x))
            summary += f" assignment -> {xpath}"
    print(summary, file=sys.stderr if not args.out else sys.stdout)
    return ExitStatus.OK


# -- solve -------------------------------------------------------------------

class _DotWriter:
    def __init__(self, directory: Path):
        self.dir = directory
        self.dir.mkdir(parents=True, exist_ok=True)
        self.step = 0

    def on_contract(self, ct, ms, kind, images, v):
        self.step += 1
        name = f"step_{self.step:03d}"
        (self.dir / f"{name}.dot").write_text(ct.to_dot(f"{name} {kind}"))

    def on_stable(self, ct, ms):
        pass


def cmd_solve(args) -> int:
    inst = _read_instance(args.instance)
    forced = None
    if args.force_matching:
        forced = parse_matching(Path(args.force_matching).read_text())
    observer = _DotWriter(Path(args.dot)) if args.dot else None
    try:
        res = solve(inst, forced, observer=observer)
    except SolveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    print(f"F={len(res.F)}")
    for u, v in sorted(res.F):
        print(f"link {u} {v}")
    print(f"matching={len(res.matching.M_original)} exposed={len(res.matching.U_original)}")
    print(f"deficient trees handled: {res.stats['deficient_handled']}")
    if args.trace:
        sys.stdout.write(res.trace_text())
    return ExitStatus.OK


# -- compare -----------------------------------------------------------------

def _compare_one(path: str, budget: int) -> tuple:
    try:
        inst = parse_instance(Path(path).read_text())
        size = len(solve(inst).F)
    except (InstanceError, SolveError) as exc:
        return (path, None, None, str(exc))
    try:
        opt = opt_cover(inst, budget).opt_size
    except BudgetExceeded:
        return (path, size, None, "budget")
    return (path, size, opt, None)


def cmd_compare(args) -> int:
    paths = list(args.instances)
    if args.dir:
        paths += sorted(str(p) for p in Path(args.dir).glob("*.tap"))
    if not paths:
        print("error: no instances given", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    budget = args.oracle_budget if args.oracle_budget is not None else default_budget()
    if args.jobs > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            rows = list(pool.map(_compare_one, paths, [budget] * len(paths)))
    else:
        rows = [_compare_one(p, budget) for p in paths]
    flagged = unknown = invalid = 0
    worst: Fraction | None = None
    print("instance\tF\tOPT\tratio\tflag")
    for path, size, opt, err in rows:
        if size is None:
            invalid += 1
            print(f"{path}\t-\t-\t-\tinvalid: {err}")
            continue
        if opt is None:
            unknown += 1
            print(f"{path}\t{size}\tunknown\tunknown\t")
            continue
        r = Fraction(size, opt)
        worst = r if worst is None else max(worst, r)
        bad = 2 * size > 3 * opt
        flagged += bad
        print(f"{path}\t{size}\t{opt}\t{rat(r)}\t{'VIOLATION' if bad else ''}")
    print(f"max_ratio={rat(worst) if worst is not None else 'unknown'} "
          f"violations={flagged} unknown={unknown} invalid={invalid}")
    if flagged:
        return ExitStatus.CHECK_FAILED
    if invalid:
        return ExitStatus.INVALID_INPUT
    if unknown == len(rows):
        return ExitStatus.BUDGET_EXCEEDED
    return ExitStatus.OK


def _fraction_arg(raw: str, flag: str) -> Fraction:
    try:
        return Fraction(raw)
    except (ValueError, ZeroDivisionError):
        raise _InputError(f"{flag} expects a rational like 1/100, got {raw!r}") from None


# -- check -------------------------------------------------------------------

def _oracle_assignment(inst: TapInstance, budget: int) -> FractionalAssignment:
    cover = opt_cover(inst, budget).cover
    return FractionalAssignment.indicator(shadow_minimalize(inst, cover))


def cmd_check(args) -> int:
    inst = _read_instance(args.instance)
    budget = args.oracle_budget if args.oracle_budget is not None else default_budget()
    if args.assignment:
        try:
            x = parse_assignment(Path(args.assignment).read_text(), inst)
        except InstanceError as exc:
            raise _InputError(f"{args.assignment}:{exc.line}: {exc}") from None
    elif args.what == "audit":
        try:
            x = _oracle_assignment(inst, budget)
        except BudgetExceeded as exc:
            print(f"error: {exc}", file=sys.stderr)
            return ExitStatus.BUDGET_EXCEEDED
    else:
        raise _InputError(f"--what {args.what} needs --assignment")
    forced = parse_matching(Path(args.force_matching).read_text()) if args.force_matching else None

    if args.what == "lp0":
        rep = check_lp0(inst, x)
        for line in rep.lines():
            print(line)
        print(f"lp0={'pass' if rep.ok else 'fail'} value={rat(x.total())}")
        return ExitStatus.OK if rep.ok else ExitStatus.CHECK_FAILED

    if args.what == "potential":
        try:
            ms = MatchingState.for_instance(inst, forced)
        except SolveError as exc:
            raise _InputError(str(exc)) from None
        eps = _fraction_arg(args.epsilon, "--epsilon")
        pot = potential(inst, x, ms.M_original, ms.U_original)
        bound = (Fraction(3, 2) + eps) * x.total()
        base = len(ms.U_original) + Fraction(3, 2) * len(ms.M_original)
        print(f"potential={rat(pot)} matching_part={rat(base)} bound={rat(bound)} epsilon={rat(eps)}")
        holds = pot <= bound
        print("inequality holds" if holds else "inequality violated")
        return ExitStatus.OK if holds else ExitStatus.CHECK_FAILED

    if args.what == "polytope":
        try:
            member = matching_polytope_member(inst, x, _fraction_arg(args.scale, "--scale"))
        except ValueError as exc:
            raise _InputError(str(exc)) from None
        print(f"polytope={'member' if member else 'outside'} scale={rat(Fraction(args.scale))}")
        return ExitStatus.OK if member else ExitStatus.CHECK_FAILED

    try:
        rep = audit_solve(inst, x, forced)
    except (ValueError, SolveError) as exc:
        raise _InputError(str(exc)) from None
    for row in rep.rows:
        print(row.line())
    for v in rep.not_good_without_deficient:
        print(f"not good and not deficient: v={v}")
    print(f"F={rep.final_total_cost} potential={rat(rep.potential)} ledger={'pass' if rep.ok else 'fail'}")
    return ExitStatus.OK if rep.ok else ExitStatus.CHECK_FAILED


# -- entry point ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tapaug", description="Stemless tree augmentation toolkit")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="write a generated instance")
    fam = g.add_subparsers(dest="family", required=True)
    f = fam.add_parser("fixture")
    f.add_argument("name", choices=FIXTURES)
    t = fam.add_parser("tight")
    t.add_argument("--k", type=int, required=True)
    t.add_argument("--biconnected", action="store_true")
    c = fam.add_parser("clawpath")
    c.add_argument("--k", type=int, required=True)
    c.add_argument("--assignment-out", help="where to write the assignment (default OUT.x)")
    r = fam.add_parser("random")
    r.add_argument("--nodes", type=int, required=True)
    r.add_argument("--seed", type=int, required=True)
    r.add_argument("--links", type=float, default=0.6, help="extra link factor")
    for p in (f, t, c, r):
        p.add_argument("-o", "--out", help="output path (default stdout)")
        p.set_defaults(func=cmd_gen)
    for p in (f, t, r):
        p.set_defaults(assignment_out=None)

    s = sub.add_parser("solve", help="run the approximation algorithm")
    s.add_argument("instance")
    s.add_argument("--trace", action="store_true")
    s.add_argument("--dot", metavar="DIR", help="write the current tree before every contraction")
    s.add_argument("--force-matching", metavar="FILE")
    s.set_defaults(func=cmd_solve)

    m = sub.add_parser("compare", help="solver size against the exact optimum")
    m.add_argument("instances", nargs="*")
    m.add_argument("--dir", help="also take every *.tap file in DIR")
    m.add_argument("--oracle-budget", type=int, default=None,
                   help=f"search-node limit (default ${BUDGET_ENV} or {DEFAULT_BUDGET})")
    m.add_argument("--jobs", type=int, default=1)
    m.set_defaults(func=cmd_compare)

    k = sub.add_parser("check", help="certify an assignment")
    k.add_argument("instance")
    k.add_argument("--what", choices=("lp0", "potential", "polytope", "audit"), required=True)
    k.add_argument("--assignment", metavar="FILE")
    k.add_argument("--epsilon", default="0")
    k.add_argument("--scale", default="1")
    k.add_argument("--force-matching", metavar="FILE")
    k.add_argument("--oracle-budget", type=int, default=None)
    k.set_defaults(func=cmd_check)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return int(args.func(args))
    except _InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    except InstanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return ExitStatus.INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
