"""Command-line front end.

Exit codes: 0 pass, 1 validation failure, 2 property counterexample,
64 bad usage or rejected input.
"""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from collections import Counter
from typing import Optional, Sequence

from . import delta_forcing as dz
from . import sba_forcing as sb
from .errors import RejectedInput, SizeLimitExceeded
from .fs_system import FIXTURES, ccc_experiment, make_fixture, star
from .morass import build_canonical, build_random
from .mutations import MUTATIONS
from .parallel import pmap
from .posets import max_antichain
from .report import Report, jsonable
from .serialize import dumps, load_json, load_morass, morass_to_doc, morass_to_dot
from .suites import (DELTA_CHECKS, delta_suite, dp_sample_suite, fs_suite, morass_suite, q_suite,
                     sba_propagation_suite, sba_suite, propagation_suite)

EXIT_OK, EXIT_FAIL, EXIT_COUNTEREXAMPLE, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


# -- output helpers ---------------------------------------------------------------

def _emit(args, text: str) -> None:
    out = getattr(args, "output", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _finish(args, doc, report: Report, fail_code: int) -> int:
    _emit(args, dumps(doc))
    return EXIT_OK if report.ok else fail_code


def _report_doc(report: Report, **extra) -> dict:
    return {**report.to_json(), **extra}


# -- morass ------------------------------------------------------------------------

def cmd_morass_gen(args) -> int:
    if args.strategy == "random":
        if args.seed is None:
            raise UsageError("--seed is required for the random strategy")
        M = build_random(args.height, args.theta_cap, args.seed)
    elif args.strategy == "custom":
        if args.deltas is None:
            raise UsageError("--deltas is required for the custom strategy")
        deltas = [None if d.strip() in ("", "-") else int(d) for d in args.deltas.split(",")]
        M = build_canonical(args.height, "custom", deltas=deltas)
    else:
        M = build_canonical(args.height)
    _emit(args, dumps(morass_to_doc(M)))
    return EXIT_OK


def cmd_morass_dot(args) -> int:
    _emit(args, morass_to_dot(load_morass(args.morass)))
    return EXIT_OK


# -- check ---------------------------------------------------------------------------

def cmd_check_morass(args) -> int:
    report = morass_suite(load_morass(args.source))
    return _finish(args, report.to_json(), report, EXIT_FAIL)


def cmd_check_fs(args) -> int:
    S = make_fixture(args.fixture, load_morass(args.morass), universe_limit=args.universe_bound)
    report = fs_suite(S)
    return _finish(args, report.to_json(), report, EXIT_FAIL)


def cmd_check_delta(args) -> int:
    M = load_morass(args.morass)
    p = dz.DeltaCondition.from_json(load_json(args.condition))
    if any(x >= M.top_width for x in p.points):
        raise RejectedInput(f"condition uses ordinals at or above the top width {M.top_width}")
    report = Report("delta-condition")
    char = dz.member_char(M, p)
    rec = dz.member(M, M.top_width, p)
    report.add("member", char, "closed-form membership")
    report.add("recursion-agrees", rec == char, f"recursive membership {rec}")
    dp, dt = dz.compute_Dp(M, p), dz.compute_Dp(M, p, "tree")
    report.add("dp-agrees", dp == dt, "definitional and tree forms", {"tree": dt} if dp != dt else None)
    doc = _report_doc(report, condition=p.to_json(), Dp=sorted(dp))
    return _finish(args, doc, report, EXIT_FAIL)


def cmd_check_sba(args) -> int:
    M = load_morass(args.morass)
    p = sb.SpoCondition.from_json(load_json(args.condition))
    if any(x >= M.top_width for x in p.x):
        raise RejectedInput(f"condition uses ordinals at or above the top width {M.top_width}")
    report = sb.validate_cond(p, args.reading)
    report.subject = "spo-condition"
    char = sb.member_char(M, p, reading=args.reading)
    rec = sb.member(M, M.top_width, p, reading=args.reading)
    report.add("member", char, "closed-form membership")
    report.add("recursion-agrees", rec == char, f"recursive membership {rec}")
    doc = _report_doc(report, condition=p.to_json(), reading=args.reading)
    return _finish(args, doc, report, EXIT_FAIL)


# -- experiments --------------------------------------------------------------------------

def cmd_exp_propagation(args) -> int:
    S = make_fixture(args.fixture, load_morass(args.morass), universe_limit=args.universe_bound)
    report = propagation_suite(S)
    return _finish(args, report.to_json(), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_dense(args) -> int:
    S = make_fixture(args.fixture, load_morass(args.morass), universe_limit=args.universe_bound)
    report = q_suite(S)
    return _finish(args, report.to_json(), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_ccc(args) -> int:
    S = make_fixture(args.fixture, load_morass(args.morass), universe_limit=args.universe_bound)
    res = ccc_experiment(S, args.trials, args.family_size, args.seed, args.target)
    report = Report(f"ccc:{S.name}")
    report.add("recipe", res["COUNTEREXAMPLE"] == 0,
               f"{res['confirmed']} confirmed, {res['COUNTEREXAMPLE']} counterexamples",
               res["counterexamples"][0] if res["counterexamples"] else None)
    return _finish(args, _report_doc(report, result=res), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_generic(args) -> int:
    M = load_morass(args.morass)
    run = dz.generic_simulate(M, args.seed, args.steps)
    return _finish(args, run.to_json(), run.report, EXIT_COUNTEREXAMPLE)


def cmd_exp_order_generic(args) -> int:
    M = load_morass(args.morass)
    run = sb.generic_union_check(M, args.seed, args.steps, args.block, args.reading)
    if args.format == "dot":
        _emit(args, sb.order_to_dot(run.order))
        return EXIT_OK if run.report.ok else EXIT_COUNTEREXAMPLE
    return _finish(args, run.to_json(), run.report, EXIT_COUNTEREXAMPLE)


def cmd_exp_delta_lemmas(args) -> int:
    M = load_morass(args.morass)
    checks = tuple(args.checks.split(",")) if args.checks else DELTA_CHECKS
    unknown = set(checks) - set(DELTA_CHECKS)
    if unknown:
        raise UsageError(f"unknown checks {sorted(unknown)}; choose from {list(DELTA_CHECKS)}")
    report = delta_suite(M, args.max_a, args.max_b, args.colors, checks=checks)
    return _finish(args, report.to_json(), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_sba_lemmas(args) -> int:
    M = load_morass(args.morass)
    report = sba_suite(M, args.max_x, args.block, reading=args.reading, seed=args.seed, steps=args.steps)
    if args.propagation:
        report.extend(sba_propagation_suite(M, args.block, args.reading))
    return _finish(args, report.to_json(), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_dp(args) -> int:
    report = dp_sample_suite(load_morass(args.morass), args.samples, args.seed)
    return _finish(args, report.to_json(), report, EXIT_COUNTEREXAMPLE)


def cmd_exp_antichain(args) -> int:
    M = load_morass(args.morass)
    P = dz.enumerate_poset(M, args.max_a, args.max_b, args.colors)
    bound = max_antichain(P, args.cutoff)
    doc = {"members": len(P), "antichain": bound.to_json(), "witness": list(bound.witness)}
    _emit(args, dumps(doc))
    return EXIT_OK


# -- enumerate ------------------------------------------------------------------------------

def cmd_enum_delta(args) -> int:
    M = load_morass(args.morass)
    members = dz.enumerate_members(M, args.max_a, args.max_b, args.colors)
    _emit(args, dumps({"count": len(members), "members": sorted((p.to_json() for p in members), key=dumps)}))
    return EXIT_OK


def cmd_enum_sba(args) -> int:
    M = load_morass(args.morass)
    members = sb.enumerate_members(M, args.max_x, args.block, reading=args.reading)
    _emit(args, dumps({"count": len(members), "members": sorted((p.to_json() for p in members), key=dumps)}))
    return EXIT_OK


# -- mutations ------------------------------------------------------------------------------

def cmd_mutate_list(args) -> int:
    rows = [{"name": m.name, "suite": m.verb, "expected": list(m.expected), "summary": m.summary}
            for m in MUTATIONS.values()]
    _emit(args, dumps(rows))
    return EXIT_OK


def cmd_mutate_run(args) -> int:
    try:
        mutation = MUTATIONS[args.name]
    except KeyError:
        raise UsageError(f"unknown mutation {args.name!r}; see 'mutate list'") from None
    report, code = mutation.execute(args.seed)
    first = report.first_failure()
    doc = _report_doc(report, mutation=mutation.name, seed=args.seed,
                      detected=code != 0, expected=list(mutation.expected),
                      named=first.name if first else None)
    _emit(args, dumps(doc))
    return code


# -- report ----------------------------------------------------------------------------------

def _suite_job(job):
    kind, M = job
    if kind == "morass":
        return morass_suite(M)
    if kind in FIXTURES:
        S = make_fixture(kind, M)
        rep = fs_suite(S)
        if kind != "plain-cohen":
            rep.extend(propagation_suite(S))
        return rep
    if kind == "delta":
        return delta_suite(M, 1, 1, 2)
    if kind == "sba":
        return sba_suite(M, 2)
    raise RejectedInput(f"unknown report job {kind!r}")


def _write_csv(path: str, rows: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    writer.writeheader()
    writer.writerows(rows)
    with open(path, "w", newline="") as fh:
        fh.write(buf.getvalue())
    return buf.getvalue()


def cmd_report(args) -> int:
    from .plotting import plot_members, plot_supports, plot_widths

    M = load_morass(args.morass)
    os.makedirs(args.output_dir, exist_ok=True)
    h = M.height

    levels = [{"level": a, "theta": M.thetas[a],
               "maps_to_top": len(M.family_or_id(a, h)),
               "split_point": M.delta(a) if a < h and M.is_successor(a) else ""}
              for a in range(h + 1)]
    levels[-1]["maps_to_top"] = 1

    fixtures = ["subset", "harmonized-cohen"]
    supports: dict[str, dict[int, int]] = {}
    support_rows = []
    for name in fixtures:
        S = make_fixture(name, M)
        counts = Counter(len(star(S, p).supp) for p in S.universe(S.top))
        supports[name] = dict(counts)
        support_rows += [{"fixture": name, "support_size": k, "conditions": v}
                         for k, v in sorted(counts.items())]

    member_rows = []
    for colors in range(1, args.max_colors + 1):
        conds = list(dz.all_conditions(M.top_width, 2, 1, colors))
        P = dz.enumerate_poset(M, 2, 1, colors)
        member_rows.append({"colors": colors, "max_a": 2, "max_b": 1,
                            "conditions": len(conds), "members": len(P),
                            "antichain": max_antichain(P).value})

    jobs = [("morass", M)] + [(name, M) for name in fixtures] + [("delta", M), ("sba", M)]
    reports = pmap(_suite_job, jobs)
    summary = [{"suite": r.subject, "check": c.name, "passed": c.passed, "detail": c.detail}
               for r in reports for c in r.checks]

    out = args.output_dir
    text = _write_csv(os.path.join(out, "summary.csv"), summary)
    _write_csv(os.path.join(out, "levels.csv"), levels)
    _write_csv(os.path.join(out, "supports.csv"), support_rows)
    _write_csv(os.path.join(out, "members.csv"), member_rows)
    plot_widths(levels, os.path.join(out, "widths.png"))
    plot_supports(supports, os.path.join(out, "supports.png"))
    plot_members(member_rows, os.path.join(out, "members.png"))
    sys.stdout.write(text)
    return EXIT_OK if all(r.ok for r in reports) else EXIT_FAIL


# -- parser ----------------------------------------------------------------------------------

def _add_morass(p, required=True):
    p.add_argument("--morass", required=required,
                   help="morass document path, or builtin M<h> / doubling:<h>")


def _add_fixture(p):
    p.add_argument("--fixture", required=True, choices=sorted(FIXTURES))
    _add_morass(p)
    p.add_argument("--universe-bound", type=int, default=5000,
                   help="largest per-level condition universe to enumerate")


def _add_output(p):
    p.add_argument("--output", help="write to this file instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morass-forcing",
                     description="Finite morasses, FS systems and morass-recursive forcings.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    # morass
    pm = sub.add_parser("morass", help="generate or draw morasses")
    msub = pm.add_subparsers(dest="action", required=True, parser_class=_Parser)
    g = msub.add_parser("gen", help="emit a morass document")
    g.add_argument("--height", type=int, required=True)
    g.add_argument("--strategy", choices=["doubling", "random", "custom"], default="doubling")
    g.add_argument("--seed", type=int, help="required for --strategy random")
    g.add_argument("--theta-cap", type=int, default=64, help="preferred width cap for random morasses")
    g.add_argument("--deltas", help="comma-separated split points for custom; '-' for an identity level")
    _add_output(g)
    g.set_defaults(func=cmd_morass_gen)
    d = msub.add_parser("dot", help="draw the morass tree in DOT")
    _add_morass(d)
    _add_output(d)
    d.set_defaults(func=cmd_morass_dot)

    # check
    pc = sub.add_parser("check", help="validate a structure or condition (exit 1 on failure)")
    csub = pc.add_subparsers(dest="target", required=True, parser_class=_Parser)
    c = csub.add_parser("morass", help="axioms, coherence and tree checks")
    c.add_argument("source", help="morass document path or builtin name")
    _add_output(c)
    c.set_defaults(func=cmd_check_morass)
    c = csub.add_parser("fs", help="system axioms for a fixture")
    _add_fixture(c)
    _add_output(c)
    c.set_defaults(func=cmd_check_fs)
    c = csub.add_parser("delta", help="membership of a colored-pair condition")
    c.add_argument("condition", help="condition document path")
    _add_morass(c)
    _add_output(c)
    c.set_defaults(func=cmd_check_delta)
    c = csub.add_parser("sba", help="clauses and membership of a finite order condition")
    c.add_argument("condition", help="condition document path")
    _add_morass(c)
    c.add_argument("--reading", choices=["lower", "upper"], default="lower",
                   help="compatibility means a common lower (default) or upper bound")
    _add_output(c)
    c.set_defaults(func=cmd_check_sba)

    # experiment
    pe = sub.add_parser("experiment", help="exhaustive or seeded experiments (exit 2 on counterexample)")
    esub = pe.add_subparsers(dest="experiment", required=True, parser_class=_Parser)
    e = esub.add_parser("propagation", aliases=["thm32"],
                        help="compatibility from the top common support level, all pairs")
    _add_fixture(e)
    _add_output(e)
    e.set_defaults(func=cmd_exp_propagation)
    e = esub.add_parser("dense", help="support-restricted poset and its dense embedding")
    _add_fixture(e)
    _add_output(e)
    e.set_defaults(func=cmd_exp_dense)
    e = esub.add_parser("ccc", help="sunflower recipe on sampled families")
    _add_fixture(e)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--trials", type=int, default=200)
    e.add_argument("--family-size", type=int, default=8)
    e.add_argument("--target", type=int, default=2, help="smallest sunflower to accept")
    _add_output(e)
    e.set_defaults(func=cmd_exp_ccc)
    e = esub.add_parser("generic", help="generic coloring built from a descending chain")
    _add_morass(e)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--steps", type=int, default=50)
    _add_output(e)
    e.set_defaults(func=cmd_exp_generic)
    e = esub.add_parser("order-generic", help="generic order built from a descending chain")
    _add_morass(e)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--steps", type=int, default=50)
    e.add_argument("--block", type=int, default=2)
    e.add_argument("--reading", choices=["lower", "upper"], default="lower")
    e.add_argument("--format", choices=["json", "dot"], default="json")
    _add_output(e)
    e.set_defaults(func=cmd_exp_order_generic)
    e = esub.add_parser("delta-lemmas", help="colored-pair forcing checks on a truncated universe")
    _add_morass(e)
    e.add_argument("--max-a", type=int, default=2)
    e.add_argument("--max-b", type=int, default=2)
    e.add_argument("--colors", type=int, default=2)
    e.add_argument("--checks", help=f"comma-separated subset of {','.join(DELTA_CHECKS)}")
    _add_output(e)
    e.set_defaults(func=cmd_exp_delta_lemmas)
    e = esub.add_parser("sba-lemmas", help="finite order forcing checks on a truncated universe")
    _add_morass(e)
    e.add_argument("--max-x", type=int, default=3)
    e.add_argument("--block", type=int, default=2)
    e.add_argument("--reading", choices=["lower", "upper"], default="lower")
    e.add_argument("--seed", type=int, default=1)
    e.add_argument("--steps", type=int, default=50)
    e.add_argument("--propagation", action="store_true",
                   help="also check compatibility propagation over the full universe")
    _add_output(e)
    e.set_defaults(func=cmd_exp_sba_lemmas)
    e = esub.add_parser("dp", help="both forms of the level set D_p on sampled members")
    _add_morass(e)
    e.add_argument("--seed", type=int, required=True)
    e.add_argument("--samples", type=int, default=10_000)
    _add_output(e)
    e.set_defaults(func=cmd_exp_dp)
    e = esub.add_parser("antichain", help="largest antichain of a truncated colored-pair poset")
    _add_morass(e)
    e.add_argument("--max-a", type=int, default=1)
    e.add_argument("--max-b", type=int, default=1)
    e.add_argument("--colors", type=int, default=2)
    e.add_argument("--cutoff", type=int, default=None)
    _add_output(e)
    e.set_defaults(func=cmd_exp_antichain)

    # enumerate
    pn = sub.add_parser("enumerate", help="list members of a truncated universe")
    nsub = pn.add_subparsers(dest="forcing", required=True, parser_class=_Parser)
    n = nsub.add_parser("delta")
    _add_morass(n)
    n.add_argument("--max-a", type=int, default=1)
    n.add_argument("--max-b", type=int, default=1)
    n.add_argument("--colors", type=int, default=2)
    _add_output(n)
    n.set_defaults(func=cmd_enum_delta)
    n = nsub.add_parser("sba")
    _add_morass(n)
    n.add_argument("--max-x", type=int, default=3)
    n.add_argument("--block", type=int, default=2)
    n.add_argument("--reading", choices=["lower", "upper"], default="lower")
    _add_output(n)
    n.set_defaults(func=cmd_enum_sba)

    # mutate
    pu = sub.add_parser("mutate", help="run deliberately broken variants")
    usub = pu.add_subparsers(dest="action", required=True, parser_class=_Parser)
    u = usub.add_parser("list")
    _add_output(u)
    u.set_defaults(func=cmd_mutate_list)
    u = usub.add_parser("run")
    u.add_argument("name")
    u.add_argument("--seed", type=int, required=True)
    _add_output(u)
    u.set_defaults(func=cmd_mutate_run)

    # report
    pr = sub.add_parser("report", help="CSV tables and PNG figures for one morass")
    _add_morass(pr)
    pr.add_argument("--output-dir", required=True)
    pr.add_argument("--max-colors", type=int, default=3)
    pr.set_defaults(func=cmd_report)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"morass-forcing: error: {exc}\n")
        return EXIT_USAGE
    except SizeLimitExceeded as exc:
        sys.stderr.write(f"morass-forcing: error: {exc} (estimate {exc.estimate})\n")
        return EXIT_USAGE
    except RejectedInput as exc:
        witness = getattr(exc, "witness", None)
        sys.stderr.write(f"morass-forcing: error: {exc}\n")
        if witness is not None:
            sys.stderr.write(dumps({"witness": jsonable(witness)}))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
