"""Exhaustive verification suites over truncated universes.

Each suite returns a :class:`Report`.  The functions it exercises are
parameters so that mutation runs can swap in a broken variant and watch the
suite catch it.
"""

from __future__ import annotations

import itertools
import random
from typing import Callable, Optional

from . import delta_forcing as dz
from . import sba_forcing as sb
from .errors import RejectedInput
from .fs_system import FSSystem, build_Q, sweep_propagation, validate_fs
from .morass import Morass, check_tree, validate
from .report import Report


def morass_suite(M: Morass) -> Report:
    report = validate(M)
    if report.ok:
        report.extend(check_tree(M))
    return report


def fs_suite(S: FSSystem) -> Report:
    return validate_fs(S)


def propagation_suite(S: FSSystem) -> Report:
    sweep = sweep_propagation(S)
    report = Report(f"propagation:{S.name}")
    report.add("propagation", not sweep.counterexamples,
               f"{sweep.pairs} pairs, {sweep.confirmed} confirmed, "
               f"{sweep.hypothesis_false} without hypothesis, {len(sweep.counterexamples)} counterexamples",
               sweep.counterexamples[0] if sweep.counterexamples else None)
    return report


def q_suite(S: FSSystem) -> Report:
    try:
        res = build_Q(S)
    except RejectedInput as exc:
        report = Report(f"Q:{S.name}")
        report.add("monotone", False, str(exc), getattr(exc, "witness", None))
        return report
    report = Report(res.report.subject)
    report.add("monotone", True, "retractions are monotone")
    report.extend(res.report)
    return report


# -- colored-pair forcing ----------------------------------------------------------

DELTA_CHECKS = ("equivalence", "order", "dp", "pullback", "propagation", "amalgamation", "density")


def delta_suite(M: Morass, max_a: int = 2, max_b: int = 2, color_bound: int = 2, *,
                checks=DELTA_CHECKS,
                member_fn: Callable = dz.member,
                char_fn: Callable = dz.member_char,
                order: Callable = dz.leq,
                amalgam_fn: Callable = dz.amalgamate) -> Report:
    """Run the selected lemma checks on the universe of conditions with
    ``|a| <= max_a``, ``|b| <= max_b`` and colors below ``color_bound``."""
    report = Report(f"delta:{list(M.thetas)}")
    width, h = M.top_width, M.height
    conds = list(dz.all_conditions(width, max_a, max_b, color_bound))
    members = [p for p in conds if char_fn(M, p)]

    if "equivalence" in checks:
        bad = next((p for p in conds if member_fn(M, width, p) != char_fn(M, p)), None)
        report.add("equivalence", bad is None,
                   f"{len(conds)} conditions, {len(members)} members by the closed form",
                   None if bad is None else {"p": bad, "recursive": member_fn(M, width, bad)})

    if "order" in checks:
        for c in dz.check_order(members, order).checks:
            report.add(f"order-{c.name}", c.passed, c.detail, c.witness)

    if "dp" in checks:
        bad = next((p for p in members
                    if dz.compute_Dp(M, p) != dz.compute_Dp(M, p, "tree")), None)
        report.add("dp", bad is None, "definitional and tree forms agree",
                   None if bad is None else {"p": bad, "definitional": dz.compute_Dp(M, bad),
                                             "tree": dz.compute_Dp(M, bad, "tree")})

    if "pullback" in checks:
        bad = None
        for p in members:
            for alpha in range(h):
                for f in M.family(alpha, h):
                    if not member_fn(M, M.thetas[alpha], dz.pull(f, p)):
                        bad = {"p": p, "level": alpha, "map": list(f.values)}
                        break
                if bad:
                    break
            if bad:
                break
        report.add("pullback", bad is None, "pullbacks of members are members below", bad)

    if "propagation" in checks:
        hyp = 0
        bad = None
        for r in range(1, width + 1):
            for D in itertools.combinations(range(width), r):
                D = frozenset(D)
                local = [p for p in members if p.a <= D]
                stars = {p: dz.star_delta(M, p, D) for p in local}
                for p, q in itertools.combinations_with_replacement(local, 2):
                    alpha = max(stars[p].supp & stars[q].supp)
                    if not dz.compatible(M, stars[p].values[alpha], stars[q].values[alpha]):
                        continue
                    hyp += 1
                    if not dz.compatible(M, p, q):
                        bad = {"root": D, "p": p, "q": q, "level": alpha}
                        break
                if bad:
                    break
            if bad:
                break
        report.add("propagation", bad is None,
                   f"{hyp} pairs with compatible pieces at the top common support level", bad)

    if "amalgamation" in checks:
        n = 0
        bad = None
        for p, q in itertools.combinations_with_replacement(members, 2):
            if dz.amalgamation_problem(M, p, q) is not None:
                continue
            n += 1
            try:
                r = amalgam_fn(M, p, q)
            except RejectedInput as exc:
                bad = {"p": p, "q": q, "error": str(exc)}
                break
            if not (char_fn(M, r) and order(r, p) and order(r, q)):
                bad = {"p": p, "q": q, "amalgam": r}
                break
        report.add("amalgamation", bad is None, f"{n} pairs meet the hypotheses", bad)

    if "density" in checks:
        bad = None
        for p in members:
            for x, y in itertools.product(range(width), repeat=2):
                q = dz.extend(M, p, x, y)
                if not (x in q.a and y in q.b and char_fn(M, q) and order(q, p)):
                    bad = {"p": p, "target": [x, y], "extension": q}
                    break
            if bad:
                break
        report.add("density", bad is None,
                   f"{len(members)} members extended to every pair below {width}", bad)
    return report


def random_members(M: Morass, count: int, seed: int, max_size: int = 3,
                   color_bound: int = 5) -> list:
    """Seeded sample of members: random supports, random small colors,
    rejection by the closed form."""
    rng = random.Random(seed)
    width = M.top_width
    out = []
    while len(out) < count:
        a = rng.sample(range(width), rng.randint(0, min(max_size, width)))
        b = rng.sample(range(width), rng.randint(0, min(max_size, width)))
        p = dz.DeltaCondition.make(a, b, {pr: rng.randrange(color_bound) for pr in dz.bracket(a, b)})
        if dz.member_char(M, p):
            out.append(p)
    return out


def dp_sample_suite(M: Morass, count: int, seed: int) -> Report:
    report = Report(f"dp:{list(M.thetas)}")
    sample = random_members(M, count, seed)
    bad = next((p for p in sample if dz.compute_Dp(M, p) != dz.compute_Dp(M, p, "tree")), None)
    report.add("dp", bad is None, f"{count} sampled members", bad)
    return report


# -- partial-order forcing ----------------------------------------------------------

def _infimum_oracle(p: sb.SpoCondition, reading: str) -> Optional[list]:
    """Clause (c) recomputed from scratch: explicit down-sets, explicit greatest
    element.  Returns a failing pair or None."""
    def le(u, v):
        return u == v or (u, v) in p.lt
    if reading == "upper":
        le = (lambda base: (lambda u, v: base(v, u)))(le)
    for u, v in itertools.combinations(sorted(p.x), 2):
        common = [w for w in p.x if le(w, u) and le(w, v)]
        if common and not any(all(le(w, g) for w in common) for g in common):
            return [u, v]
    return None


def sba_suite(M: Morass, max_x: int = 3, B: int = 2, *, reading: str = "lower",
              seed: int = 1, steps: int = 50,
              member_fn: Callable = sb.member,
              amalgam_fn: Callable = sb.amalgamate) -> Report:
    report = Report(f"spo:{list(M.thetas)}")
    width = M.top_width
    orders = list(sb.all_orders(width, max_x, B))

    bad = None
    for p in orders:
        rep = sb.validate_cond(p, reading)
        if (rep["c"].passed, rep["a"].passed) != (_infimum_oracle(p, reading) is None,
                                                  all(u < v for u, v in p.lt)):
            bad = p
            break
    report.add("clauses", bad is None, f"{len(orders)} orders agree with a direct recount", bad)

    bad = next((p for p in orders
                if member_fn(M, width, p, reading=reading) != sb.member_char(M, p, reading=reading)), None)
    members = [p for p in orders if sb.member_char(M, p, reading=reading)]
    report.add("equivalence", bad is None, f"{len(orders)} orders, {len(members)} members", bad)

    ok = rejected = 0
    bad = None
    for p, q in itertools.combinations_with_replacement(members, 2):
        try:
            r = amalgam_fn(M, p, q, reading)
        except RejectedInput:
            rejected += 1
            continue
        ok += 1
        if not (sb.is_valid(r, reading) and sb.member_char(M, r, reading=reading)
                and sb.leq(r, p, reading) and sb.leq(r, q, reading)):
            bad = {"p": p, "q": q, "amalgam": r}
            break
    report.add("amalgamation", bad is None, f"{ok} amalgams verified, {rejected} rejected", bad)

    run = sb.generic_union_check(M, seed, steps, B, reading)
    for c in run.report.checks:
        report.add(f"generic-{c.name}", c.passed, c.detail, c.witness, c.applicable)
    return report


def sba_propagation_suite(M: Morass, B: int = 2, reading: str = "lower") -> Report:
    """Compatible pieces at the top common support level imply compatibility,
    judged by brute force in the full universe of each level."""
    report = Report(f"spo-propagation:{list(M.thetas)}")
    width = M.top_width
    top = sb.enumerate_members(M, width, B, reading=reading)
    levels = {a: sb.enumerate_members(M, M.thetas[a], B, width=M.thetas[a], reading=reading)
              for a in range(M.height + 1)}
    hyp = 0
    bad = None
    for r in range(1, width + 1):
        for D in itertools.combinations(range(width), r):
            local = [p for p in top if sb.encode(p).a <= set(D)]
            stars = {p: sb.star_spo(M, p, D) for p in local}
            for p, q in itertools.combinations_with_replacement(local, 2):
                alpha = max(stars[p].supp & stars[q].supp)
                if not sb.compatible_in(levels[alpha], stars[p].values[alpha],
                                        stars[q].values[alpha], reading):
                    continue
                hyp += 1
                if not sb.compatible_in(top, p, q, reading):
                    bad = {"root": list(D), "p": p, "q": q, "level": alpha}
                    break
            if bad:
                break
        if bad:
            break
    report.add("propagation", bad is None, f"{hyp} pairs meet the hypothesis", bad)
    return report
