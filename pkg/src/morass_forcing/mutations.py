"""Deliberately broken variants of the library, each paired with the suite
expected to catch it.

Running a mutation yields the suite's report and the exit code the CLI would
give for it: 1 for ``check`` suites, 2 for ``experiment`` suites.
"""

from __future__ import annotations

import functools
import random
from dataclasses import dataclass
from typing import Callable

from . import delta_forcing as dz
from . import sba_forcing as sb
from .fs_system import CohenFS, SubsetFS
from .morass import Amalgam, Morass, Successor, TreeNode, build_canonical
from .ordinals import OrderMap
from .report import Report
from .suites import delta_suite, fs_suite, morass_suite, q_suite, sba_suite, propagation_suite

EXIT_CODES = {"check": 1, "experiment": 2}


@dataclass(frozen=True)
class Mutation:
    name: str
    summary: str
    verb: str  # the CLI verb family of the detecting suite
    expected: tuple[str, ...]  # checks that must fail; one of them fails first
    run: Callable[[int], Report]

    def execute(self, seed: int) -> tuple[Report, int]:
        report = self.run(seed)
        return report, 0 if report.ok else EXIT_CODES[self.verb]


def _base(seed: int) -> Morass:
    return build_canonical(2 + seed % 3)


def _replace_step(M: Morass, alpha: int, step) -> Morass:
    steps = list(M.steps)
    steps[alpha] = step
    return Morass(M.thetas, steps)


# -- morass ------------------------------------------------------------------

def non_increasing(seed: int) -> Report:
    M = _base(seed)
    rng = random.Random(seed)
    alpha = rng.randrange(1, M.height)
    vals = list(M.steps[alpha].f)
    i = rng.randrange(len(vals) - 1)
    vals[i], vals[i + 1] = vals[i + 1], vals[i]
    return morass_suite(_replace_step(M, alpha, Successor(M.delta(alpha), tuple(vals))))


def identity_split(seed: int) -> Report:
    M = _base(seed)
    alpha = random.Random(seed).randrange(M.height)
    return morass_suite(_replace_step(M, alpha, Successor(M.delta(alpha), tuple(range(M.thetas[alpha])))))


def wide_base(seed: int) -> Report:
    M = _base(seed)
    return morass_suite(Morass((2,) + M.thetas[1:], M.steps))


def coverage_gap(seed: int) -> Report:
    """Widen the top level by one and shift the split map past the new slot."""
    M = _base(seed)
    h = M.height
    theta = M.thetas[h - 1]
    d = random.Random(seed).randrange(theta)
    vals = tuple(g if g < d else g + theta - d + 1 for g in range(theta))
    steps = list(M.steps[:-1]) + [Successor(d, vals)]
    thetas = M.thetas[:-1] + (2 * theta - d + 1,)
    return morass_suite(Morass(thetas, steps))


def incoherent_amalgam(seed: int) -> Report:
    """Amalgam level whose maps overlap with a shift, so two arguments share a value."""
    M = _base(seed)
    w = M.top_width
    shift = 1 + random.Random(seed).randrange(w - 1)
    fam = (tuple(range(w)), tuple(range(shift, shift + w)))
    return morass_suite(Morass(M.thetas + (w + shift,), M.steps + (Amalgam(fam),)))


class _FlippedPi(Morass):
    def __init__(self, thetas, steps, s, t, value):
        super().__init__(thetas, steps)
        self._target = (s, t)
        self._value = value

    def pi(self, s: TreeNode, t: TreeNode) -> OrderMap:
        p = super().pi(s, t)
        if (s, t) != self._target:
            return p
        return OrderMap(p.src_bound, p.dst_bound, p.values[:-1] + (self._value,))


def pi_flip(seed: int) -> Report:
    """Move the last value of one top-level tree map to another legal spot."""
    M = _base(seed)
    options = []
    for t in M.nodes(M.height):
        for s in M.predecessors(t):
            vals = M.pi(s, t).values
            lo = vals[-2] + 1 if len(vals) > 1 else 0
            options += [(s, t, v) for v in range(lo, M.top_width) if v != vals[-1]]
    s, t, v = random.Random(seed).choice(options)
    return morass_suite(_FlippedPi(M.thetas, M.steps, s, t, v))


# -- FS systems ------------------------------------------------------------------

class _IdentityLeaks(SubsetFS):
    """Node maps along identity ``pi`` add an extra point."""

    name = "identity-leaks"

    def __init__(self, M, extra: int):
        super().__init__(M)
        self.extra = extra

    def sigma(self, s, t, p):
        out = super().sigma(s, t, p)
        if s != t and self.M.pi_or_id(s, t).is_identity() and self.extra <= s.index:
            return out | {self.extra}
        return out


def broken_identity_sigma(seed: int) -> Report:
    return fs_suite(_IdentityLeaks(build_canonical(2), seed % 2))


def plain_cohen(seed: int) -> Report:
    return propagation_suite(CohenFS(build_canonical(2), harmonized=False))


class _ForgetfulCohen(CohenFS):
    def e(self, alpha, p):
        return frozenset()


def forgetful_retraction(seed: int) -> Report:
    return propagation_suite(_ForgetfulCohen(build_canonical(2 + seed % 2)))


class _ComplementSubset(SubsetFS):
    name = "complement-subset"

    def e(self, alpha, p):
        return frozenset(range(self.M.thetas[alpha])) - super().e(alpha, p)


def non_monotone_retraction(seed: int) -> Report:
    return q_suite(_ComplementSubset(build_canonical(2 + seed % 2)))


# -- colored-pair forcing ----------------------------------------------------------

def _small_delta(seed: int, checks, **kw) -> Report:
    return delta_suite(build_canonical(2), 2, 2, 2 + seed % 2, checks=checks, **kw)


def no_injectivity(seed: int) -> Report:
    return _small_delta(seed, ("equivalence",),
                        member_fn=functools.partial(dz.member, rectangle_check=False))


def no_extension(seed: int) -> Report:
    return _small_delta(seed, ("order",), order=functools.partial(dz.leq, require_extension=False))


def shifted_split(seed: int) -> Report:
    return _small_delta(seed, ("equivalence",), char_fn=functools.partial(dz.member_char, delta_shift=1))


def stale_colors(seed: int) -> Report:
    color = seed % 2

    def amalgam(M, p, q):
        known = {**p.colors, **q.colors}
        return dz.DeltaCondition.make(p.a | q.a, p.b | q.b,
                                      {pr: known.get(pr, color) for pr in dz.bracket(p.a | q.a, p.b | q.b)})

    return _small_delta(seed, ("amalgamation",), amalgam_fn=amalgam)


# -- partial-order forcing -----------------------------------------------------------

def no_successor_bound(seed: int) -> Report:
    return sba_suite(build_canonical(2), 3, seed=seed,
                     member_fn=functools.partial(sb.member, successor_clause=False))


def loose_amalgam(seed: int) -> Report:
    """Union of both orders without the closure or the post-checks."""
    def amalgam(M, p, q, reading):
        return sb.SpoCondition(p.x | q.x, p.lt | q.lt, p.B)
    return sba_suite(build_canonical(2), 3, seed=seed, amalgam_fn=amalgam)


MUTATIONS: dict[str, Mutation] = {m.name: m for m in [
    Mutation("non-increasing-map", "swap two adjacent values of a split map", "check", ("P0b",),
             non_increasing),
    Mutation("identity-split", "replace a split map by the identity", "check", ("P3", "P5"), identity_split),
    Mutation("wide-base", "start from a level of width 2", "check", ("P0a",), wide_base),
    Mutation("coverage-gap", "leave one top ordinal outside every range", "check", ("P5",), coverage_gap),
    Mutation("incoherent-amalgam", "amalgam maps that collide on a value", "check", ("P4", "coherence"),
             incoherent_amalgam),
    Mutation("pi-flip", "change one value of one tree map", "check", ("pi-commutativity",), pi_flip),
    Mutation("identity-sigma-leak", "node maps along identity tree maps add a point", "check", ("FS2", "FS5"),
             broken_identity_sigma),
    Mutation("plain-cohen", "drop the harmonizing thinning of the Cohen fixture", "experiment",
             ("propagation",), plain_cohen),
    Mutation("forgetful-retraction", "retractions return the empty condition", "experiment",
             ("propagation",), forgetful_retraction),
    Mutation("non-monotone-retraction", "retractions return the complement", "experiment", ("monotone",),
             non_monotone_retraction),
    Mutation("no-injectivity", "skip the rectangle injectivity clause in the recursion", "experiment",
             ("equivalence",), no_injectivity),
    Mutation("no-extension", "order no longer demands that colors are kept", "experiment",
             ("order-transitive", "order-union-functional"), no_extension),
    Mutation("shifted-split", "closed form reads the rectangle one column late", "experiment",
             ("equivalence",), shifted_split),
    Mutation("stale-colors", "amalgam fills gaps with a fixed color", "experiment", ("amalgamation",),
             stale_colors),
    Mutation("no-successor-bound", "drop the one-new-successor clause of the order recursion",
             "experiment", ("equivalence",), no_successor_bound),
    Mutation("loose-amalgam", "order amalgam skips transitive closure and checks", "experiment",
             ("amalgamation",), loose_amalgam),
]}
