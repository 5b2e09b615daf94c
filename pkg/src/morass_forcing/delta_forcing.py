"""Colored-pair conditions thinned along a morass.

A condition is ``(a, b, f)`` where ``f`` colors every pair ``(x, y)`` with
``x`` in ``a``, ``y`` in ``b`` and ``y < x``.  Membership at a successor level
demands that both pullbacks are members one level down and that the colors
on the rectangle ``new part x [delta, old width)`` are pairwise distinct.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Optional, Sequence

from .errors import RejectedInput, SizeLimitExceeded
from .morass import Morass, TreeNode
from .ordinals import OrderMap, preimage, pullback
from .posets import FinitePoset
from .report import Report

ENUMERATION_LIMIT = 500_000


def bracket(a: Iterable[int], b: Iterable[int]) -> list[tuple[int, int]]:
    """Pairs ``(x, y)`` with ``x`` in ``a``, ``y`` in ``b`` and ``y < x``, sorted."""
    bs = sorted(b)
    return [(x, y) for x in sorted(a) for y in bs if y < x]


@dataclass(frozen=True)
class DeltaCondition:
    a: frozenset
    b: frozenset
    f: tuple  # sorted (x, y, color) triples

    def __post_init__(self):
        object.__setattr__(self, "a", frozenset(self.a))
        object.__setattr__(self, "b", frozenset(self.b))
        triples = tuple(sorted((int(x), int(y), int(c)) for x, y, c in self.f))
        object.__setattr__(self, "f", triples)
        dom = [(x, y) for x, y, _ in triples]
        if dom != bracket(self.a, self.b):
            raise RejectedInput(f"colored pairs {dom} do not match the bracket of a={sorted(self.a)}, b={sorted(self.b)}")
        if any(c < 0 for _, _, c in triples):
            raise RejectedInput("colors must be non-negative")

    @classmethod
    def make(cls, a: Iterable[int], b: Iterable[int],
             colors: Mapping[tuple[int, int], int] = None) -> "DeltaCondition":
        colors = colors or {}
        return cls(frozenset(a), frozenset(b), tuple((x, y, c) for (x, y), c in colors.items()))

    @classmethod
    def empty(cls) -> "DeltaCondition":
        return cls(frozenset(), frozenset(), ())

    @cached_property
    def colors(self) -> dict[tuple[int, int], int]:
        return {(x, y): c for x, y, c in self.f}

    @cached_property
    def points(self) -> frozenset:
        return self.a | self.b

    def rank(self) -> int:
        return max(self.points) if self.points else 0

    def to_json(self) -> dict:
        return {"a": sorted(self.a), "b": sorted(self.b), "f": [list(t) for t in self.f]}

    @classmethod
    def from_json(cls, doc: Mapping) -> "DeltaCondition":
        try:
            return cls(frozenset(doc["a"]), frozenset(doc["b"]), tuple(tuple(t) for t in doc["f"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise RejectedInput(f"malformed condition document: {exc}") from None

    def __repr__(self) -> str:
        return f"D(a={sorted(self.a)}, b={sorted(self.b)}, f={list(self.f)})"


def pull(f: OrderMap, p: DeltaCondition) -> DeltaCondition:
    """``f^-1[p]``: points and colored pairs inside the range of ``f``, moved back."""
    pairs = pullback(f, p.colors)
    return DeltaCondition(preimage(f, p.a), preimage(f, p.b),
                          tuple((x, y, c) for (x, y), c in pairs.items()))


def push(f: OrderMap, p: DeltaCondition) -> DeltaCondition:
    """``f[p]``: transport points and colored pairs along ``f``."""
    return DeltaCondition(frozenset(f(x) for x in p.a), frozenset(f(y) for y in p.b),
                          tuple((f(x), f(y), c) for x, y, c in p.f))


# -- order ------------------------------------------------------------------

def leq(p: DeltaCondition, q: DeltaCondition, *, require_extension: bool = True) -> bool:
    """``p <= q``: supports grow, colors of ``q`` are kept, and each new column
    ``y`` separates the rows of ``a_q`` above it."""
    if not (q.a <= p.a and q.b <= p.b):
        return False
    pc = p.colors
    if require_extension and any(pc[(x, y)] != c for x, y, c in q.f):
        return False
    rows = sorted(q.a)
    for y in p.b - q.b:
        seen = set()
        for x in rows:
            if x > y:
                c = pc[(x, y)]
                if c in seen:
                    return False
                seen.add(c)
    return True


# -- membership -------------------------------------------------------------

def rectangle(M: Morass, alpha: int) -> tuple[range, range]:
    """Rows and columns of the injectivity rectangle of successor step ``alpha``."""
    return range(M.thetas[alpha], M.thetas[alpha + 1]), range(M.delta(alpha), M.thetas[alpha])


def injective_on_rectangle(M: Morass, alpha: int, p: DeltaCondition) -> bool:
    rows, cols = rectangle(M, alpha)
    seen = set()
    for x, y, c in p.f:
        if x in rows and y in cols:
            if c in seen:
                return False
            seen.add(c)
    return True


def _level_for(M: Morass, nu: int) -> int:
    """Least level whose width is at least ``nu``."""
    for beta, theta in enumerate(M.thetas):
        if theta >= nu:
            return beta
    raise RejectedInput(f"{nu} exceeds the top width {M.top_width}")


def member(M: Morass, nu: int, p: DeltaCondition, *, rectangle_check: bool = True) -> bool:
    """Membership in ``P_nu`` by the level recursion: base level, successor
    clauses (bounds, both pullbacks, rectangle injectivity) and covering by
    lower nodes at amalgam levels."""
    if nu > M.top_width:
        raise RejectedInput(f"{nu} exceeds the top width {M.top_width}")
    if any(x >= nu for x in p.points):
        return False
    if nu == 0:
        return True
    return _member_level(M, _level_for(M, nu), p, rectangle_check)


def _member_level(M: Morass, beta: int, p: DeltaCondition, rectangle_check: bool) -> bool:
    cache = _cache_for(M, rectangle_check)
    key = (beta, p)
    hit = cache.get(key)
    if hit is not None:
        return hit
    if any(x >= M.thetas[beta] for x in p.points):
        out = False
    elif beta == 0:
        out = True
    elif M.is_successor(beta - 1):
        alpha = beta - 1
        out = (_member_level(M, alpha, pull(M.f(alpha), p), rectangle_check)
               and _member_level(M, alpha, pull(OrderMap.identity(M.thetas[alpha], M.thetas[beta]), p),
                                 rectangle_check)
               and (not rectangle_check or injective_on_rectangle(M, alpha, p)))
    else:
        out = False
        for nu in range(p.rank(), M.thetas[beta]):
            t = TreeNode(beta, nu)
            for s in M.predecessors(t):
                pi = M.pi(s, t)
                if p.points <= pi.range:
                    q = pull(pi, p)
                    if all(x <= s.index for x in q.points) and _member_level(M, s.level, q, rectangle_check):
                        out = True
                        break
            if out:
                break
    cache[key] = out
    return out


_MEMBER_CACHES: dict = {}


def _cache_for(M: Morass, flag: bool) -> dict:
    return _MEMBER_CACHES.setdefault((M, flag), {})


@dataclass(frozen=True)
class Probe:
    """One (step, family map) pair of the closed-form test: the set of top
    pairs whose pullback lands in the step's rectangle."""
    alpha: int
    pairs: frozenset


def probes(M: Morass, *, delta_shift: int = 0) -> tuple[Probe, ...]:
    return _probes(M, delta_shift)


@lru_cache(maxsize=64)
def _probes(M: Morass, delta_shift: int) -> tuple[Probe, ...]:
    out = []
    h = M.height
    for alpha in M.successor_steps():
        lo, hi = M.thetas[alpha], M.thetas[alpha + 1]
        d = max(0, M.delta(alpha) + delta_shift)
        for g in M.family_or_id(alpha + 1, h):
            pairs = frozenset((g(x), g(y)) for x in range(lo, hi) for y in range(d, lo))
            out.append(Probe(alpha, pairs))
    return tuple(out)


def member_char(M: Morass, p: DeltaCondition, *, delta_shift: int = 0) -> bool:
    """Closed-form membership at the top: for every successor step and every
    family map from the level above it to the top, the pulled-back colors on
    the step's rectangle are pairwise distinct."""
    if any(x >= M.top_width for x in p.points):
        return False
    for probe in probes(M, delta_shift=delta_shift):
        seen = set()
        for x, y, c in p.f:
            if (x, y) in probe.pairs:
                if c in seen:
                    return False
                seen.add(c)
    return True


# -- D_p ----------------------------------------------------------------------

def compute_Dp(M: Morass, p: DeltaCondition, mode: str = "definitional") -> frozenset:
    """Steps whose rectangle meets some pullback of ``p``.

    ``tree`` mode finds, for each colored pair ``(x, y)``, the lowest node
    below ``<h, x>`` whose ``pi`` reaches ``y``; the pair contributes the step
    just below that node's level.
    """
    if mode == "definitional":
        out = set()
        for probe in probes(M):
            if any((x, y) in probe.pairs for x, y, _ in p.f):
                out.add(probe.alpha)
        return frozenset(out)
    if mode == "tree":
        out = set()
        h = M.height
        for x, y, _ in p.f:
            top = TreeNode(h, x)
            for t in M.chain(top):
                if y in M.pi_or_id(t, top).range:
                    out.add(t.level - 1)
                    break
        return frozenset(out)
    raise RejectedInput(f"unknown mode {mode!r}")


# -- decomposition over a root ----------------------------------------------

@dataclass
class DeltaStar:
    alpha0: int
    values: dict[int, DeltaCondition]
    supp: frozenset

    def to_json(self) -> dict:
        return {"alpha0": self.alpha0, "supp": sorted(self.supp),
                "values": {str(a): v.to_json() for a, v in sorted(self.values.items())}}


def star_delta(M: Morass, p: DeltaCondition, delta: Iterable[int]) -> DeltaStar:
    """Pull ``p`` back along the chain below ``<h, max(delta)>``, starting at
    the lowest node whose ``pi`` covers ``delta``.  The support collects the
    lowest level and every level where the piece is not the image of the piece
    one level down under a step map."""
    delta = frozenset(delta)
    if not delta:
        raise RejectedInput("root set must be nonempty")
    if not p.a <= delta:
        raise RejectedInput(f"a = {sorted(p.a)} is not inside {sorted(delta)}")
    if max(delta) >= M.top_width or any(x >= M.top_width for x in p.points):
        raise RejectedInput("ordinals must lie below the top width")
    h = M.height
    t = TreeNode(h, max(delta))
    chain = M.chain(t)
    alpha0 = next(s.level for s in chain if delta <= M.pi_or_id(s, t).range)
    values = {s.level: pull(M.pi_or_id(s, t), p) for s in chain if s.level >= alpha0}
    supp = {alpha0}
    for alpha in range(alpha0, h):
        nxt = values[alpha + 1]
        if all(nxt != push(g, values[alpha]) for g in M.step_maps(alpha)):
            supp.add(alpha + 1)
    return DeltaStar(alpha0, values, frozenset(supp))


# -- common extensions ----------------------------------------------------------

def fill_fresh(a: Iterable[int], b: Iterable[int], known: Mapping[tuple[int, int], int]) -> DeltaCondition:
    """Condition on ``[a, b]`` that keeps ``known`` and gives every other pair a
    color not used before, least first, in lexicographic pair order."""
    used = set(known.values())
    colors = dict(known)
    nxt = 0
    for pair in bracket(a, b):
        if pair in colors:
            continue
        while nxt in used:
            nxt += 1
        colors[pair] = nxt
        used.add(nxt)
    return DeltaCondition.make(a, b, colors)


def agreement_conflict(p: DeltaCondition, q: DeltaCondition) -> Optional[tuple]:
    pc, qc = p.colors, q.colors
    for pair, c in pc.items():
        if pair in qc and qc[pair] != c:
            return pair
    return None


def fresh_amalgam(p: DeltaCondition, q: DeltaCondition) -> Optional[DeltaCondition]:
    if agreement_conflict(p, q) is not None:
        return None
    return fill_fresh(p.a | q.a, p.b | q.b, {**p.colors, **q.colors})


def compatible(M: Morass, p: DeltaCondition, q: DeltaCondition, *, bound: Optional[int] = None) -> bool:
    """Exact compatibility with unrestricted colors.

    A common extension exists iff the fresh-color amalgam on the union of the
    supports is one: fresh colors never create equal pairs that the supports
    did not already force, and extra points can be dropped again.
    """
    if bound is not None and any(x >= bound for x in p.points | q.points):
        return False
    r = fresh_amalgam(p, q)
    return r is not None and member_char(M, r) and leq(r, p) and leq(r, q)


def restrict_rows(p: DeltaCondition, rows: Iterable[int]) -> DeltaCondition:
    """``p | (rows x everything)``: keep ``a`` inside ``rows`` and all of ``b``."""
    rows = frozenset(rows)
    return DeltaCondition(p.a & rows, p.b, tuple(t for t in p.f if t[0] in rows))


def amalgamation_problem(M: Morass, p1: DeltaCondition, p2: DeltaCondition) -> Optional[str]:
    """Name the first unmet amalgamation hypothesis, or None."""
    if agreement_conflict(p1, p2) is not None:
        return "agreement: colors differ on a shared pair"
    shared = compute_Dp(M, p1) & compute_Dp(M, p2)
    for probe in probes(M):
        if probe.alpha not in shared:
            continue
        r1 = {(x, y): c for x, y, c in p1.f if (x, y) in probe.pairs}
        r2 = {(x, y): c for x, y, c in p2.f if (x, y) in probe.pairs}
        if r1 != r2:
            return f"rectangle: pullbacks differ on shared step {probe.alpha}"
    root = p1.a & p2.a
    if not compatible(M, restrict_rows(p1, root), restrict_rows(p2, root)):
        return "root: restrictions to the shared rows are incompatible"
    return None


def amalgamate(M: Morass, p1: DeltaCondition, p2: DeltaCondition,
               fresh_color_policy: str = "least-unused") -> DeltaCondition:
    """Common extension of ``p1`` and ``p2`` keeping both and coloring the
    remaining pairs with fresh distinct colors."""
    if fresh_color_policy != "least-unused":
        raise RejectedInput(f"unknown fresh color policy {fresh_color_policy!r}")
    problem = amalgamation_problem(M, p1, p2)
    if problem:
        raise RejectedInput(problem)
    return fresh_amalgam(p1, p2)


def extend(M: Morass, p: DeltaCondition, alpha: int, beta: int) -> DeltaCondition:
    """Extension of ``p`` with ``alpha`` in ``a`` and ``beta`` in ``b``; new
    pairs get fresh distinct colors."""
    if not (0 <= alpha < M.top_width and 0 <= beta < M.top_width):
        raise RejectedInput(f"({alpha}, {beta}) not below the top width {M.top_width}")
    if alpha in p.a and beta in p.b:
        return p
    return fill_fresh(p.a | {alpha}, p.b | {beta}, p.colors)


# -- truncated universes --------------------------------------------------------

def estimate_universe(width: int, max_a: int, max_b: int, color_bound: int) -> int:
    from math import comb
    total = 0
    for ka in range(max_a + 1):
        for kb in range(max_b + 1):
            # every pair counted as colored gives an upper bound
            total += comb(width, ka) * comb(width, kb) * color_bound ** (ka * kb)
    return total


def all_conditions(width: int, max_a: int, max_b: int, color_bound: int,
                   limit: int = ENUMERATION_LIMIT) -> Iterable[DeltaCondition]:
    """Every condition with supports below ``width``, unfiltered."""
    est = estimate_universe(width, max_a, max_b, color_bound)
    if est > limit:
        raise SizeLimitExceeded(f"about {est} candidate conditions exceed the limit {limit}", est)
    subsets_a = [c for k in range(max_a + 1) for c in itertools.combinations(range(width), k)]
    subsets_b = [c for k in range(max_b + 1) for c in itertools.combinations(range(width), k)]
    for a in subsets_a:
        for b in subsets_b:
            pairs = bracket(a, b)
            for cols in itertools.product(range(color_bound), repeat=len(pairs)):
                yield DeltaCondition(frozenset(a), frozenset(b),
                                     tuple((x, y, c) for (x, y), c in zip(pairs, cols)))


def enumerate_members(M: Morass, max_a: int, max_b: int, color_bound: int,
                      limit: int = ENUMERATION_LIMIT) -> list[DeltaCondition]:
    return [p for p in all_conditions(M.top_width, max_a, max_b, color_bound, limit)
            if member_char(M, p)]


def enumerate_poset(M: Morass, max_a: int, max_b: int, color_bound: int,
                    limit: int = ENUMERATION_LIMIT) -> FinitePoset:
    """Members within the bounds, ordered by ``leq``.  Compatibility is the
    exact notion with unrestricted colors, not the truncated one."""
    members = enumerate_members(M, max_a, max_b, color_bound, limit)
    return FinitePoset(members, leq, compat=lambda p, q: compatible(M, p, q),
                       name=f"Delta({max_a},{max_b},{color_bound})")


def truncated_compatible(P: FinitePoset, p, q) -> bool:
    """Compatibility witnessed inside the enumerated universe itself."""
    return bool(P.down[P.index[p]] & P.down[P.index[q]])


# -- order sanity ---------------------------------------------------------------

def check_order(conditions: Sequence[DeltaCondition], order=leq) -> Report:
    """Reflexivity, transitivity, and that comparable conditions agree where
    both are defined (so a filter's union is a function)."""
    report = Report("delta-order")
    refl = next((p for p in conditions if not order(p, p)), None)
    report.add("reflexive", refl is None, "p <= p", refl)
    rel = {(i, j) for i, p in enumerate(conditions) for j, q in enumerate(conditions) if order(p, q)}
    trans = None
    succ: dict[int, list[int]] = {}
    for i, j in rel:
        succ.setdefault(i, []).append(j)
    for i, j in rel:
        for k in succ.get(j, ()):
            if (i, k) not in rel:
                trans = [conditions[i], conditions[j], conditions[k]]
                break
        if trans:
            break
    report.add("transitive", trans is None, "p <= q <= r gives p <= r", trans)
    func = None
    for i, j in rel:
        if agreement_conflict(conditions[i], conditions[j]) is not None:
            func = [conditions[i], conditions[j]]
            break
    report.add("union-functional", func is None, "comparable conditions agree on shared pairs", func)
    return report


# -- generic filter ----------------------------------------------------------------

@dataclass
class GenericRun:
    g: dict[tuple[int, int], int]
    chain: list[DeltaCondition]
    report: Report

    def to_json(self) -> dict:
        return {"g": [[x, y, c] for (x, y), c in sorted(self.g.items())],
                "chain_length": len(self.chain), "report": self.report.to_json()}


def generic_simulate(M: Morass, seed: int, steps: int, order=leq) -> GenericRun:
    """Build a descending chain meeting the density sets ``{q : x in a_q,
    y in b_q}`` in a seeded order, one per step, and read off ``g``."""
    width = M.top_width
    targets = [(x, y) for x in range(width) for y in range(width)]
    random.Random(seed).shuffle(targets)
    p = DeltaCondition.empty()
    chain = [p]
    for i in range(steps):
        x, y = targets[i % len(targets)]
        p = extend(M, p, x, y)
        chain.append(p)
    g = dict(p.colors)
    report = Report("delta-generic")
    need = [(x, y) for x in range(width) for y in range(x)]
    missing = [pair for pair in need if pair not in g]
    if steps == 0:
        report.vacuous("total", "no steps taken")
    else:
        report.add("total", not missing, f"{len(need) - len(missing)} of {len(need)} pairs colored",
                   missing[:1] or None)
    bad_step = next((i for i in range(1, len(chain)) if not order(chain[i], chain[i - 1])), None)
    report.add("descending", bad_step is None, "every step extends the previous condition",
               bad_step)
    bad_member = next((q for q in chain if not member_char(M, q)), None)
    report.add("members", bad_member is None, "every condition in the chain is a member", bad_member)
    return GenericRun(g, chain, report)
