"""Finite strict partial orders on ordinals, thinned along a morass.

A condition is a finite set ``x`` with a strict order ``lt`` such that
related ordinals increase, ordinals in the same block ``[B*k, B*k + B)`` are
never related, and any two compatible elements have an infimum.  By default
two elements are compatible when they share a lower bound (``<=`` meaning
``<`` or equal); ``reading="upper"`` flips this to upper bounds and suprema.

Membership at a successor level asks that each old ordinal at or above the
split point gets at most one new successor, plus the usual pullback clauses.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, Optional

from .errors import RejectedInput
from .morass import Morass, TreeNode
from .ordinals import OrderMap, preimage
from .report import Report

Reading = str  # "lower" | "upper"


@dataclass(frozen=True)
class SpoCondition:
    x: frozenset
    lt: frozenset  # pairs (lower, upper)
    B: int = 2

    def __post_init__(self):
        object.__setattr__(self, "x", frozenset(int(v) for v in self.x))
        object.__setattr__(self, "lt", frozenset((int(u), int(v)) for u, v in self.lt))
        if self.B < 1:
            raise RejectedInput("block size must be positive")
        stray = [pr for pr in self.lt if pr[0] not in self.x or pr[1] not in self.x]
        if stray:
            raise RejectedInput(f"relation {stray[0]} mentions points outside x")

    @classmethod
    def make(cls, x: Iterable[int], lt: Iterable[tuple[int, int]] = (), B: int = 2) -> "SpoCondition":
        return cls(frozenset(x), frozenset(tuple(pr) for pr in lt), B)

    def to_json(self) -> dict:
        return {"x": sorted(self.x), "lt": [list(pr) for pr in sorted(self.lt)], "B": self.B}

    @classmethod
    def from_json(cls, doc: Mapping) -> "SpoCondition":
        try:
            return cls(frozenset(doc["x"]), frozenset(tuple(pr) for pr in doc["lt"]), int(doc.get("B", 2)))
        except (KeyError, TypeError, ValueError) as exc:
            raise RejectedInput(f"malformed order document: {exc}") from None

    def __repr__(self) -> str:
        return f"S(x={sorted(self.x)}, lt={sorted(self.lt)}, B={self.B})"

    def block(self, v: int) -> int:
        return v // self.B

    @cached_property
    def below(self) -> dict[int, frozenset]:
        """Reflexive down-set of each point."""
        out = {v: {v} for v in self.x}
        for u, v in self.lt:
            out[v].add(u)
        return {v: frozenset(s) for v, s in out.items()}

    @cached_property
    def above(self) -> dict[int, frozenset]:
        out = {v: {v} for v in self.x}
        for u, v in self.lt:
            out[u].add(v)
        return {v: frozenset(s) for v, s in out.items()}

    def le(self, u: int, v: int) -> bool:
        return u == v or (u, v) in self.lt

    def bounds(self, u: int, v: int, reading: Reading = "lower") -> frozenset:
        if reading == "lower":
            return self.below[u] & self.below[v]
        return self.above[u] & self.above[v]

    def extremum(self, u: int, v: int, reading: Reading = "lower") -> Optional[int]:
        """Infimum (or supremum under the upper reading) of ``u`` and ``v``."""
        common = self.bounds(u, v, reading)
        for c in common:
            if all((self.le(d, c) if reading == "lower" else self.le(c, d)) for d in common):
                return c
        return None

    def compatible_in(self, u: int, v: int, reading: Reading = "lower") -> bool:
        return bool(self.bounds(u, v, reading))

    @property
    def points(self) -> frozenset:
        return self.x


# -- encoding -----------------------------------------------------------------

@dataclass(frozen=True)
class SpoEncoding:
    """Upper ends ``a``, lower ends ``b`` and a 0/1 value on every pair
    ``(upper, lower)`` of the bracket, 1 exactly on related pairs."""
    a: frozenset
    b: frozenset
    f: tuple  # sorted (upper, lower, bit)

    @cached_property
    def colors(self) -> dict:
        return {(u, v): c for u, v, c in self.f}


def encode(p: SpoCondition) -> SpoEncoding:
    a = frozenset(v for _, v in p.lt)
    b = frozenset(u for u, _ in p.lt)
    f = tuple(sorted((hi, lo, int((lo, hi) in p.lt)) for hi in a for lo in b if lo < hi))
    return SpoEncoding(a, b, f)


def decode(e: SpoEncoding) -> frozenset:
    return frozenset((lo, hi) for hi, lo, bit in e.f if bit == 1)


# -- validity -----------------------------------------------------------------

def validate_cond(p: SpoCondition, reading: Reading = "lower") -> Report:
    report = Report("spo")
    irre = next(((u, v) for u, v in p.lt if u == v), None)
    trans = None
    for (u, v), (v2, w) in itertools.product(p.lt, repeat=2):
        if v == v2 and (u, w) not in p.lt:
            trans = [[u, v], [v, w]]
            break
    report.add("strict-order", irre is None and trans is None,
               "irreflexive and transitive", irre or trans)
    a_bad = next(([u, v] for u, v in sorted(p.lt) if not u < v), None)
    report.add("a", a_bad is None, "related ordinals increase", a_bad)
    b_bad = next(([u, v] for u, v in sorted(p.lt) if p.block(u) == p.block(v)), None)
    report.add("b", b_bad is None, f"no relation inside a block of size {p.B}", b_bad)
    c_bad = None
    if irre is None and trans is None:
        for u, v in itertools.combinations(sorted(p.x), 2):
            if p.compatible_in(u, v, reading) and p.extremum(u, v, reading) is None:
                c_bad = {"pair": [u, v], "bounds": sorted(p.bounds(u, v, reading))}
                break
    report.add("c", c_bad is None,
               ("compatible pairs have an infimum" if reading == "lower"
                else "compatible pairs have a supremum"), c_bad)
    return report


def is_valid(p: SpoCondition, reading: Reading = "lower") -> bool:
    return validate_cond(p, reading).ok


# -- order ----------------------------------------------------------------------

def leq(p: SpoCondition, q: SpoCondition, reading: Reading = "lower") -> bool:
    """``p <= q``: ``q`` is a suborder of ``p`` on ``x_q``, and pairs of ``x_q``
    compatible in ``p`` were already compatible in ``q`` with the same
    infimum."""
    if p.B != q.B or not q.x <= p.x:
        return False
    if {(u, v) for u, v in p.lt if u in q.x and v in q.x} != set(q.lt):
        return False
    for u, v in itertools.combinations(sorted(q.x), 2):
        if p.compatible_in(u, v, reading):
            if not q.compatible_in(u, v, reading):
                return False
            if p.extremum(u, v, reading) != q.extremum(u, v, reading):
                return False
    return True


# -- maps ---------------------------------------------------------------------------

def pull(f: OrderMap, p: SpoCondition) -> SpoCondition:
    inv = f.inverse
    return SpoCondition(preimage(f, p.x),
                        frozenset((inv[u], inv[v]) for u, v in p.lt if u in inv and v in inv), p.B)


def push(f: OrderMap, p: SpoCondition) -> SpoCondition:
    return SpoCondition(frozenset(f(v) for v in p.x), frozenset((f(u), f(v)) for u, v in p.lt), p.B)


# -- membership --------------------------------------------------------------------

def successor_count_ok(M: Morass, alpha: int, p: SpoCondition) -> bool:
    """Each old ordinal in ``[delta, theta_alpha)`` has at most one successor
    among the new ordinals of step ``alpha``."""
    lo, hi, d = M.thetas[alpha], M.thetas[alpha + 1], M.delta(alpha)
    counts: dict[int, int] = {}
    for u, v in p.lt:
        if d <= u < lo and lo <= v < hi:
            counts[u] = counts.get(u, 0) + 1
            if counts[u] > 1:
                return False
    return True


def member(M: Morass, nu: int, p: SpoCondition, *, reading: Reading = "lower",
           successor_clause: bool = True) -> bool:
    """Membership in ``P_nu`` by the level recursion."""
    if nu > M.top_width:
        raise RejectedInput(f"{nu} exceeds the top width {M.top_width}")
    if any(v >= nu for v in p.x):
        return False
    if nu == 0:
        return True
    beta = next(b for b, t in enumerate(M.thetas) if t >= nu)
    return _member_level(M, beta, p, reading, successor_clause)


@lru_cache(maxsize=200_000)
def _member_level(M: Morass, beta: int, p: SpoCondition, reading: Reading, clause: bool) -> bool:
    if any(v >= M.thetas[beta] for v in p.x) or not is_valid(p, reading):
        return False
    if beta == 0:
        return True
    if M.is_successor(beta - 1):
        alpha = beta - 1
        ident = OrderMap.identity(M.thetas[alpha], M.thetas[beta])
        return (_member_level(M, alpha, pull(M.f(alpha), p), reading, clause)
                and _member_level(M, alpha, pull(ident, p), reading, clause)
                and (not clause or successor_count_ok(M, alpha, p)))
    rank = max(p.x) if p.x else 0
    for nu in range(rank, M.thetas[beta]):
        t = TreeNode(beta, nu)
        for s in M.predecessors(t):
            pi = M.pi(s, t)
            if p.x <= pi.range:
                q = pull(pi, p)
                if all(v <= s.index for v in q.x) and _member_level(M, s.level, q, reading, clause):
                    return True
    return False


@lru_cache(maxsize=64)
def _column_probes(M: Morass) -> tuple:
    """For each successor step and family map into the top: map from top
    lower-end to the set of top upper-ends landing in the step's rectangle."""
    out = []
    for alpha in M.successor_steps():
        lo, hi, d = M.thetas[alpha], M.thetas[alpha + 1], M.delta(alpha)
        for g in M.family_or_id(alpha + 1, M.height):
            cols = {g(u): frozenset(g(v) for v in range(lo, hi)) for u in range(d, lo)}
            out.append((alpha, cols))
    return tuple(out)


def member_char(M: Morass, p: SpoCondition, *, reading: Reading = "lower") -> bool:
    """Closed form: every pullback along a family map into the top is a valid
    order, and in every pullback along ``F[alpha+1, h]`` each old ordinal at or
    above the split point has at most one new successor."""
    if any(v >= M.top_width for v in p.x) or not is_valid(p, reading):
        return False
    for beta in range(M.height):
        for g in M.family(beta, M.height):
            if not is_valid(pull(g, p), reading):
                return False
    for _, cols in _column_probes(M):
        counts: dict[int, int] = {}
        for u, v in p.lt:
            rows = cols.get(u)
            if rows is not None and v in rows:
                counts[u] = counts.get(u, 0) + 1
                if counts[u] > 1:
                    return False
    return True


# -- universes and compatibility -------------------------------------------------------

def all_orders(width: int, max_x: int, B: int = 2) -> Iterable[SpoCondition]:
    """Every transitive relation on every small subset of ``width`` that
    respects increase and blocks (the infimum clause is left to callers)."""
    for k in range(max_x + 1):
        for xs in itertools.combinations(range(width), k):
            cands = [(u, v) for u, v in itertools.combinations(xs, 2) if u // B != v // B]
            for r in range(len(cands) + 1):
                for rel in itertools.combinations(cands, r):
                    rs = set(rel)
                    if all((u, w) in rs for (u, v) in rs for (v2, w) in rs if v == v2):
                        yield SpoCondition(frozenset(xs), frozenset(rs), B)


def enumerate_members(M: Morass, max_x: int, B: int = 2, width: Optional[int] = None,
                      reading: Reading = "lower") -> list[SpoCondition]:
    width = M.top_width if width is None else width
    return [p for p in all_orders(width, max_x, B) if member(M, width, p, reading=reading)]


def compatible_in(universe: Iterable[SpoCondition], p: SpoCondition, q: SpoCondition,
                  reading: Reading = "lower") -> bool:
    """Brute force: some member of ``universe`` lies below both."""
    return any(leq(r, p, reading) and leq(r, q, reading) for r in universe)


# -- amalgamation ---------------------------------------------------------------------

def transitive_closure(pairs: Iterable[tuple[int, int]]) -> frozenset:
    rel = set(pairs)
    changed = True
    while changed:
        changed = False
        for (u, v), (v2, w) in itertools.product(list(rel), repeat=2):
            if v == v2 and (u, w) not in rel:
                rel.add((u, w))
                changed = True
    return frozenset(rel)


def amalgamate(M: Morass, p1: SpoCondition, p2: SpoCondition,
               reading: Reading = "lower") -> SpoCondition:
    """Union of both orders closed under transitivity, kept only if it is a
    member below both inputs."""
    if p1.B != p2.B:
        raise RejectedInput("block sizes differ")
    shared = p1.x & p2.x
    r1 = {pr for pr in p1.lt if pr[0] in shared and pr[1] in shared}
    r2 = {pr for pr in p2.lt if pr[0] in shared and pr[1] in shared}
    if r1 != r2:
        raise RejectedInput(f"agreement: orders differ on shared points {sorted(r1 ^ r2)[:1]}")
    r = SpoCondition(p1.x | p2.x, transitive_closure(p1.lt | p2.lt), p1.B)
    if not is_valid(r, reading):
        err = RejectedInput(f"closure breaks clause {validate_cond(r, reading).first_failure().name}")
        err.witness = r
        raise err
    if not member_char(M, r, reading=reading):
        err = RejectedInput("closure is not a member")
        err.witness = r
        raise err
    if not (leq(r, p1, reading) and leq(r, p2, reading)):
        err = RejectedInput("closure is not below both inputs")
        err.witness = r
        raise err
    return r


# -- root decomposition ------------------------------------------------------------------

@dataclass
class SpoStar:
    alpha0: int
    values: dict[int, SpoCondition]
    supp: frozenset


def star_spo(M: Morass, p: SpoCondition, delta: Iterable[int]) -> SpoStar:
    """Pieces of ``p`` along the chain below ``<h, max(delta)>``, as for the
    colored-pair forcing; ``delta`` must contain every upper end of ``p``."""
    delta = frozenset(delta)
    if not delta:
        raise RejectedInput("root set must be nonempty")
    if not encode(p).a <= delta:
        raise RejectedInput("upper ends of the order must lie in the root set")
    t = TreeNode(M.height, max(delta))
    chain = M.chain(t)
    alpha0 = next(s.level for s in chain if delta <= M.pi_or_id(s, t).range)
    values = {s.level: pull(M.pi_or_id(s, t), p) for s in chain if s.level >= alpha0}
    supp = {alpha0}
    for alpha in range(alpha0, M.height):
        if all(values[alpha + 1] != push(g, values[alpha]) for g in M.step_maps(alpha)):
            supp.add(alpha + 1)
    return SpoStar(alpha0, values, frozenset(supp))


# -- generic union -------------------------------------------------------------------------

def _try_add(M: Morass, p: SpoCondition, lo: int, hi: int, reading: Reading) -> Optional[SpoCondition]:
    cand = SpoCondition(p.x | {lo, hi}, transitive_closure(p.lt | {(lo, hi)}), p.B)
    if is_valid(cand, reading) and member_char(M, cand, reading=reading) and leq(cand, p, reading):
        return cand
    return None


def _below_in_block(M: Morass, p: SpoCondition, alpha: int, k: int, reading: Reading):
    """An extension of ``p`` putting some ordinal of block ``k`` below ``alpha``."""
    B = p.B
    for beta in range(k * B, min((k + 1) * B, M.top_width)):
        if beta in p.x and alpha in p.x and (beta, alpha) in p.lt:
            return p
        if beta < alpha:
            q = _try_add(M, p, beta, alpha, reading)
            if q is not None:
                return q
    return None


@dataclass
class SpoGenericRun:
    order: SpoCondition
    chain: list
    report: Report

    def to_json(self) -> dict:
        return {"order": self.order.to_json(), "chain_length": len(self.chain),
                "report": self.report.to_json()}


def generic_union_check(M: Morass, seed: int, steps: int, B: int = 2,
                        reading: Reading = "lower") -> SpoGenericRun:
    """Greedy descending chain: each step tries to place an ordinal of an
    earlier block below some ordinal, in a seeded order.  The final order is
    checked for increase, blocks and infima, and for the finite density
    analogue: every (ordinal, earlier block) pair is either realized or can
    still be realized by one extension."""
    width = M.top_width
    tasks = [(alpha, k) for alpha in range(width) for k in range(alpha // B)]
    random.Random(seed).shuffle(tasks)
    p = SpoCondition(frozenset(), frozenset(), B)
    chain = [p]
    for i in range(steps if tasks else 0):
        alpha, k = tasks[i % len(tasks)]
        q = _below_in_block(M, p, alpha, k, reading)
        if q is not None and q != p:
            p = q
            chain.append(p)
    report = validate_cond(p, reading)
    report.subject = "spo-generic"
    realized = reachable = stuck = 0
    first_stuck = None
    for alpha, k in sorted(tasks):
        if any((beta, alpha) in p.lt for beta in range(k * B, (k + 1) * B)):
            realized += 1
        elif _below_in_block(M, p, alpha, k, reading) is not None:
            reachable += 1
        else:
            stuck += 1
            first_stuck = first_stuck or [alpha, k]
    if not tasks or steps == 0:
        report.vacuous("d-prime", "no density tasks run")
    else:
        report.add("d-prime", stuck == 0,
                   f"{realized} realized, {reachable} reachable by one extension, {stuck} stuck",
                   first_stuck)
    bad = next((i for i in range(1, len(chain)) if not leq(chain[i], chain[i - 1], reading)), None)
    report.add("descending", bad is None, "every step extends the previous order", bad)
    return SpoGenericRun(p, chain, report)


def order_to_dot(p: SpoCondition) -> str:
    """Hasse diagram of the order in DOT, blocks as clusters."""
    lines = ["digraph order {", "  rankdir=BT;"]
    blocks: dict[int, list[int]] = {}
    for v in sorted(p.x):
        blocks.setdefault(p.block(v), []).append(v)
    for k, vs in sorted(blocks.items()):
        lines.append(f"  subgraph cluster_{k} {{ label=\"block {k}\"; "
                     + " ".join(f"n{v} [label=\"{v}\"];" for v in vs) + " }")
    for u, v in sorted(p.lt):
        if not any((u, w) in p.lt and (w, v) in p.lt for w in p.x):
            lines.append(f"  n{u} -> n{v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
