"""Finite forcing posets: compatibility, complete embeddings, reductions,
antichains and sunflower extraction.

Conditions are arbitrary hashable values.  Down-sets are stored as integer
bitsets indexed by element position, which makes compatibility an ``&``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Callable, Hashable, Iterable, Optional, Sequence

Leq = Callable[[Any, Any], bool]
Compat = Callable[[Any, Any], bool]


class FinitePoset:
    """A finite preorder with an optional ambient compatibility relation.

    When ``compat`` is given it replaces the default test "some element lies
    below both"; sub-posets built with :meth:`sub` inherit it so that
    compatibility keeps referring to the ambient poset.
    """

    def __init__(self, elements: Iterable[Hashable], leq: Leq,
                 compat: Optional[Compat] = None, name: str = "P"):
        self.elements = list(dict.fromkeys(elements))
        self.name = name
        self._leq = leq
        self._compat = compat
        self.index = {e: i for i, e in enumerate(self.elements)}

    @cached_property
    def down(self) -> list[int]:
        """Bitset of elements below each element (computed on first use)."""
        down = [0] * len(self.elements)
        for i, p in enumerate(self.elements):
            for j, r in enumerate(self.elements):
                if i == j or self._leq(r, p):
                    down[i] |= 1 << j
        return down

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, p) -> bool:
        return p in self.index

    def leq(self, p, q) -> bool:
        i, j = self.index.get(p), self.index.get(q)
        if i is not None and j is not None:
            return bool(self.down[j] >> i & 1)
        return self._leq(p, q)

    def below(self, p) -> list:
        mask = self.down[self.index[p]]
        return [e for k, e in enumerate(self.elements) if mask >> k & 1]

    def compatible(self, p, q) -> bool:
        if self._compat is not None:
            return self._compat(p, q)
        return bool(self.down[self.index[p]] & self.down[self.index[q]])

    def common_lower_bound(self, p, q):
        mask = self.down[self.index[p]] & self.down[self.index[q]]
        if not mask:
            return None
        return self.elements[(mask & -mask).bit_length() - 1]

    def sub(self, elements: Iterable[Hashable], name: Optional[str] = None) -> "FinitePoset":
        """Restrict to ``elements``; compatibility is still judged in ``self``."""
        keep = [e for e in elements if e in self.index]
        return FinitePoset(keep, self.leq, compat=self.compatible, name=name or f"{self.name}|sub")

    def incompatibility_graph(self) -> list[int]:
        n = len(self.elements)
        adj = [0] * n
        for i, j in itertools.combinations(range(n), 2):
            if not self.compatible(self.elements[i], self.elements[j]):
                adj[i] |= 1 << j
                adj[j] |= 1 << i
        return adj


def compatible(P: FinitePoset, p, q) -> bool:
    return P.compatible(p, q)


# -- embeddings -----------------------------------------------------------

@dataclass
class EmbeddingCheckReport:
    is_embedding: bool
    is_complete: bool
    witnesses: dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> dict:
        from .report import jsonable
        return {"is_embedding": self.is_embedding, "is_complete": self.is_complete,
                "witnesses": jsonable(self.witnesses)}


def _compat_masks(sigma, P: FinitePoset, Q: FinitePoset) -> dict:
    """For each q, the bitset of p' in P with sigma(p') compatible with q."""
    images = [sigma(p) for p in P.elements]
    masks = {}
    for q in Q.elements:
        m = 0
        for k, img in enumerate(images):
            if Q.compatible(img, q):
                m |= 1 << k
        masks[q] = m
    return masks


def is_reduction(sigma, P: FinitePoset, Q: FinitePoset, p, q) -> bool:
    return all(Q.compatible(sigma(r), q) for r in P.below(p))


def find_reduction(sigma, P: FinitePoset, Q: FinitePoset, q, _mask: Optional[int] = None):
    """First p (in element order) such that every p' <= p maps into something
    compatible with ``q``; None if there is none."""
    if _mask is None:
        _mask = 0
        for k, p in enumerate(P.elements):
            if Q.compatible(sigma(p), q):
                _mask |= 1 << k
    for i, p in enumerate(P.elements):
        if P.down[i] & ~_mask == 0:
            return p
    return None


def check_embedding(sigma, P: FinitePoset, Q: FinitePoset,
                    reduction: Optional[Callable[[Any], Any]] = None) -> EmbeddingCheckReport:
    """Exhaustively check order preservation, two-way preservation of
    incompatibility, and existence of reductions.

    If ``reduction`` is given, the complete-embedding clause additionally
    demands that ``reduction(q)`` itself is a reduction of every ``q``.
    """
    witnesses: dict[str, Any] = {}
    images = {p: sigma(p) for p in P.elements}
    for p in P.elements:
        if images[p] not in Q:
            witnesses["typing"] = {"p": p, "image": images[p]}
            return EmbeddingCheckReport(False, False, witnesses)

    for p, p2 in itertools.product(P.elements, repeat=2):
        if P.leq(p2, p) and not Q.leq(images[p2], images[p]):
            witnesses["order"] = {"lower": p2, "upper": p}
            break
    for p, p2 in itertools.combinations(P.elements, 2):
        if P.compatible(p, p2) != Q.compatible(images[p], images[p2]):
            witnesses["incompatibility"] = {"pair": [p, p2],
                                            "compatible_in_source": P.compatible(p, p2)}
            break
    is_embedding = not witnesses

    masks = _compat_masks(sigma, P, Q)
    for q in Q.elements:
        if reduction is not None:
            p = reduction(q)
            i = P.index.get(p)
            if i is None or P.down[i] & ~masks[q]:
                bad = None
                if i is not None:
                    rest = P.down[i] & ~masks[q]
                    bad = P.elements[(rest & -rest).bit_length() - 1]
                witnesses["reduction"] = {"q": q, "candidate": p, "extension": bad}
                break
        elif find_reduction(sigma, P, Q, q, masks[q]) is None:
            witnesses["reduction"] = {"q": q}
            break
    is_complete = is_embedding and "reduction" not in witnesses
    return EmbeddingCheckReport(is_embedding, is_complete, witnesses)


# -- antichains -----------------------------------------------------------

@dataclass(frozen=True)
class AntichainBound:
    value: int
    exact: bool
    witness: tuple = ()

    def __str__(self) -> str:
        return str(self.value) if self.exact else f">= {self.value}"

    def to_json(self) -> dict:
        return {"value": self.value, "exact": self.exact}


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def max_clique(adj: Sequence[int], cutoff: Optional[int] = None) -> tuple[list[int], bool]:
    """Branch-and-bound maximum clique with greedy-coloring bounds.

    Returns the clique found and whether the search finished (False when it
    stopped early after reaching ``cutoff``).
    """
    n = len(adj)
    best: list[int] = []
    stopped = False

    def color_order(cand: int):
        order, bounds = [], []
        uncolored = cand
        k = 0
        while uncolored:
            k += 1
            avail = uncolored
            while avail:
                low = avail & -avail
                v = low.bit_length() - 1
                avail &= ~adj[v] & ~low
                uncolored &= ~low
                order.append(v)
                bounds.append(k)
        return order, bounds

    def expand(clique: list[int], cand: int) -> None:
        nonlocal best, stopped
        order, bounds = color_order(cand)
        for i in range(len(order) - 1, -1, -1):
            if stopped or len(clique) + bounds[i] <= len(best):
                return
            v = order[i]
            clique.append(v)
            nxt = cand & adj[v]
            if nxt:
                expand(clique, nxt)
            elif len(clique) > len(best):
                best = list(clique)
                if cutoff is not None and len(best) >= cutoff:
                    stopped = True
            clique.pop()
            cand &= ~(1 << v)

    if n:
        expand([], (1 << n) - 1)
    return sorted(best), not stopped


def max_antichain(P: FinitePoset, cutoff: Optional[int] = None) -> AntichainBound:
    """Largest set of pairwise incompatible elements of ``P``."""
    clique, finished = max_clique(P.incompatibility_graph(), cutoff)
    return AntichainBound(len(clique), finished, tuple(P.elements[i] for i in clique))


# -- sunflowers -----------------------------------------------------------

@dataclass(frozen=True)
class DeltaSystem:
    root: frozenset
    members: tuple[frozenset, ...]
    mode: str

    def to_json(self) -> dict:
        return {"root": sorted(self.root), "members": [sorted(m) for m in self.members],
                "mode": self.mode}


EXACT_LIMIT = 20


def delta_system_extract(family: Iterable[Iterable], target: int) -> Optional[DeltaSystem]:
    """Find a sub-family of at least ``target`` sets with a common pairwise
    intersection.  Exact search below ``EXACT_LIMIT`` sets, greedy above."""
    sets = list(dict.fromkeys(frozenset(s) for s in family))
    mode = "exact" if len(sets) < EXACT_LIMIT else "greedy"
    if target <= 0:
        return DeltaSystem(frozenset(), (), mode)
    if not sets:
        return None
    if target == 1 or len(sets) == 1:
        best = DeltaSystem(sets[0], (sets[0],), mode)
        return best if target <= 1 else None

    roots = sorted({a & b for a, b in itertools.combinations(sets, 2)},
                   key=lambda r: (len(r), sorted(r)))
    best_root, best_members = None, []
    for root in roots:
        carriers = [s for s in sets if root <= s]
        if len(carriers) <= len(best_members):
            continue
        petals = [s - root for s in carriers]
        if mode == "exact":
            adj = [0] * len(petals)
            for i, j in itertools.combinations(range(len(petals)), 2):
                if not petals[i] & petals[j]:
                    adj[i] |= 1 << j
                    adj[j] |= 1 << i
            chosen, _ = max_clique(adj)
        else:
            chosen, used = [], set()
            for i, petal in enumerate(petals):
                if not petal & used:
                    chosen.append(i)
                    used |= petal
        if len(chosen) > len(best_members) and len(chosen) >= 2:
            best_root, best_members = root, [carriers[i] for i in sorted(chosen)]
    if best_root is None or len(best_members) < target:
        return None
    order = {s: k for k, s in enumerate(sets)}
    return DeltaSystem(best_root, tuple(sorted(best_members, key=order.get)), mode)
