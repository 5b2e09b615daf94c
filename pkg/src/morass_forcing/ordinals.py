"""Ordinals as bounded naturals, order-preserving maps, and pair-graph transport.

An ordinal here is just an ``int`` read relative to some width ``theta``.
Pair graphs are finite functions ``(alpha, gamma) -> color`` stored as dicts.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Optional

from .errors import RejectedInput

Pair = tuple[int, int]
PairGraph = dict[Pair, int]


def order_violation(values: tuple[int, ...], dst_bound: int) -> Optional[str]:
    """Return a description of why ``values`` is not an increasing map into
    ``dst_bound``, or None when it is one."""
    for i, v in enumerate(values):
        if v < 0 or v >= dst_bound:
            return f"value {v} at {i} outside [0, {dst_bound})"
    for i in range(len(values) - 1):
        if values[i] >= values[i + 1]:
            return f"not increasing at {i}: {values[i]} >= {values[i + 1]}"
    return None


@dataclass(frozen=True, order=True)
class OrderMap:
    """A strictly increasing map ``[0, src_bound) -> [0, dst_bound)``."""

    src_bound: int
    dst_bound: int
    values: tuple[int, ...]

    def __post_init__(self) -> None:
        values = tuple(int(v) for v in self.values)
        object.__setattr__(self, "values", values)
        if len(values) != self.src_bound:
            raise RejectedInput(
                f"map has {len(values)} values but src_bound {self.src_bound}"
            )
        problem = order_violation(values, self.dst_bound)
        if problem:
            raise RejectedInput(f"not an order-preserving map: {problem}")

    @classmethod
    def identity(cls, n: int, dst_bound: Optional[int] = None) -> "OrderMap":
        return cls(n, n if dst_bound is None else dst_bound, tuple(range(n)))

    @classmethod
    def from_values(cls, values: Iterable[int], dst_bound: int) -> "OrderMap":
        values = tuple(values)
        return cls(len(values), dst_bound, values)

    def __call__(self, x: int) -> int:
        return self.values[x]

    def __len__(self) -> int:
        return self.src_bound

    @cached_property
    def inverse(self) -> dict[int, int]:
        return {v: i for i, v in enumerate(self.values)}

    @cached_property
    def range(self) -> frozenset[int]:
        return frozenset(self.values)

    def is_identity(self) -> bool:
        return all(v == i for i, v in enumerate(self.values))

    def as_dict(self) -> dict[int, int]:
        return dict(enumerate(self.values))


def compose(f: OrderMap, g: OrderMap) -> OrderMap:
    """``f o g``: apply ``g`` first."""
    if g.dst_bound != f.src_bound:
        raise RejectedInput(
            f"cannot compose: g lands in {g.dst_bound} but f starts at {f.src_bound}"
        )
    return OrderMap(g.src_bound, f.dst_bound, tuple(f.values[v] for v in g.values))


def restrict(f: OrderMap, bound: int) -> OrderMap:
    if bound < 0 or bound > f.src_bound:
        raise RejectedInput(f"restriction bound {bound} exceeds src_bound {f.src_bound}")
    return OrderMap(bound, f.dst_bound, f.values[:bound])


def critical_point(f: OrderMap) -> Optional[int]:
    """Least point moved by ``f``; None if ``f`` fixes its whole domain."""
    for i, v in enumerate(f.values):
        if v != i:
            return i
    return None


def transport(f: OrderMap, p: Mapping[Pair, int]) -> PairGraph:
    """Push a pair graph forward along ``f``; colors are kept."""
    out: PairGraph = {}
    values = f.values
    n = f.src_bound
    for (x, y), c in p.items():
        if not (0 <= x < n and 0 <= y < n):
            raise RejectedInput(f"pair {(x, y)} not below src_bound {n}")
        out[(values[x], values[y])] = c
    return out


def pullback(f: OrderMap, p: Mapping[Pair, int]) -> PairGraph:
    """Entries of ``p`` whose coordinates both lie in ``rng(f)``, pulled back."""
    inv = f.inverse
    out: PairGraph = {}
    for (x, y), c in p.items():
        xi = inv.get(x)
        if xi is None:
            continue
        yi = inv.get(y)
        if yi is None:
            continue
        out[(xi, yi)] = c
    return out


def image(f: OrderMap, xs: Iterable[int]) -> frozenset[int]:
    values = f.values
    n = f.src_bound
    out = []
    for x in xs:
        if not 0 <= x < n:
            raise RejectedInput(f"ordinal {x} not below src_bound {n}")
        out.append(values[x])
    return frozenset(out)


def preimage(f: OrderMap, xs: Iterable[int]) -> frozenset[int]:
    inv = f.inverse
    return frozenset(inv[x] for x in xs if x in inv)
