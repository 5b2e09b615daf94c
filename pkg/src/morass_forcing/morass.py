"""Finite-height simplified gap-1 morasses and their tree.

A morass of height ``h`` has widths ``thetas[0..h]`` and one step per level
transition.  A successor step ``alpha -> alpha+1`` carries a split point
``delta`` and the non-identity map ``f_alpha``; its family is
``{id, f_alpha}``.  An amalgam step stands in for a limit level: its family is
an explicit list of maps from the previous level.

Families ``F[alpha, beta]`` are the composition closure of the step families
and are memoized.
"""

from __future__ import annotations

import itertools
import random
import threading
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Optional, Sequence, Union

from .errors import InternalInconsistency, RejectedInput
from .ordinals import OrderMap, compose, order_violation, restrict
from .report import Report


class TreeNode(NamedTuple):
    level: int
    index: int

    def __str__(self) -> str:
        return f"<{self.level},{self.index}>"


@dataclass(frozen=True)
class Successor:
    delta: int
    f: tuple[int, ...]

    kind = "successor"


@dataclass(frozen=True)
class Amalgam:
    family: tuple[tuple[int, ...], ...]

    kind = "amalgam"


LevelStep = Union[Successor, Amalgam]


def successor_values(theta: int, delta: int) -> tuple[int, ...]:
    """The unique split map with critical point ``delta`` whose range covers
    the new part of the next level exactly."""
    return tuple(g if g < delta else theta + g - delta for g in range(theta))


class Morass:
    """Level widths plus step data; families and tree links are derived."""

    def __init__(self, thetas: Sequence[int], steps: Sequence[LevelStep]):
        self.thetas = tuple(int(t) for t in thetas)
        self.steps = tuple(steps)
        if len(self.thetas) != len(self.steps) + 1:
            raise RejectedInput(
                f"{len(self.thetas)} widths need {len(self.thetas) - 1} steps, got {len(self.steps)}"
            )
        self._lock = threading.RLock()
        self._step_maps: dict[int, tuple[OrderMap, ...]] = {}
        self._families: dict[tuple[int, int], tuple[OrderMap, ...]] = {}
        self._links: dict[tuple[int, int], dict[int, dict[int, OrderMap]]] = {}
        self._below: dict[tuple[int, int], dict[int, int]] = {}

    # -- identity -------------------------------------------------------
    def _key(self):
        return (self.thetas, self.steps)

    def __eq__(self, other):
        return isinstance(other, Morass) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"Morass(thetas={self.thetas})"

    def __getstate__(self):
        return {"thetas": self.thetas, "steps": self.steps}

    def __setstate__(self, state):
        self.__init__(state["thetas"], state["steps"])

    @property
    def height(self) -> int:
        return len(self.steps)

    @property
    def top_width(self) -> int:
        return self.thetas[-1]

    def is_successor(self, alpha: int) -> bool:
        return isinstance(self.steps[alpha], Successor)

    def successor_steps(self) -> list[int]:
        return [a for a in range(self.height) if self.is_successor(a)]

    def delta(self, alpha: int) -> int:
        step = self.steps[alpha]
        if not isinstance(step, Successor):
            raise RejectedInput(f"step {alpha} is an amalgam step and has no split point")
        return step.delta

    def f(self, alpha: int) -> OrderMap:
        step = self.steps[alpha]
        if not isinstance(step, Successor):
            raise RejectedInput(f"step {alpha} is an amalgam step and has no split map")
        return OrderMap(self.thetas[alpha], self.thetas[alpha + 1], step.f)

    # -- families -------------------------------------------------------
    def step_maps(self, alpha: int) -> tuple[OrderMap, ...]:
        """``F[alpha, alpha+1]`` sorted by value table."""
        with self._lock:
            cached = self._step_maps.get(alpha)
            if cached is not None:
                return cached
            src, dst = self.thetas[alpha], self.thetas[alpha + 1]
            step = self.steps[alpha]
            if isinstance(step, Successor):
                maps = {OrderMap.identity(src, dst), OrderMap(src, dst, step.f)}
            else:
                maps = {OrderMap(src, dst, vals) for vals in step.family}
            out = tuple(sorted(maps))
            self._step_maps[alpha] = out
            return out

    def family(self, alpha: int, beta: int) -> tuple[OrderMap, ...]:
        if not 0 <= alpha < beta <= self.height:
            raise RejectedInput(f"family needs 0 <= alpha < beta <= {self.height}, got {alpha}, {beta}")
        with self._lock:
            cached = self._families.get((alpha, beta))
            if cached is not None:
                return cached
            if beta == alpha + 1:
                out = self.step_maps(alpha)
            else:
                lower = self.family(alpha, beta - 1)
                out = tuple(sorted({compose(g, h) for g in self.step_maps(beta - 1) for h in lower}))
            self._families[(alpha, beta)] = out
            return out

    def family_or_id(self, alpha: int, beta: int) -> tuple[OrderMap, ...]:
        if alpha == beta:
            return (OrderMap.identity(self.thetas[alpha]),)
        return self.family(alpha, beta)

    # -- tree -----------------------------------------------------------
    def _tree_links(self, alpha: int, beta: int) -> dict[int, dict[int, OrderMap]]:
        """``nu -> tau -> pi`` for all ``<alpha,nu> < <beta,tau>``."""
        with self._lock:
            cached = self._links.get((alpha, beta))
            if cached is not None:
                return cached
            links: dict[int, dict[int, OrderMap]] = {nu: {} for nu in range(self.thetas[alpha])}
            for f in self.family(alpha, beta):
                for nu, tau in enumerate(f.values):
                    pi = restrict(f, nu + 1)
                    known = links[nu].get(tau)
                    if known is not None and known != pi:
                        raise InternalInconsistency(
                            f"maps into <{beta},{tau}> from <{alpha},{nu}> disagree below {nu}"
                        )
                    links[nu][tau] = pi
            below: dict[int, int] = {}
            for nu, targets in links.items():
                for tau in targets:
                    if tau in below and below[tau] != nu:
                        raise InternalInconsistency(
                            f"<{beta},{tau}> has two predecessors on level {alpha}"
                        )
                    below[tau] = nu
            self._links[(alpha, beta)] = links
            self._below[(alpha, beta)] = below
            return links

    def check_node(self, t: TreeNode) -> None:
        level, index = t
        if not (0 <= level <= self.height and 0 <= index < self.thetas[level]):
            raise RejectedInput(f"{t} is not a node of this morass")

    def nodes(self, level: Optional[int] = None) -> Iterator[TreeNode]:
        levels = range(self.height + 1) if level is None else [level]
        for a in levels:
            for nu in range(self.thetas[a]):
                yield TreeNode(a, nu)

    def precedes(self, s: TreeNode, t: TreeNode) -> bool:
        self.check_node(s)
        self.check_node(t)
        if s.level >= t.level:
            return False
        return t.index in self._tree_links(s.level, t.level)[s.index]

    def pi(self, s: TreeNode, t: TreeNode) -> OrderMap:
        """The common restriction ``f | (nu(s)+1)`` of every witness of ``s < t``."""
        if not self.precedes(s, t):
            raise RejectedInput(f"{s} does not precede {t}")
        return self._tree_links(s.level, t.level)[s.index][t.index]

    def pi_or_id(self, s: TreeNode, t: TreeNode) -> OrderMap:
        """Like ``pi`` but also accepts ``s == t`` (identity on ``nu+1``)."""
        if s == t:
            self.check_node(t)
            return OrderMap.identity(t.index + 1, self.thetas[t.level])
        return self.pi(s, t)

    def level_predecessor(self, t: TreeNode, alpha: int) -> TreeNode:
        self.check_node(t)
        if not 0 <= alpha < t.level:
            raise RejectedInput(f"level {alpha} is not below {t}")
        self._tree_links(alpha, t.level)
        nu = self._below[(alpha, t.level)].get(t.index)
        if nu is None:
            raise InternalInconsistency(f"{t} has no predecessor on level {alpha}")
        return TreeNode(alpha, nu)

    def predecessors(self, t: TreeNode) -> list[TreeNode]:
        return [self.level_predecessor(t, a) for a in range(t.level)]

    def chain(self, t: TreeNode) -> list[TreeNode]:
        """Predecessors of ``t`` on every level, ending with ``t`` itself."""
        return self.predecessors(t) + [t]

    def branch_count(self) -> int:
        """Number of maximal branches of the tree, counted by enumeration."""
        # step maps are total, so every node below the top has a successor and
        # maximal branches are exactly the downward closures of top nodes
        return len({tuple(self.chain(t)) for t in self.nodes(self.height)})


# -- construction -------------------------------------------------------

def build_canonical(h: int, strategy: str = "doubling",
                    deltas: Optional[Sequence[Optional[int]]] = None,
                    images: Optional[Sequence[Optional[Sequence[int]]]] = None) -> Morass:
    """Build a morass of height ``h``.

    ``doubling`` uses split point 0 at every step, so widths are ``2**alpha``.
    ``custom`` takes one split point per step (``None`` for an identity
    amalgam level) and optionally explicit map tables; the result must pass
    ``validate`` or a ``RejectedInput`` names the violated clause.
    """
    if h < 0:
        raise RejectedInput("height must be non-negative")
    if strategy == "doubling":
        deltas = [0] * h
    elif strategy == "custom":
        if deltas is None or len(deltas) != h:
            raise RejectedInput(f"custom strategy needs {h} split points")
    else:
        raise RejectedInput(f"unknown strategy {strategy!r}")
    images = list(images) if images is not None else [None] * h
    if len(images) != h:
        raise RejectedInput(f"custom strategy needs {h} map tables")
    thetas = [1]
    steps: list[LevelStep] = []
    for alpha, (delta, table) in enumerate(zip(deltas, images)):
        theta = thetas[-1]
        if delta is None:
            steps.append(Amalgam((tuple(range(theta)),)))
            thetas.append(theta)
            continue
        if not 0 <= delta < theta:
            raise RejectedInput(f"P3: split point {delta} at step {alpha} not below width {theta}")
        values = tuple(table) if table is not None else successor_values(theta, delta)
        thetas.append(max(max(values) + 1, theta + 1) if values else theta + 1)
        steps.append(Successor(delta, values))
    morass = Morass(thetas, steps)
    report = validate(morass)
    if not report.ok:
        bad = report.first_failure()
        raise RejectedInput(f"{bad.name}: {bad.detail}")
    return morass


def build_random(h: int, theta_cap: int, seed: int) -> Morass:
    """Seeded random morass; each step picks a legal split point.

    Split points that would push the width past ``theta_cap`` are avoided when
    possible; the cap is a preference, not a guarantee.
    """
    rng = random.Random(seed)
    thetas = [1]
    steps: list[LevelStep] = []
    for _ in range(h):
        theta = thetas[-1]
        allowed = [d for d in range(theta) if 2 * theta - d <= theta_cap] or [theta - 1]
        delta = rng.choice(allowed)
        steps.append(Successor(delta, successor_values(theta, delta)))
        thetas.append(2 * theta - delta)
    return Morass(thetas, steps)


# -- validation ---------------------------------------------------------

def validate(M: Morass) -> Report:
    """Check every finite axiom analogue; failures carry a witness."""
    report = Report("morass")
    h = M.height
    report.add("P0a", M.thetas[0] == 1 and all(t > 0 for t in M.thetas),
               f"widths {list(M.thetas)}",
               None if M.thetas[0] == 1 else {"theta_0": M.thetas[0]})
    if M.thetas[0] != 1:
        report.checks[-1].detail = f"theta_0 = {M.thetas[0]}, expected 1"

    bad_maps = []
    for alpha, step in enumerate(M.steps):
        tables = [step.f] if isinstance(step, Successor) else list(step.family)
        for vals in tables:
            if len(vals) != M.thetas[alpha]:
                bad_maps.append({"step": alpha, "map": list(vals),
                                 "problem": f"length {len(vals)} != width {M.thetas[alpha]}"})
                continue
            problem = order_violation(tuple(vals), M.thetas[alpha + 1])
            if problem:
                bad_maps.append({"step": alpha, "map": list(vals), "problem": problem})
        if isinstance(step, Amalgam) and not step.family:
            bad_maps.append({"step": alpha, "map": None, "problem": "empty family"})
    report.add("P0b", not bad_maps,
               "all maps order-preserving" if not bad_maps else bad_maps[0]["problem"],
               bad_maps[0] if bad_maps else None)

    widths_bad = []
    for alpha, step in enumerate(M.steps):
        lo, hi = M.thetas[alpha], M.thetas[alpha + 1]
        if (isinstance(step, Successor) and not lo < hi) or (isinstance(step, Amalgam) and not lo <= hi):
            widths_bad.append({"step": alpha, "widths": [lo, hi]})
    report.add("widths", not widths_bad, "widths grow along successor steps",
               widths_bad[0] if widths_bad else None)

    if bad_maps:
        for name in ("P1", "P2", "P3", "P4", "P5", "coherence"):
            report.add(name, False, "skipped: step maps are not order-preserving")
        return report

    sizes = {f"{a},{b}": len(M.family(a, b)) for a in range(h + 1) for b in range(a + 1, h + 1)}
    report.add("P1", True, "all families finite", None)

    p2_bad = None
    for a in range(h + 1):
        for b in range(a + 1, h + 1):
            for c in range(b + 1, h + 1):
                composed = {compose(f, g) for f in M.family(b, c) for g in M.family(a, b)}
                if composed != set(M.family(a, c)):
                    p2_bad = {"levels": [a, b, c]}
                    break
            if p2_bad:
                break
        if p2_bad:
            break
    report.add("P2", p2_bad is None, "families closed under composition", p2_bad)

    p3_bad = None
    for alpha, step in enumerate(M.steps):
        if not isinstance(step, Successor):
            continue
        theta = M.thetas[alpha]
        d = step.delta
        if not 0 <= d < theta:
            p3_bad = {"step": alpha, "problem": f"split point {d} not below width {theta}"}
        elif any(step.f[g] != g for g in range(d)):
            p3_bad = {"step": alpha, "problem": f"map is not the identity below {d}"}
        elif step.f[d] < theta:
            p3_bad = {"step": alpha, "problem": f"f({d}) = {step.f[d]} < width {theta}"}
        elif len(M.step_maps(alpha)) != 2:
            p3_bad = {"step": alpha, "problem": "family does not have exactly two maps"}
        if p3_bad:
            break
    report.add("P3", p3_bad is None, p3_bad["problem"] if p3_bad else "successor steps split correctly",
               p3_bad)

    amalgams = [a + 1 for a, s in enumerate(M.steps) if isinstance(s, Amalgam)]
    if not amalgams:
        report.vacuous("P4", "no amalgam levels")
    else:
        p4_bad = _directedness_witness(M, amalgams)
        report.add("P4", p4_bad is None, "maps into amalgam levels factor through a common map",
                   p4_bad)

    p5_bad = None
    for beta in range(1, h + 1):
        covered = set()
        for gamma in range(beta):
            for f in M.family(gamma, beta):
                covered.update(f.values)
        missing = sorted(set(range(M.thetas[beta])) - covered)
        if missing:
            p5_bad = {"level": beta, "uncovered": missing}
            break
    report.add("P5", p5_bad is None,
               f"level {p5_bad['level']} not covered" if p5_bad else "every level covered by lower images",
               p5_bad)

    coh_bad = _coherence_witness(M)
    report.add("coherence", coh_bad is None,
               "equal values force equal arguments and agreement below" if coh_bad is None
               else coh_bad["problem"], coh_bad)
    return report


def _directedness_witness(M: Morass, amalgam_levels: Iterable[int]) -> Optional[dict]:
    for lam in amalgam_levels:
        for b1 in range(lam - 1):
            for b2 in range(b1, lam - 1):
                for f1 in M.family(b1, lam):
                    for f2 in M.family(b2, lam):
                        if not _factor_commonly(M, lam, b1, b2, f1, f2):
                            return {"level": lam, "sources": [b1, b2],
                                    "maps": [list(f1.values), list(f2.values)]}
    return None


def _factor_commonly(M: Morass, lam: int, b1: int, b2: int, f1: OrderMap, f2: OrderMap) -> bool:
    for gamma in range(max(b1, b2) + 1, lam):
        h1s = M.family(b1, gamma)
        h2s = M.family(b2, gamma)
        for g in M.family(gamma, lam):
            if any(compose(g, h) == f1 for h in h1s) and any(compose(g, h) == f2 for h in h2s):
                return True
    return False


def _coherence_witness(M: Morass) -> Optional[dict]:
    for a in range(M.height + 1):
        for b in range(a + 1, M.height + 1):
            seen: dict[int, tuple[int, OrderMap]] = {}
            for f in M.family(a, b):
                for tau, v in enumerate(f.values):
                    if v not in seen:
                        seen[v] = (tau, f)
                        continue
                    tau0, f0 = seen[v]
                    if tau0 != tau:
                        return {"levels": [a, b], "value": v, "args": [tau0, tau],
                                "problem": f"two maps send {tau0} and {tau} to {v}"}
                    if f0.values[:tau] != f.values[:tau]:
                        return {"levels": [a, b], "value": v, "args": [tau0, tau],
                                "problem": f"maps agree at {tau} but not below it"}
    return None


def check_tree(M: Morass) -> Report:
    """Exhaustive tree checks: unique linear predecessors, pi commutativity and
    restriction along pi, and covering of amalgam nodes by lower ranges."""
    report = Report("morass-tree")
    nodes = list(M.nodes())

    tree_bad = None
    for t in nodes:
        preds = [s for s in nodes if M.precedes(s, t)]
        levels = sorted(s.level for s in preds)
        if levels != list(range(t.level)):
            tree_bad = {"node": list(t), "predecessor_levels": levels}
            break
        for s1, s2 in itertools.combinations(sorted(preds), 2):
            if not M.precedes(s1, s2):
                tree_bad = {"node": list(t), "incomparable": [list(s1), list(s2)]}
                break
        if tree_bad:
            break
    report.add("tree", tree_bad is None, "one predecessor per lower level, linearly ordered", tree_bad)

    comm_bad = None
    for t2 in nodes:
        chain = M.predecessors(t2)
        for t0, t1 in itertools.combinations(chain, 2):
            lhs = M.pi(t0, t2)
            rhs = compose(M.pi(t1, t2), _widen(M.pi(t0, t1), t1.index + 1))
            if lhs != rhs:
                comm_bad = {"nodes": [list(t0), list(t1), list(t2)]}
                break
        if comm_bad:
            break
    report.add("pi-commutativity", comm_bad is None, "pi(t0,t2) = pi(t1,t2) o pi(t0,t1)", comm_bad)

    restr_bad = None
    for t in nodes:
        for s in M.predecessors(t):
            p = M.pi(s, t)
            for nu2 in range(s.index + 1):
                s2, t2 = TreeNode(s.level, nu2), TreeNode(t.level, p(nu2))
                if not M.precedes(s2, t2) or M.pi(s2, t2) != restrict(p, nu2 + 1):
                    restr_bad = {"s": list(s), "t": list(t), "point": nu2}
                    break
            if restr_bad:
                break
        if restr_bad:
            break
    report.add("pi-restriction", restr_bad is None, "restricting pi gives pi of the image pair", restr_bad)

    cont_bad = None
    for a, step in enumerate(M.steps):
        if not isinstance(step, Amalgam):
            continue
        for t in M.nodes(a + 1):
            covered = set()
            for s in M.predecessors(t):
                covered.update(M.pi(s, t).values)
            if covered != set(range(t.index + 1)):
                cont_bad = {"node": list(t), "missing": sorted(set(range(t.index + 1)) - covered)}
                break
    if any(isinstance(s, Amalgam) for s in M.steps):
        report.add("continuity", cont_bad is None, "amalgam nodes covered by lower pi ranges", cont_bad)
    else:
        report.vacuous("continuity", "no amalgam levels")
    return report


def _widen(f: OrderMap, dst: int) -> OrderMap:
    """Re-type ``f`` with a tighter codomain bound so it composes with a map
    whose domain is ``dst``."""
    return OrderMap(f.src_bound, dst, f.values)
