"""Poset systems indexed along a morass, the level decomposition of top
conditions, and the support-based compatibility test.

An ``FSSystem`` supplies, for each ``eta <= top width``, a finite poset
``P_eta`` (all posets share one order), node maps ``sigma(s, t, p)`` for
``s < t`` in the morass tree, and retractions ``e(alpha, p)`` from level
``alpha + 1`` down to level ``alpha``.  The fixtures here move conditions
along ``pi(s, t)`` by transporting their points.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Hashable, Iterable, Optional

from .errors import InternalInconsistency, RejectedInput, SizeLimitExceeded
from .morass import Morass, TreeNode
from .ordinals import OrderMap, restrict
from .posets import FinitePoset, check_embedding
from .report import Report

Cond = Hashable
UNIVERSE_LIMIT = 5000


class FSSystem:
    """Base class; subclasses implement the condition universe and maps."""

    name = "fs"

    def __init__(self, M: Morass, universe_limit: int = UNIVERSE_LIMIT):
        self.M = M
        self.universe_limit = universe_limit
        self._universes: dict[int, tuple] = {}
        self._posets: dict[int, FinitePoset] = {}

    # -- to implement ----------------------------------------------------
    def generate(self, eta: int) -> Iterable[Cond]:
        raise NotImplementedError

    def estimate(self, eta: int) -> int:
        raise NotImplementedError

    def leq(self, p: Cond, q: Cond) -> bool:
        raise NotImplementedError

    def rank(self, p: Cond) -> int:
        """Least ``eta`` with ``p`` in ``P_(eta+1)``."""
        raise NotImplementedError

    def sigma(self, s: TreeNode, t: TreeNode, p: Cond) -> Cond:
        raise NotImplementedError

    def sigma_preimage(self, s: TreeNode, t: TreeNode, p: Cond) -> Optional[Cond]:
        raise NotImplementedError

    def e(self, alpha: int, p: Cond) -> Cond:
        raise NotImplementedError

    # -- derived ---------------------------------------------------------
    @property
    def top(self) -> int:
        return self.M.top_width

    def universe(self, eta: int) -> tuple:
        cached = self._universes.get(eta)
        if cached is None:
            est = self.estimate(eta)
            if est > self.universe_limit:
                raise SizeLimitExceeded(
                    f"universe of P_{eta} would hold about {est} conditions", est)
            cached = tuple(sorted(self.generate(eta), key=_cond_key))
            self._universes[eta] = cached
        return cached

    def poset(self, eta: int) -> FinitePoset:
        cached = self._posets.get(eta)
        if cached is None:
            cached = FinitePoset(self.universe(eta), self.leq, name=f"P_{eta}")
            self._posets[eta] = cached
        return cached

    def member(self, p: Cond, eta: int) -> bool:
        return p in self.poset(eta)

    def sigma_f(self, alpha: int, beta: int, f: OrderMap, p: Cond) -> Cond:
        """``sigma`` along a family map, through the node of ``p``'s rank."""
        nu = self.rank(p)
        return self.sigma(TreeNode(alpha, nu), TreeNode(beta, f(nu)), p)

    def sigma_step(self, alpha: int, p: Cond) -> Cond:
        return self.sigma_f(alpha, alpha + 1, self.M.f(alpha), p)

    def sigma_step_preimage(self, alpha: int, p: Cond) -> Optional[Cond]:
        """The ``q`` in ``P_(theta_alpha)`` with ``sigma_step(alpha, q) == p``."""
        for q in self.universe(self.M.thetas[alpha]):
            if self.sigma_step(alpha, q) == p:
                return q
        return None


def _cond_key(p) -> tuple:
    if isinstance(p, frozenset):
        return (len(p), sorted(p))
    return (0, p)


class TransportFS(FSSystem):
    """Fixtures whose conditions carry a finite set of points below the top
    width and whose node maps transport those points along ``pi``."""

    def points(self, p: Cond) -> frozenset:
        raise NotImplementedError

    def move(self, f: OrderMap, p: Cond) -> Cond:
        raise NotImplementedError

    def pull(self, f: OrderMap, p: Cond) -> Cond:
        raise NotImplementedError

    def rank(self, p: Cond) -> int:
        pts = self.points(p)
        return max(pts) if pts else 0

    def sigma(self, s: TreeNode, t: TreeNode, p: Cond) -> Cond:
        return self.move(self.M.pi_or_id(s, t), p)

    def sigma_preimage(self, s: TreeNode, t: TreeNode, p: Cond) -> Optional[Cond]:
        pi = self.M.pi_or_id(s, t)
        if not self.points(p) <= pi.range:
            return None
        q = self.pull(pi, p)
        return q if self.move(pi, q) == p else None


class SubsetFS(TransportFS):
    """``P_eta`` = subsets of ``eta`` under reverse inclusion.  Everything is
    compatible; ``e_alpha`` keeps the old part and pulls back the new part."""

    name = "subset"

    def generate(self, eta):
        for r in range(eta + 1):
            for c in itertools.combinations(range(eta), r):
                yield frozenset(c)

    def estimate(self, eta):
        return 2 ** eta

    def leq(self, p, q):
        return p >= q

    def points(self, p):
        return p

    def move(self, f, p):
        return frozenset(f(x) for x in p)

    def pull(self, f, p):
        inv = f.inverse
        return frozenset(inv[x] for x in p if x in inv)

    def e(self, alpha, p):
        theta = self.M.thetas[alpha]
        f = self.M.f(alpha)
        return frozenset(x for x in p if x < theta) | self.pull(f, frozenset(x for x in p if x >= theta))


class CohenFS(TransportFS):
    """Finite partial functions into ``{0, 1}``, as frozensets of
    ``(point, bit)`` pairs, ordered by extension.

    ``harmonized=True`` keeps only functions constant on each class of the
    equivalence generated by ``gamma ~ f_alpha(gamma)`` pushed to the top along
    the families; ``e_alpha`` restricts to the old part and fills it from the
    pullback along ``f_alpha``.  With ``harmonized=False`` every partial
    function is a condition and old values win in ``e_alpha``.
    """

    def __init__(self, M: Morass, harmonized: bool = True, universe_limit: int = UNIVERSE_LIMIT):
        super().__init__(M, universe_limit)
        self.harmonized = harmonized
        self.name = "harmonized-cohen" if harmonized else "plain-cohen"

    @cached_property
    def classes(self) -> list[int]:
        """Union-find labels of the top width under the generated equivalence."""
        M = self.M
        parent = list(range(M.top_width))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for alpha in M.successor_steps():
            f = M.f(alpha)
            for g in M.family_or_id(alpha + 1, M.height):
                for gamma in range(M.thetas[alpha]):
                    a, b = find(g(gamma)), find(g(f(gamma)))
                    if a != b:
                        parent[max(a, b)] = min(a, b)
        return [find(x) for x in range(M.top_width)]

    def is_condition(self, p) -> bool:
        dom = [x for x, _ in p]
        if len(dom) != len(set(dom)):
            return False
        if not self.harmonized:
            return True
        seen: dict[int, int] = {}
        for x, bit in p:
            c = self.classes[x]
            if seen.setdefault(c, bit) != bit:
                return False
        return True

    def generate(self, eta):
        for r in range(eta + 1):
            for dom in itertools.combinations(range(eta), r):
                for bits in itertools.product((0, 1), repeat=r):
                    p = frozenset(zip(dom, bits))
                    if self.is_condition(p):
                        yield p

    def estimate(self, eta):
        if not self.harmonized:
            return 3 ** eta
        sizes: dict[int, int] = {}
        for x in range(eta):
            sizes[self.classes[x]] = sizes.get(self.classes[x], 0) + 1
        total = 1
        for k in sizes.values():
            total *= 2 ** (k + 1) - 1
        return total

    def leq(self, p, q):
        return p >= q

    def points(self, p):
        return frozenset(x for x, _ in p)

    def move(self, f, p):
        return frozenset((f(x), bit) for x, bit in p)

    def pull(self, f, p):
        inv = f.inverse
        return frozenset((inv[x], bit) for x, bit in p if x in inv)

    def e(self, alpha, p):
        theta = self.M.thetas[alpha]
        old = {x: bit for x, bit in p if x < theta}
        for x, bit in self.pull(self.M.f(alpha), p):
            old.setdefault(x, bit)
        return frozenset(old.items())


FIXTURES = {
    "subset": lambda M, **kw: SubsetFS(M, **kw),
    "harmonized-cohen": lambda M, **kw: CohenFS(M, harmonized=True, **kw),
    "plain-cohen": lambda M, **kw: CohenFS(M, harmonized=False, **kw),
}


def make_fixture(name: str, M: Morass, **kw) -> FSSystem:
    try:
        factory = FIXTURES[name]
    except KeyError:
        raise RejectedInput(f"unknown fixture {name!r}; choose from {sorted(FIXTURES)}") from None
    return factory(M, **kw)


# -- validation -----------------------------------------------------------

def _node_pairs(M: Morass):
    for t in M.nodes():
        for s in M.predecessors(t):
            yield s, t


def validate_fs(S: FSSystem) -> Report:
    """Exhaustively check the system axioms over the finite universes."""
    M = S.M
    report = Report(f"fs:{S.name}")

    # FS1: each P_eta sits inside P_nu with incompatibility preserved
    fs1 = None
    for eta in range(M.top_width + 1):
        small = S.poset(eta)
        for nu in range(eta, M.top_width + 1):
            big = S.poset(nu)
            missing = [p for p in small.elements if p not in big]
            if missing:
                fs1 = {"eta": eta, "nu": nu, "not_contained": missing[0]}
                break
            for p, q in itertools.combinations(small.elements, 2):
                if small.compatible(p, q) != big.compatible(p, q):
                    fs1 = {"eta": eta, "nu": nu, "pair": [p, q]}
                    break
            if fs1:
                break
        if fs1:
            break
    report.add("FS1", fs1 is None, "posets increase with incompatibility preserved", fs1)

    # FS2: sigma maps are injective embeddings, commute, and cover amalgam nodes
    fs2 = None
    for s, t in _node_pairs(M):
        src, dst = S.poset(s.index + 1), S.poset(t.index + 1)
        images = {}
        for p in src.elements:
            img = S.sigma(s, t, p)
            if img not in dst:
                fs2 = {"s": s, "t": t, "p": p, "problem": "image outside target poset"}
                break
            if img in images:
                fs2 = {"s": s, "t": t, "p": [images[img], p], "problem": "not injective"}
                break
            images[img] = p
        if fs2:
            break
        rep = check_embedding(lambda p, s=s, t=t: S.sigma(s, t, p), src, dst)
        if not rep.is_embedding:
            fs2 = {"s": s, "t": t, "problem": "not an embedding", "witness": rep.witnesses}
            break
    if fs2 is None:
        for t2 in M.nodes():
            chain = M.predecessors(t2)
            for t0, t1 in itertools.combinations(chain, 2):
                for p in S.universe(t0.index + 1):
                    if S.sigma(t0, t2, p) != S.sigma(t1, t2, S.sigma(t0, t1, p)):
                        fs2 = {"nodes": [t0, t1, t2], "p": p, "problem": "not commutative"}
                        break
                if fs2:
                    break
            if fs2:
                break
    if fs2 is None:
        for a, step in enumerate(M.steps):
            if step.kind != "amalgam":
                continue
            for t in M.nodes(a + 1):
                covered = set()
                for s in M.predecessors(t):
                    covered.update(S.sigma(s, t, p) for p in S.universe(s.index + 1))
                missing = [p for p in S.universe(t.index + 1) if p not in covered]
                if missing:
                    fs2 = {"t": t, "p": missing[0], "problem": "amalgam node not covered"}
                    break
            if fs2:
                break
    report.add("FS2", fs2 is None, fs2["problem"] if fs2 else "node maps commute and embed", fs2)

    # FS3: e_alpha lands in the lower level
    fs3 = None
    for alpha in M.successor_steps():
        lower = S.poset(M.thetas[alpha])
        for p in S.universe(M.thetas[alpha + 1]):
            if S.e(alpha, p) not in lower:
                fs3 = {"alpha": alpha, "p": p, "e": S.e(alpha, p)}
                break
        if fs3:
            break
    report.add("FS3", fs3 is None, "retractions are typed", fs3)

    # FS4: sigma_st extends sigma_s't' along pi
    fs4 = None
    for s, t in _node_pairs(M):
        pi = M.pi(s, t)
        for nu2 in range(s.index + 1):
            s2, t2 = TreeNode(s.level, nu2), TreeNode(t.level, pi(nu2))
            for p in S.universe(nu2 + 1):
                if S.sigma(s, t, p) != S.sigma(s2, t2, p):
                    fs4 = {"s": s, "t": t, "s2": s2, "t2": t2, "p": p}
                    break
            if fs4:
                break
        if fs4:
            break
    report.add("FS4", fs4 is None, "node maps extend their restrictions", fs4)

    # FS5: identity pi gives identity sigma
    fs5 = None
    for s, t in _node_pairs(M):
        if not M.pi(s, t).is_identity():
            continue
        for p in S.universe(s.index + 1):
            if S.sigma(s, t, p) != p:
                fs5 = {"s": s, "t": t, "p": p, "image": S.sigma(s, t, p)}
                break
        if fs5:
            break
    report.add("FS5", fs5 is None, "identity pi acts as identity", fs5)

    # FS6: inclusion and sigma_alpha are complete with e_alpha as reduction
    fs6a = fs6b = None
    for alpha in M.successor_steps():
        lower, upper = S.poset(M.thetas[alpha]), S.poset(M.thetas[alpha + 1])
        red = lambda q, alpha=alpha: S.e(alpha, q)
        if fs6a is None:
            rep = check_embedding(lambda p: p, lower, upper, reduction=red)
            if not rep.is_complete:
                fs6a = {"alpha": alpha, **rep.witnesses}
        if fs6b is None:
            rep = check_embedding(lambda p, alpha=alpha: S.sigma_step(alpha, p), lower, upper,
                                  reduction=red)
            if not rep.is_complete:
                fs6b = {"alpha": alpha, **rep.witnesses}
    report.add("FS6a", fs6a is None, "lower level completely contained, e is a reduction", fs6a)
    report.add("FS6b", fs6b is None, "sigma_alpha complete, e is a reduction", fs6b)

    # FS7: e fixes the lower level and inverts sigma_alpha
    fs7a = fs7b = None
    for alpha in M.successor_steps():
        for p in S.universe(M.thetas[alpha]):
            if fs7a is None and S.e(alpha, p) != p:
                fs7a = {"alpha": alpha, "p": p, "e": S.e(alpha, p)}
            img = S.sigma_step(alpha, p)
            if fs7b is None and S.e(alpha, img) != p:
                fs7b = {"alpha": alpha, "p": img, "e": S.e(alpha, img), "expected": p}
    report.add("FS7a", fs7a is None, "e fixes old conditions", fs7a)
    report.add("FS7b", fs7b is None, "e inverts sigma_alpha on its range", fs7b)
    return report


# -- level decomposition ------------------------------------------------------

@dataclass
class Stage:
    p: Cond
    nu: int
    t: TreeNode
    gamma: int
    values: dict[int, Cond]


@dataclass
class StarDecomposition:
    stages: list[Stage]
    pstar: dict[int, Cond]
    supp: frozenset[int]

    def to_json(self) -> dict:
        from .report import jsonable
        return {
            "stages": [{"p": jsonable(st.p), "nu": st.nu, "t": list(st.t), "gamma": st.gamma}
                       for st in self.stages],
            "pstar": {str(a): jsonable(v) for a, v in sorted(self.pstar.items())},
            "supp": sorted(self.supp),
        }


def star(S: FSSystem, p: Cond) -> StarDecomposition:
    """Decompose a top condition into level pieces.

    Stage ``n`` pulls ``p_n`` back to every level whose node below
    ``<h, nu_n>`` has ``p_n`` in its image; the top level counts, with the
    identity map.  The lowest such level is ``gamma_n``, and the next piece is
    ``e`` applied one level lower.  Levels in ``[gamma_n, gamma_(n-1))`` take
    their value from stage ``n``.
    """
    M = S.M
    h = M.height
    if not S.member(p, M.top_width):
        raise RejectedInput(f"{p!r} is not a top-level condition")
    stages: list[Stage] = []
    pstar: dict[int, Cond] = {}
    prev_gamma = h + 1
    current = p
    while True:
        nu = S.rank(current)
        t = TreeNode(h, nu)
        values = {}
        for s in M.chain(t):
            pre = S.sigma_preimage(s, t, current)
            if pre is not None:
                values[s.level] = pre
        gamma = min(values)
        if gamma >= prev_gamma:
            raise InternalInconsistency(
                f"decomposition of {p!r} stalled: level {gamma} after {prev_gamma}")
        stages.append(Stage(current, nu, t, gamma, values))
        for a in range(gamma, prev_gamma):
            if a not in values:
                raise InternalInconsistency(f"level {a} has no piece in stage {len(stages) - 1}")
            pstar[a] = values[a]
        if gamma == 0:
            break
        if not M.is_successor(gamma - 1):
            raise InternalInconsistency(f"decomposition stopped above amalgam level {gamma}")
        current = S.e(gamma - 1, values[gamma])
        prev_gamma = gamma
    return StarDecomposition(stages, pstar, frozenset(st.gamma for st in stages))


def support(S: FSSystem, p: Cond) -> frozenset[int]:
    return star(S, p).supp


# -- compatibility from supports ------------------------------------------------

@dataclass(frozen=True)
class PropagationVerdict:
    verdict: str  # hypothesis-false | confirmed | COUNTEREXAMPLE
    level: int
    hypothesis: bool
    conclusion: bool


def check_propagation(S: FSSystem, p: Cond, q: Cond, _stars: Optional[dict] = None) -> PropagationVerdict:
    """Compare star pieces at the largest common support level with actual
    compatibility at the top."""
    sp = _stars[p] if _stars else star(S, p)
    sq = _stars[q] if _stars else star(S, q)
    alpha = max(sp.supp & sq.supp)
    level = S.poset(S.M.thetas[alpha])
    hyp = level.compatible(sp.pstar[alpha], sq.pstar[alpha])
    concl = S.poset(S.top).compatible(p, q)
    if not hyp:
        verdict = "hypothesis-false"
    elif concl:
        verdict = "confirmed"
    else:
        verdict = "COUNTEREXAMPLE"
    return PropagationVerdict(verdict, alpha, hyp, concl)


@dataclass
class SweepResult:
    pairs: int = 0
    confirmed: int = 0
    hypothesis_false: int = 0
    counterexamples: list = field(default_factory=list)

    def to_json(self) -> dict:
        from .report import jsonable
        return {"pairs": self.pairs, "confirmed": self.confirmed,
                "hypothesis_false": self.hypothesis_false,
                "counterexamples": len(self.counterexamples),
                "first_counterexample": jsonable(self.counterexamples[0]) if self.counterexamples else None}


def sweep_propagation(S: FSSystem) -> SweepResult:
    """Run ``check_propagation`` on every unordered pair of top conditions."""
    top = S.universe(S.top)
    stars = {p: star(S, p) for p in top}
    out = SweepResult()
    for p, q in itertools.combinations_with_replacement(top, 2):
        v = check_propagation(S, p, q, stars)
        out.pairs += 1
        if v.verdict == "confirmed":
            out.confirmed += 1
        elif v.verdict == "hypothesis-false":
            out.hypothesis_false += 1
        else:
            out.counterexamples.append({"p": p, "q": q, "level": v.level})
    return out


# -- support-indexed poset ------------------------------------------------------

def _as_q(st: StarDecomposition) -> tuple:
    return tuple((a, st.pstar[a]) for a in sorted(st.supp))


def q_leq(S: FSSystem, x: tuple, y: tuple) -> bool:
    dx = dict(x)
    return all(a in dx and S.leq(dx[a], v) for a, v in y)


def monotonicity_witness(S: FSSystem) -> Optional[dict]:
    M = S.M
    for alpha in M.successor_steps():
        P = S.poset(M.thetas[alpha + 1])
        for p, q in itertools.product(P.elements, repeat=2):
            if P.leq(p, q) and not S.leq(S.e(alpha, p), S.e(alpha, q)):
                return {"alpha": alpha, "p": p, "q": q}
    return None


@dataclass
class QResult:
    Q: FinitePoset
    embedding: dict
    report: Report


def build_Q(S: FSSystem) -> QResult:
    """Build the poset of support-restricted decompositions and check that
    ``p -> pstar | supp(p)`` is a dense embedding.  Refuses when some
    retraction is not monotone."""
    bad = monotonicity_witness(S)
    if bad is not None:
        err = RejectedInput(f"retraction e_{bad['alpha']} is not monotone")
        err.witness = bad
        raise err
    P = S.poset(S.top)
    emb = {p: _as_q(star(S, p)) for p in P.elements}
    Q = FinitePoset(sorted(set(emb.values()), key=repr), lambda x, y: q_leq(S, x, y), name="Q")
    report = Report(f"Q:{S.name}")
    report.add("surjective", set(emb.values()) == set(Q.elements), f"{len(Q)} of {len(P)} images")
    rep = check_embedding(emb.__getitem__, P, Q)
    report.add("order", "order" not in rep.witnesses, "p' <= p gives i(p') <= i(p)",
               rep.witnesses.get("order"))
    report.add("incompatibility", "incompatibility" not in rep.witnesses,
               "compatibility agrees in both posets", rep.witnesses.get("incompatibility"))
    return QResult(Q, emb, report)


# -- chain-condition harness ------------------------------------------------------

@dataclass
class CccTrial:
    family: list
    root: Optional[list]
    level: Optional[int]
    pair: Optional[list]
    outcome: str  # no-delta-system | no-compatible-pair | confirmed | COUNTEREXAMPLE


def ccc_experiment(S: FSSystem, trials: int, family_size: int, seed: int,
                   target: Optional[int] = None) -> dict:
    """Sample families of top conditions, extract a sunflower of supports,
    look for a pair with compatible pieces at the root maximum, and check that
    pair is compatible."""
    import random

    from .posets import delta_system_extract

    rng = random.Random(seed)
    top = list(S.universe(S.top))
    stars = {}
    target = target or 2
    counts = {"no-delta-system": 0, "no-compatible-pair": 0, "confirmed": 0, "COUNTEREXAMPLE": 0}
    examples = []
    for _ in range(trials):
        fam = rng.sample(top, min(family_size, len(top)))
        for p in fam:
            if p not in stars:
                stars[p] = star(S, p)
        by_supp: dict[frozenset, list] = {}
        for p in fam:
            by_supp.setdefault(stars[p].supp, []).append(p)
        ds = delta_system_extract(list(by_supp), target)
        if ds is None or not ds.root:
            counts["no-delta-system"] += 1
            continue
        alpha = max(ds.root)
        members = [by_supp[sp][0] for sp in ds.members]
        level = S.poset(S.M.thetas[alpha])
        pair = next(((p, q) for p, q in itertools.combinations(members, 2)
                     if level.compatible(stars[p].pstar[alpha], stars[q].pstar[alpha])), None)
        if pair is None:
            counts["no-compatible-pair"] += 1
            continue
        ok = S.poset(S.top).compatible(*pair)
        outcome = "confirmed" if ok else "COUNTEREXAMPLE"
        counts[outcome] += 1
        if not ok and len(examples) < 3:
            examples.append({"pair": list(pair), "level": alpha})
    applicable = counts["confirmed"] + counts["COUNTEREXAMPLE"]
    return {"trials": trials, **counts,
            "success_rate": counts["confirmed"] / applicable if applicable else None,
            "counterexamples": examples}
