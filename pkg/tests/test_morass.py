import itertools

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morass_forcing.errors import RejectedInput
from morass_forcing.morass import (Amalgam, Morass, Successor, TreeNode, build_canonical, build_random,
                                   check_tree, successor_values, validate)
from morass_forcing.ordinals import OrderMap, compose, restrict

T = TreeNode


def with_step(M, alpha, step):
    steps = list(M.steps)
    steps[alpha] = step
    return Morass(M.thetas, steps)


def maximal_paths(M):
    """Root-to-top paths in the graph of one-step links, counted by networkx."""
    G = nx.DiGraph()
    for alpha in range(M.height):
        for g in M.step_maps(alpha):
            for nu, tau in enumerate(g.values):
                G.add_edge((alpha, nu), (alpha + 1, tau))
    G.add_node((0, 0))
    leaves = [(M.height, nu) for nu in range(M.top_width)]
    return sum(len(list(nx.all_simple_paths(G, (0, 0), leaf))) if leaf != (0, 0) else 1 for leaf in leaves)


def test_doubling_small_cases(M2):
    assert build_canonical(0).thetas == (1,)
    assert build_canonical(0).steps == ()
    assert M2.thetas == (1, 2, 4)
    assert M2.f(0) == OrderMap(1, 2, (1,))
    assert M2.f(1) == OrderMap(2, 4, (2, 3))
    assert build_canonical(3).thetas[3] == 8


def test_successor_values_split():
    assert successor_values(4, 0) == (4, 5, 6, 7)
    assert successor_values(4, 2) == (0, 1, 4, 5)


def test_family_examples(M2):
    ident1, ident2 = OrderMap.identity(1, 2), OrderMap.identity(2, 4)
    assert set(M2.family(1, 2)) == {ident2, M2.f(1)}
    assert set(M2.family(0, 1)) == {ident1, M2.f(0)}
    oracle = {compose(f, g) for f in (ident2, M2.f(1)) for g in (ident1, M2.f(0))}
    assert set(M2.family(0, 2)) == oracle
    assert {m.values for m in M2.family(0, 2)} == {(0,), (1,), (2,), (3,)}
    with pytest.raises(RejectedInput):
        M2.family(2, 2)
    with pytest.raises(RejectedInput):
        M2.family(1, 0)


def test_precedes_examples(M2):
    assert M2.precedes(T(0, 0), T(2, 3))
    assert M2.precedes(T(1, 1), T(2, 3))
    assert not M2.precedes(T(1, 0), T(1, 1))
    assert not M2.precedes(T(1, 0), T(2, 3))


def test_pi_examples(M2):
    assert M2.pi(T(1, 1), T(2, 3)) == OrderMap(2, 4, (2, 3))
    assert M2.pi(T(0, 0), T(2, 3)) == OrderMap(1, 4, (3,))
    assert M2.pi(T(1, 0), T(2, 0)).is_identity()
    with pytest.raises(RejectedInput):
        M2.pi(T(1, 0), T(2, 3))


def test_level_predecessor_examples(M2):
    assert M2.level_predecessor(T(2, 3), 1) == T(1, 1)
    assert M2.level_predecessor(T(2, 3), 0) == T(0, 0)
    assert M2.level_predecessor(T(2, 0), 1) == T(1, 0)


def test_branch_count_examples(M2):
    assert M2.branch_count() == 4
    assert build_canonical(0).branch_count() == 1
    for h in range(1, 7):
        M = build_canonical(h)
        assert M.branch_count() == 2 ** h == maximal_paths(M)


def test_validate_passes_on_doubling():
    for h in range(0, 7):
        assert validate(build_canonical(h)).ok


def test_validate_flags_non_increasing(M2):
    bad = with_step(M2, 1, Successor(0, (2, 1)))
    rep = validate(bad)
    assert rep.first_failure().name == "P0b"
    assert rep["P0b"].witness["step"] == 1


def test_validate_flags_identity_split(M2):
    rep = validate(with_step(M2, 1, Successor(0, (0, 1))))
    assert {"P3", "P5"} <= set(rep.failed())
    assert rep["P5"].witness["uncovered"] == [2, 3]


def test_validate_flags_base_width():
    rep = validate(Morass((2, 4), [Successor(0, (2, 3))]))
    assert rep.first_failure().name == "P0a"


def test_validate_flags_coverage_gap():
    rep = validate(Morass((1, 2, 5), [Successor(0, (1,)), Successor(0, (3, 4))]))
    assert rep.failed() == ["P5"]
    assert rep["P5"].witness == {"level": 2, "uncovered": [2]}


def test_validate_flags_colliding_amalgam():
    M = Morass((1, 2, 3), [Successor(0, (1,)), Amalgam(((0, 1), (1, 2)))])
    failed = validate(M).failed()
    assert "coherence" in failed


def test_identity_amalgam_level_is_valid():
    M = build_canonical(3, "custom", deltas=[0, None, 1])
    assert M.thetas == (1, 2, 2, 3)
    assert validate(M).ok
    assert check_tree(M).ok
    assert M.branch_count() == 3


def test_custom_rejects_bad_split():
    with pytest.raises(RejectedInput, match="P3"):
        build_canonical(2, "custom", deltas=[0, 2])
    with pytest.raises(RejectedInput):
        build_canonical(-1)
    with pytest.raises(RejectedInput):
        build_canonical(2, "fractal")


def test_build_random_is_deterministic():
    a, b = build_random(4, 12, 7), build_random(4, 12, 7)
    assert a == b and a.steps == b.steps
    assert build_random(1, 4, 3).thetas[1] >= 2


def test_hundred_random_morasses_validate():
    for seed in range(100):
        M = build_random(4, 16, seed)
        rep = validate(M)
        assert rep.ok, (seed, rep.failed())


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 4), st.integers(2, 20), st.integers(0, 10 ** 6))
def test_random_morass_properties(h, cap, seed):
    M = build_random(h, cap, seed)
    assert validate(M).ok
    assert check_tree(M).ok
    # every top node determines its own branch
    assert M.branch_count() == M.top_width
    # each level is covered by images of lower levels
    for beta in range(1, h + 1):
        covered = set()
        for gamma in range(beta):
            for f in M.family(gamma, beta):
                covered |= f.range
        assert covered == set(range(M.thetas[beta]))


def test_tree_lemma_exhaustive():
    for h in range(0, 5):
        M = build_canonical(h)
        nodes = list(M.nodes())
        for t in nodes:
            preds = [s for s in nodes if M.precedes(s, t)]
            assert sorted(s.level for s in preds) == list(range(t.level))
            for s1, s2 in itertools.combinations(sorted(preds), 2):
                assert M.precedes(s1, s2)
        for t0, t1, t2 in itertools.permutations(nodes, 3):
            if M.precedes(t0, t1) and M.precedes(t1, t2):
                p01 = OrderMap(t0.index + 1, t1.index + 1, M.pi(t0, t1).values)
                assert M.pi(t0, t2) == compose(M.pi(t1, t2), p01)
        for s, t in itertools.permutations(nodes, 2):
            if not M.precedes(s, t):
                continue
            p = M.pi(s, t)
            for nu in range(s.index + 1):
                s2, t2 = T(s.level, nu), T(t.level, p(nu))
                assert M.precedes(s2, t2)
                assert M.pi(s2, t2) == restrict(p, nu + 1)


def test_check_tree_report_names():
    rep = check_tree(build_canonical(3))
    assert rep.ok
    assert [c.name for c in rep.checks] == ["tree", "pi-commutativity", "pi-restriction", "continuity"]
    assert not rep["continuity"].applicable


def test_nodes_and_chain(M2):
    assert list(M2.nodes(1)) == [T(1, 0), T(1, 1)]
    assert M2.chain(T(2, 3)) == [T(0, 0), T(1, 1), T(2, 3)]
    with pytest.raises(RejectedInput):
        M2.check_node(T(1, 2))


def test_pickle_roundtrip(M2):
    import pickle
    M = pickle.loads(pickle.dumps(M2))
    assert M == M2 and M.family(0, 2) == M2.family(0, 2)
