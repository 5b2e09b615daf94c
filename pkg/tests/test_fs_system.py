import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from morass_forcing.errors import RejectedInput, SizeLimitExceeded
from morass_forcing.fs_system import (CohenFS, SubsetFS, build_Q, ccc_experiment, check_propagation,
                                      make_fixture, star, support, sweep_propagation, validate_fs)
from morass_forcing.morass import TreeNode, build_canonical, build_random


@pytest.fixture(scope="module")
def subset2(M2):
    return SubsetFS(M2)


@pytest.fixture(scope="module")
def harmonized2(M2):
    return CohenFS(M2)


@pytest.fixture(scope="module")
def plain2(M2):
    return CohenFS(M2, harmonized=False)


def test_fixture_lookup(M2):
    assert make_fixture("subset", M2).name == "subset"
    with pytest.raises(RejectedInput):
        make_fixture("nope", M2)


def test_subset_fixture_passes_all_axioms(subset2):
    rep = validate_fs(subset2)
    assert rep.ok, rep.failed()
    assert [c.name for c in rep.checks] == ["FS1", "FS2", "FS3", "FS4", "FS5", "FS6a", "FS6b", "FS7a", "FS7b"]


def test_harmonized_fixture_passes_all_axioms(harmonized2):
    assert validate_fs(harmonized2).ok


def test_plain_fixture_fails_completeness_with_witness(plain2, M2):
    rep = validate_fs(plain2)
    assert rep.failed() == ["FS6b"]
    w = rep["FS6b"].witness
    assert w["alpha"] == 0
    q = w["reduction"]["q"]
    # independent confirmation: some extension of e_0(q) maps to something incompatible with q
    r = plain2.e(0, q)
    lower, upper = plain2.poset(1), plain2.poset(2)
    bad = [x for x in lower.below(r) if not upper.compatible(plain2.sigma_step(0, x), q)]
    assert bad
    # the witness disagrees with itself along the split map
    vals = dict(q)
    assert any(g in vals and M2.f(0)(g) in vals and vals[g] != vals[M2.f(0)(g)] for g in range(1))


def test_plain_reduction_exists_even_though_e_is_not_one(plain2):
    lower, upper = plain2.poset(1), plain2.poset(2)
    from morass_forcing.posets import find_reduction
    for q in upper.elements:
        assert find_reduction(lambda p: plain2.sigma_step(0, p), lower, upper, q) is not None


def test_harmonized_inclusion_is_complete(harmonized2, M2):
    from morass_forcing.posets import check_embedding
    for alpha in range(M2.height):
        lower = harmonized2.poset(M2.thetas[alpha])
        upper = harmonized2.poset(M2.thetas[alpha + 1])
        assert check_embedding(lambda p: p, lower, upper).is_complete


def test_universe_limit(M2):
    with pytest.raises(SizeLimitExceeded) as info:
        CohenFS(build_canonical(3), harmonized=False).universe(8)
    assert info.value.estimate == 3 ** 8


def test_star_empty_condition(subset2):
    st_ = star(subset2, frozenset())
    assert len(st_.stages) == 1 and st_.supp == {0}
    assert support(subset2, frozenset({0})) == {0}


def test_star_single_point_trace(subset2):
    dec = star(subset2, frozenset({3}))
    assert len(dec.stages) == 1
    stage = dec.stages[0]
    assert stage.nu == 3 and stage.t == TreeNode(2, 3) and stage.gamma == 0
    assert dec.pstar == {0: {0}, 1: {1}, 2: {3}}
    assert dec.supp == {0}


def test_star_multi_stage(subset2):
    dec = star(subset2, frozenset({2, 3}))
    assert dec.supp == {0, 1}
    assert [s.gamma for s in dec.stages] == [1, 0]
    # second stage starts from e_0 of the level-1 piece {0, 1}
    assert dec.stages[1].p == subset2.e(0, frozenset({0, 1}))
    assert support(subset2, frozenset({1, 2})) == {0, 1, 2}


def test_star_rejects_foreign_condition(subset2):
    with pytest.raises(RejectedInput):
        star(subset2, frozenset({9}))


@pytest.mark.parametrize("fixture", ["subset", "harmonized-cohen"])
def test_gamma_strictly_decreasing_everywhere(fixture, M2, M3):
    for M in (M2, M3):
        S = make_fixture(fixture, M)
        for p in S.universe(S.top):
            dec = star(S, p)
            gammas = [s.gamma for s in dec.stages]
            assert gammas == sorted(set(gammas), reverse=True) and gammas[-1] == 0
            assert dec.supp <= set(range(M.height + 1))
            assert all(S.member(dec.pstar[a], M.thetas[a]) for a in dec.pstar)


def test_propagation_examples(subset2, harmonized2):
    p = frozenset({(0, 1)})
    assert check_propagation(harmonized2, p, p).verdict == "confirmed"
    for p, q in itertools.combinations(subset2.universe(4), 2):
        assert check_propagation(subset2, p, q).verdict == "confirmed"


def test_propagation_sweeps(harmonized2, plain2):
    res = sweep_propagation(harmonized2)
    assert not res.counterexamples and res.pairs == res.confirmed + res.hypothesis_false
    assert sweep_propagation(plain2).counterexamples


def test_propagation_on_h3(M3):
    assert not sweep_propagation(CohenFS(M3)).counterexamples


def test_build_Q_subset(subset2):
    res = build_Q(subset2)
    assert res.report.ok
    assert len(res.Q) <= len(subset2.poset(subset2.top))


def test_build_Q_refuses_non_monotone(M2):
    class Complement(SubsetFS):
        def e(self, alpha, p):
            return frozenset(range(self.M.thetas[alpha])) - super().e(alpha, p)

    S = Complement(M2)
    with pytest.raises(RejectedInput) as info:
        build_Q(S)
    w = info.value.witness
    assert S.leq(w["p"], w["q"]) and not S.leq(S.e(w["alpha"], w["p"]), S.e(w["alpha"], w["q"]))


def test_ccc_recipe(harmonized2, plain2):
    res = ccc_experiment(harmonized2, 100, 8, seed=5)
    assert res["COUNTEREXAMPLE"] == 0 and res["confirmed"] > 0 and res["success_rate"] == 1.0
    assert ccc_experiment(harmonized2, 100, 8, seed=5) == res
    assert ccc_experiment(plain2, 200, 8, seed=5)["COUNTEREXAMPLE"] > 0


@settings(max_examples=15, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10 ** 6))
def test_subset_fixture_valid_on_random_morasses(h, seed):
    M = build_random(h, 6, seed)
    S = SubsetFS(M)
    assert validate_fs(S).ok
    assert not sweep_propagation(S).counterexamples
