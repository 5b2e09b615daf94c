"""The fourteen acceptance criteria, one test each.

Every test prints its verdict in the "acceptance criteria" section of the
terminal summary.
"""

import itertools
import time

from _verbs import run_cli, snapshot, verb_runs, write_inputs
from morass_forcing import delta_forcing as dz
from morass_forcing.fs_system import CohenFS, SubsetFS, build_Q, sweep_propagation, validate_fs
from morass_forcing.morass import build_canonical, build_random, check_tree, validate
from morass_forcing.mutations import MUTATIONS
from morass_forcing.suites import dp_sample_suite, delta_suite, sba_propagation_suite, sba_suite

MORASS_MUTATIONS = ["non-increasing-map", "identity-split", "wide-base", "coverage-gap",
                    "incoherent-amalgam", "pi-flip"]


def test_criterion_01_morass_axioms(acceptance):
    with acceptance(1, "morass axioms: doubling h=1..6, 100 random h=4, 6 mutations", limit=5) as c:
        for h in range(1, 7):
            rep = validate(build_canonical(h))
            c.check(rep.ok, f"doubling h={h} fails {rep.failed()}")
        for seed in range(100):
            rep = validate(build_random(4, 64, seed))
            c.check(rep.ok, f"random seed {seed} fails {rep.failed()}")
        for name in MORASS_MUTATIONS:
            m = MUTATIONS[name]
            report, code = m.execute(0)
            first = report.first_failure()
            c.check(code == 1 and first is not None and first.name in m.expected,
                    f"{name}: exit {code}, first failure {first and first.name}")


def test_criterion_02_tree_lemma(acceptance):
    with acceptance(2, "tree property, pi commutativity and restriction for h<=4", limit=5) as c:
        morasses = [build_canonical(h) for h in range(5)]
        morasses += [build_random(h, 12, seed) for h in range(1, 5) for seed in range(10)]
        morasses += [build_canonical(4, "custom", deltas=[0, None, 1, 0])]
        for M in morasses:
            rep = check_tree(M)
            c.check(rep.ok, f"thetas {M.thetas} fail {rep.failed()}")
            c.check(all(ch.applicable for ch in rep.checks if ch.name != "continuity"),
                    f"thetas {M.thetas}: a check ran vacuously")


def test_criterion_03_doubling_growth(acceptance):
    with acceptance(3, "doubling width and branch count 2^h for h<=10") as c:
        for h in range(11):
            M = build_canonical(h)
            c.check(M.top_width == 2 ** h, f"h={h}: width {M.top_width}")
            c.check(M.branch_count() == 2 ** h, f"h={h}: {M.branch_count()} branches")


def test_criterion_04_fs_validation(acceptance, M2):
    with acceptance(4, "system axioms on M2: subset and harmonized pass, plain fails completeness",
                    limit=60) as c:
        for S in (SubsetFS(M2), CohenFS(M2)):
            rep = validate_fs(S)
            c.check(rep.ok and len(rep.checks) == 9, f"{S.name} fails {rep.failed()}")
        rep = validate_fs(CohenFS(M2, harmonized=False))
        first = rep.first_failure()
        c.check(first is not None and first.name.startswith("FS6") and first.witness is not None,
                f"plain fixture: first failure {first and first.name}")


def test_criterion_05_propagation_fs(acceptance, M2):
    with acceptance(5, "harmonized fixture on M2: pieces compatible at top shared level imply compatible",
                    limit=120) as c:
        res = sweep_propagation(CohenFS(M2))
        c.check(not res.counterexamples, f"{len(res.counterexamples)} counterexamples")
        c.check(res.confirmed > 0, "hypothesis never met")


def test_criterion_06_dense_embedding(acceptance, M2):
    with acceptance(6, "subset fixture: monotone retractions, dense embedding into the support poset",
                    limit=30) as c:
        S = SubsetFS(M2)
        P = S.poset(S.top)
        for alpha in range(M2.height):
            for p, q in itertools.product(P.elements, repeat=2):
                if S.leq(p, q):
                    c.check(S.leq(S.e(alpha, p), S.e(alpha, q)), f"e_{alpha} not monotone at {p}, {q}")
        res = build_Q(S)
        c.check(res.report.ok, f"embedding fails {res.report.failed()}")
        c.check({ch.name for ch in res.report.checks} == {"surjective", "order", "incompatibility"},
                "missing embedding clause")


def test_criterion_07_membership_closed_form(acceptance, M2, M3):
    with acceptance(7, "recursive membership equals closed form, |a|,|b|<=2, colors<3, M2 and M3",
                    limit=120) as c:
        for M in (M2, M3):
            rep = delta_suite(M, 2, 2, 3, checks=("equivalence",))
            c.check(rep.ok, f"thetas {M.thetas}: {rep['equivalence'].witness}")


def test_criterion_08_dp_forms(acceptance):
    with acceptance(8, "both forms of D_p agree on 10^4 seeded members per morass, h<=4") as c:
        morasses = [build_canonical(h) for h in range(1, 5)] + [build_random(4, 12, 3)]
        for i, M in enumerate(morasses):
            rep = dp_sample_suite(M, 10_000, seed=i)
            c.check(rep.ok, f"thetas {M.thetas}: {rep['dp'].witness}")


def test_criterion_09_propagation_delta(acceptance, M2):
    with acceptance(9, "colored pairs on M2: compatible pieces at top shared level imply compatible",
                    limit=300) as c:
        rep = delta_suite(M2, 2, 2, 3, checks=("propagation",))
        c.check(rep.ok, f"{rep['propagation'].witness}")


def test_criterion_10_amalgamation(acceptance, M2):
    with acceptance(10, "amalgams of hypothesis-satisfying pairs are members below both") as c:
        rep = delta_suite(M2, 2, 2, 3, checks=("amalgamation",))
        c.check(rep.ok, f"{rep['amalgamation'].witness}")


def test_criterion_11_density(acceptance, M2):
    with acceptance(11, "every member extends to every pair below the top width", limit=60) as c:
        members = dz.enumerate_members(M2, 2, 2, 3)
        for p in members:
            for x, y in itertools.product(range(M2.top_width), repeat=2):
                q = dz.extend(M2, p, x, y)
                c.check(x in q.a and y in q.b and dz.member_char(M2, q) and dz.leq(q, p),
                        f"extend({p}, {x}, {y}) = {q}")


def test_criterion_12_order_forcing(acceptance, M2):
    with acceptance(12, "finite order forcing on M2, B=2: clauses, membership, amalgams, generic order",
                    limit=300) as c:
        rep = sba_suite(M2, 3, 2)
        rep.extend(sba_propagation_suite(M2, 2))
        c.check(rep.ok, f"fails {rep.failed()}")
        names = {ch.name for ch in rep.checks}
        for want in ("generic-a", "generic-b", "generic-c", "generic-d-prime"):
            c.check(want in names, f"{want} not run")


def test_criterion_13_determinism(acceptance, tmp_path):
    with acceptance(13, "every verb gives byte-identical output on two runs") as c:
        paths = write_inputs(str(tmp_path))
        for argv, _ in verb_runs(paths):
            first, second = run_cli(argv), run_cli(argv)
            c.check(first == second, f"{' '.join(map(str, argv))} differs between runs")
        dirs = []
        for i in range(2):
            d = tmp_path / f"report{i}"
            code, out, _ = run_cli(["report", "--morass", paths["M2.json"], "--output-dir", d])
            c.check(code == 0, f"report exit {code}")
            dirs.append((out, snapshot(d)))
        c.check(dirs[0] == dirs[1], "report outputs differ between runs")


def test_criterion_14_mutation_sensitivity(acceptance):
    with acceptance(14, f"{len(MUTATIONS)} seeded mutations detected with nonzero exit") as c:
        c.check(len(MUTATIONS) >= 10, "fewer than 10 mutations")
        for required in ("identity-sigma-leak", "no-injectivity", "no-extension", "pi-flip"):
            c.check(required in MUTATIONS, f"missing mutation {required}")
        for name in sorted(MUTATIONS):
            code, out, _ = run_cli(["mutate", "run", name, "--seed", 7])
            c.check(code in (1, 2), f"{name} undetected (exit {code})")
