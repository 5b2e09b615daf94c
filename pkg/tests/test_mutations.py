import pytest

from _verbs import run_cli
from morass_forcing.mutations import EXIT_CODES, MUTATIONS


def test_catalogue():
    assert len(MUTATIONS) >= 10
    assert {m.verb for m in MUTATIONS.values()} == set(EXIT_CODES)


@pytest.mark.parametrize("name", sorted(MUTATIONS))
@pytest.mark.parametrize("seed", [0, 1, 2])
def test_mutation_detected_by_named_check(name, seed):
    mutation = MUTATIONS[name]
    report, code = mutation.execute(seed)
    assert code == EXIT_CODES[mutation.verb]
    assert report.first_failure().name in mutation.expected
    failed = set(report.failed())
    assert set(mutation.expected) <= failed


def test_cli_reports_detection():
    import json
    code, out, _ = run_cli(["mutate", "run", "no-extension", "--seed", 0])
    doc = json.loads(out)
    assert code == 2 and doc["detected"] and doc["named"] in doc["expected"]
