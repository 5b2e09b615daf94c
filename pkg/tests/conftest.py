import time

import pytest

from morass_forcing.morass import build_canonical

_RESULTS = pytest.StashKey[dict]()
ACCEPTANCE_COUNT = 14


@pytest.fixture(scope="session")
def M2():
    return build_canonical(2)


@pytest.fixture(scope="session")
def M3():
    return build_canonical(3)


class Criterion:
    """Times a block, collects failed checks, records one verdict."""

    def __init__(self, results: dict, number: int, title: str, limit):
        self.results, self.number, self.title, self.limit = results, number, title, limit
        self.problems: list[str] = []

    def check(self, ok: bool, message: str) -> None:
        if not ok:
            self.problems.append(message)

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        elapsed = time.perf_counter() - self.start
        if exc is not None:
            self.problems.append(f"{exc_type.__name__}: {exc}")
        if self.limit is not None and elapsed >= self.limit:
            self.problems.append(f"took {elapsed:.2f} s, limit {self.limit} s")
        timing = f"{elapsed:.2f} s" + (f" < {self.limit} s" if self.limit is not None else "")
        self.results[self.number] = (self.title, not self.problems, timing, self.problems[:1])
        if exc is None and self.problems:
            raise AssertionError("; ".join(self.problems))
        return False


@pytest.fixture
def acceptance(request):
    results = request.config.stash.setdefault(_RESULTS, {})

    def start(number: int, title: str, limit=None) -> Criterion:
        return Criterion(results, number, title, limit)
    return start


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    results = config.stash.get(_RESULTS, None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in range(1, ACCEPTANCE_COUNT + 1):
        if n not in results:
            terminalreporter.write_line(f"FAIL  {n:2d}  not run")
            continue
        title, ok, timing, problems = results[n]
        line = f"{'PASS' if ok else 'FAIL'}  {n:2d}  {title} ({timing})"
        if problems:
            line += f": {problems[0]}"
        terminalreporter.write_line(line)
