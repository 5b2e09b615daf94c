"""Optional process parallelism for independent jobs.

The worker count comes from ``MORASS_FORCING_WORKERS`` (default 1, meaning
everything runs in-process).  Results are returned in input order, so output
does not depend on the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, TypeVar

from .errors import RejectedInput

ENV_VAR = "MORASS_FORCING_WORKERS"

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get(ENV_VAR, "1")
    try:
        n = int(raw)
    except ValueError:
        raise RejectedInput(f"{ENV_VAR} must be an integer, got {raw!r}") from None
    if n < 1:
        raise RejectedInput(f"{ENV_VAR} must be at least 1, got {n}")
    return n


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    n = min(worker_count(), len(items))
    if n <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
