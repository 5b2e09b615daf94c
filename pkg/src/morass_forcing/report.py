"""Pass/fail check reports with JSON-friendly witnesses."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


def jsonable(obj: Any) -> Any:
    """Convert witnesses (sets, tuples, dataclasses with ``to_json``) to JSON data."""
    if hasattr(obj, "to_json"):
        return obj.to_json()
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (set, frozenset)):
        items = [jsonable(x) for x in obj]
        try:
            return sorted(items)
        except TypeError:
            return sorted(items, key=repr)
    if isinstance(obj, (list, tuple)):
        return [jsonable(x) for x in obj]
    return obj


@dataclass
class Check:
    name: str
    passed: bool
    detail: str = ""
    witness: Any = None
    applicable: bool = True

    def to_json(self) -> dict:
        out = {"name": self.name, "passed": self.passed, "detail": self.detail}
        if not self.applicable:
            out["applicable"] = False
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        return out


@dataclass
class Report:
    subject: str
    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, passed: bool, detail: str = "", witness: Any = None,
            applicable: bool = True) -> Check:
        check = Check(name, bool(passed), detail, witness, applicable)
        self.checks.append(check)
        return check

    def vacuous(self, name: str, detail: str) -> Check:
        return self.add(name, True, detail, applicable=False)

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failed(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]

    def first_failure(self) -> Optional[Check]:
        return next((c for c in self.checks if not c.passed), None)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_json(self) -> dict:
        first = self.first_failure()
        return {
            "subject": self.subject,
            "ok": self.ok,
            "first_failure": first.name if first else None,
            "checks": [c.to_json() for c in self.checks],
        }
