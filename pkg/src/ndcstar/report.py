from __future__ import annotations

from dataclasses import dataclass, field

from .algebra import _jsonable


@dataclass
class Report:
    """Outcome of a composite check: overall verdict plus named sub-results."""

    kind: str
    passed: bool
    details: dict = field(default_factory=dict)

    def __bool__(self):
        return self.passed

    def to_dict(self) -> dict:
        return {"kind": self.kind, "passed": bool(self.passed), **_jsonable(self.details)}
