"""Structured pass/fail records shared by every verification routine."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Iterable


def fmt(value: Any) -> str:
    """Render a value for CSV output: 12 significant digits for reals."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.12g}"
    if isinstance(value, (tuple, list)):
        return "(" + ",".join(fmt(v) for v in value) + ")"
    return str(value)


@dataclass
class Check:
    check: str
    passed: bool
    bound: Any = None
    observed: Any = None
    witness: Any = None
    detail: str = ""


@dataclass
class VerificationReport:
    name: str
    checks: list[Check] = field(default_factory=list)
    extras: dict[str, Any] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def add(self, check: str, passed: bool, bound=None, observed=None,
            witness=None, detail: str = "") -> Check:
        c = Check(check, bool(passed), bound, observed, witness, detail)
        self.checks.append(c)
        return c

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def extend(self, other: "VerificationReport", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(Check(prefix + c.check, c.passed, c.bound,
                                     c.observed, c.witness, c.detail))

    def rows(self) -> list[list[str]]:
        return [[self.name, c.check, "pass" if c.passed else "FAIL",
                 fmt(c.bound), fmt(c.observed), fmt(c.witness)]
                for c in self.checks]

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.name}"]
        for c in self.checks:
            mark = "ok " if c.passed else "BAD"
            line = f"  {mark} {c.check}"
            if c.bound is not None or c.observed is not None:
                line += f"  bound={fmt(c.bound)} observed={fmt(c.observed)}"
            if not c.passed and c.witness is not None:
                line += f"  witness={fmt(c.witness)}"
            lines.append(line)
        return "\n".join(lines)

    def __bool__(self) -> bool:
        return self.passed


CSV_HEADER = ["report", "check", "status", "bound", "observed", "witness"]


def reports_to_csv(reports: Iterable[VerificationReport]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for rep in sorted(reports, key=lambda r: r.name):
        writer.writerows(rep.rows())
    return buf.getvalue()
