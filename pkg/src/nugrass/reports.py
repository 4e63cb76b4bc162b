"""Machine-readable verification reports.

Reports are deterministic for a fixed configuration: no timestamps, sorted
keys, and all sampling drawn from the seeded stream in a fixed iteration
order, so identical configs produce byte-identical JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class CheckResult:
    check: str
    instance: str
    samples: int
    passed: int
    failed: int
    counterexamples: list = field(default_factory=list)
    note: str = ""
    gating: bool = True

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "instance": self.instance,
            "samples": self.samples,
            "passed": self.passed,
            "failed": self.failed,
            "counterexamples": self.counterexamples,
            "note": self.note,
            "gating": self.gating,
        }


@dataclass
class Report:
    suite: str
    config: dict
    results: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return all(r.failed == 0 for r in self.results if r.gating)

    def gating_failures(self) -> list[CheckResult]:
        return [r for r in self.results if r.gating and r.failed]

    def to_dict(self) -> dict:
        return {
            "suite": self.suite,
            "config": self.config,
            "ok": self.ok,
            "results": [r.to_dict() for r in self.results],
            "notes": self.notes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def summary(self) -> str:
        lines = [f"suite: {self.suite}  [{'PASS' if self.ok else 'FAIL'}]"]
        for r in self.results:
            tag = "PASS" if r.failed == 0 else "FAIL"
            if r.samples == 0 and r.note:
                tag = "SKIP"
            extra = f"  ({r.note})" if r.note else ""
            audit = "" if r.gating else "  [audit]"
            lines.append(
                f"  {tag} {r.check} {r.instance}: {r.passed}/{r.samples}{extra}{audit}"
            )
        for n in self.notes:
            lines.append(f"  note: {n}")
        return "\n".join(lines)
