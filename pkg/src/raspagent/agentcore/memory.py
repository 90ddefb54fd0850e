"""Shared append-only memory of structured agent reports."""

from __future__ import annotations

import itertools
import json
import threading
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Callable

STATUSES = ("done", "failed", "needs-input")
EMPTY_MEMORY_TEXT = "No prior reports in shared memory."
DEFAULT_BUDGET = 6000


@dataclass(frozen=True)
class MemoryReport:
    author: str
    timestamp: str
    summary: str
    outputs: tuple[tuple[str, str], ...] = ()
    status: str = "done"

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown report status {self.status!r}")
        object.__setattr__(self, "outputs", tuple((str(r), str(v)) for r, v in self.outputs))

    def digest(self) -> str:
        line = f"[{self.timestamp}] {self.author} ({self.status}): {self.summary}"
        if self.outputs:
            line += "\n    outputs: " + ", ".join(f"{role}={value}" for role, value in self.outputs)
        return line


def wall_clock() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def logical_clock() -> Callable[[], str]:
    """Deterministic timestamps (t0001, t0002, ...) for replayed runs."""
    counter = itertools.count(1)
    return lambda: f"t{next(counter):04d}"


class GlobalMemory:
    """Append-only log. Appends are serialized through a lock."""

    def __init__(self, clock: Callable[[], str] | None = None):
        self._reports: list[MemoryReport] = []
        self._lock = threading.Lock()
        self.clock = clock or wall_clock

    def __len__(self) -> int:
        return len(self._reports)

    def __iter__(self):
        return iter(tuple(self._reports))

    @property
    def reports(self) -> tuple[MemoryReport, ...]:
        return tuple(self._reports)

    def append(self, report: MemoryReport) -> GlobalMemory:
        with self._lock:
            self._reports.append(report)
        return self

    def report(self, author: str, summary: str, outputs=(), status: str = "done") -> MemoryReport:
        rep = MemoryReport(author=author, timestamp=self.clock(), summary=summary, outputs=tuple(outputs), status=status)
        self.append(rep)
        return rep

    def to_jsonl(self) -> str:
        return "".join(json.dumps(asdict(r), sort_keys=True) + "\n" for r in self._reports)


def memory_append(memory: GlobalMemory, report: MemoryReport) -> GlobalMemory:
    return memory.append(report)


def memory_render(memory: GlobalMemory, for_agent: str | None = None, budget: int = DEFAULT_BUDGET) -> str:
    """Chronological digest of all reports, dropping the oldest to fit ``budget`` characters.

    The newest report is always kept whole, even if it alone exceeds the budget.
    """
    reports = memory.reports
    if not reports:
        return EMPTY_MEMORY_TEXT
    header = "Shared memory" + (f" (for {for_agent})" if for_agent else "") + ":"
    blocks = [r.digest() for r in reports]
    kept: list[str] = []
    used = len(header)
    for block in reversed(blocks):
        cost = len(block) + 1
        if kept and used + cost > budget:
            break
        kept.append(block)
        used += cost
    kept.reverse()
    dropped = len(blocks) - len(kept)
    lines = [header]
    if dropped:
        lines.append(f"({dropped} earlier report(s) omitted)")
    lines.extend(kept)
    return "\n".join(lines)
