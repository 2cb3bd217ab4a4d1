"""Structured warning records shared by ingest, pipeline, and service."""

from __future__ import annotations

import sys
from dataclasses import asdict, dataclass


@dataclass(frozen=True)
class Diagnostic:
    """One machine-readable warning.

    ``row`` and ``column`` are 1-based when set: rows count data rows of the
    input CSV, columns count all CSV columns including the ID column.
    """

    code: str
    message: str
    row: int | None = None
    column: int | None = None

    def as_dict(self) -> dict:
        return asdict(self)

    def format_line(self, level: str = "WARN") -> str:
        loc = ""
        if self.row is not None or self.column is not None:
            loc = f" [row={self.row} col={self.column}]"
        return f"{level} {self.code} {self.message}{loc}"


def emit(diags: list[Diagnostic], *, level: str = "WARN", stream=None) -> None:
    """Print diagnostics one per line to the diagnostic stream (stderr)."""
    out = stream if stream is not None else sys.stderr
    for d in diags:
        print(d.format_line(level), file=out)
