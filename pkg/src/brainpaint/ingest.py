"""Biomarker CSV parsing and validation against an atlas.

Expected shape: a header row whose first cell labels the ID column (the text
is ignored) and whose remaining cells are region names; one data row per
output image set. RFC-4180 quoting, UTF-8, LF or CRLF. Values use '.' as the
decimal point regardless of locale.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .atlas import Atlas, resolve_region
from .diagnostics import Diagnostic
from .errors import AtlasError, IngestError
from .gradient import GradientSpec


@dataclass(frozen=True)
class TableRow:
    image_name: str
    values: dict[str, float] = field(default_factory=dict)


@dataclass(frozen=True)
class RegionValueTable:
    """Parsed CSV: per image row, a canonical-region -> value map."""

    rows: tuple[TableRow, ...]
    region_order: tuple[str, ...]


def parse_biomarker_csv(text: str, atlas: Atlas) -> tuple[RegionValueTable, list[Diagnostic]]:
    """Parse and validate a biomarker CSV joined against the atlas.

    Region headers resolve through resolve_region (so aliases and loose
    spellings work); every cell must parse as a finite decimal scalar.
    Atlas regions without a CSV column are reported as missing: they render
    with value 0 downstream. Errors carry 1-based (data row, column)
    positions.
    """
    if text.startswith("﻿"):
        text = text[1:]
    reader = csv.reader(text.splitlines())
    rows = [r for r in reader if any(cell.strip() for cell in r)]
    if not rows:
        raise IngestError("empty CSV document")

    header = rows[0]
    if len(header) < 2:
        raise IngestError("header needs an ID column plus at least one region column")

    region_order: list[str] = []
    seen: dict[str, int] = {}
    for col, raw in enumerate(header[1:], start=2):
        try:
            region = resolve_region(atlas, raw)
        except AtlasError as exc:
            raise IngestError(str(exc), column=col) from exc
        name = region.canonical_name
        if name in seen:
            raise IngestError(
                f"duplicate region column {raw!r} (columns {seen[name]} and {col} "
                f"both resolve to {name!r})",
                column=col,
            )
        seen[name] = col
        region_order.append(name)

    table_rows: list[TableRow] = []
    names_seen: set[str] = set()
    for row_idx, cells in enumerate(rows[1:], start=1):
        if len(cells) != len(header):
            raise IngestError(
                f"row has {len(cells)} cells, header has {len(header)}", row=row_idx
            )
        image_name = cells[0].strip()
        if not image_name:
            raise IngestError("empty image name", row=row_idx, column=1)
        if image_name in names_seen:
            raise IngestError(f"duplicate image name {image_name!r}", row=row_idx, column=1)
        names_seen.add(image_name)
        values: dict[str, float] = {}
        for col_idx, cell in enumerate(cells[1:], start=2):
            try:
                value = float(cell.strip())
            except ValueError:
                raise IngestError(
                    f"cell {cell!r} is not a number", row=row_idx, column=col_idx
                ) from None
            if not math.isfinite(value):
                raise IngestError(
                    f"cell {cell!r} is not finite", row=row_idx, column=col_idx
                )
            values[region_order[col_idx - 2]] = value
        table_rows.append(TableRow(image_name, values))

    if not table_rows:
        raise IngestError("CSV has a header but no data rows")

    warnings: list[Diagnostic] = []
    present = set(region_order)
    for region in atlas.regions:
        # Right twins silently inherit the base region's value downstream.
        if region.hemisphere == "right":
            continue
        if region.canonical_name not in present:
            warnings.append(
                Diagnostic(
                    code="missing-region",
                    message=f"region {region.canonical_name!r} absent from the CSV; "
                            f"rendering with value 0",
                )
            )
    return RegionValueTable(tuple(table_rows), tuple(region_order)), warnings


def serialize_csv(table: RegionValueTable, id_label: str = "image") -> str:
    """Write a table back to CSV text; re-parsing yields an equal table."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([id_label, *table.region_order])
    for row in table.rows:
        writer.writerow([row.image_name, *(repr(row.values[r]) for r in table.region_order)])
    return buf.getvalue()


def check_range(table: RegionValueTable, g: GradientSpec) -> list[Diagnostic]:
    """One warning per (row, region) value outside the gradient range [0, K]."""
    warnings: list[Diagnostic] = []
    for row_idx, row in enumerate(table.rows, start=1):
        for region, value in row.values.items():
            if not 0.0 <= value <= g.top:
                warnings.append(
                    Diagnostic(
                        code="value-out-of-range",
                        message=f"{row.image_name}/{region}: value {value} outside "
                                f"[0, {g.top}]; the gradient clamps it",
                        row=row_idx,
                        column=table.region_order.index(region) + 2,
                    )
                )
    return warnings
