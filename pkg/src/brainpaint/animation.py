"""Frame planning for movies: linear interpolation between CSV rows.

Video muxing is out of scope; the pipeline emits numbered frames plus a JSON
manifest, and the README documents an external encoder command line.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

from .ingest import RegionValueTable


@dataclass(frozen=True)
class FrameSpec:
    index: int
    values: dict[str, float]
    row_from: int
    row_to: int
    t: float


@dataclass(frozen=True)
class FramePlan:
    frames: tuple[FrameSpec, ...]
    fps: int


def interpolate_rows(table: RegionValueTable, frames_per_transition: int, fps: int = 10) -> FramePlan:
    """Expand R rows into (R-1)*F + 1 frames.

    Frames at t=0 copy their source row exactly (bit-equal values), so
    endpoint frames render identically to single-row runs; F=1 degenerates
    to stepping through the rows with no interpolation.
    """
    if frames_per_transition < 1:
        raise ValueError(f"frames_per_transition must be >= 1, got {frames_per_transition}")
    if not table.rows:
        raise ValueError("cannot animate an empty table")
    frames: list[FrameSpec] = []
    rows = table.rows
    if len(rows) == 1:
        frames.append(FrameSpec(0, dict(rows[0].values), 0, 0, 0.0))
        return FramePlan(tuple(frames), fps)
    index = 0
    for i in range(len(rows) - 1):
        a, b = rows[i].values, rows[i + 1].values
        for j in range(frames_per_transition):
            t = j / frames_per_transition
            if j == 0:
                values = dict(a)
            else:
                values = {k: (1.0 - t) * a[k] + t * b[k] for k in table.region_order}
            frames.append(FrameSpec(index, values, i, i + 1, t))
            index += 1
    frames.append(FrameSpec(index, dict(rows[-1].values), len(rows) - 2, len(rows) - 1, 1.0))
    return FramePlan(tuple(frames), fps)


def frame_filename(index: int, view: str) -> str:
    return f"frame_{index:05d}_{view}.png"


def render_sequence(
    plan: FramePlan,
    views: tuple[str, ...],
    render_frame,
    out_dir: Path,
) -> dict:
    """Render every (frame, view) via ``render_frame(values, view) -> bytes``.

    Writes frame_%05d_<view>.png files into out_dir and returns the manifest
    dict: {"fps", "frames": [{"index", "view", "file", "row_from", "row_to",
    "t"}, ...]} ordered by frame index then view order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    records = []
    for frame in plan.frames:
        for view in views:
            name = frame_filename(frame.index, view)
            (out_dir / name).write_bytes(render_frame(frame.values, view))
            records.append(
                {
                    "index": frame.index,
                    "view": view,
                    "file": name,
                    "row_from": frame.row_from,
                    "row_to": frame.row_to,
                    "t": frame.t,
                }
            )
    return {"fps": plan.fps, "frames": records}


def write_manifest(manifest: dict, out_dir: Path, name: str = "manifest.json") -> Path:
    path = Path(out_dir) / name
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path
