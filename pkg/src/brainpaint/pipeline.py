"""End-to-end runs: CSV in, PNGs plus a machine-readable manifest out.

Outputs are staged into a temporary sibling directory and moved into place
only when the whole run succeeds, so a failed run never leaves partial
images behind. Manifests carry no timestamps: re-running the same inputs
reproduces byte-identical files and hashes.
"""

from __future__ import annotations

import hashlib
import json
import re
import shutil
import tempfile
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import animation as anim
from .atlas import Atlas, apply_custom_mapping, load_atlas
from .config import RunConfig, echo_config
from .diagnostics import Diagnostic, emit
from .errors import IngestError
from .gradient import GradientSpec
from .ingest import RegionValueTable, check_range, parse_biomarker_csv
from .render import encode_png
from .scene import MeshLibrary, SceneOptions, build_scene, render_scene

_SANITIZE_RE = re.compile(r"[^A-Za-z0-9_-]")


def sanitize_image_name(name: str) -> str:
    return _SANITIZE_RE.sub("_", name)


def output_filename(image_name: str, view: str) -> str:
    return f"{sanitize_image_name(image_name)}_{view}.png"


def _scene_options(cfg: RunConfig) -> SceneOptions:
    return SceneOptions(
        include_right_hemisphere=cfg.include_right_hemisphere,
        exclude=cfg.exclude,
        glass_opacity=cfg.glass_opacity,
        background=cfg.background,
    )


def _load_inputs(cfg: RunConfig, csv_path: Path | str):
    atlas = load_atlas(cfg.atlas, cfg.asset_root)
    if cfg.region_mapping:
        atlas = apply_custom_mapping(atlas, cfg.region_mapping)
    text = Path(csv_path).read_text(encoding="utf-8-sig")
    table, warnings = parse_biomarker_csv(text, atlas)
    warnings += check_range(table, cfg.gradient)
    return atlas, table, warnings


class _Renderer:
    """Renders value maps for every configured view, sharing mesh caches."""

    def __init__(self, cfg: RunConfig, atlas: Atlas):
        self.cfg = cfg
        self.atlas = atlas
        self.library = MeshLibrary(cfg.asset_root, atlas, cfg.surface)
        self.options = _scene_options(cfg)
        self.gradient: GradientSpec = cfg.gradient

    def png_bytes(self, values: dict[str, float], view: str) -> bytes:
        spec = build_scene(self.atlas, values, self.gradient, view, self.library, self.options)
        width, height = self.cfg.resolution
        img = render_scene(spec, self.library, width, height, self.cfg.supersample)
        return encode_png(img)


def _stage_dir(output_dir: Path) -> Path:
    output_dir.parent.mkdir(parents=True, exist_ok=True)
    return Path(tempfile.mkdtemp(prefix=".brainpaint-stage-", dir=output_dir.parent))


def _promote(stage: Path, output_dir: Path) -> None:
    output_dir.mkdir(parents=True, exist_ok=True)
    for item in sorted(stage.iterdir()):
        target = output_dir / item.name
        if target.exists():
            target.unlink()
        shutil.move(str(item), str(target))
    stage.rmdir()


def run_pipeline(
    cfg: RunConfig,
    csv_path: Path | str,
    jobs: int = 1,
    diag_stream=None,
) -> dict:
    """Render every CSV row under every configured view.

    Returns the manifest dict (also written as manifest.json next to the
    images). ``jobs`` bounds the number of concurrent row-by-view renders;
    the output bytes do not depend on it.
    """
    atlas, table, warnings = _load_inputs(cfg, csv_path)
    emit(warnings, stream=diag_stream)

    names = [row.image_name for row in table.rows]
    filenames = [output_filename(n, v) for n in names for v in cfg.views]
    if len(set(filenames)) != len(filenames):
        raise IngestError("sanitized image names collide; rename the CSV rows")

    renderer = _Renderer(cfg, atlas)
    tasks = [(row, view) for row in table.rows for view in cfg.views]

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            blobs = list(pool.map(lambda t: renderer.png_bytes(t[0].values, t[1]), tasks))
    else:
        blobs = [renderer.png_bytes(row.values, view) for row, view in tasks]

    width, height = cfg.resolution
    outputs = []
    stage = _stage_dir(cfg.output_dir)
    try:
        for (row, view), blob in zip(tasks, blobs):
            fname = output_filename(row.image_name, view)
            (stage / fname).write_bytes(blob)
            outputs.append(
                {
                    "image": row.image_name,
                    "view": view,
                    "file": fname,
                    "sha256": hashlib.sha256(blob).hexdigest(),
                    "width": width,
                    "height": height,
                }
            )
        manifest = {
            "tool": "brainpaint",
            "config": echo_config(cfg),
            "input": {"csv": Path(csv_path).name, "rows": names},
            "warnings": [w.as_dict() for w in warnings],
            "outputs": outputs,
        }
        (stage / "manifest.json").write_text(
            json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        _promote(stage, cfg.output_dir)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    return manifest


def run_animation(cfg: RunConfig, csv_path: Path | str, diag_stream=None) -> dict:
    """Render an interpolated frame sequence plus its manifest."""
    atlas, table, warnings = _load_inputs(cfg, csv_path)
    emit(warnings, stream=diag_stream)

    anim_cfg = cfg.animation if cfg.animation is not None else None
    frames_per_transition = anim_cfg.frames_per_transition if anim_cfg else 10
    fps = anim_cfg.fps if anim_cfg else 10
    plan = anim.interpolate_rows(table, frames_per_transition, fps)

    renderer = _Renderer(cfg, atlas)
    stage = _stage_dir(cfg.output_dir)
    try:
        manifest = anim.render_sequence(plan, cfg.views, renderer.png_bytes, stage)
        manifest["config"] = echo_config(cfg)
        manifest["warnings"] = [w.as_dict() for w in warnings]
        anim.write_manifest(manifest, stage)
        _promote(stage, cfg.output_dir)
    except BaseException:
        shutil.rmtree(stage, ignore_errors=True)
        raise
    return manifest
