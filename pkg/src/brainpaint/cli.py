"""Command-line entry points.

Exit codes: 0 ok, 2 input error (CSV/atlas/regions), 3 config error,
4 render or I/O error.
"""

from __future__ import annotations

import sys
from pathlib import Path

import click

from .atlas import BUILTIN_ATLASES, apply_custom_mapping, load_atlas
from .config import RunConfig, load_config
from .diagnostics import emit
from .errors import (
    AtlasError,
    ConfigError,
    IngestError,
    MeshError,
    RenderError,
    SceneError,
)
from .fixtures import write_fixture_assets
from .ingest import check_range, parse_biomarker_csv
from .pipeline import run_animation, run_pipeline

EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_RENDER = 4


def _fail(code: int, message: str):
    click.echo(f"ERROR {message}", err=True)
    sys.exit(code)


def _load_cfg(config_path: str | None, output: str | None) -> RunConfig:
    try:
        cfg = load_config(config_path) if config_path else RunConfig()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, f"config {exc}")
    if output:
        from dataclasses import replace

        cfg = replace(cfg, output_dir=Path(output))
    return cfg


def _run_guarded(fn):
    try:
        return fn()
    except ConfigError as exc:
        _fail(EXIT_CONFIG, f"config {exc}")
    except (IngestError, AtlasError) as exc:
        _fail(EXIT_INPUT, str(exc))
    except (RenderError, SceneError, MeshError, OSError) as exc:
        _fail(EXIT_RENDER, str(exc))


@click.group()
@click.version_option(package_name="brainpaint")
def main():
    """Turn per-region biomarker CSVs into rendered brain images."""


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None, help="JSON config file.")
@click.option("--input", "csv_path", type=click.Path(), required=True, help="Biomarker CSV.")
@click.option("--output", type=click.Path(), default=None, help="Output directory (overrides config).")
@click.option("--jobs", type=int, default=1, show_default=True, help="Concurrent render jobs.")
def render(config_path, csv_path, output, jobs):
    """Render one PNG per CSV row per configured view."""
    cfg = _load_cfg(config_path, output)
    manifest = _run_guarded(lambda: run_pipeline(cfg, csv_path, jobs=max(jobs, 1)))
    click.echo(f"wrote {len(manifest['outputs'])} images to {cfg.output_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--input", "csv_path", type=click.Path(), required=True)
@click.option("--output", type=click.Path(), default=None)
def animate(config_path, csv_path, output):
    """Render an interpolated frame sequence for movie assembly."""
    cfg = _load_cfg(config_path, output)
    manifest = _run_guarded(lambda: run_animation(cfg, csv_path))
    click.echo(f"wrote {len(manifest['frames'])} frames to {cfg.output_dir}")


@main.command()
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--input", "csv_path", type=click.Path(), required=True)
def validate(config_path, csv_path):
    """Parse and validate the config and CSV without rendering."""
    cfg = _load_cfg(config_path, None)

    def check():
        atlas = load_atlas(cfg.atlas, cfg.asset_root)
        if cfg.region_mapping:
            atlas = apply_custom_mapping(atlas, cfg.region_mapping)
        text = Path(csv_path).read_text(encoding="utf-8-sig")
        table, warnings = parse_biomarker_csv(text, atlas)
        warnings += check_range(table, cfg.gradient)
        emit(warnings)
        return table, warnings

    table, warnings = _run_guarded(check)
    click.echo(
        f"ok: {len(table.rows)} rows, {len(table.region_order)} region columns, "
        f"{len(warnings)} warnings"
    )


@main.command()
@click.option("--out", "out_dir", type=click.Path(), required=True, help="Asset root to fill.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option(
    "--atlas",
    "atlas_name",
    default="desikan_killiany",
    show_default=True,
    help="Atlas to generate, or 'all'.",
)
def fixtures(out_dir, seed, atlas_name):
    """Generate the synthetic fixture meshes used by the test suite."""
    names = BUILTIN_ATLASES if atlas_name == "all" else (atlas_name,)

    def generate():
        total = 0
        for name in names:
            total += len(write_fixture_assets(out_dir, name, seed))
        return total

    total = _run_guarded(generate)
    click.echo(f"wrote {total} fixture meshes under {out_dir}")


@main.command()
@click.option("--host", default=None, help="Bind address (default from BRAINPAINT_ADDR).")
@click.option("--port", type=int, default=None)
@click.option("--data-dir", type=click.Path(), default=None)
@click.option("--asset-root", type=click.Path(), default=None)
def serve(host, port, data_dir, asset_root):
    """Run the HTTP render service."""
    import uvicorn

    from .service import service_settings_from_env, create_app

    settings = service_settings_from_env()
    if data_dir:
        settings["data_dir"] = Path(data_dir)
    if asset_root:
        settings["asset_root"] = Path(asset_root)
    bind_host, bind_port = settings.pop("addr")
    app = create_app(**settings)
    uvicorn.run(app, host=host or bind_host, port=port or bind_port, log_level="info")


if __name__ == "__main__":
    main()
