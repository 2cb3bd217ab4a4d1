"""Run configuration: JSON file with strict key checking and full defaults."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

from .atlas import BUILTIN_ATLASES
from .errors import ConfigError
from .gradient import GradientError, GradientSpec, default_gradient, parse_color, parse_gradient
from .scene import DEFAULT_GLASS_OPACITY, DEFAULT_VIEWS, VIEW_PRESETS

SURFACES = ("pial", "inflated")

DEFAULT_RESOLUTION = (1200, 900)
MAX_SUPERSAMPLE = 8


@dataclass(frozen=True)
class AnimationConfig:
    frames_per_transition: int = 10
    fps: int = 10


@dataclass(frozen=True)
class RunConfig:
    atlas: str = "desikan_killiany"
    surface: str = "pial"
    gradient: GradientSpec = default_gradient()
    background: tuple[int, int, int] = (0, 0, 0)
    resolution: tuple[int, int] = DEFAULT_RESOLUTION
    views: tuple[str, ...] = DEFAULT_VIEWS
    exclude: tuple[str, ...] = ()
    glass_opacity: float = DEFAULT_GLASS_OPACITY
    animation: AnimationConfig | None = None
    asset_root: Path = Path("assets")
    output_dir: Path = Path("output")
    supersample: int = 1
    region_mapping: dict[str, str] | None = None
    include_right_hemisphere: bool = False


def _expect(condition: bool, message: str, key: str):
    if not condition:
        raise ConfigError(f"{key}: {message}", key=key)


def _parse_animation(value, key: str) -> AnimationConfig:
    _expect(isinstance(value, dict), "expected an object", key)
    known = {"frames_per_transition", "fps"}
    for sub in value:
        if sub not in known:
            raise ConfigError(f"unknown key {key}.{sub!r}", key=f"{key}.{sub}")
    out = AnimationConfig()
    if "frames_per_transition" in value:
        f = value["frames_per_transition"]
        _expect(isinstance(f, int) and not isinstance(f, bool) and f >= 1,
                "expected an integer >= 1", f"{key}.frames_per_transition")
        out = replace(out, frames_per_transition=f)
    if "fps" in value:
        fps = value["fps"]
        _expect(isinstance(fps, int) and not isinstance(fps, bool) and fps >= 1,
                "expected an integer >= 1", f"{key}.fps")
        out = replace(out, fps=fps)
    return out


def load_config_data(data: dict) -> RunConfig:
    """Validate a config dict; unknown keys are errors, not warnings."""
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    cfg = RunConfig()
    known_keys = {
        "atlas", "surface", "gradient", "background", "resolution", "views",
        "exclude", "glass_opacity", "animation", "asset_root", "output_dir",
        "supersample", "region_mapping", "include_right_hemisphere",
    }
    for key in data:
        if key not in known_keys:
            raise ConfigError(f"unknown key {key!r}", key=key)

    if "atlas" in data:
        v = data["atlas"]
        _expect(isinstance(v, str) and bool(v), "expected an atlas name", "atlas")
        cfg = replace(cfg, atlas=v)
    if "surface" in data:
        v = data["surface"]
        _expect(v in SURFACES, f"expected one of {SURFACES}", "surface")
        cfg = replace(cfg, surface=v)
    if "gradient" in data:
        try:
            cfg = replace(cfg, gradient=parse_gradient(data["gradient"]))
        except GradientError as exc:
            raise ConfigError(f"gradient: {exc}", key="gradient") from exc
    if "background" in data:
        try:
            cfg = replace(cfg, background=parse_color(data["background"]))
        except GradientError as exc:
            raise ConfigError(f"background: {exc}", key="background") from exc
    if "resolution" in data:
        v = data["resolution"]
        _expect(
            isinstance(v, list) and len(v) == 2
            and all(isinstance(d, int) and not isinstance(d, bool) and d > 0 for d in v),
            "expected [width, height] with positive integers", "resolution",
        )
        cfg = replace(cfg, resolution=(v[0], v[1]))
    if "views" in data:
        v = data["views"]
        _expect(isinstance(v, list) and len(v) > 0, "expected a non-empty list", "views")
        for name in v:
            _expect(name in VIEW_PRESETS,
                    f"unknown view {name!r}; choices: {sorted(VIEW_PRESETS)}", "views")
        cfg = replace(cfg, views=tuple(v))
    if "exclude" in data:
        v = data["exclude"]
        _expect(isinstance(v, list) and all(isinstance(s, str) for s in v),
                "expected a list of region names", "exclude")
        cfg = replace(cfg, exclude=tuple(v))
    if "glass_opacity" in data:
        v = data["glass_opacity"]
        _expect(isinstance(v, (int, float)) and not isinstance(v, bool) and 0.0 <= v <= 1.0,
                "expected a number in [0, 1]", "glass_opacity")
        cfg = replace(cfg, glass_opacity=float(v))
    if "animation" in data and data["animation"] is not None:
        cfg = replace(cfg, animation=_parse_animation(data["animation"], "animation"))
    if "asset_root" in data:
        v = data["asset_root"]
        _expect(isinstance(v, str) and bool(v), "expected a path string", "asset_root")
        cfg = replace(cfg, asset_root=Path(v))
    if "output_dir" in data:
        v = data["output_dir"]
        _expect(isinstance(v, str) and bool(v), "expected a path string", "output_dir")
        cfg = replace(cfg, output_dir=Path(v))
    if "supersample" in data:
        v = data["supersample"]
        _expect(isinstance(v, int) and not isinstance(v, bool) and 1 <= v <= MAX_SUPERSAMPLE,
                f"expected an integer in [1, {MAX_SUPERSAMPLE}]", "supersample")
        cfg = replace(cfg, supersample=v)
    if "region_mapping" in data:
        v = data["region_mapping"]
        _expect(
            isinstance(v, dict)
            and all(isinstance(k, str) and isinstance(val, str) for k, val in v.items()),
            "expected an object of custom-name: canonical-name strings", "region_mapping",
        )
        cfg = replace(cfg, region_mapping=dict(v) or None)
    if "include_right_hemisphere" in data:
        v = data["include_right_hemisphere"]
        _expect(isinstance(v, bool), "expected true or false", "include_right_hemisphere")
        cfg = replace(cfg, include_right_hemisphere=v)
    return cfg


def load_config(path: Path | str) -> RunConfig:
    """Load and validate a JSON config file; omitted keys get defaults."""
    p = Path(path)
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {p}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return load_config_data(data)


def _hex(color: tuple[int, int, int]) -> str:
    return "#{:02x}{:02x}{:02x}".format(*color)


def echo_config(cfg: RunConfig) -> dict:
    """Fully-resolved config as a JSON-able dict; load_config_data round-trips it."""
    out = {
        "atlas": cfg.atlas,
        "surface": cfg.surface,
        "gradient": [_hex(c) for c in cfg.gradient.controls],
        "background": _hex(cfg.background),
        "resolution": list(cfg.resolution),
        "views": list(cfg.views),
        "exclude": list(cfg.exclude),
        "glass_opacity": cfg.glass_opacity,
        "asset_root": str(cfg.asset_root),
        "output_dir": str(cfg.output_dir),
        "supersample": cfg.supersample,
        "include_right_hemisphere": cfg.include_right_hemisphere,
    }
    if cfg.animation is not None:
        out["animation"] = {
            "frames_per_transition": cfg.animation.frames_per_transition,
            "fps": cfg.animation.fps,
        }
    if cfg.region_mapping:
        out["region_mapping"] = dict(cfg.region_mapping)
    return out
