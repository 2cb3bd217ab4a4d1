"""Scene assembly: views, framing, materials, and region-to-mesh wiring.

Scene frame convention: +x right, +z up, +y posterior; the front view looks
along +y. Cortical scenes show the left hemisphere (optionally both);
subcortical scenes show both hemispheres plus the right cortical hemisphere
as a single glass group for anatomical reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .atlas import Atlas, RegionDef, resolve_region
from .errors import RenderError, SceneError
from .gradient import GradientSpec, RGB8, color_at
from .mesh import Aabb, TriangleMesh, bounds, load_obj, union_bounds
from .render import (
    Camera,
    DirectionalLight,
    ImageBuffer,
    Material,
    RenderAux,
    quantize,
    render_passes,
)

DEFAULT_VFOV = 35.0
FRAMING_MARGIN = 1.1

REGION_AMBIENT = 0.25
REGION_DIFFUSE = 0.65
HEADLIGHT_INTENSITY = 0.9
FILL_INTENSITY = 0.35
FILL_SIDE = 1.25  # lateral offset of the fill light; keeps it >60 deg off axis

GLASS_COLOR: RGB8 = (255, 255, 255)
DEFAULT_GLASS_OPACITY = 0.12


@dataclass(frozen=True)
class ViewPreset:
    """A named viewpoint: the eye sits along ``axis`` from the scene center."""

    name: str
    axis: tuple[float, float, float]
    kind: str  # "cortical" | "subcortical"


VIEW_PRESETS: dict[str, ViewPreset] = {
    "cortical_front": ViewPreset("cortical_front", (0.0, -1.0, 0.0), "cortical"),
    "cortical_back": ViewPreset("cortical_back", (0.0, 1.0, 0.0), "cortical"),
    "cortical_lateral": ViewPreset("cortical_lateral", (-1.0, 0.0, 0.0), "cortical"),
    "subcortical_front": ViewPreset("subcortical_front", (0.0, -1.0, 0.0), "subcortical"),
    "subcortical_lateral": ViewPreset("subcortical_lateral", (-1.0, 0.0, 0.0), "subcortical"),
}

DEFAULT_VIEWS = ("cortical_front", "cortical_back", "subcortical_front")


@dataclass(frozen=True)
class SceneOptions:
    include_right_hemisphere: bool = False
    exclude: tuple[str, ...] = ()
    glass_opacity: float = DEFAULT_GLASS_OPACITY
    background: RGB8 = (0, 0, 0)
    vfov: float = DEFAULT_VFOV


@dataclass(frozen=True)
class SceneItem:
    mesh_key: str
    material: Material
    group: str  # "region" | "glass"
    region_name: str


@dataclass(frozen=True)
class SceneSpec:
    items: tuple[SceneItem, ...]
    camera: Camera
    lights: tuple[DirectionalLight, ...]
    background: RGB8

    def __post_init__(self):
        glass_materials = {it.material for it in self.items if it.group == "glass"}
        if len(glass_materials) > 1:
            raise SceneError("scene has more than one glass material group")


class MeshLibrary:
    """Loads and caches region meshes for one (atlas, surface, asset root)."""

    def __init__(self, asset_root: Path | str, atlas: Atlas, surface: str = "pial"):
        self.asset_root = Path(asset_root)
        self.atlas = atlas
        self.surface = surface
        self._by_key = {r.mesh_key: r for r in atlas.regions}
        self._meshes: dict[str, TriangleMesh] = {}
        self._bounds: dict[str, Aabb] = {}

    def region_for(self, mesh_key: str) -> RegionDef:
        return self._by_key[mesh_key]

    def get(self, mesh_key: str) -> TriangleMesh:
        if mesh_key not in self._meshes:
            region = self._by_key[mesh_key]
            path = self.atlas.mesh_path(self.asset_root, region, self.surface)
            if not path.is_file():
                raise SceneError(
                    f"mesh for region {region.canonical_name!r} "
                    f"(surface {self.surface!r}) missing at {path}"
                )
            self._meshes[mesh_key] = load_obj(path)
        return self._meshes[mesh_key]

    def bounds(self, mesh_key: str) -> Aabb:
        if mesh_key not in self._bounds:
            self._bounds[mesh_key] = bounds(self.get(mesh_key))
        return self._bounds[mesh_key]


def frame_camera(box: Aabb, view: ViewPreset, vfov: float = DEFAULT_VFOV) -> Camera:
    """Place the eye along the preset axis so the bounds fill the viewport.

    Eye distance is (r / tan(vfov/2)) * 1.1 for bounding-sphere radius r.
    """
    r = box.half_diagonal
    if r == 0.0:
        raise SceneError("cannot frame a scene with zero extent")
    d = r / math.tan(math.radians(vfov) / 2.0) * FRAMING_MARGIN
    center = box.center
    axis = np.asarray(view.axis, dtype=np.float64)
    eye = center + axis * d
    near = max(d * 1e-3, (d - r) * 0.5)
    far = (d + r) * 4.0
    return Camera(
        eye=tuple(eye), target=tuple(center), up=(0.0, 0.0, 1.0),
        vfov=vfov, near=near, far=far,
    )


def make_lights(camera: Camera) -> tuple[DirectionalLight, ...]:
    """The fixed lighting preset: headlight plus an upper-left fill."""
    s, u, f = camera.basis()
    fill = f + FILL_SIDE * s - FILL_SIDE * u
    fill /= np.linalg.norm(fill)
    return (
        DirectionalLight(tuple(f), HEADLIGHT_INTENSITY),
        DirectionalLight(tuple(fill), FILL_INTENSITY),
    )


def region_material(g: GradientSpec, value: float) -> Material:
    return Material(
        base_color=color_at(g, value), opacity=1.0,
        ambient=REGION_AMBIENT, diffuse=REGION_DIFFUSE,
    )


def glass_material(opacity: float = DEFAULT_GLASS_OPACITY) -> Material:
    return Material(
        base_color=GLASS_COLOR, opacity=opacity,
        ambient=REGION_AMBIENT, diffuse=REGION_DIFFUSE,
    )


def region_value(values: dict[str, float], region: RegionDef) -> float:
    """Value for a region; right twins inherit the base value, absent -> 0."""
    if region.canonical_name in values:
        return values[region.canonical_name]
    if region.is_right_twin and region.base_name in values:
        return values[region.base_name]
    return 0.0


def _excluded_names(atlas: Atlas, exclude: tuple[str, ...]) -> set[str]:
    """Canonical names removed by the exclusion list (twins included)."""
    out: set[str] = set()
    for raw in exclude:
        region = resolve_region(atlas, raw)
        out.add(region.canonical_name)
        if not region.is_right_twin:
            twin = atlas.right_twin(region)
            if twin is not None:
                out.add(twin.canonical_name)
    return out


def _finish_scene(
    items: list[SceneItem], library: MeshLibrary, view: ViewPreset, options: SceneOptions
) -> SceneSpec:
    if not any(it.group == "region" for it in items):
        raise SceneError(f"scene {view.name!r} is empty after exclusions")
    box = union_bounds([library.bounds(it.mesh_key) for it in items])
    camera = frame_camera(box, view, options.vfov)
    return SceneSpec(
        items=tuple(items),
        camera=camera,
        lights=make_lights(camera),
        background=options.background,
    )


def build_cortical_scene(
    atlas: Atlas,
    values: dict[str, float],
    g: GradientSpec,
    view: ViewPreset,
    library: MeshLibrary,
    options: SceneOptions = SceneOptions(),
) -> SceneSpec:
    """Left-hemisphere cortical regions (plus midline structures), colored
    by the gradient; optionally both hemispheres."""
    if view.kind != "cortical":
        raise SceneError(f"{view.name!r} is not a cortical view preset")
    excluded = _excluded_names(atlas, options.exclude)
    items: list[SceneItem] = []
    for region in atlas.regions:
        if region.canonical_name in excluded:
            continue
        cortical_left = region.klass == "cortical" and region.hemisphere == "left"
        cortical_right = region.klass == "cortical" and region.hemisphere == "right"
        midline = region.hemisphere == "midline"
        if not (cortical_left or midline or (cortical_right and options.include_right_hemisphere)):
            continue
        items.append(
            SceneItem(
                mesh_key=region.mesh_key,
                material=region_material(g, region_value(values, region)),
                group="region",
                region_name=region.canonical_name,
            )
        )
    return _finish_scene(items, library, view, options)


def build_subcortical_scene(
    atlas: Atlas,
    values: dict[str, float],
    g: GradientSpec,
    view: ViewPreset,
    library: MeshLibrary,
    options: SceneOptions = SceneOptions(),
) -> SceneSpec:
    """Subcortical structures of both hemispheres inside a right-hemisphere
    cortical glass brain."""
    if view.kind != "subcortical":
        raise SceneError(f"{view.name!r} is not a subcortical view preset")
    excluded = _excluded_names(atlas, options.exclude)
    items: list[SceneItem] = []
    glass = glass_material(options.glass_opacity)
    for region in atlas.regions:
        if region.canonical_name in excluded:
            continue
        if region.klass == "subcortical" or region.hemisphere == "midline":
            items.append(
                SceneItem(
                    mesh_key=region.mesh_key,
                    material=region_material(g, region_value(values, region)),
                    group="region",
                    region_name=region.canonical_name,
                )
            )
        elif region.klass == "cortical" and region.hemisphere == "right":
            items.append(
                SceneItem(
                    mesh_key=region.mesh_key,
                    material=glass,
                    group="glass",
                    region_name=region.canonical_name,
                )
            )
    return _finish_scene(items, library, view, options)


def build_scene(
    atlas: Atlas,
    values: dict[str, float],
    g: GradientSpec,
    view_name: str,
    library: MeshLibrary,
    options: SceneOptions = SceneOptions(),
) -> SceneSpec:
    """Dispatch on the preset kind."""
    if view_name not in VIEW_PRESETS:
        raise SceneError(f"unknown view preset {view_name!r}")
    view = VIEW_PRESETS[view_name]
    builder = build_cortical_scene if view.kind == "cortical" else build_subcortical_scene
    return builder(atlas, values, g, view, library, options)


def render_scene(
    spec: SceneSpec,
    library: MeshLibrary,
    width: int,
    height: int,
    supersample: int = 1,
    aux: RenderAux | None = None,
) -> ImageBuffer:
    """Render a SceneSpec, optionally at supersample x and box-downsampled."""
    if supersample < 1:
        raise RenderError(f"supersample must be >= 1, got {supersample}")
    if aux is not None and supersample != 1:
        raise RenderError("aux capture requires supersample == 1")
    opaque = []
    transparent = []
    for it in spec.items:
        pair = (library.get(it.mesh_key), it.material)
        (transparent if it.material.opacity < 1.0 else opaque).append(pair)
    color = render_passes(
        opaque, transparent, spec.camera, spec.lights, spec.background,
        width * supersample, height * supersample, aux,
    )
    if supersample > 1:
        color = color.reshape(height, supersample, width, supersample, 3).mean(axis=(1, 3))
    return ImageBuffer(width, height, quantize(color))
