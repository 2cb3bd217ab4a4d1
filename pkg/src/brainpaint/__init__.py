"""brainpaint: headless brain-region visualisation.

Per-region biomarker values from a CSV are mapped through a user-defined
color gradient onto 3D region meshes and rendered offscreen to PNG images:
cortical views, subcortical views inside a glass brain, and animation frame
sequences. Exposed as a library, the ``brainpaint`` CLI, and an HTTP service.
"""

from .atlas import Atlas, RegionDef, apply_custom_mapping, load_atlas, resolve_region
from .config import RunConfig, load_config
from .errors import BrainPaintError
from .gradient import GradientSpec, color_at, default_gradient
from .ingest import RegionValueTable, check_range, parse_biomarker_csv
from .mesh import Aabb, TriangleMesh, bounds, compute_vertex_normals, parse_obj, serialize_obj
from .pipeline import run_animation, run_pipeline
from .render import Camera, DirectionalLight, ImageBuffer, Material, encode_png, project, rasterize
from .scene import build_cortical_scene, build_subcortical_scene, frame_camera, render_scene

__version__ = "0.1.0"

__all__ = [
    "Aabb",
    "Atlas",
    "BrainPaintError",
    "Camera",
    "DirectionalLight",
    "GradientSpec",
    "ImageBuffer",
    "Material",
    "RegionDef",
    "RegionValueTable",
    "RunConfig",
    "TriangleMesh",
    "apply_custom_mapping",
    "bounds",
    "build_cortical_scene",
    "build_subcortical_scene",
    "check_range",
    "color_at",
    "compute_vertex_normals",
    "default_gradient",
    "encode_png",
    "frame_camera",
    "load_atlas",
    "load_config",
    "parse_biomarker_csv",
    "parse_obj",
    "project",
    "rasterize",
    "render_scene",
    "resolve_region",
    "run_animation",
    "run_pipeline",
    "serialize_obj",
    "__version__",
]
