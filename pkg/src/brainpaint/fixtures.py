"""Synthetic mesh assets so the pipeline and tests run without real templates.

Every region becomes a deterministic ellipsoid (an icosphere subdivided twice,
anisotropically scaled) placed by hashing the region's base name together with
a seed. Right-hemisphere twins are exact x-mirrors of their left partner.
The layout is only meant to be brain-shaped enough to exercise the renderer:
cortical blobs sit on an outer left-hemisphere shell, subcortical blobs on an
inner shell, midline structures on the x=0 plane.
"""

from __future__ import annotations

import hashlib
import math
from pathlib import Path

import numpy as np

from .atlas import Atlas, RegionDef, load_manifest
from .mesh import TriangleMesh, compute_vertex_normals, serialize_obj

_ICO_T = (1.0 + math.sqrt(5.0)) / 2.0

_ICO_VERTS = [
    (-1.0, _ICO_T, 0.0), (1.0, _ICO_T, 0.0), (-1.0, -_ICO_T, 0.0), (1.0, -_ICO_T, 0.0),
    (0.0, -1.0, _ICO_T), (0.0, 1.0, _ICO_T), (0.0, -1.0, -_ICO_T), (0.0, 1.0, -_ICO_T),
    (_ICO_T, 0.0, -1.0), (_ICO_T, 0.0, 1.0), (-_ICO_T, 0.0, -1.0), (-_ICO_T, 0.0, 1.0),
]

_ICO_FACES = [
    (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
    (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
    (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
    (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
]


def icosphere(subdivisions: int) -> tuple[np.ndarray, np.ndarray]:
    """Unit icosphere as (vertices, triangles); outward-wound faces."""
    verts = [np.asarray(v) / np.linalg.norm(v) for v in _ICO_VERTS]
    faces = list(_ICO_FACES)
    for _ in range(subdivisions):
        midpoints: dict[tuple[int, int], int] = {}

        def midpoint(a: int, b: int) -> int:
            key = (a, b) if a < b else (b, a)
            if key not in midpoints:
                m = verts[a] + verts[b]
                verts.append(m / np.linalg.norm(m))
                midpoints[key] = len(verts) - 1
            return midpoints[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = midpoint(a, b), midpoint(b, c), midpoint(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    return np.asarray(verts, dtype=np.float64), np.asarray(faces, dtype=np.int32)


def _hash_floats(base_name: str, seed: int, n: int) -> list[float]:
    """n reproducible floats in [0, 1) derived from the region and seed."""
    out: list[float] = []
    counter = 0
    while len(out) < n:
        digest = hashlib.sha256(f"brainpaint:{base_name}:{seed}:{counter}".encode()).digest()
        for k in range(0, 32, 8):
            out.append(int.from_bytes(digest[k : k + 8], "big") / 2.0**64)
        counter += 1
    return out[:n]


def _shell_direction(azimuth: float, elevation: float) -> np.ndarray:
    return np.asarray(
        [
            math.cos(elevation) * math.cos(azimuth),
            math.cos(elevation) * math.sin(azimuth),
            math.sin(elevation),
        ]
    )


def _placement(region: RegionDef, u: list[float]) -> tuple[np.ndarray, np.ndarray]:
    """(center, ellipsoid radii) for the left-hemisphere/midline instance."""
    if region.hemisphere == "midline":
        center = np.asarray([0.0, 10.0 + 20.0 * u[0], -38.0 + 12.0 * u[1]])
        radii = np.asarray([7.0 + 3.0 * u[2], 9.0 + 4.0 * u[3], 12.0 + 6.0 * u[4]])
        return center, radii
    if region.klass == "cortical":
        azimuth = math.pi * (0.62 + 0.76 * u[0])  # keeps x <= -0.35 (left shell)
        elevation = math.asin(2.0 * u[1] - 1.0) * 0.85
        center = _shell_direction(azimuth, elevation) * np.asarray([52.0, 72.0, 52.0])
        radii = np.asarray([13.0 + 7.0 * u[2], 13.0 + 8.0 * u[3], 12.0 + 6.0 * u[4]])
        return center, radii
    azimuth = math.pi * (0.58 + 0.84 * u[0])
    elevation = math.asin(2.0 * u[1] - 1.0) * 0.7
    center = _shell_direction(azimuth, elevation) * np.asarray([16.0, 26.0, 13.0])
    center += np.asarray([-5.0, 0.0, -6.0])
    radii = np.asarray([6.0 + 4.0 * u[2], 7.0 + 5.0 * u[3], 5.0 + 4.0 * u[4]])
    return center, radii


def generate_fixture_mesh(region: RegionDef, seed: int, surface: str = "pial") -> TriangleMesh:
    """Deterministic stand-in mesh for one region.

    Same (region, seed, surface) always yields bit-identical output; the
    right-hemisphere twin of a region is the left fixture mirrored in x.
    """
    u = _hash_floats(region.base_name, seed, 9)
    sphere_verts, tris = icosphere(2)
    center, radii = _placement(region, u)

    if surface == "inflated" and region.klass == "cortical":
        shaped = sphere_verts * (radii * 1.08)
    else:
        bump = np.sin(4.0 * sphere_verts[:, 0] + 2.0 * math.pi * u[5]) \
            * np.sin(4.0 * sphere_verts[:, 1] + 2.0 * math.pi * u[6]) \
            * np.sin(4.0 * sphere_verts[:, 2] + 2.0 * math.pi * u[7])
        factor = 1.0 + (0.06 if region.klass == "cortical" else 0.03) * bump
        shaped = sphere_verts * factor[:, None] * radii

    verts = shaped + center
    if region.hemisphere == "right":
        verts = verts * np.asarray([-1.0, 1.0, 1.0])
        tris = tris[:, [0, 2, 1]]  # restore outward winding after the mirror

    mesh = TriangleMesh(verts, np.zeros_like(verts), tris, name=region.canonical_name)
    return compute_vertex_normals(mesh)


def write_fixture_assets(asset_root: Path | str, atlas_name: str, seed: int = 0) -> list[Path]:
    """Materialize the full fixture asset tree for one atlas.

    Cortical regions get both surface variants; everything else a single file.
    Returns the written paths.
    """
    atlas: Atlas = load_manifest(atlas_name)
    out_dir = Path(asset_root) / atlas_name
    out_dir.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []
    for region in atlas.regions:
        surfaces = ("pial", "inflated") if region.klass == "cortical" else ("pial",)
        for surface in surfaces:
            mesh = generate_fixture_mesh(region, seed, surface)
            path = out_dir / atlas.mesh_filename(region, surface)
            path.write_text(serialize_obj(mesh), encoding="utf-8")
            written.append(path)
    return written
