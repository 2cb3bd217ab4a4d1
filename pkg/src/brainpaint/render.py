"""Deterministic offscreen rasterizer.

Two passes: opaque triangles are z-buffered with edge-function coverage and a
top-left fill rule; transparent triangles are sorted back-to-front by
view-space centroid depth and composited with the "over" operator against the
opaque depth buffer (tested, never written). Shading is Lambert plus ambient
from perspective-correct interpolated vertex normals. Rendering is one sample
per pixel; callers wanting anti-aliasing render larger and downsample.

Screen frame: pixel (0, 0) top-left, y growing downward, pixel centers at
integer + 0.5. Depth is positive view-space z. Near-plane clipping only; a
triangle is rejected outright when it lies entirely beyond the far plane.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np
from PIL import Image

from .errors import RenderError
from .mesh import TriangleMesh

RGB8 = tuple[int, int, int]

#: Hard cap on width*height per render call.
MAX_PIXELS = 64_000_000

_EPS = 1e-12


@dataclass(frozen=True)
class Camera:
    """Perspective look-at camera; vfov in degrees, near/far positive depths."""

    eye: tuple[float, float, float]
    target: tuple[float, float, float]
    up: tuple[float, float, float] = (0.0, 0.0, 1.0)
    vfov: float = 35.0
    near: float = 0.1
    far: float = 1e4

    def __post_init__(self):
        if not 0.0 < self.vfov < 180.0:
            raise RenderError(f"vfov must be in (0, 180), got {self.vfov}")
        if not 0.0 < self.near < self.far:
            raise RenderError(f"need 0 < near < far, got {self.near}, {self.far}")
        eye, target = np.asarray(self.eye, float), np.asarray(self.target, float)
        view = target - eye
        if np.linalg.norm(view) < _EPS:
            raise RenderError("camera eye and target coincide")
        up = np.asarray(self.up, float)
        if np.linalg.norm(np.cross(view, up)) < _EPS * np.linalg.norm(view) * np.linalg.norm(up):
            raise RenderError("camera up vector is parallel to the view direction")

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Orthonormal (right, up, forward) view basis."""
        eye, target = np.asarray(self.eye, float), np.asarray(self.target, float)
        f = target - eye
        f /= np.linalg.norm(f)
        s = np.cross(f, np.asarray(self.up, float))
        s /= np.linalg.norm(s)
        u = np.cross(s, f)
        return s, u, f


@dataclass(frozen=True)
class Material:
    base_color: RGB8
    opacity: float = 1.0
    ambient: float = 0.25
    diffuse: float = 0.65

    def __post_init__(self):
        if not 0.0 <= self.opacity <= 1.0:
            raise RenderError(f"opacity must be in [0, 1], got {self.opacity}")
        if self.ambient < 0.0 or self.diffuse < 0.0 or self.ambient + self.diffuse > 1.0:
            raise RenderError(
                f"need ambient, diffuse >= 0 with ambient + diffuse <= 1, "
                f"got {self.ambient} + {self.diffuse}"
            )
        if any(not 0 <= c <= 255 for c in self.base_color):
            raise RenderError(f"base color channels outside 0-255: {self.base_color}")


@dataclass(frozen=True)
class DirectionalLight:
    """Light travelling along ``direction`` (toward the scene), unit length."""

    direction: tuple[float, float, float]
    intensity: float

    def __post_init__(self):
        norm = math.sqrt(sum(c * c for c in self.direction))
        if abs(norm - 1.0) > 1e-6:
            raise RenderError(f"light direction must be unit length, |d| = {norm:.8f}")
        if not 0.0 <= self.intensity <= 1.0:
            raise RenderError(f"light intensity must be in [0, 1], got {self.intensity}")


@dataclass
class ImageBuffer:
    """Row-major RGBA8 raster."""

    width: int
    height: int
    pixels: np.ndarray  # (height, width, 4) uint8

    def __post_init__(self):
        self.pixels = np.asarray(self.pixels, dtype=np.uint8)
        if self.pixels.shape != (self.height, self.width, 4):
            raise RenderError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x4"
            )


@dataclass
class RenderAux:
    """Optional per-pixel debug planes filled during rendering.

    item: index into the opaque item list of the visible item (-1 = none).
    normal: the shading normal used at that opaque pixel.
    glass: whether any transparent fragment was composited onto the pixel.
    """

    item: np.ndarray
    normal: np.ndarray
    glass: np.ndarray

    @classmethod
    def allocate(cls, width: int, height: int) -> "RenderAux":
        return cls(
            item=np.full((height, width), -1, dtype=np.int32),
            normal=np.zeros((height, width, 3), dtype=np.float64),
            glass=np.zeros((height, width), dtype=bool),
        )


def view_transform(camera: Camera, points: np.ndarray) -> np.ndarray:
    """World points (N, 3) to view coordinates (right, up, forward-depth)."""
    s, u, f = camera.basis()
    rel = np.asarray(points, dtype=np.float64) - np.asarray(camera.eye, dtype=np.float64)
    return rel @ np.stack([s, u, f], axis=1)


def project(camera: Camera, width: int, height: int, point) -> tuple[float, float, float]:
    """Project one world point to (screen x, screen y, view depth).

    Screen coordinates are meaningful only when the returned depth is at
    least the camera near distance; smaller depths flag the point for
    clipping.
    """
    v = view_transform(camera, np.asarray(point, dtype=np.float64).reshape(1, 3))[0]
    x, y, z = v
    if z == 0.0:
        return math.inf, math.inf, 0.0
    t = math.tan(math.radians(camera.vfov) / 2.0)
    aspect = width / height
    sx = (x / (z * t * aspect) + 1.0) * 0.5 * width
    sy = (1.0 - y / (z * t)) * 0.5 * height
    return float(sx), float(sy), float(z)


def _screen_from_view(view: np.ndarray, width: int, height: int, t: float, aspect: float) -> np.ndarray:
    z = view[:, 2]
    sx = (view[:, 0] / (z * t * aspect) + 1.0) * 0.5 * width
    sy = (1.0 - view[:, 1] / (z * t)) * 0.5 * height
    return np.stack([sx, sy], axis=1)


def _clip_polygon_near(pts: np.ndarray, attrs: np.ndarray, near: float):
    """Sutherland-Hodgman clip of a polygon against the z >= near half-space."""
    out_pts: list[np.ndarray] = []
    out_attrs: list[np.ndarray] = []
    n = len(pts)
    for i in range(n):
        a, b = pts[i], pts[(i + 1) % n]
        aa, ab = attrs[i], attrs[(i + 1) % n]
        a_in, b_in = a[2] >= near, b[2] >= near
        if a_in:
            out_pts.append(a)
            out_attrs.append(aa)
        if a_in != b_in:
            t = (near - a[2]) / (b[2] - a[2])
            out_pts.append(a + t * (b - a))
            out_attrs.append(aa + t * (ab - aa))
    if len(out_pts) < 3:
        return np.empty((0, 3)), np.empty((0, 3))
    return np.asarray(out_pts), np.asarray(out_attrs)


def _is_top_left(d_x: float, d_y: float) -> bool:
    # y grows downward: a top edge runs in +x, a left edge runs upward.
    return (d_y == 0.0 and d_x > 0.0) or d_y < 0.0


class _Raster:
    """Framebuffer state for one render."""

    def __init__(self, width: int, height: int, background: RGB8, aux: RenderAux | None):
        self.width = width
        self.height = height
        self.color = np.empty((height, width, 3), dtype=np.float64)
        self.color[:, :] = np.asarray(background, dtype=np.float64)
        self.depth = np.full((height, width), np.inf, dtype=np.float64)
        self.aux = aux

    def _tile(self, screen: np.ndarray):
        """Clamped pixel-center bounding box; None when off-screen."""
        x_min = max(int(math.ceil(screen[:, 0].min() - 0.5)), 0)
        x_max = min(int(math.floor(screen[:, 0].max() - 0.5)), self.width - 1)
        y_min = max(int(math.ceil(screen[:, 1].min() - 0.5)), 0)
        y_max = min(int(math.floor(screen[:, 1].max() - 0.5)), self.height - 1)
        if x_min > x_max or y_min > y_max:
            return None
        return x_min, x_max, y_min, y_max

    def triangle(
        self,
        screen: np.ndarray,   # (3, 2) screen positions, positive winding
        depths: np.ndarray,   # (3,) view-space z, all >= near
        normals: np.ndarray,  # (3, 3) world-space vertex normals
        shade_fn,             # (normals (n,3), dst colors (n,3)) -> (n,3) RGB
        *,
        write_depth: bool,
        item_index: int = -1,
    ) -> None:
        box = self._tile(screen)
        if box is None:
            return
        x_min, x_max, y_min, y_max = box
        px = (np.arange(x_min, x_max + 1, dtype=np.float64) + 0.5)[None, :]
        py = (np.arange(y_min, y_max + 1, dtype=np.float64) + 0.5)[:, None]

        cover = None
        ws = []
        for a_i, b_i in ((1, 2), (2, 0), (0, 1)):  # edge opposite each vertex
            ax, ay = screen[a_i]
            d_x = screen[b_i, 0] - ax
            d_y = screen[b_i, 1] - ay
            w = d_x * (py - ay) - d_y * (px - ax)
            inside = (w > 0.0) | ((w == 0.0) & _is_top_left(d_x, d_y))
            cover = inside if cover is None else (cover & inside)
            ws.append(w)
        if not cover.any():
            return

        inv_z = 1.0 / depths
        lam0, lam1, lam2 = ws[0] * inv_z[0], ws[1] * inv_z[1], ws[2] * inv_z[2]
        lam_sum = lam0 + lam1 + lam2
        with np.errstate(divide="ignore", invalid="ignore"):
            z_px = (ws[0] + ws[1] + ws[2]) / lam_sum
        z_px = np.where(cover, z_px, np.inf)

        sub_depth = self.depth[y_min : y_max + 1, x_min : x_max + 1]
        mask = cover & (z_px < sub_depth)
        if not mask.any():
            return

        # Perspective-correct normal interpolation at the surviving pixels.
        l0, l1, l2 = lam0[mask], lam1[mask], lam2[mask]
        denom = (l0 + l1 + l2)[:, None]
        n_px = (
            np.outer(l0, normals[0]) + np.outer(l1, normals[1]) + np.outer(l2, normals[2])
        ) / denom
        lengths = np.linalg.norm(n_px, axis=1)
        lengths[lengths == 0.0] = 1.0
        n_px /= lengths[:, None]

        sub_color = self.color[y_min : y_max + 1, x_min : x_max + 1]
        sub_color[mask] = shade_fn(n_px, sub_color[mask])
        if write_depth:
            sub_depth[mask] = z_px[mask]
            if self.aux is not None:
                self.aux.item[y_min : y_max + 1, x_min : x_max + 1][mask] = item_index
                self.aux.normal[y_min : y_max + 1, x_min : x_max + 1][mask] = n_px
        elif self.aux is not None:
            self.aux.glass[y_min : y_max + 1, x_min : x_max + 1][mask] = True


def shade_colors(material: Material, lights: tuple[DirectionalLight, ...], n_px: np.ndarray) -> np.ndarray:
    """Lambert + ambient shading of unit normals, clamped to [0, 255]."""
    factor = np.full(len(n_px), material.ambient, dtype=np.float64)
    for light in lights:
        cos = n_px @ (-np.asarray(light.direction, dtype=np.float64))
        factor += material.diffuse * light.intensity * np.maximum(cos, 0.0)
    rgb = np.asarray(material.base_color, dtype=np.float64)[None, :] * factor[:, None]
    return np.clip(rgb, 0.0, 255.0)


def _mesh_triangles(
    mesh: TriangleMesh,
    camera: Camera,
    width: int,
    height: int,
    *,
    cull_backfaces: bool,
):
    """Transform, near-clip, cull, and project one mesh.

    Yields (screen (3,2), depths (3,), normals (3,3)) per surviving triangle,
    wound positively in screen space.
    """
    t = math.tan(math.radians(camera.vfov) / 2.0)
    aspect = width / height
    view = view_transform(camera, mesh.vertices)
    z = view[:, 2]
    tri = mesh.triangles
    if len(tri) == 0:
        return
    tri_z = z[tri]
    alive = (tri_z.max(axis=1) >= camera.near) & (tri_z.min(axis=1) <= camera.far)
    needs_clip = alive & (tri_z.min(axis=1) < camera.near)
    plain = alive & ~needs_clip

    screen_all = np.full((len(view), 2), np.nan)
    in_front = z >= camera.near
    if in_front.any():
        screen_all[in_front] = _screen_from_view(view[in_front], width, height, t, aspect)

    p0 = screen_all[tri[:, 0]]
    p1 = screen_all[tri[:, 1]]
    p2 = screen_all[tri[:, 2]]
    with np.errstate(invalid="ignore"):
        area2 = (p1[:, 0] - p0[:, 0]) * (p2[:, 1] - p0[:, 1]) - (p1[:, 1] - p0[:, 1]) * (
            p2[:, 0] - p0[:, 0]
        )
    if cull_backfaces:
        plain &= np.asarray(area2 < 0.0)  # front faces wind negatively on screen
    else:
        plain &= np.asarray(area2 != 0.0)

    for idx in np.nonzero(plain)[0]:
        corners = tri[idx]
        screen = screen_all[corners]
        depths = z[corners]
        normals = mesh.normals[corners]
        if area2[idx] < 0.0:  # reorder to positive screen winding
            screen = screen[[0, 2, 1]]
            depths = depths[[0, 2, 1]]
            normals = normals[[0, 2, 1]]
        yield screen, depths, normals

    for idx in np.nonzero(needs_clip)[0]:
        corners = tri[idx]
        pts, attrs = _clip_polygon_near(view[corners], mesh.normals[corners], camera.near)
        for k in range(1, len(pts) - 1):
            sub_view = pts[[0, k, k + 1]]
            screen = _screen_from_view(sub_view, width, height, t, aspect)
            a2 = (screen[1, 0] - screen[0, 0]) * (screen[2, 1] - screen[0, 1]) - (
                screen[1, 1] - screen[0, 1]
            ) * (screen[2, 0] - screen[0, 0])
            if a2 == 0.0 or (cull_backfaces and a2 > 0.0):
                continue
            depths = sub_view[:, 2]
            normals = attrs[[0, k, k + 1]]
            if a2 < 0.0:
                screen = screen[[0, 2, 1]]
                depths = depths[[0, 2, 1]]
                normals = normals[[0, 2, 1]]
            yield screen, depths, normals


def render_passes(
    opaque_items: list[tuple[TriangleMesh, Material]],
    transparent_items: list[tuple[TriangleMesh, Material]],
    camera: Camera,
    lights,
    background: RGB8,
    width: int,
    height: int,
    aux: RenderAux | None = None,
) -> np.ndarray:
    """Run both raster passes and return the float color buffer (H, W, 3).

    Callers control the pass assignment; rasterize() routes by opacity.
    """
    if width <= 0 or height <= 0:
        raise RenderError(f"resolution must be positive, got {width}x{height}")
    if width * height > MAX_PIXELS:
        raise RenderError(f"resolution {width}x{height} exceeds the {MAX_PIXELS}-pixel cap")
    lights = tuple(lights)
    raster = _Raster(width, height, background, aux)

    for item_index, (mesh, material) in enumerate(opaque_items):
        def shade(n_px, dst, material=material):
            return shade_colors(material, lights, n_px)

        for screen, depths, normals in _mesh_triangles(
            mesh, camera, width, height, cull_backfaces=True
        ):
            raster.triangle(screen, depths, normals, shade, write_depth=True, item_index=item_index)

    # Gather, sort globally back-to-front, composite in that order.
    pending = []
    for mesh, material in transparent_items:
        for screen, depths, normals in _mesh_triangles(
            mesh, camera, width, height, cull_backfaces=False
        ):
            pending.append((float(depths.mean()), screen, depths, normals, material))
    pending.sort(key=lambda entry: -entry[0])

    for _, screen, depths, normals, material in pending:
        def blend(n_px, dst, material=material):
            src = shade_colors(material, lights, n_px)
            return src * material.opacity + dst * (1.0 - material.opacity)

        raster.triangle(screen, depths, normals, blend, write_depth=False)

    return raster.color


def quantize(color: np.ndarray) -> np.ndarray:
    """Float color plane to RGBA8 with round-half-up."""
    rgb = np.floor(np.clip(color, 0.0, 255.0) + 0.5).astype(np.uint8)
    alpha = np.full(rgb.shape[:2] + (1,), 255, dtype=np.uint8)
    return np.concatenate([rgb, alpha], axis=2)


def rasterize(
    scene: list[tuple[TriangleMesh, Material]],
    camera: Camera,
    lights,
    background: RGB8,
    width: int,
    height: int,
    aux: RenderAux | None = None,
) -> ImageBuffer:
    """Render a scene to an RGBA8 image; items route to passes by opacity."""
    opaque = [(m, mat) for m, mat in scene if mat.opacity >= 1.0]
    transparent = [(m, mat) for m, mat in scene if mat.opacity < 1.0]
    color = render_passes(opaque, transparent, camera, lights, background, width, height, aux)
    return ImageBuffer(width, height, quantize(color))


def encode_png(img: ImageBuffer) -> bytes:
    """RGBA8 PNG bytes; fixed encoder settings keep equal buffers byte-equal."""
    buf = io.BytesIO()
    Image.fromarray(img.pixels, mode="RGBA").save(buf, format="PNG", compress_level=6)
    return buf.getvalue()


def decode_png(data: bytes) -> ImageBuffer:
    with Image.open(io.BytesIO(data)) as im:
        arr = np.asarray(im.convert("RGBA"), dtype=np.uint8)
    return ImageBuffer(arr.shape[1], arr.shape[0], arr)
