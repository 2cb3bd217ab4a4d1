"""Triangle meshes: OBJ load/save, vertex normals, and bounding boxes.

The OBJ reader supports 'v', 'vn', 'vt' (parsed and discarded) and faces in
the forms "v", "v/vt", "v//vn", and "v/vt/vn". Polygons with more than three
vertices are fan-triangulated from the first vertex; negative indices resolve
relative to the elements defined so far. Materials and groups are ignored:
region colors always come from the gradient, never from the file.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diagnostics import Diagnostic
from .errors import MeshError

# Relative threshold under which a triangle counts as zero-area.
_DEGENERATE_REL = 1e-14


@dataclass
class TriangleMesh:
    """Vertices, per-vertex unit normals, and triangle index triples."""

    vertices: np.ndarray  # (N, 3) float64
    normals: np.ndarray   # (N, 3) float64, unit rows
    triangles: np.ndarray  # (M, 3) int32
    name: str = ""

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=np.float64).reshape(-1, 3)
        self.normals = np.asarray(self.normals, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int32).reshape(-1, 3)

    def validate(self) -> None:
        """Check the mesh invariants; raise MeshError on the first violation."""
        n = len(self.vertices)
        if len(self.normals) != n:
            raise MeshError(f"{self.name}: {len(self.normals)} normals for {n} vertices")
        if self.triangles.size and (self.triangles.min() < 0 or self.triangles.max() >= n):
            raise MeshError(f"{self.name}: triangle index out of range")
        if n:
            lengths = np.linalg.norm(self.normals, axis=1)
            if not np.allclose(lengths, 1.0, atol=1e-6):
                bad = int(np.argmax(np.abs(lengths - 1.0)))
                raise MeshError(f"{self.name}: normal {bad} has length {lengths[bad]:.8f}")
        if self.triangles.size:
            areas = _triangle_area_vectors(self.vertices, self.triangles)
            norms = np.linalg.norm(areas, axis=1)
            if np.any(norms == 0.0):
                raise MeshError(f"{self.name}: degenerate triangle present")


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box with componentwise min <= max."""

    min: tuple[float, float, float]
    max: tuple[float, float, float]

    def __post_init__(self):
        if any(lo > hi for lo, hi in zip(self.min, self.max)):
            raise MeshError(f"invalid Aabb: min {self.min} exceeds max {self.max}")

    @property
    def center(self) -> np.ndarray:
        return (np.asarray(self.min) + np.asarray(self.max)) / 2.0

    @property
    def half_diagonal(self) -> float:
        """Radius of the bounding sphere through the box corners."""
        return float(np.linalg.norm(np.asarray(self.max) - np.asarray(self.min)) / 2.0)


def _triangle_area_vectors(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    """Cross products per triangle; the norm is twice the triangle area."""
    a = vertices[triangles[:, 0]]
    b = vertices[triangles[:, 1]]
    c = vertices[triangles[:, 2]]
    return np.cross(b - a, c - a)


def compute_vertex_normals(m: TriangleMesh, warnings: list[Diagnostic] | None = None) -> TriangleMesh:
    """Recompute per-vertex normals as the area-weighted mean of face normals.

    Vertices whose incident face normals cancel out get (0, 0, 1) and a
    warning. The result is invariant under uniform scaling of the vertices.
    """
    cross = _triangle_area_vectors(m.vertices, m.triangles)
    acc = np.zeros_like(m.vertices)
    for col in range(3):
        np.add.at(acc, m.triangles[:, col], cross)
    lengths = np.linalg.norm(acc, axis=1)
    zero = lengths == 0.0
    if np.any(zero) and warnings is not None:
        warnings.append(
            Diagnostic(
                code="zero-normal",
                message=f"{m.name or 'mesh'}: {int(zero.sum())} vertices have no "
                        f"well-defined normal, defaulting to (0,0,1)",
            )
        )
    acc[zero] = (0.0, 0.0, 1.0)
    lengths[zero] = 1.0
    normals = acc / lengths[:, None]
    return TriangleMesh(m.vertices, normals, m.triangles, m.name)


def bounds(m: TriangleMesh) -> Aabb:
    """Tight componentwise min/max over the mesh vertices."""
    if len(m.vertices) == 0:
        raise MeshError(f"{m.name}: empty mesh has no bounds")
    return Aabb(tuple(m.vertices.min(axis=0)), tuple(m.vertices.max(axis=0)))


def union_bounds(boxes: list[Aabb]) -> Aabb:
    if not boxes:
        raise MeshError("union of zero bounding boxes")
    lo = np.min([b.min for b in boxes], axis=0)
    hi = np.max([b.max for b in boxes], axis=0)
    return Aabb(tuple(lo), tuple(hi))


def _parse_face_corner(token: str, n_vertices: int, n_normals: int, lineno: int) -> tuple[int, int | None]:
    parts = token.split("/")
    if len(parts) > 3 or not parts[0]:
        raise MeshError(f"line {lineno}: malformed face corner {token!r}")
    try:
        vi = int(parts[0])
        ni = int(parts[2]) if len(parts) == 3 and parts[2] else None
        if len(parts) >= 2 and parts[1]:
            int(parts[1])  # texture index: validated, then discarded
    except ValueError:
        raise MeshError(f"line {lineno}: malformed face corner {token!r}") from None
    vi = vi + n_vertices if vi < 0 else vi - 1
    if not 0 <= vi < n_vertices:
        raise MeshError(f"line {lineno}: vertex index {parts[0]} out of range")
    if ni is not None:
        ni = ni + n_normals if ni < 0 else ni - 1
        if not 0 <= ni < n_normals:
            raise MeshError(f"line {lineno}: normal index out of range")
    return vi, ni


def parse_obj(text: str, name: str = "", warnings: list[Diagnostic] | None = None) -> TriangleMesh:
    """Parse an OBJ document into a TriangleMesh.

    Zero-area triangles are dropped with a warning; if the file carries no
    'vn' lines (or leaves corners without normal references), vertex normals
    are computed from the faces.
    """
    vertices: list[tuple[float, float, float]] = []
    vn: list[tuple[float, float, float]] = []
    faces: list[list[tuple[int, int | None]]] = []

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        tag, args = fields[0], fields[1:]
        if tag == "v":
            if len(args) < 3:
                raise MeshError(f"line {lineno}: vertex needs 3 coordinates")
            try:
                vertices.append(tuple(float(x) for x in args[:3]))
            except ValueError:
                raise MeshError(f"line {lineno}: bad vertex coordinate") from None
        elif tag == "vn":
            if len(args) < 3:
                raise MeshError(f"line {lineno}: normal needs 3 components")
            try:
                vn.append(tuple(float(x) for x in args[:3]))
            except ValueError:
                raise MeshError(f"line {lineno}: bad normal component") from None
        elif tag == "f":
            if len(args) < 3:
                raise MeshError(f"line {lineno}: face needs at least 3 vertices")
            corners = [_parse_face_corner(t, len(vertices), len(vn), lineno) for t in args]
            for k in range(1, len(corners) - 1):
                faces.append([corners[0], corners[k], corners[k + 1]])
        elif tag in ("vt", "mtllib", "usemtl", "g", "o", "s", "l", "p"):
            continue
        else:
            raise MeshError(f"line {lineno}: unsupported directive {tag!r}")

    if not vertices:
        raise MeshError(f"{name or 'obj'}: no vertices")
    if not faces:
        raise MeshError(f"{name or 'obj'}: no faces")

    verts = np.asarray(vertices, dtype=np.float64)
    tris = np.asarray([[c[0] for c in f] for f in faces], dtype=np.int32)

    # Drop degenerate triangles (repeated indices or zero area).
    cross = _triangle_area_vectors(verts, tris)
    edge_a = np.linalg.norm(verts[tris[:, 1]] - verts[tris[:, 0]], axis=1)
    edge_b = np.linalg.norm(verts[tris[:, 2]] - verts[tris[:, 0]], axis=1)
    scale = np.maximum(edge_a, edge_b) ** 2
    keep = np.linalg.norm(cross, axis=1) > _DEGENERATE_REL * scale
    if not np.all(keep):
        dropped = int((~keep).sum())
        if warnings is not None:
            warnings.append(
                Diagnostic(
                    code="degenerate-faces",
                    message=f"{name or 'obj'}: dropped {dropped} zero-area triangles",
                )
            )
        faces = [f for f, k in zip(faces, keep) if k]
        tris = tris[keep]
    if len(tris) == 0:
        raise MeshError(f"{name or 'obj'}: no faces left after degenerate cleanup")

    have_all_normals = bool(vn) and all(c[1] is not None for f in faces for c in f)
    if have_all_normals:
        norm_arr = np.asarray(vn, dtype=np.float64)
        acc = np.zeros_like(verts)
        for f in faces:
            for vi, ni in f:
                acc[vi] += norm_arr[ni]
        lengths = np.linalg.norm(acc, axis=1)
        zero = lengths == 0.0
        acc[zero] = (0.0, 0.0, 1.0)
        lengths[zero] = 1.0
        mesh = TriangleMesh(verts, acc / lengths[:, None], tris, name)
    else:
        mesh = TriangleMesh(verts, np.zeros_like(verts), tris, name)
        mesh = compute_vertex_normals(mesh, warnings)
    return mesh


def serialize_obj(m: TriangleMesh) -> str:
    """Write a mesh as OBJ text with full-precision coordinates."""
    lines: list[str] = []
    if m.name:
        lines.append(f"# {m.name}")
    for v in m.vertices:
        lines.append(f"v {float(v[0])!r} {float(v[1])!r} {float(v[2])!r}")
    for n in m.normals:
        lines.append(f"vn {float(n[0])!r} {float(n[1])!r} {float(n[2])!r}")
    for t in m.triangles:
        a, b, c = (int(i) + 1 for i in t)
        lines.append(f"f {a}//{a} {b}//{b} {c}//{c}")
    return "\n".join(lines) + "\n"


def load_obj(path, warnings: list[Diagnostic] | None = None) -> TriangleMesh:
    from pathlib import Path

    p = Path(path)
    return parse_obj(p.read_text(encoding="utf-8"), name=p.stem, warnings=warnings)
