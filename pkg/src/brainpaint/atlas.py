"""Atlas definitions: canonical region names, hemispheres, and mesh assets.

Built-in atlases (desikan_killiany, destrieux, tourville) ship as manifest
files inside the package; a custom atlas is any directory under the asset
root holding a ``manifest.tsv`` in the same format. Bilateral structures
appear twice: the base canonical name is the left-hemisphere instance and
``<name>_rh`` is its right twin. CSV columns address base names; right twins
inherit the base value unless a column names them explicitly.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path

from .errors import AtlasError

BUILTIN_ATLASES = ("desikan_killiany", "destrieux", "tourville")

HEMISPHERES = ("left", "right", "midline")
KLASSES = ("cortical", "subcortical")

RIGHT_SUFFIX = "_rh"

_CANONICAL_RE = re.compile(r"^[a-z0-9_]+$")
_NORMALIZE_RE = re.compile(r"[ \-.]+")


@dataclass(frozen=True)
class RegionDef:
    """One colorable region: where it lives and which mesh asset draws it."""

    canonical_name: str
    hemisphere: str
    klass: str
    mesh_key: str

    def __post_init__(self):
        if not self.canonical_name or not _CANONICAL_RE.match(self.canonical_name):
            raise AtlasError(
                f"bad canonical name {self.canonical_name!r}: must be lowercase [a-z0-9_]"
            )
        if self.hemisphere not in HEMISPHERES:
            raise AtlasError(f"{self.canonical_name}: bad hemisphere {self.hemisphere!r}")
        if self.klass not in KLASSES:
            raise AtlasError(f"{self.canonical_name}: bad class {self.klass!r}")

    @property
    def is_right_twin(self) -> bool:
        return self.canonical_name.endswith(RIGHT_SUFFIX)

    @property
    def base_name(self) -> str:
        """Canonical name with the right-twin suffix stripped."""
        if self.is_right_twin:
            return self.canonical_name[: -len(RIGHT_SUFFIX)]
        return self.canonical_name


@dataclass(frozen=True)
class Atlas:
    """Immutable region registry for one parcellation."""

    name: str
    regions: tuple[RegionDef, ...]
    alias_table: dict[str, str] = field(default_factory=dict)

    def __post_init__(self):
        seen = set()
        for r in self.regions:
            if r.canonical_name in seen:
                raise AtlasError(f"duplicate canonical name {r.canonical_name!r}")
            seen.add(r.canonical_name)
        keys = [r.mesh_key for r in self.regions]
        if len(set(keys)) != len(keys):
            raise AtlasError("duplicate mesh_key in atlas")
        for alias, target in self.alias_table.items():
            if target not in seen:
                raise AtlasError(f"alias {alias!r} points at unknown region {target!r}")

    def __contains__(self, canonical_name: str) -> bool:
        return any(r.canonical_name == canonical_name for r in self.regions)

    def get(self, canonical_name: str) -> RegionDef | None:
        for r in self.regions:
            if r.canonical_name == canonical_name:
                return r
        return None

    def right_twin(self, region: RegionDef) -> RegionDef | None:
        """The right-hemisphere twin of a base region, if the atlas has one."""
        if region.hemisphere != "left":
            return None
        return self.get(region.canonical_name + RIGHT_SUFFIX)

    def mesh_filename(self, region: RegionDef, surface: str = "pial") -> str:
        """Asset file name for a region; cortical meshes carry a surface suffix."""
        if region.klass == "cortical":
            return f"{region.mesh_key}_{surface}.obj"
        return f"{region.mesh_key}.obj"

    def mesh_path(self, asset_root: Path, region: RegionDef, surface: str = "pial") -> Path:
        return Path(asset_root) / self.name / self.mesh_filename(region, surface)


def normalize_name(raw: str) -> str:
    """Trim, lowercase, and map runs of spaces/hyphens/periods to '_'."""
    return _NORMALIZE_RE.sub("_", raw.strip().lower())


def levenshtein(a: str, b: str) -> int:
    if a == b:
        return 0
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        cur = [i]
        for j, cb in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def closest_regions(atlas: Atlas, name: str, n: int = 3) -> list[str]:
    """The n canonical names nearest to ``name`` by edit distance."""
    ranked = sorted(
        (r.canonical_name for r in atlas.regions),
        key=lambda c: (levenshtein(name, c), c),
    )
    return ranked[:n]


def resolve_region(atlas: Atlas, raw_name: str) -> RegionDef:
    """Resolve a raw region name (e.g. a CSV header) to its RegionDef.

    Lookup order after normalization: canonical names, then the alias table.
    An unresolved name raises AtlasError listing the three closest canonical
    names for diagnostics.
    """
    if not raw_name or not raw_name.strip():
        raise AtlasError("empty region name")
    name = normalize_name(raw_name)
    region = atlas.get(name)
    if region is not None:
        return region
    if name in atlas.alias_table:
        return atlas.get(atlas.alias_table[name])
    suggestions = closest_regions(atlas, name)
    raise AtlasError(
        f"unknown region {raw_name!r} in atlas {atlas.name!r}; "
        f"closest matches: {', '.join(suggestions)}"
    )


def apply_custom_mapping(atlas: Atlas, mapping: dict[str, str]) -> Atlas:
    """Extend the alias table with custom-name -> canonical-name entries."""
    aliases = dict(atlas.alias_table)
    for source, target in mapping.items():
        key = normalize_name(source)
        if atlas.get(key) is not None:
            raise AtlasError(f"mapping source {source!r} collides with a canonical name")
        resolved = resolve_region(atlas, target)  # raises if the target is unknown
        aliases[key] = resolved.canonical_name
    return replace(atlas, alias_table=aliases)


def _default_aliases(regions: tuple[RegionDef, ...]) -> dict[str, str]:
    """left_/right_ prefixed spellings for every bilateral region."""
    aliases: dict[str, str] = {}
    names = {r.canonical_name for r in regions}
    for r in regions:
        if r.hemisphere == "left" and r.canonical_name + RIGHT_SUFFIX in names:
            aliases[f"left_{r.canonical_name}"] = r.canonical_name
            aliases[f"right_{r.canonical_name}"] = r.canonical_name + RIGHT_SUFFIX
    return aliases


def parse_manifest(text: str, name: str) -> Atlas:
    """Parse a tab-separated atlas manifest (see repo docs for the format)."""
    regions: list[RegionDef] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.split("\t")
        if len(fields) != 4:
            raise AtlasError(
                f"atlas {name!r} manifest line {lineno}: expected 4 tab-separated "
                f"fields, got {len(fields)}"
            )
        regions.append(RegionDef(*fields))
    if not regions:
        raise AtlasError(f"atlas {name!r} manifest has no regions")
    regs = tuple(regions)
    return Atlas(name=name, regions=regs, alias_table=_default_aliases(regs))


def _builtin_manifest_text(name: str) -> str:
    ref = resources.files("brainpaint").joinpath(f"assets/atlases/{name}.tsv")
    return ref.read_text(encoding="utf-8")


def load_manifest(name: str, asset_root: Path | str | None = None) -> Atlas:
    """Load an atlas definition without checking that mesh files exist."""
    if name in BUILTIN_ATLASES:
        return parse_manifest(_builtin_manifest_text(name), name)
    if asset_root is not None:
        custom = Path(asset_root) / name / "manifest.tsv"
        if custom.is_file():
            return parse_manifest(custom.read_text(encoding="utf-8"), name)
    raise AtlasError(
        f"unknown atlas {name!r}: expected one of {', '.join(BUILTIN_ATLASES)} "
        f"or a custom manifest at <asset_root>/{name}/manifest.tsv"
    )


def load_atlas(name: str, asset_root: Path | str) -> Atlas:
    """Load an atlas and verify every region's mesh asset is readable.

    Cortical regions are checked against the pial surface files (the baseline
    asset set); the inflated variant is resolved when a scene selects it.
    """
    atlas = load_manifest(name, asset_root)
    root = Path(asset_root)
    for region in atlas.regions:
        path = atlas.mesh_path(root, region)
        if not path.is_file():
            raise AtlasError(
                f"atlas {name!r}: mesh asset for region {region.canonical_name!r} "
                f"missing at {path}"
            )
    return atlas
