"""Exception hierarchy shared across the package."""


class BrainPaintError(Exception):
    """Base class for all brainpaint errors."""


class GradientError(BrainPaintError):
    """Invalid gradient definition or lookup value."""


class AtlasError(BrainPaintError):
    """Unknown atlas, unresolvable region, or bad manifest."""


class IngestError(BrainPaintError):
    """Malformed or inconsistent biomarker CSV."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        super().__init__(message)
        self.row = row
        self.column = column


class MeshError(BrainPaintError):
    """Malformed OBJ document or invalid mesh."""


class RenderError(BrainPaintError):
    """Invalid camera, material, or raster request."""


class SceneError(BrainPaintError):
    """Scene cannot be assembled: empty after exclusions, bad view, missing mesh."""


class ConfigError(BrainPaintError):
    """Invalid run configuration."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key
