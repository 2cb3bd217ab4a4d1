"""Value-to-color mapping along an ordered list of RGB control colors.

A gradient with K+1 controls maps the value range [0, K]: integer values hit
control colors exactly, fractional values interpolate linearly between the
two neighbouring controls, and out-of-range values clamp to the ends.
Interpolation happens directly on 8-bit sRGB channels with round-half-up.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import GradientError

RGB8 = tuple[int, int, int]

#: Named colors accepted in config gradient lists.
NAMED_COLORS: dict[str, RGB8] = {
    "white": (255, 255, 255),
    "yellow": (255, 255, 0),
    "orange": (255, 165, 0),
    "red": (255, 0, 0),
    "blue": (0, 0, 255),
    "green": (0, 128, 0),
    "black": (0, 0, 0),
    "cyan": (0, 255, 255),
    "magenta": (255, 0, 255),
    "gray": (128, 128, 128),
    "purple": (128, 0, 128),
    "brown": (165, 42, 42),
    "pink": (255, 192, 203),
    "lime": (0, 255, 0),
    "navy": (0, 0, 128),
    "teal": (0, 128, 128),
}

#: Fallback control colors when the config omits a gradient.
DEFAULT_CONTROLS: tuple[RGB8, ...] = (
    (255, 255, 255),  # white
    (255, 255, 0),    # yellow
    (255, 165, 0),    # orange
    (255, 0, 0),      # red
)


@dataclass(frozen=True)
class GradientSpec:
    """Ordered control colors; index i is the exact color at value i."""

    controls: tuple[RGB8, ...]

    @property
    def top(self) -> int:
        """Largest mapped value (number of controls minus one)."""
        return len(self.controls) - 1

    @classmethod
    def from_colors(cls, colors) -> "GradientSpec":
        g = cls(tuple(tuple(int(c) for c in color) for color in colors))
        validate(g)
        return g


def default_gradient() -> GradientSpec:
    return GradientSpec(DEFAULT_CONTROLS)


def validate(g: GradientSpec) -> None:
    """Raise GradientError naming the offending control if g is invalid."""
    if len(g.controls) < 2:
        raise GradientError("need at least 2 controls")
    for i, color in enumerate(g.controls):
        if len(color) != 3:
            raise GradientError(f"control {i}: expected 3 channels, got {len(color)}")
        for ch in color:
            if not isinstance(ch, int) or not 0 <= ch <= 255:
                raise GradientError(f"control {i}: channel value {ch} outside 0-255")


def color_at(g: GradientSpec, v: float) -> RGB8:
    """Map a scalar to an RGB color along the gradient.

    v is clamped to [0, top]; between integer positions each channel is
    linearly interpolated and rounded half-up.
    """
    if not math.isfinite(v):
        raise GradientError(f"gradient value must be finite, got {v!r}")
    top = g.top
    if v <= 0:
        return g.controls[0]
    if v >= top:
        return g.controls[top]
    i = int(math.floor(v))
    t = v - i
    lo, hi = g.controls[i], g.controls[i + 1]
    return tuple(int(math.floor((1.0 - t) * lo[c] + t * hi[c] + 0.5)) for c in range(3))


def parse_color(spec: str) -> RGB8:
    """Parse a config color: '#RRGGBB' or a name from NAMED_COLORS."""
    if not isinstance(spec, str):
        raise GradientError(f"color must be a string, got {type(spec).__name__}")
    s = spec.strip().lower()
    if s.startswith("#"):
        hexpart = s[1:]
        if len(hexpart) != 6 or any(c not in "0123456789abcdef" for c in hexpart):
            raise GradientError(f"bad hex color {spec!r}: expected #RRGGBB")
        return (int(hexpart[0:2], 16), int(hexpart[2:4], 16), int(hexpart[4:6], 16))
    if s in NAMED_COLORS:
        return NAMED_COLORS[s]
    raise GradientError(
        f"unknown color {spec!r}: use #RRGGBB or one of {', '.join(sorted(NAMED_COLORS))}"
    )


def parse_gradient(colors: list) -> GradientSpec:
    """Build a GradientSpec from a config list of hex strings or color names."""
    if not isinstance(colors, list):
        raise GradientError("gradient must be a list of colors")
    return GradientSpec.from_colors([parse_color(c) for c in colors])
