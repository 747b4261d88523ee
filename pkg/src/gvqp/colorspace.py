"""sRGB to perceptual color maps: CIELAB lightness L* and chroma saturation C*.

The polar chroma magnitude C* = sqrt(a*^2 + b*^2) is taken from the CIELCh
form of CIELAB. D65 white point, 2-degree observer; the reference white is
the image of (1,1,1) under the RGB->XYZ matrix so neutral inputs map to
exactly zero chroma.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frameio import RgbFrame

# Linear sRGB -> XYZ (D65).
SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)

# White point as row sums: gray pixels then satisfy X/Xn == Y/Yn == Z/Zn exactly.
WHITE_POINT = SRGB_TO_XYZ.sum(axis=1)

_DELTA = 6.0 / 29.0


@dataclass
class ColorFrame:
    """L* (lightness, [0, 100]) and C* (chroma, >= 0) planes of one frame."""

    l_star: np.ndarray
    c_star: np.ndarray
    index: int = 0

    @property
    def height(self) -> int:
        return self.l_star.shape[0]

    @property
    def width(self) -> int:
        return self.l_star.shape[1]


def srgb_linearize(c: np.ndarray) -> np.ndarray:
    """Invert the sRGB transfer function (gamma expansion)."""
    c = np.asarray(c, dtype=np.float64)
    return np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)


def _lab_f(t: np.ndarray) -> np.ndarray:
    return np.where(t > _DELTA**3, np.cbrt(t), t / (3.0 * _DELTA**2) + 4.0 / 29.0)


def srgb_to_lab(r: np.ndarray, g: np.ndarray, b: np.ndarray):
    """Per-pixel sRGB -> CIELAB (L*, a*, b*) over same-shaped planes."""
    rl, gl, bl = srgb_linearize(r), srgb_linearize(g), srgb_linearize(b)
    m = SRGB_TO_XYZ
    x = m[0, 0] * rl + m[0, 1] * gl + m[0, 2] * bl
    y = m[1, 0] * rl + m[1, 1] * gl + m[1, 2] * bl
    z = m[2, 0] * rl + m[2, 1] * gl + m[2, 2] * bl
    fx = _lab_f(x / WHITE_POINT[0])
    fy = _lab_f(y / WHITE_POINT[1])
    fz = _lab_f(z / WHITE_POINT[2])
    l_star = 116.0 * fy - 16.0
    a_star = 500.0 * (fx - fy)
    b_star = 200.0 * (fy - fz)
    return l_star, a_star, b_star


def chroma_from_ab(a_star: np.ndarray, b_star: np.ndarray) -> np.ndarray:
    """Polar chroma magnitude of the CIELAB chromatic axes."""
    return np.hypot(a_star, b_star)


def srgb_to_colorframe(frame: RgbFrame) -> ColorFrame:
    """Convert one decoded RGB frame to its L*/C* map pair."""
    l_star, a_star, b_star = srgb_to_lab(frame.r, frame.g, frame.b)
    return ColorFrame(l_star=l_star, c_star=chroma_from_ab(a_star, b_star), index=frame.index)
