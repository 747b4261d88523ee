"""Pre-processed frame maps: identity, DoG, sigma-DoG, gradient magnitude,
and the nine displaced frame differences, each on both the L* and C* planes.

A full frame pair yields 26 maps; the last frame of a video has no successor
so its MapSet carries only the 8 non-temporal maps and is flagged partial.
All filtering uses mirror (symmetric) boundary extension.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.signal import convolve2d

from .colorspace import ColorFrame
from .mscn import local_mean_std

DOG_SIGMA1 = 1.16  # inner Gaussian width; outer is fixed at 1.5x
DOG_SIGMA_RATIO = 1.5
DOG_TRUNCATE = 4.0  # kernel radius in units of the outer sigma

SOBEL_HX = np.array([[1.0, 0.0, -1.0], [2.0, 0.0, -2.0], [1.0, 0.0, -1.0]])
SOBEL_HY = np.array([[1.0, 2.0, 1.0], [0.0, 0.0, 0.0], [-1.0, -2.0, -1.0]])

# Displacement order for the frame differences: the non-shift first, then the
# eight adjacent directions.
DFD_SHIFTS = ((0, 0), (0, 1), (1, 0), (0, -1), (-1, 0), (-1, 1), (1, -1), (-1, -1), (1, 1))

BASE_MAP_LABELS = (
    "identity-L", "identity-C",
    "dog-L", "dog-C",
    "sigmadog-L", "sigmadog-C",
    "gm-L", "gm-C",
)
DFD_MAP_LABELS = tuple(f"dfd({k},{l})-{c}" for c in ("L", "C") for k, l in DFD_SHIFTS)
MAP_LABELS_FULL = BASE_MAP_LABELS + DFD_MAP_LABELS


@lru_cache(maxsize=None)
def dog_kernel(sigma1: float = DOG_SIGMA1) -> np.ndarray:
    """Discrete difference-of-Gaussians kernel.

    Each Gaussian component is normalized to unit discrete sum before the
    subtraction, so the kernel sums to zero (no DC response) regardless of
    truncation. Side length is 2*ceil(4*sigma2) + 1.
    """
    if sigma1 <= 0:
        raise ValueError(f"sigma1 must be positive, got {sigma1}")
    sigma2 = DOG_SIGMA_RATIO * sigma1
    half = math.ceil(DOG_TRUNCATE * sigma2)
    ax = np.arange(-half, half + 1, dtype=np.float64)
    rr = ax[:, None] ** 2 + ax[None, :] ** 2
    g1 = np.exp(-rr / (2.0 * sigma1**2))
    g2 = np.exp(-rr / (2.0 * sigma2**2))
    return g1 / g1.sum() - g2 / g2.sum()


def convolve_mirror(plane: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2D convolution with symmetric (mirror) boundary, output same size."""
    return convolve2d(np.asarray(plane, dtype=np.float64), kernel, mode="same", boundary="symm")


def apply_dog(plane: np.ndarray, kernel: np.ndarray | None = None) -> np.ndarray:
    """Bandpass a plane with the DoG kernel (or a caller-supplied kernel)."""
    if np.asarray(plane).size == 0:
        raise ValueError("empty plane")
    return convolve_mirror(plane, dog_kernel() if kernel is None else kernel)


def gradient_magnitude(plane: np.ndarray) -> np.ndarray:
    """Euclidean norm of horizontal and vertical Sobel responses."""
    plane = np.asarray(plane, dtype=np.float64)
    if plane.shape[0] < 3 or plane.shape[1] < 3:
        raise ValueError(f"plane {plane.shape} smaller than the 3x3 Sobel templates")
    gx = convolve_mirror(plane, SOBEL_HX)
    gy = convolve_mirror(plane, SOBEL_HY)
    return np.sqrt(gx * gx + gy * gy)


def sigma_field(plane: np.ndarray) -> np.ndarray:
    """Local windowed standard deviation map (shared with the MSCN divisor)."""
    _, sigma = local_mean_std(plane)
    return sigma


def sigma_dog(plane: np.ndarray) -> np.ndarray:
    """Sigma field further bandpassed by the DoG filter."""
    return apply_dog(sigma_field(plane))


def displaced_frame_diffs(cur: np.ndarray, nxt: np.ndarray) -> list[np.ndarray]:
    """The nine displaced differences cur(i,j) - next(i-k, j-l).

    Out-of-range successor samples are resolved by mirror extension so every
    output has the input dimensions.
    """
    cur = np.asarray(cur, dtype=np.float64)
    nxt = np.asarray(nxt, dtype=np.float64)
    if cur.shape != nxt.shape:
        raise ValueError(f"frame dimensions differ: {cur.shape} vs {nxt.shape}")
    h, w = cur.shape
    padded = np.pad(nxt, 1, mode="symmetric")
    out = []
    for k, l in DFD_SHIFTS:
        shifted = padded[1 - k : 1 - k + h, 1 - l : 1 - l + w]
        out.append(cur - shifted)
    return out


@dataclass
class MapSet:
    """The labeled pre-processed maps of one frame (pair)."""

    labels: list[str]
    planes: list[np.ndarray]
    partial: bool = False
    index: int = 0

    def __len__(self) -> int:
        return len(self.planes)

    def asdict(self) -> dict[str, np.ndarray]:
        return dict(zip(self.labels, self.planes))


def build_mapset(frame: ColorFrame, nxt: ColorFrame | None = None) -> MapSet:
    """Assemble the canonical map list for one frame and its successor."""
    labels: list[str] = []
    planes: list[np.ndarray] = []
    for name, fn in (
        ("identity", lambda p: np.asarray(p, dtype=np.float64)),
        ("dog", apply_dog),
        ("sigmadog", sigma_dog),
        ("gm", gradient_magnitude),
    ):
        for tag, plane in (("L", frame.l_star), ("C", frame.c_star)):
            labels.append(f"{name}-{tag}")
            planes.append(fn(plane))
    if nxt is None:
        return MapSet(labels=labels, planes=planes, partial=True, index=frame.index)
    if (frame.l_star.shape != nxt.l_star.shape):
        raise ValueError(
            f"frame {frame.index} and successor dimensions differ:"
            f" {frame.l_star.shape} vs {nxt.l_star.shape}"
        )
    for tag, cur, fut in (("L", frame.l_star, nxt.l_star), ("C", frame.c_star, nxt.c_star)):
        for (k, l), diff in zip(DFD_SHIFTS, displaced_frame_diffs(cur, fut)):
            labels.append(f"dfd({k},{l})-{tag}")
            planes.append(diff)
    return MapSet(labels=labels, planes=planes, partial=False, index=frame.index)
