"""Divisive normalization and the directional spatial differences.

Every pre-processed map is converted to mean-subtracted, contrast-normalized
(MSCN) coefficients

    P_hat(i,j) = (P(i,j) - mu(i,j)) / (sigma(i,j) + C),   C = 1

with mu and sigma the Gaussian-weighted local mean and standard deviation
over a 7x7 window (K = L = 3). Four directional spatial differences are then
taken on the MSCN coefficients of the identity and gradient-magnitude maps.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import convolve2d

WINDOW_HALF = 3  # K = L = 3 -> 7x7 support
WINDOW_SIGMA = 7.0 / 6.0  # BRISQUE-convention width for the 7x7 window
STABILIZER = 1.0  # additive constant C in the divisive normalization

# Spatial differences are computed on the MSCN maps of these sources only.
SPATIAL_DIFF_SOURCES = ("identity-L", "identity-C", "gm-L", "gm-C")


def gaussian_window(half: int = WINDOW_HALF, sigma: float = WINDOW_SIGMA) -> np.ndarray:
    """Circularly symmetric Gaussian weights, truncated and renormalized to unit sum."""
    ax = np.arange(-half, half + 1, dtype=np.float64)
    xx, yy = np.meshgrid(ax, ax)
    w = np.exp(-(xx**2 + yy**2) / (2.0 * sigma**2))
    return w / w.sum()


_WINDOW = gaussian_window()


def local_mean_std(plane: np.ndarray, window: np.ndarray | None = None):
    """Gaussian-weighted local mean and standard deviation, mirror boundary.

    The variance pass runs on globally centered data: E[P^2] - mu^2 would
    otherwise lose all precision on near-constant planes.
    """
    plane = np.asarray(plane, dtype=np.float64)
    if plane.size == 0:
        raise ValueError("empty plane")
    w = _WINDOW if window is None else window
    center = plane.mean()
    q = plane - center
    mu_q = convolve2d(q, w, mode="same", boundary="symm")
    second_q = convolve2d(q * q, w, mode="same", boundary="symm")
    var = np.maximum(second_q - mu_q * mu_q, 0.0)
    return mu_q + center, np.sqrt(var)


def mscn(plane: np.ndarray) -> np.ndarray:
    """Mean-subtracted contrast-normalized coefficients of one plane."""
    mu, sigma = local_mean_std(plane)
    return (np.asarray(plane, dtype=np.float64) - mu) / (sigma + STABILIZER)


def spatial_diffs(mscn_map: np.ndarray) -> list[np.ndarray]:
    """The four directional differences of an MSCN map, valid region only.

    Order: horizontal, vertical, main diagonal, secondary diagonal. Outputs
    shrink by one sample along each shifted axis; no padding is injected.
    """
    p = np.asarray(mscn_map, dtype=np.float64)
    if p.shape[0] < 2 or p.shape[1] < 2:
        raise ValueError(f"plane too small for spatial differences: {p.shape}")
    d1 = p[:, 1:] - p[:, :-1]
    d2 = p[1:, :] - p[:-1, :]
    d3 = p[1:, 1:] - p[:-1, :-1]
    d4 = p[1:, :-1] - p[:-1, 1:]
    return [d1, d2, d3, d4]


@dataclass
class CoefficientSet:
    """Labeled MSCN coefficient maps plus their spatial-difference maps."""

    labels: list[str]
    planes: list[np.ndarray]
    partial: bool = False

    def __len__(self) -> int:
        return len(self.planes)

    def asdict(self) -> dict[str, np.ndarray]:
        return dict(zip(self.labels, self.planes))


def coefficient_labels(map_labels) -> list[str]:
    """Canonical coefficient-map label order for a given MapSet label order."""
    labels = [f"mscn:{name}" for name in map_labels]
    for d in range(1, 5):
        for src in SPATIAL_DIFF_SOURCES:
            labels.append(f"nabla{d}:mscn:{src}")
    return labels


def build_coefficients(mapset) -> CoefficientSet:
    """Normalize every map of a MapSet and append the 16 difference maps.

    A full 26-map set yields 42 coefficient maps; a partial 8-map set (no
    successor frame) yields 24.
    """
    normalized = {label: mscn(plane) for label, plane in zip(mapset.labels, mapset.planes)}
    planes = list(normalized.values())
    diffs = {src: spatial_diffs(normalized[src]) for src in SPATIAL_DIFF_SOURCES}
    for d in range(1, 5):
        for src in SPATIAL_DIFF_SOURCES:
            planes.append(diffs[src][d - 1])
    labels = coefficient_labels(mapset.labels)
    return CoefficientSet(labels=labels, planes=planes, partial=mapset.partial)
