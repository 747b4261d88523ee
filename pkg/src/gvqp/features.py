"""Per-video statistical feature extraction.

Per frame and scale, the 42 coefficient maps are each summarized by a fitted
(shape, spread) pair, giving 84 values per scale and 168 for the default two
scales. Per-frame vectors are averaged over the video, with the temporal
(displaced-difference) entries masked out on the final frame of a video.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .colorspace import ColorFrame, srgb_to_colorframe
from .ggd import ALPHA_GRID_MAX, fit_ggd
from .maps import DFD_SHIFTS, build_mapset, convolve_mirror
from .mscn import build_coefficients

N_SCALES_DEFAULT = 2
FEATURES_PER_SCALE = 84
N_FEATURES = N_SCALES_DEFAULT * FEATURES_PER_SCALE


@dataclass(frozen=True)
class ScaleConfig:
    n_scales: int = N_SCALES_DEFAULT
    downscale_factor: int = 2
    blur_sigma: float = 1.0
    blur_half: int = 2  # 5x5 anti-aliasing kernel

    def __post_init__(self):
        if self.n_scales < 1:
            raise ValueError("n_scales must be >= 1")


def _scale_sources() -> list[str]:
    """Coefficient-map labels in canonical feature order for one scale."""
    src = [
        "mscn:identity-L", "mscn:identity-C",
        "mscn:dog-L", "mscn:dog-C",
        "mscn:sigmadog-L", "mscn:sigmadog-C",
    ]
    for k, l in DFD_SHIFTS:
        for c in ("L", "C"):
            src.append(f"mscn:dfd({k},{l})-{c}")
    for d in range(1, 5):
        for c in ("L", "C"):
            src.append(f"nabla{d}:mscn:identity-{c}")
    src += ["mscn:gm-L", "mscn:gm-C"]
    for d in range(1, 5):
        for c in ("L", "C"):
            src.append(f"nabla{d}:mscn:gm-{c}")
    return src


SCALE_SOURCES = tuple(_scale_sources())  # 42 map labels per scale
FEATURE_LABELS = tuple(
    f"scale{s + 1}:{src}:{param}"
    for s in range(N_SCALES_DEFAULT)
    for src in SCALE_SOURCES
    for param in ("alpha", "sigma")
)

# Block boundaries within one 84-entry scale block, by feature index.
SCALE_BLOCKS = {
    "identity": (0, 4),
    "dog": (4, 8),
    "sigmadog": (8, 12),
    "dfd": (12, 48),
    "identity-diffs": (48, 64),
    "gm": (64, 68),
    "gm-diffs": (68, 84),
}

# Value used for features whose map was identically zero (degenerate fit) and
# as the pooled value for temporal features of a single-frame video.
DEGENERATE_FILL = {"alpha": ALPHA_GRID_MAX, "sigma": 0.0}


def feature_count(n_scales: int = N_SCALES_DEFAULT) -> int:
    return n_scales * FEATURES_PER_SCALE


def degenerate_vector(n_scales: int = N_SCALES_DEFAULT) -> np.ndarray:
    """Feature vector a perfectly constant video would produce."""
    per_scale = [DEGENERATE_FILL[p] for _ in SCALE_SOURCES for p in ("alpha", "sigma")]
    return np.asarray(per_scale * n_scales, dtype=np.float64)


def _blur_kernel(cfg: ScaleConfig) -> np.ndarray:
    ax = np.arange(-cfg.blur_half, cfg.blur_half + 1, dtype=np.float64)
    g = np.exp(-(ax[:, None] ** 2 + ax[None, :] ** 2) / (2.0 * cfg.blur_sigma**2))
    return g / g.sum()


def downscale2x(frame: ColorFrame, cfg: ScaleConfig = ScaleConfig()) -> ColorFrame:
    """Anti-aliased 2x spatial reduction: Gaussian blur, keep even samples."""
    if frame.height < 14 or frame.width < 14:
        raise ValueError(
            f"frame {frame.width}x{frame.height} too small to downscale"
            " (the 7x7 normalization window must fit afterwards)"
        )
    k = _blur_kernel(cfg)
    l2 = convolve_mirror(frame.l_star, k)[::2, ::2]
    c2 = convolve_mirror(frame.c_star, k)[::2, ::2]
    return ColorFrame(l_star=l2, c_star=c2, index=frame.index)


def _scale_features(cur: ColorFrame, nxt: ColorFrame | None):
    """(values, present) for one scale of one frame: 84 entries each."""
    coeffs = build_coefficients(build_mapset(cur, nxt)).asdict()
    values = np.empty(FEATURES_PER_SCALE, dtype=np.float64)
    present = np.ones(FEATURES_PER_SCALE, dtype=bool)
    for i, src in enumerate(SCALE_SOURCES):
        plane = coeffs.get(src)
        if plane is None:  # temporal map absent on the final frame
            values[2 * i] = 0.0
            values[2 * i + 1] = 0.0
            present[2 * i] = present[2 * i + 1] = False
            continue
        fit = fit_ggd(plane)
        values[2 * i] = fit.alpha
        values[2 * i + 1] = fit.sigma
    return values, present


def extract_frame_features(cur: ColorFrame, nxt: ColorFrame | None,
                           cfg: ScaleConfig = ScaleConfig()):
    """Per-frame feature vector over all scales, with a presence mask.

    Temporal entries are flagged absent when the frame has no successor.
    """
    values = []
    present = []
    c, n = cur, nxt
    for s in range(cfg.n_scales):
        if s > 0:
            c = downscale2x(c, cfg)
            n = downscale2x(n, cfg) if n is not None else None
        v, p = _scale_features(c, n)
        values.append(v)
        present.append(p)
    return np.concatenate(values), np.concatenate(present)


def pool_video(per_frame) -> np.ndarray:
    """Masked per-index arithmetic mean over the frame vectors of one video.

    Indices absent in every frame (the temporal block of a one-frame video)
    take the degenerate-fit encoding so the vector stays total and finite.
    """
    per_frame = list(per_frame)
    if not per_frame:
        raise ValueError("cannot pool an empty frame sequence")
    vals = np.stack([v for v, _ in per_frame])
    mask = np.stack([m for _, m in per_frame])
    counts = mask.sum(axis=0)
    sums = (vals * mask).sum(axis=0)
    n_scales = vals.shape[1] // FEATURES_PER_SCALE
    out = degenerate_vector(n_scales)
    covered = counts > 0
    out[covered] = sums[covered] / counts[covered]
    return out


def extract_nss(frames, stride: int = 1, cfg: ScaleConfig = ScaleConfig(),
                threads: int = 1) -> np.ndarray:
    """Full per-video pipeline: color conversion, per-frame features, pooling."""
    if stride < 1:
        raise ValueError("stride must be >= 1")
    color = [srgb_to_colorframe(f) for f in frames[::stride]]
    if not color:
        raise ValueError("no frames to extract from")
    tasks = [(color[i], color[i + 1] if i + 1 < len(color) else None) for i in range(len(color))]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_frame = list(pool.map(lambda t: extract_frame_features(*t, cfg), tasks))
    else:
        per_frame = [extract_frame_features(c, n, cfg) for c, n in tasks]
    return pool_video(per_frame)


# ---------------------------------------------------------------------------
# Feature CSV: header video_id,f000..f167, shortest round-trip decimals.

def feature_columns(dim: int = N_FEATURES) -> list[str]:
    return [f"f{i:03d}" for i in range(dim)]


def write_features(path, rows, dim: int = N_FEATURES) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(["video_id"] + feature_columns(dim)) + "\n")
        for video_id, vec in rows:
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"{video_id}: expected {dim} features, got {vec.shape}")
            fh.write(video_id + "," + ",".join(repr(float(v)) for v in vec) + "\n")


def read_features(path, dim: int = N_FEATURES):
    """Parse a feature CSV back to (video_id, vector) rows."""
    expected = ["video_id"] + feature_columns(dim)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty feature file") from None
        if header != expected:
            raise ValueError(
                f"bad feature header: expected {len(expected)} columns"
                f" video_id,f000..f{dim - 1:03d}, got {len(header)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != dim + 1:
                raise ValueError(f"row {lineno}: expected {dim + 1} columns, got {len(rec)}")
            try:
                vec = np.array([float(v) for v in rec[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"row {lineno}: non-numeric feature value") from None
            rows.append((rec[0], vec))
    return rows
