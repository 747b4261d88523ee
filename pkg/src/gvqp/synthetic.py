"""Synthetic study corpus: procedurally generated videos with graded
distortions, a monotone quality proxy, and a deterministic stand-in for the
externally produced semantic feature vectors.

The base contents are cartoon-like textures (smooth shading plus hard-edged
shapes) drifting a pixel per frame, which makes both the spatial and the
temporal statistics informative. Distortion level k applies a Gaussian blur
of width 0.5*k and additive noise of strength 0.02*k before quantization.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .deepfeat import DEEP_DIM_DEFAULT, write_deep_features
from .frameio import DatasetManifest, ManifestRow, RgbFrame, rgb_to_yuv, write_manifest, write_y4m

_SURROGATE_SEED = 0x5EEDFACE


def _base_content(rng: np.random.Generator, height: int, width: int, margin: int):
    """One oversized RGB texture: smooth background + sharp random shapes."""
    h, w = height + 2 * margin, width + 2 * margin
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    img = np.zeros((h, w, 3))
    for c in range(3):
        fx, fy = rng.uniform(0.01, 0.06, size=2)
        phase = rng.uniform(0, 2 * np.pi, size=2)
        img[:, :, c] = 0.45 + 0.25 * np.sin(2 * np.pi * fx * xx + phase[0]) * np.cos(
            2 * np.pi * fy * yy + phase[1])
    for _ in range(rng.integers(6, 12)):
        color = rng.uniform(0.05, 0.95, size=3)
        cx, cy = rng.uniform(0, w), rng.uniform(0, h)
        if rng.random() < 0.5:
            sx, sy = rng.uniform(3, w / 3), rng.uniform(3, h / 3)
            mask = (np.abs(xx - cx) < sx / 2) & (np.abs(yy - cy) < sy / 2)
        else:
            rad = rng.uniform(2, min(h, w) / 4)
            mask = (xx - cx) ** 2 + (yy - cy) ** 2 < rad**2
        img[mask] = color
    return np.clip(img, 0.0, 1.0)


def make_clean_video(seed, height: int = 64, width: int = 64, n_frames: int = 8):
    """Pristine frames of one drifting texture, as float RGB arrays."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    margin = n_frames + 2
    canvas = _base_content(rng, height, width, margin)
    dx, dy = int(rng.integers(-1, 2)), int(rng.integers(-1, 2))
    if dx == 0 and dy == 0:
        dx = 1
    frames = []
    for t in range(n_frames):
        ox, oy = margin + t * dx, margin + t * dy
        frames.append(canvas[oy : oy + height, ox : ox + width].copy())
    return frames


def distort_video(frames, level: int, seed):
    """Blur + noise graded by level; level 0 returns the input untouched."""
    if level == 0:
        return [f.copy() for f in frames]
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, level))))
    sigma_blur = 0.5 * level
    sigma_noise = 0.02 * level
    out = []
    for f in frames:
        g = gaussian_filter(f, sigma=(sigma_blur, sigma_blur, 0), mode="reflect")
        g = g + rng.normal(scale=sigma_noise, size=g.shape)
        out.append(np.clip(g, 0.0, 1.0))
    return out


def _to_rgb_frames(arrays) -> list[RgbFrame]:
    return [
        RgbFrame(r=a[:, :, 0], g=a[:, :, 1], b=a[:, :, 2], index=i)
        for i, a in enumerate(arrays)
    ]


def mos_proxy(level: int, content_offset: float) -> float:
    return float(np.clip(92.0 - 13.0 * level + content_offset, 5.0, 100.0))


@dataclass
class CorpusSpec:
    n_contents: int = 10
    n_levels: int = 6
    height: int = 64
    width: int = 64
    n_frames: int = 8
    seed: int = 0


def make_corpus(out_dir, spec: CorpusSpec = CorpusSpec()) -> DatasetManifest:
    """Write the synthetic study corpus: Y4M videos plus manifest.csv."""
    os.makedirs(out_dir, exist_ok=True)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((spec.seed, 0xC0))))
    rows = []
    for c in range(spec.n_contents):
        clean = make_clean_video((spec.seed, c), spec.height, spec.width, spec.n_frames)
        offset = float(rng.uniform(-3.0, 3.0))
        for level in range(spec.n_levels):
            vid = f"c{c:02d}_l{level}"
            path = os.path.join(out_dir, f"{vid}.y4m")
            frames = _to_rgb_frames(distort_video(clean, level, (spec.seed, c)))
            write_y4m(path, [rgb_to_yuv(f, subsampling="444") for f in frames],
                      subsampling="444")
            rows.append(ManifestRow(video_id=vid, path=path, mos=mos_proxy(level, offset)))
    manifest = DatasetManifest(rows=rows)
    write_manifest(os.path.join(out_dir, "manifest.csv"), manifest)
    return manifest


# ---------------------------------------------------------------------------
# Deterministic stand-in for externally computed semantic features

def _frame_stats(arr: np.ndarray) -> np.ndarray:
    """Simple multi-scale content statistics of one RGB frame."""
    stats = []
    for step in (1, 2, 4):
        small = arr[::step, ::step]
        for c in range(3):
            p = small[:, :, c]
            dx = np.diff(p, axis=1)
            dy = np.diff(p, axis=0)
            stats += [
                float(p.mean()),
                float(p.std()),
                float(np.abs(dx).mean()) if dx.size else 0.0,
                float(np.abs(dy).mean()) if dy.size else 0.0,
            ]
    return np.asarray(stats)


def surrogate_deep_vector(frames, dim: int = DEEP_DIM_DEFAULT) -> np.ndarray:
    """Project pooled frame statistics to the deep-feature width.

    A fixed random projection keyed by a constant seed; deterministic in the
    input frames alone.
    """
    pooled = np.mean([_frame_stats(np.dstack([f.r, f.g, f.b])) for f in frames], axis=0)
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(_SURROGATE_SEED)))
    proj = rng.normal(size=(dim, pooled.size)) / np.sqrt(pooled.size)
    raw = proj @ pooled
    return np.tanh(raw) + 0.01 * raw


def write_surrogate_deep_csv(path, videos, dim: int = DEEP_DIM_DEFAULT) -> None:
    """videos: iterable of (video_id, list[RgbFrame])."""
    rows = [(vid, surrogate_deep_vector(frames, dim)) for vid, frames in videos]
    write_deep_features(path, rows, dim)
