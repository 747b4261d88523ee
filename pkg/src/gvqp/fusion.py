"""Combining the two regressor outputs into the final quality score."""

from __future__ import annotations

import math

FUSION_MODES = ("mean", "product", "single")


def fuse(m1: float, m2: float | None, mode: str = "mean") -> float:
    """Fuse the statistical-model and semantic-model predictions.

    mean     -> (m1 + m2) / 2 (the default)
    product  -> m1 * m2
    single   -> identity on m1 (one regressor was trained on the
                concatenated features upstream)
    """
    if mode not in FUSION_MODES:
        raise ValueError(f"unknown fusion mode {mode!r}, expected one of {FUSION_MODES}")
    if mode == "single":
        if m1 is None or not math.isfinite(m1):
            raise ValueError(f"non-finite score: {m1}")
        return float(m1)
    if m1 is None or m2 is None or not (math.isfinite(m1) and math.isfinite(m2)):
        raise ValueError(f"non-finite scores: ({m1}, {m2})")
    if mode == "mean":
        return (float(m1) + float(m2)) / 2.0
    return float(m1) * float(m2)
