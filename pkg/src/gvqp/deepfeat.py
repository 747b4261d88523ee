"""Contract and I/O for externally produced deep semantic feature vectors.

Vectors arrive pre-pooled per video (one row each) as CSV with header
video_id,d0000..d1919. The default width of 1920 matches the pooled output
of the reference backbone; other widths flow through the dim argument.
"""

from __future__ import annotations

import csv

import numpy as np

DEEP_DIM_DEFAULT = 1920


def deep_columns(dim: int = DEEP_DIM_DEFAULT) -> list[str]:
    return [f"d{i:04d}" for i in range(dim)]


def read_deep_features(path, dim: int = DEEP_DIM_DEFAULT):
    """Parse and validate a deep feature CSV into (video_id, vector) rows."""
    expected = ["video_id"] + deep_columns(dim)
    rows = []
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError("empty deep feature file") from None
        if header != expected:
            raise ValueError(
                f"bad deep feature header: expected {len(expected)} columns"
                f" (video_id,d0000..d{dim - 1:04d}), got {len(header)}"
            )
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != dim + 1:
                raise ValueError(
                    f"row {lineno} ({rec[0]!r}): expected {dim} values, got {len(rec) - 1}"
                )
            try:
                vec = np.array([float(v) for v in rec[1:]], dtype=np.float64)
            except ValueError:
                raise ValueError(f"row {lineno} ({rec[0]!r}): non-numeric value") from None
            if not np.all(np.isfinite(vec)):
                raise ValueError(f"row {lineno} ({rec[0]!r}): non-finite value")
            rows.append((rec[0], vec))
    return rows


def write_deep_features(path, rows, dim: int = DEEP_DIM_DEFAULT) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write(",".join(["video_id"] + deep_columns(dim)) + "\n")
        for video_id, vec in rows:
            vec = np.asarray(vec, dtype=np.float64)
            if vec.shape != (dim,):
                raise ValueError(f"{video_id}: expected {dim} values, got {vec.shape}")
            fh.write(video_id + "," + ",".join(repr(float(v)) for v in vec) + "\n")


def join_features(manifest, nss_rows, deep_rows=None):
    """Inner-join manifest rows with feature rows on video_id.

    Manifest order is preserved; any labeled video missing from a feature set
    fails loudly with the absent ids listed. Extra feature rows are ignored.
    """
    nss_by_id = dict(nss_rows)
    deep_by_id = dict(deep_rows) if deep_rows is not None else None
    missing_nss = [r.video_id for r in manifest.rows if r.video_id not in nss_by_id]
    if missing_nss:
        raise ValueError(f"video ids missing from NSS features: {missing_nss}")
    if deep_by_id is not None:
        missing_deep = [r.video_id for r in manifest.rows if r.video_id not in deep_by_id]
        if missing_deep:
            raise ValueError(f"video ids missing from deep features: {missing_deep}")
    out = []
    for r in manifest.rows:
        deep = deep_by_id[r.video_id] if deep_by_id is not None else None
        out.append((r.video_id, nss_by_id[r.video_id], deep, r.mos))
    return out
