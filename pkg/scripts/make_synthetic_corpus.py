#!/usr/bin/env python3
"""Generate the synthetic study corpus: graded-distortion videos, a manifest
with a monotone quality proxy, and surrogate deep features.

Usage:
    python scripts/make_synthetic_corpus.py OUT_DIR [--contents 10]
        [--levels 6] [--size 64] [--frames 8] [--seed 0]
"""

import argparse
import os
import sys

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gvqp.frameio import read_y4m
from gvqp.synthetic import CorpusSpec, make_corpus, write_surrogate_deep_csv


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("out_dir")
    ap.add_argument("--contents", type=int, default=10)
    ap.add_argument("--levels", type=int, default=6)
    ap.add_argument("--size", type=int, default=64)
    ap.add_argument("--frames", type=int, default=8)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = CorpusSpec(n_contents=args.contents, n_levels=args.levels,
                      height=args.size, width=args.size,
                      n_frames=args.frames, seed=args.seed)
    manifest = make_corpus(args.out_dir, spec)
    print(f"wrote {len(manifest)} videos + manifest.csv under {args.out_dir}")

    deep_path = os.path.join(args.out_dir, "deep.csv")
    write_surrogate_deep_csv(
        deep_path, ((r.video_id, read_y4m(r.path)) for r in manifest.rows))
    print(f"wrote surrogate deep features to {deep_path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
