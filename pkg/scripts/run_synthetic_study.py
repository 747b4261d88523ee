#!/usr/bin/env python3
"""End-to-end synthetic study: build the corpus, extract features, run the
repeated-splits protocol on the statistics-only model, print the report.

Usage:
    python scripts/run_synthetic_study.py [--workdir DIR] [--iterations 10]
        [--seed 0] [--full-grid]
"""

import argparse
import os
import sys
import tempfile
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gvqp.evaluation import EvalConfig, EvalDataset, report_to_text, run_splits
from gvqp.features import extract_nss
from gvqp.frameio import read_y4m
from gvqp.svr import SvrConfig
from gvqp.synthetic import CorpusSpec, make_corpus

REDUCED_GRID = SvrConfig(C_grid=(2.0, 32.0, 512.0),
                         gamma_grid=(2.0**-7, 2.0**-3, 2.0), folds=5)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--workdir", help="keep artifacts here instead of a temp dir")
    ap.add_argument("--iterations", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--full-grid", action="store_true",
                    help="use the full 6x6 hyperparameter grid (slower)")
    args = ap.parse_args()

    workdir = args.workdir or tempfile.mkdtemp(prefix="gvqp-study-")
    t0 = time.perf_counter()
    manifest = make_corpus(workdir, CorpusSpec(seed=args.seed))
    print(f"corpus: {len(manifest)} videos under {workdir}")

    nss = []
    for r in manifest.rows:
        nss.append(extract_nss(read_y4m(r.path)))
    print(f"extraction: {time.perf_counter() - t0:.1f}s")

    dataset = EvalDataset(
        video_ids=[r.video_id for r in manifest.rows],
        mos=np.array([r.mos for r in manifest.rows]),
        nss=np.stack(nss),
    )
    svr_cfg = SvrConfig() if args.full_grid else REDUCED_GRID
    report = run_splits(dataset, EvalConfig(
        iterations=args.iterations, seed=args.seed, mode="nss", svr=svr_cfg))
    print(report_to_text(report), end="")
    print(f"total: {time.perf_counter() - t0:.1f}s")
    return 0


if __name__ == "__main__":
    sys.exit(main())
