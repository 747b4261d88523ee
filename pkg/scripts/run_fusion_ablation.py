#!/usr/bin/env python3
"""Fusion ablation on the synthetic study: median metrics for the
statistics-only model, a single joint regressor, mean fusion, and product
fusion, on identical splits.

Usage:
    python scripts/run_fusion_ablation.py [--iterations 10] [--seed 0]
"""

import argparse
import os
import sys
import tempfile

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from gvqp.evaluation import EvalConfig, EvalDataset, fusion_ablation
from gvqp.features import extract_nss
from gvqp.frameio import read_y4m
from gvqp.svr import SvrConfig
from gvqp.synthetic import CorpusSpec, make_corpus, surrogate_deep_vector

REDUCED_GRID = SvrConfig(C_grid=(2.0, 32.0, 512.0),
                         gamma_grid=(2.0**-7, 2.0**-3, 2.0), folds=5)


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--iterations", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    workdir = tempfile.mkdtemp(prefix="gvqp-ablation-")
    manifest = make_corpus(workdir, CorpusSpec(seed=args.seed))
    nss, deep = [], []
    for r in manifest.rows:
        frames = read_y4m(r.path)
        nss.append(extract_nss(frames))
        deep.append(surrogate_deep_vector(frames))
    dataset = EvalDataset(
        video_ids=[r.video_id for r in manifest.rows],
        mos=np.array([r.mos for r in manifest.rows]),
        nss=np.stack(nss),
        deep=np.stack(deep),
    )
    table = fusion_ablation(
        dataset, EvalConfig(iterations=args.iterations, seed=args.seed, svr=REDUCED_GRID),
        modes=("nss", "single", "mean", "product"))

    names = ["nss", "single", "mean", "product"]
    print("       " + "".join(n.rjust(10) for n in names))
    for metric in ("srocc", "lcc", "rmse"):
        row = "".join(f"{table[n][metric]:10.4f}" for n in names)
        print(metric.upper().ljust(7) + row)
    return 0


if __name__ == "__main__":
    sys.exit(main())
