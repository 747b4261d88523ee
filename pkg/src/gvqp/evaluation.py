"""The evaluation protocol: repeated random train/test splits with median
reporting, k-fold cross-validation scatter export, and model comparison.

Every random choice derives from PCG64 seeded with (seed, iteration), so a
report is reproducible byte-for-byte across runs, platforms, and worker
counts. Scalers and hyperparameter search only ever see the training side
of a split.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fusion import fuse
from .metrics import lcc_rmse, pearson, rankdata, srocc, wilcoxon_ranksum  # noqa: F401
from .svr import SvrConfig, fit_svr_pipeline, predict

EVAL_MODES = ("nss", "deep", "mean", "product", "single")


@dataclass
class EvalDataset:
    video_ids: list[str]
    mos: np.ndarray
    nss: np.ndarray | None = None
    deep: np.ndarray | None = None

    def __len__(self) -> int:
        return len(self.video_ids)

    @classmethod
    def from_join(cls, joined):
        ids = [r[0] for r in joined]
        nss = np.stack([r[1] for r in joined]) if joined[0][1] is not None else None
        deep = np.stack([r[2] for r in joined]) if joined[0][2] is not None else None
        mos = np.array([r[3] for r in joined], dtype=np.float64)
        return cls(video_ids=ids, mos=mos, nss=nss, deep=deep)


@dataclass(frozen=True)
class EvalConfig:
    train_frac: float = 0.8
    iterations: int = 100
    seed: int = 0
    mode: str = "mean"
    svr: SvrConfig = SvrConfig()
    threads: int = 1


def split_indices(n: int, train_frac: float, seed, iteration: int):
    """Deterministic shuffled train/test split for one protocol iteration."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, iteration))))
    order = rng.permutation(n)
    n_train = int(round(n * train_frac))
    if not 0 < n_train < n:
        raise ValueError(f"train fraction {train_frac} leaves an empty side for n={n}")
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def _feature_blocks(dataset: EvalDataset, mode: str):
    if mode in ("nss", "mean", "product"):
        if dataset.nss is None:
            raise ValueError(f"mode {mode!r} needs NSS features")
    if mode in ("deep", "mean", "product"):
        if dataset.deep is None:
            raise ValueError(f"mode {mode!r} needs deep features")
    if mode == "single" and (dataset.nss is None or dataset.deep is None):
        raise ValueError("single mode needs both feature sets")


def _train_and_predict(dataset: EvalDataset, train_idx, test_idx, mode: str,
                       svr_cfg: SvrConfig, seed):
    """Fit the mode's model(s) on the training rows, score the test rows."""
    _feature_blocks(dataset, mode)
    y_train = dataset.mos[train_idx]
    chosen = {}

    def fit_block(X):
        model, (C, gamma) = fit_svr_pipeline(X[train_idx], y_train, svr_cfg, seed=seed)
        return model, {"C": C, "gamma": gamma}

    if mode == "nss":
        model, chosen["nss"] = fit_block(dataset.nss)
        return np.atleast_1d(predict(model, dataset.nss[test_idx])), chosen
    if mode == "deep":
        model, chosen["deep"] = fit_block(dataset.deep)
        return np.atleast_1d(predict(model, dataset.deep[test_idx])), chosen
    if mode == "single":
        X = np.concatenate([dataset.nss, dataset.deep], axis=1)
        model, chosen["single"] = fit_block(X)
        return np.atleast_1d(predict(model, X[test_idx])), chosen
    m_nss, chosen["nss"] = fit_block(dataset.nss)
    m_deep, chosen["deep"] = fit_block(dataset.deep)
    p1 = np.atleast_1d(predict(m_nss, dataset.nss[test_idx]))
    p2 = np.atleast_1d(predict(m_deep, dataset.deep[test_idx]))
    fused = np.array([fuse(a, b, mode) for a, b in zip(p1, p2)])
    return fused, chosen


@dataclass
class SplitRow:
    iteration: int
    srocc: float
    lcc: float
    rmse: float
    chosen: dict
    logistic: tuple | None = None
    degenerate: bool = False


@dataclass
class EvalReport:
    mode: str
    seed: int
    train_frac: float
    iterations: int
    n_videos: int
    rows: list[SplitRow] = field(default_factory=list)
    medians: dict = field(default_factory=dict)
    compare: dict = field(default_factory=dict)

    def metric_samples(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=np.float64)


def run_splits(dataset: EvalDataset, config: EvalConfig) -> EvalReport:
    """The repeated-random-splits protocol with median reporting."""
    n = len(dataset)
    if n < 10:
        raise ValueError(f"dataset too small for split evaluation: {n} videos")
    n_test = n - int(round(n * config.train_frac))
    if n_test < 5:
        raise ValueError(
            f"test side would hold {n_test} videos; the logistic-mapped metrics"
            " need at least 5 (lower train_frac or add videos)")

    def one(iteration: int) -> SplitRow:
        train_idx, test_idx = split_indices(n, config.train_frac, config.seed, iteration)
        pred, chosen = _train_and_predict(
            dataset, train_idx, test_idx, config.mode, config.svr, (config.seed, iteration))
        mos_test = dataset.mos[test_idx]
        fit = lcc_rmse(pred, mos_test)
        return SplitRow(
            iteration=iteration,
            srocc=srocc(pred, mos_test),
            lcc=fit.lcc,
            rmse=fit.rmse,
            chosen=chosen,
            logistic=None if fit.params is None else (
                fit.params.beta1, fit.params.beta2, fit.params.beta3, fit.params.beta4),
            degenerate=fit.degenerate,
        )

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as pool:
            rows = list(pool.map(one, range(config.iterations)))
    else:
        rows = [one(i) for i in range(config.iterations)]
    report = EvalReport(
        mode=config.mode, seed=config.seed, train_frac=config.train_frac,
        iterations=config.iterations, n_videos=n, rows=rows,
    )
    for name in ("srocc", "lcc", "rmse"):
        report.medians[name] = float(np.median(report.metric_samples(name)))
    return report


def kfold_scatter(dataset: EvalDataset, k: int = 5, seed=0, mode: str = "mean",
                  svr_cfg: SvrConfig = SvrConfig()):
    """Every video predicted exactly once by a model not trained on it."""
    n = len(dataset)
    if k > n:
        raise ValueError(f"k={k} exceeds dataset size {n}")
    if k < 2:
        raise ValueError("need k >= 2")
    kfold_tag = 0x6B666F6C  # distinct stream from the split protocol
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence((seed, kfold_tag))))
    folds = np.array_split(rng.permutation(n), k)
    preds = np.empty(n, dtype=np.float64)
    for fold_no, test_idx in enumerate(folds):
        test_idx = np.sort(test_idx)
        train_idx = np.setdiff1d(np.arange(n), test_idx)
        pred, _ = _train_and_predict(dataset, train_idx, test_idx, mode, svr_cfg,
                                     (seed, kfold_tag, fold_no))
        preds[test_idx] = pred
    return [(dataset.video_ids[i], float(preds[i]), float(dataset.mos[i])) for i in range(n)]


def write_scatter_csv(path, rows) -> None:
    with open(path, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("video_id,pred,mos\n")
        for vid, pred, mos in rows:
            fh.write(f"{vid},{float(pred)!r},{float(mos)!r}\n")


def fusion_ablation(dataset: EvalDataset, config: EvalConfig,
                    modes=("nss", "single", "mean", "product")) -> dict:
    """Median metrics for each fusion variant on identical splits."""
    out = {}
    for mode in modes:
        report = run_splits(dataset, EvalConfig(
            train_frac=config.train_frac, iterations=config.iterations,
            seed=config.seed, mode=mode, svr=config.svr, threads=config.threads))
        out[mode] = dict(report.medians)
    return out


# ---------------------------------------------------------------------------
# Report serialization

def report_to_dict(report: EvalReport) -> dict:
    return {
        "mode": report.mode,
        "seed": report.seed,
        "train_frac": report.train_frac,
        "iterations": report.iterations,
        "n_videos": report.n_videos,
        "medians": report.medians,
        "compare": report.compare,
        "splits": [
            {
                "iteration": r.iteration,
                "srocc": r.srocc,
                "lcc": r.lcc,
                "rmse": r.rmse,
                "chosen": r.chosen,
                "logistic": r.logistic,
                "degenerate": r.degenerate,
            }
            for r in report.rows
        ],
    }


def report_to_json(report: EvalReport) -> str:
    return json.dumps(report_to_dict(report), indent=2, sort_keys=True) + "\n"


def report_to_text(report: EvalReport, extra_columns: dict | None = None) -> str:
    """Aligned metric table: one column per model, one row per metric."""
    columns = {report.mode: report.medians}
    if extra_columns:
        columns.update(extra_columns)
    names = list(columns)
    width = max(8, *(len(n) + 2 for n in names))
    lines = ["".ljust(7) + "".join(n.rjust(width) for n in names)]
    for metric in ("srocc", "lcc", "rmse"):
        cells = []
        for n in names:
            v = columns[n].get(metric)
            cells.append(("-" if v is None else f"{v:.4f}").rjust(width))
        lines.append(metric.upper().ljust(7) + "".join(cells))
    if report.compare:
        for other, verdict in sorted(report.compare.items()):
            lines.append(f"wilcoxon[srocc] vs {other}: {verdict:+d}")
    return "\n".join(lines) + "\n"
