"""Acceptance suite: one test per shipped criterion, each pinned at a fixed
tolerance, printing one PASS line on success (run with -s to stream them).

The full-database protocol (100x 80/20 on 600 labeled videos) is exercised
structurally here on synthetic corpora; see the README for how to run it on
a real manifest.
"""

import json
import shutil
import subprocess
import time
from pathlib import Path

import numpy as np
import pytest

from gvqp.cli import main
from gvqp.deepfeat import read_deep_features
from gvqp.evaluation import EvalConfig, EvalDataset, fusion_ablation, run_splits
from gvqp.features import extract_frame_features, extract_nss
from gvqp.frameio import encode_png, read_manifest, read_y4m
from gvqp.ggd import fit_ggd
from gvqp.maps import (
    DFD_SHIFTS, displaced_frame_diffs, dog_kernel, gradient_magnitude,
    convolve_mirror,
)
from gvqp.metrics import lcc_rmse, pearson, srocc, wilcoxon_ranksum
from gvqp.mscn import gaussian_window, mscn
from gvqp.svr import SvrConfig, train_svr
from gvqp.synthetic import (
    CorpusSpec, distort_video, make_clean_video, make_corpus,
    surrogate_deep_vector, write_surrogate_deep_csv, _to_rgb_frames,
)
from gvqp.colorspace import srgb_to_colorframe
from oracles import (
    exact_ranksum_verdict, naive_convolve, naive_spearman, qp_dual_objective,
    sample_ggd,
)

REPO_ROOT = Path(__file__).resolve().parents[1]

STUDY_SVR = SvrConfig(C_grid=(2.0, 32.0, 512.0),
                      gamma_grid=(2.0**-7, 2.0**-3, 2.0), folds=5)


def _ok(name: str) -> None:
    print(f"ACCEPTANCE {name}: PASS", flush=True)


@pytest.fixture(scope="module")
def study(tmp_path_factory):
    """The synthetic study corpus: 60 videos, NSS + surrogate deep features."""
    root = tmp_path_factory.mktemp("study")
    spec = CorpusSpec(n_contents=10, n_levels=6, height=64, width=64,
                      n_frames=8, seed=0)
    manifest = make_corpus(root, spec)
    t0 = time.perf_counter()
    nss, deep = [], []
    for r in manifest.rows:
        frames = read_y4m(r.path)
        nss.append(extract_nss(frames))
        deep.append(surrogate_deep_vector(frames))
    extract_seconds = time.perf_counter() - t0
    dataset = EvalDataset(
        video_ids=[r.video_id for r in manifest.rows],
        mos=np.array([r.mos for r in manifest.rows]),
        nss=np.stack(nss),
        deep=np.stack(deep),
    )
    return dataset, extract_seconds


def test_feature_count_contract_and_runtime():
    frames = _to_rgb_frames(make_clean_video(17, 64, 64, 8))
    t0 = time.perf_counter()
    vec = extract_nss(frames)
    elapsed = time.perf_counter() - t0
    color = [srgb_to_colorframe(f) for f in frames[:2]]
    per_frame, present = extract_frame_features(color[0], color[1])
    assert per_frame.shape == (168,)
    assert present.all()
    assert per_frame[:84].shape == (84,)  # one scale block
    assert vec.shape == (168,)
    assert np.all(np.isfinite(vec))
    assert elapsed < 1.0, f"extraction took {elapsed:.2f}s"
    _ok(f"feature-count contract (84/scale, 168/video, {elapsed:.2f}s < 1s)")


def test_gaussianization_of_noise():
    alphas = []
    for seed in range(10):
        rng = np.random.Generator(np.random.PCG64(seed))
        plane = rng.normal(scale=0.1, size=(512, 512))  # pixel-scale amplitude
        alphas.append(fit_ggd(mscn(plane)).alpha)
    med = float(np.median(alphas))
    assert 1.8 <= med <= 2.3, f"median alpha {med}"
    _ok(f"gaussianization (median alpha {med:.3f} in [1.8, 2.3])")


def test_ggd_estimator_recovery():
    for alpha_true in (0.5, 1.0, 2.0, 4.0):
        for sigma_true in (0.5, 2.0):
            a_err, s_err = [], []
            for seed in range(20):
                rng = np.random.Generator(np.random.PCG64(seed))
                fit = fit_ggd(sample_ggd(rng, alpha_true, sigma_true, 10**5))
                a_err.append(abs(fit.alpha - alpha_true) / alpha_true)
                s_err.append(abs(fit.sigma - sigma_true) / sigma_true)
            assert np.median(a_err) < 0.05, (alpha_true, sigma_true)
            assert np.median(s_err) < 0.02, (alpha_true, sigma_true)
    _ok("ggd estimator recovery (alpha within 5%, sigma within 2%)")


def test_kernel_correctness():
    k = dog_kernel(1.16)
    assert abs(k.sum()) < 1e-10
    np.testing.assert_array_equal(k, k[::-1, ::-1])
    np.testing.assert_array_equal(k, k.T)
    ramp = np.tile(np.arange(16, dtype=np.float64), (16, 1))
    np.testing.assert_allclose(gradient_magnitude(ramp)[2:-2, 2:-2], 8.0, atol=1e-10)
    i, j = np.mgrid[0:16, 0:16]
    np.testing.assert_allclose(
        gradient_magnitude((i + j).astype(float))[2:-2, 2:-2],
        8.0 * np.sqrt(2.0), atol=1e-10)
    rng = np.random.Generator(np.random.PCG64(123))
    for kernel in (k, gaussian_window()):
        plane = rng.normal(size=(32, 32))
        np.testing.assert_allclose(convolve_mirror(plane, kernel),
                                   naive_convolve(plane, kernel), atol=1e-10)
    _ok("kernel correctness (DoG zero-sum/symmetric, Sobel ramps, conv oracle)")


def test_dfd_correctness():
    rng = np.random.Generator(np.random.PCG64(3))
    canvas = rng.normal(size=(40, 40))
    cur = canvas[1:-1, 1:-1]
    nxt = canvas[2:, 2:]  # scene translated by (1, 1)
    diffs = displaced_frame_diffs(cur, nxt)
    matching = np.max(np.abs(diffs[DFD_SHIFTS.index((1, 1))][2:-2, 2:-2]))
    opposite = np.max(np.abs(diffs[DFD_SHIFTS.index((-1, -1))][2:-2, 2:-2]))
    assert matching < 1e-9
    assert opposite >= 100 * max(matching, 1e-12)
    _ok(f"dfd correctness (matching {matching:.1e} < 1e-9, opposite {opposite:.1e})")


def test_svr_against_qp_oracle():
    rng = np.random.Generator(np.random.PCG64(42))
    for _ in range(20):
        n = int(rng.integers(2, 7))
        d = int(rng.integers(1, 4))
        X = rng.normal(size=(n, d))
        y = rng.normal(size=n) * 3
        C = float(rng.choice([1.0, 10.0]))
        gamma = float(rng.choice([0.5, 2.0]))
        eps = float(rng.choice([0.05, 0.2]))
        model = train_svr(X, y, C=C, gamma=gamma, epsilon=eps, tol=1e-8,
                          max_iter=200_000)
        oracle = qp_dual_objective(model.scaler.transform(X), y, C, gamma, eps)
        assert abs(model.stats["dual_objective"] - oracle) < 1e-6
    for seed in range(5):
        r = np.random.Generator(np.random.PCG64(seed))
        model = train_svr(r.normal(size=(20, 5)), r.normal(size=20) * 10,
                          C=8.0, gamma=0.25, epsilon=0.5)
        assert model.stats["kkt_violation"] < 1e-3
    _ok("svr correctness (dual matches QP oracle within 1e-6; KKT < 1e-3)")


def test_end_to_end_synthetic_study(study):
    dataset, extract_seconds = study
    t0 = time.perf_counter()
    report = run_splits(dataset, EvalConfig(
        iterations=10, seed=0, mode="nss", svr=STUDY_SVR))
    total = extract_seconds + (time.perf_counter() - t0)
    med = report.medians["srocc"]
    assert med >= 0.90, f"median SROCC {med}"
    assert total < 300.0, f"study took {total:.0f}s"
    _ok(f"end-to-end synthetic study (median SROCC {med:.3f} >= 0.90, {total:.0f}s < 5min)")


def test_metric_oracles():
    rng = np.random.Generator(np.random.PCG64(2024))
    for _ in range(100):
        n = int(rng.integers(3, 51))
        a = rng.normal(size=n)
        b = np.round(rng.normal(size=n), 1)
        assert abs(srocc(a, b) - naive_spearman(a, b)) < 1e-12
    for _ in range(20):
        n = int(rng.integers(4, 9))
        a = np.round(rng.normal(size=n), 1)
        b = np.round(rng.normal(loc=0.6, size=n), 1)
        assert wilcoxon_ranksum(a, b, min_samples=4) == exact_ranksum_verdict(a, b)
    checked = 0
    for seed in range(8):
        r = np.random.Generator(np.random.PCG64(seed))
        mos = r.uniform(20, 80, 35)
        pred = mos + r.normal(scale=12.0, size=35)
        fit = lcc_rmse(pred, mos)
        if fit.converged:
            checked += 1
            assert fit.lcc >= pearson(pred, mos) - 1e-9
    assert checked >= 6
    _ok("metric oracles (srocc 1e-12, wilcoxon exact n<=8, logistic >= raw - 1e-9)")


def test_fusion_ablation_table(study):
    dataset, _ = study
    table = fusion_ablation(
        dataset, EvalConfig(iterations=10, seed=0, svr=STUDY_SVR),
        modes=("nss", "single", "mean", "product"))
    assert set(table) == {"nss", "single", "mean", "product"}
    for medians in table.values():
        assert {"srocc", "lcc", "rmse"} <= set(medians)
    gap = abs(table["mean"]["srocc"] - table["product"]["srocc"])
    assert gap <= 0.03, f"mean/product srocc gap {gap}"
    _ok(f"fusion ablation (columns reproduced; |mean-product| srocc {gap:.4f} <= 0.03)")


@pytest.fixture(scope="module")
def chain_corpus(tmp_path_factory):
    root = tmp_path_factory.mktemp("chain")
    spec = CorpusSpec(n_contents=4, n_levels=3, height=32, width=32,
                      n_frames=4, seed=11)
    make_corpus(root / "videos", spec)
    videos = []
    for c in range(spec.n_contents):
        clean = make_clean_video((spec.seed, c), spec.height, spec.width, spec.n_frames)
        for level in range(spec.n_levels):
            videos.append((f"c{c:02d}_l{level}",
                           _to_rgb_frames(distort_video(clean, level, (spec.seed, c)))))
    write_surrogate_deep_csv(root / "deep.csv", videos, dim=64)
    return root


def _run_chain(corpus: Path, out: Path, threads: str) -> dict:
    out.mkdir()
    manifest = corpus / "videos" / "manifest.csv"
    assert main(["extract-nss", "--manifest", str(manifest), "--input", "x",
                 "--out", str(out / "nss.csv"), "--threads", threads]) == 0
    assert main(["train", "--manifest", str(manifest),
                 "--nss", str(out / "nss.csv"), "--deep", str(corpus / "deep.csv"),
                 "--deep-dim", "64", "--out-dir", str(out / "models"),
                 "--folds", "2", "--seed", "9", "--threads", threads]) == 0
    assert main(["predict", "--models", str(out / "models"),
                 "--nss", str(out / "nss.csv"), "--deep", str(corpus / "deep.csv"),
                 "--deep-dim", "64", "--out", str(out / "scores.csv")]) == 0
    assert main(["evaluate", "--manifest", str(manifest),
                 "--nss", str(out / "nss.csv"), "--deep", str(corpus / "deep.csv"),
                 "--deep-dim", "64", "--out-dir", str(out / "eval"),
                 "--iterations", "2", "--train-frac", "0.6", "--folds", "2",
                 "--seed", "9", "--kfold", "3", "--threads", threads]) == 0
    files = ["nss.csv", "models/svr1.json", "models/svr2.json",
             "models/train_log.json", "scores.csv", "eval/report.json",
             "eval/report.txt", "eval/scatter.csv"]
    return {f: (out / f).read_bytes() for f in files}


def test_pipeline_determinism(chain_corpus, tmp_path):
    a = _run_chain(chain_corpus, tmp_path / "a", threads="1")
    b = _run_chain(chain_corpus, tmp_path / "b", threads="1")
    c = _run_chain(chain_corpus, tmp_path / "c", threads="3")
    assert a == b, "same-seed reruns differ"
    assert a == c, "thread count changed outputs"
    _ok("determinism (extract->train->predict->evaluate byte-identical, 1 vs N threads)")


# ---------------------------------------------------------------------------
# Secondary component

DUMPER = REPO_ROOT / "cnn-dumper"


def test_secondary_dumper_contract(tmp_path):
    node = shutil.which("node")
    assert node, "node runtime required for the dumper acceptance check"
    entry = DUMPER / "dist" / "cli.js"
    assert entry.exists(), (
        "cnn-dumper is not built; run: npm --prefix cnn-dumper install "
        "&& npm --prefix cnn-dumper run build")
    frames_dir = tmp_path / "frames"
    frames_dir.mkdir()
    rng = np.random.Generator(np.random.PCG64(5))
    frame = rng.integers(0, 256, size=(48, 64, 3), dtype=np.uint8)
    for name in ("000.png", "001.png"):  # two identical frames
        (frames_dir / name).write_bytes(encode_png(frame))
    out_csv = tmp_path / "deep.csv"
    per_frame = tmp_path / "per_frame.csv"
    res = subprocess.run(
        [node, str(entry), "--input", str(frames_dir), "--out", str(out_csv),
         "--backbone", "densenet201", "--per-frame-out", str(per_frame)],
        capture_output=True, text=True, timeout=600)
    assert res.returncode == 0, res.stderr
    rows = read_deep_features(out_csv)  # validates 1920 columns + finiteness
    assert len(rows) == 1
    assert rows[0][1].shape == (1920,)
    lines = per_frame.read_text().splitlines()
    assert len(lines) == 3  # header + 2 frames
    assert lines[1].split(",", 1)[1] == lines[2].split(",", 1)[1], \
        "identical frames produced different per-frame vectors"
    _ok("secondary dumper (1920 columns, per-frame determinism, loads via reader)")
