"""Command-line surface: extract-nss, train, predict, evaluate, dump-maps,
dump-mscn-hist.

All randomness flows from --seed; outputs are byte-identical for a fixed
seed and inputs, regardless of --threads. A key=value --config file mirrors
every flag (flags given on the command line win); GVQP_THREADS is the
fallback thread count.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import deepfeat, evaluation, frameio, svr
from .colorspace import srgb_to_colorframe
from .features import (N_FEATURES, ScaleConfig, extract_nss, read_features, write_features)
from .fusion import FUSION_MODES, fuse
from .maps import build_mapset
from .mscn import mscn
from .synthetic import CorpusSpec, make_corpus

PROG = "gvqp"


def _default_threads() -> int:
    env = os.environ.get("GVQP_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _read_config_file(path) -> dict:
    """TOML-like key=value lines; '#' starts a comment."""
    out = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _iter_parsers(parser):
    yield parser
    for action in parser._actions:
        if isinstance(action, argparse._SubParsersAction):
            seen = set()
            for sp in action.choices.values():
                if id(sp) not in seen:
                    seen.add(id(sp))
                    yield sp


def _apply_config(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pull --config out of argv and fold its values into parser defaults.

    Config keys mirror flag names (dashes or underscores); values are coerced
    through each flag's declared type. Command-line flags still win.
    """
    if "--config" not in argv:
        return argv
    i = argv.index("--config")
    if i + 1 >= len(argv):
        parser.error("--config needs a file argument")
    values = _read_config_file(argv[i + 1])
    for key, raw in values.items():
        matched = False
        for p in _iter_parsers(parser):
            for action in p._actions:
                if action.dest != key:
                    continue
                matched = True
                if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
                    val = raw.lower() in ("1", "true", "yes", "on")
                elif action.type is not None:
                    val = action.type(raw)
                else:
                    val = raw
                p.set_defaults(**{key: val})
        if not matched:
            parser.error(f"unknown config key {key!r}")
    return argv[:i] + argv[i + 2 :]


def _discover_videos(path, manifest_path=None):
    """Yield (video_id, path) pairs for the extraction input."""
    if manifest_path:
        man = frameio.read_manifest(manifest_path)
        return [(r.video_id, r.path) for r in man.rows]
    if os.path.isfile(path):
        return [(os.path.splitext(os.path.basename(path))[0], path)]
    if os.path.isdir(path):
        names = sorted(os.listdir(path))
        y4ms = [n for n in names if n.lower().endswith(".y4m")]
        if y4ms:
            return [(os.path.splitext(n)[0], os.path.join(path, n)) for n in y4ms]
        if any(n.lower().endswith(".png") for n in names):
            return [(os.path.basename(os.path.normpath(path)), path)]
        raise FileNotFoundError(f"no .y4m files or PNG frames under {path}")
    raise FileNotFoundError(f"input path does not exist: {path}")


def cmd_extract_nss(args) -> int:
    cfg = ScaleConfig(n_scales=args.scales)
    videos = _discover_videos(args.input, args.manifest)
    rows = []
    failures = []
    for vid, vpath in videos:
        try:
            frames = frameio.read_video(vpath, matrix=args.matrix)
            vec = extract_nss(frames, stride=args.stride, cfg=cfg, threads=args.threads)
            rows.append((vid, vec))
            print(f"{vid}: {len(frames[:: args.stride])} frames processed", file=sys.stderr)
        except Exception as exc:
            failures.append((vid, str(exc)))
            print(f"{vid}: FAILED: {exc}", file=sys.stderr)
    write_features(args.out, rows, dim=args.scales * 84)
    if failures:
        print(f"{len(failures)} of {len(videos)} videos failed", file=sys.stderr)
        return 1
    return 0


def _svr_config(args) -> svr.SvrConfig:
    kw = {}
    if getattr(args, "epsilon", None) is not None:
        kw["epsilon"] = args.epsilon
    if getattr(args, "folds", None) is not None:
        kw["folds"] = args.folds
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    return svr.SvrConfig(**kw)


def cmd_train(args) -> int:
    manifest = frameio.read_manifest(args.manifest)
    nss_rows = read_features(args.nss)
    deep_rows = None
    if args.deep:
        deep_rows = deepfeat.read_deep_features(args.deep, dim=args.deep_dim)
    if not args.nss_only and deep_rows is None:
        raise SystemExit(
            f"{PROG} train: --deep is required unless --nss-only is given"
            f" (fusion mode {args.fusion!r} consumes both feature sets)")
    joined = deepfeat.join_features(manifest, nss_rows, deep_rows)
    y = np.array([r[3] for r in joined])
    X_nss = np.stack([r[1] for r in joined])
    cfg = _svr_config(args)
    os.makedirs(args.out_dir, exist_ok=True)
    log = {"seed": args.seed, "fusion": args.fusion, "nss_only": bool(args.nss_only),
           "videos": len(joined), "chosen": {},
           "grids": {"C": list(cfg.C_grid), "gamma": list(cfg.gamma_grid)}}

    if args.nss_only:
        model, chosen = svr.fit_svr_pipeline(X_nss, y, cfg, seed=(args.seed, 1))
        svr.save_model(os.path.join(args.out_dir, "svr1.json"), model)
        log["chosen"]["nss"] = {"C": chosen[0], "gamma": chosen[1]}
    elif args.fusion == "single":
        X_deep = np.stack([r[2] for r in joined])
        X = np.concatenate([X_nss, X_deep], axis=1)
        model, chosen = svr.fit_svr_pipeline(X, y, cfg, seed=(args.seed, 3))
        svr.save_model(os.path.join(args.out_dir, "svr_single.json"), model)
        log["chosen"]["single"] = {"C": chosen[0], "gamma": chosen[1]}
    else:
        X_deep = np.stack([r[2] for r in joined])
        m1, c1 = svr.fit_svr_pipeline(X_nss, y, cfg, seed=(args.seed, 1))
        m2, c2 = svr.fit_svr_pipeline(X_deep, y, cfg, seed=(args.seed, 2))
        svr.save_model(os.path.join(args.out_dir, "svr1.json"), m1)
        svr.save_model(os.path.join(args.out_dir, "svr2.json"), m2)
        log["chosen"]["nss"] = {"C": c1[0], "gamma": c1[1]}
        log["chosen"]["deep"] = {"C": c2[0], "gamma": c2[1]}
    with open(os.path.join(args.out_dir, "train_log.json"), "w", encoding="utf-8") as fh:
        json.dump(log, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_predict(args) -> int:
    log_path = os.path.join(args.models, "train_log.json")
    with open(log_path, encoding="utf-8") as fh:
        log = json.load(fh)
    mode = args.fusion or log["fusion"]
    nss_rows = read_features(args.nss)
    lines = ["video_id,score_nss,score_deep,score_fused"]
    if log.get("nss_only"):
        m1 = svr.load_model(os.path.join(args.models, "svr1.json"))
        for vid, vec in nss_rows:
            s = svr.predict(m1, vec)
            lines.append(f"{vid},{s!r},,{s!r}")
    elif mode == "single":
        model = svr.load_model(os.path.join(args.models, "svr_single.json"))
        deep_rows = dict(deepfeat.read_deep_features(args.deep, dim=args.deep_dim))
        for vid, vec in nss_rows:
            if vid not in deep_rows:
                raise SystemExit(f"{PROG} predict: no deep features for {vid!r}")
            s = svr.predict(model, np.concatenate([vec, deep_rows[vid]]))
            lines.append(f"{vid},{s!r},{s!r},{fuse(s, s, 'single')!r}")
    else:
        m1 = svr.load_model(os.path.join(args.models, "svr1.json"))
        m2 = svr.load_model(os.path.join(args.models, "svr2.json"))
        deep_rows = dict(deepfeat.read_deep_features(args.deep, dim=args.deep_dim))
        for vid, vec in nss_rows:
            if vid not in deep_rows:
                raise SystemExit(f"{PROG} predict: no deep features for {vid!r}")
            s1 = svr.predict(m1, vec)
            s2 = svr.predict(m2, deep_rows[vid])
            lines.append(f"{vid},{s1!r},{s2!r},{fuse(s1, s2, mode)!r}")
    with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
    return 0


def _load_eval_dataset(args) -> evaluation.EvalDataset:
    manifest = frameio.read_manifest(args.manifest)
    nss_rows = read_features(args.nss)
    deep_rows = deepfeat.read_deep_features(args.deep, dim=args.deep_dim) if args.deep else None
    joined = deepfeat.join_features(manifest, nss_rows, deep_rows)
    return evaluation.EvalDataset.from_join(joined)


def cmd_evaluate(args) -> int:
    dataset = _load_eval_dataset(args)
    mode = "nss" if args.nss_only else args.fusion
    cfg = evaluation.EvalConfig(
        train_frac=args.train_frac, iterations=args.iterations, seed=args.seed,
        mode=mode, svr=_svr_config(args), threads=args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    report = evaluation.run_splits(dataset, cfg)
    if args.compare:
        ours = report.metric_samples("srocc")
        theirs = _read_compare_csv(args.compare)
        report.compare[os.path.basename(args.compare)] = evaluation.wilcoxon_ranksum(
            ours, theirs)
    with open(os.path.join(args.out_dir, "report.json"), "w", encoding="utf-8") as fh:
        fh.write(evaluation.report_to_json(report))
    with open(os.path.join(args.out_dir, "report.txt"), "w", encoding="utf-8") as fh:
        fh.write(evaluation.report_to_text(report))
    if args.kfold:
        rows = evaluation.kfold_scatter(dataset, k=args.kfold, seed=args.seed,
                                        mode=mode, svr_cfg=cfg.svr)
        evaluation.write_scatter_csv(os.path.join(args.out_dir, "scatter.csv"), rows)
    print(evaluation.report_to_text(report), end="", file=sys.stderr)
    return 0


def _read_compare_csv(path) -> np.ndarray:
    """Per-split metric samples of another model: CSV with a srocc column."""
    import csv as _csv

    with open(path, newline="", encoding="utf-8") as fh:
        reader = _csv.DictReader(fh)
        if reader.fieldnames is None or "srocc" not in reader.fieldnames:
            raise SystemExit(f"{PROG} evaluate: {path} needs a 'srocc' column")
        vals = [float(rec["srocc"]) for rec in reader]
    return np.asarray(vals)


def cmd_dump_maps(args) -> int:
    frames = frameio.read_video(args.input, matrix=args.matrix)
    if args.frame >= len(frames):
        raise SystemExit(f"{PROG} dump-maps: frame {args.frame} out of range ({len(frames)})")
    cur = srgb_to_colorframe(frames[args.frame])
    nxt = (srgb_to_colorframe(frames[args.frame + 1])
           if args.frame + 1 < len(frames) else None)
    mapset = build_mapset(cur, nxt)
    os.makedirs(args.out_dir, exist_ok=True)
    sidecar = {"frame": args.frame, "partial": mapset.partial, "dtype": "float32",
               "order": "row-major", "endianness": "little", "maps": []}
    for label, plane in zip(mapset.labels, mapset.planes):
        fname = label.replace("(", "").replace(")", "").replace(",", "_") + ".f32"
        plane.astype("<f4").tofile(os.path.join(args.out_dir, fname))
        sidecar["maps"].append(
            {"label": label, "file": fname, "height": plane.shape[0], "width": plane.shape[1]})
    with open(os.path.join(args.out_dir, "maps.json"), "w", encoding="utf-8") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return 0


def cmd_dump_mscn_hist(args) -> int:
    frames = frameio.read_video(args.input, matrix=args.matrix)
    edges = np.linspace(-5.0, 5.0, 202)
    counts = np.zeros(201, dtype=np.int64)
    for f in frames[:: args.stride]:
        coeffs = mscn(srgb_to_colorframe(f).l_star)
        h, _ = np.histogram(coeffs.ravel(), bins=edges)
        counts += h
    centers = 0.5 * (edges[:-1] + edges[1:])
    total = max(int(counts.sum()), 1)
    with open(args.out, "w", newline="\n", encoding="utf-8") as fh:
        fh.write("bin_center,count,frequency\n")
        for c, n in zip(centers, counts):
            fh.write(f"{float(c)!r},{int(n)},{float(n / total)!r}\n")
    return 0


def cmd_make_synthetic(args) -> int:
    spec = CorpusSpec(n_contents=args.contents, n_levels=args.levels,
                      height=args.size, width=args.size,
                      n_frames=args.frames, seed=args.seed)
    manifest = make_corpus(args.out_dir, spec)
    print(f"wrote {len(manifest)} videos under {args.out_dir}", file=sys.stderr)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="No-reference gaming video quality prediction toolkit.")
    parser.add_argument("--config", help="key=value file mirroring any flag")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seeded=True):
        p.add_argument("--threads", type=int, default=_default_threads(),
                       help="worker threads (default: GVQP_THREADS or CPU count)")
        p.add_argument("--matrix", choices=["bt601", "bt709"], default="bt601",
                       help="YUV matrix for Y4M input without colorimetry metadata")
        if seeded:
            p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("extract-nss", help="extract per-video statistical features")
    p.add_argument("--input", required=True, help="a .y4m file, a directory of .y4m"
                   " files, or a directory of PNG frames (one video)")
    p.add_argument("--manifest", help="extract the videos listed in a manifest instead")
    p.add_argument("--out", required=True)
    p.add_argument("--stride", type=int, default=1)
    p.add_argument("--scales", type=int, default=2)
    common(p, seeded=False)
    p.set_defaults(fn=cmd_extract_nss)

    p = sub.add_parser("train", help="train the regressors from feature CSVs")
    p.add_argument("--manifest", required=True)
    p.add_argument("--nss", required=True)
    p.add_argument("--deep")
    p.add_argument("--deep-dim", type=int, default=deepfeat.DEEP_DIM_DEFAULT)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--fusion", choices=list(FUSION_MODES), default="mean")
    p.add_argument("--nss-only", action="store_true",
                   help="train only the statistical-feature model")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--folds", type=int)
    common(p)
    p.set_defaults(fn=cmd_train)

    p = sub.add_parser("predict", help="score videos from features and saved models")
    p.add_argument("--models", required=True, help="directory written by train")
    p.add_argument("--nss", required=True)
    p.add_argument("--deep")
    p.add_argument("--deep-dim", type=int, default=deepfeat.DEEP_DIM_DEFAULT)
    p.add_argument("--out", required=True)
    p.add_argument("--fusion", choices=list(FUSION_MODES))
    common(p, seeded=False)
    p.set_defaults(fn=cmd_predict)

    p = sub.add_parser("evaluate", help="run the split/k-fold evaluation protocol")
    p.add_argument("--manifest", required=True)
    p.add_argument("--nss", required=True)
    p.add_argument("--deep")
    p.add_argument("--deep-dim", type=int, default=deepfeat.DEEP_DIM_DEFAULT)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--iterations", type=int, default=100)
    p.add_argument("--train-frac", type=float, default=0.8)
    p.add_argument("--fusion", choices=list(FUSION_MODES), default="mean")
    p.add_argument("--nss-only", action="store_true")
    p.add_argument("--kfold", type=int)
    p.add_argument("--compare", help="CSV of another model's per-split srocc samples")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--folds", type=int)
    common(p)
    p.set_defaults(fn=cmd_evaluate)

    p = sub.add_parser("dump-maps", help="write the pre-processed maps of one frame")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--frame", type=int, default=0)
    common(p, seeded=False)
    p.set_defaults(fn=cmd_dump_maps)

    p = sub.add_parser("dump-mscn-hist",
                       help="201-bin histogram of lightness MSCN coefficients")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--stride", type=int, default=1)
    common(p, seeded=False)
    p.set_defaults(fn=cmd_dump_mscn_hist)

    p = sub.add_parser("make-synthetic", help="generate the synthetic study corpus")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--contents", type=int, default=10)
    p.add_argument("--levels", type=int, default=6)
    p.add_argument("--size", type=int, default=64)
    p.add_argument("--frames", type=int, default=8)
    common(p, seeded=True)
    p.set_defaults(fn=cmd_make_synthetic)

    return parser


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        argv = _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        parser.error(str(exc))
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (frameio.Y4mError, frameio.PngError, frameio.ManifestError, ValueError) as exc:
        print(f"{PROG} {args.command}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"{PROG} {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
