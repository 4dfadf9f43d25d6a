"""Command-line entry point: ``dualkernel <verb> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import _accel
from .kernels import (
    kernel_stats, load_gram, mix, quantum_matrix, rbf_matrix, read_gram_header, save_gram,
)
from .pipeline import experiments as ex
from .pipeline.config import load_config
from .pipeline.report import RunManifest, emit_report, load_manifest
from .preprocess import Dataset, Stage, fit_pipeline, save_pipeline
from .svm import load_ensemble, metrics, predict_ovo, save_ensemble, train_ovo

log = logging.getLogger("dualkernel")


def _config(args):
    return load_config(args.config, seed=args.seed, workers=args.workers,
                       output_dir=args.output)


def _out(cfg) -> Path:
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _save_split(path, data: Dataset, n):
    np.savez(path, features=data.features, labels=data.labels, n=n)


def _load_split(path):
    z = np.load(path)
    return Dataset(z["features"], z["labels"], Stage.MINMAX)


def cmd_preprocess(args):
    cfg = _config(args)
    classes = args.classes or cfg.multiclass_classes()
    n = args.n or cfg.multiclass_n
    train, test = ex.task_data(cfg, classes, (len(classes), 99))
    pipe = fit_pipeline(train, n)
    out = _out(cfg)
    save_pipeline(out / "pipeline.json", pipe)
    _save_split(out / "train.npz", pipe(train), n)
    _save_split(out / "test.npz", pipe(test), n)
    print(f"{len(train)} train / {len(test)} test samples at n={n} -> {out}")


def _gram(kind, A, B, cfg, args):
    n = A.n_features
    fmap = cfg.feature_map_template(n)

    def quantum():
        return quantum_matrix(A.features, None if B is None else B.features, cfg=fmap,
                              tile_size=cfg.tile_size, workers=cfg.workers)

    def classical():
        other = A.features if B is None else B.features
        return rbf_matrix(A.features, other, args.gamma if args.gamma else 1.0 / n)

    if kind == "quantum":
        return quantum()
    if kind == "classical":
        return classical()
    return mix(quantum(), classical(), args.alpha)


def cmd_kernel(args):
    cfg = _config(args)
    data = Path(args.data)
    train = _load_split(data / "train.npz")
    out = _out(cfg)
    t0 = time.perf_counter()
    K = _gram(args.kind, train, None, cfg, args)
    save_gram(out / f"{args.kind}_train.gram", K)
    if args.test:
        test = _load_split(data / "test.npz")
        # rows are test samples, columns training samples
        save_gram(out / f"{args.kind}_test.gram", _gram(args.kind, test, train, cfg, args))
    print(f"{args.kind} Gram {K.shape[0]}x{K.shape[1]} in {time.perf_counter() - t0:.2f}s "
          f"-> {out}")


def cmd_train(args):
    cfg = _config(args)
    K = load_gram(args.gram)
    labels = _load_split(Path(args.data) / "train.npz").labels
    e = train_ovo(K, labels, args.C, cfg.svm_tol, cfg.workers)
    path = _out(cfg) / "model.json"
    save_ensemble(path, e)
    print(f"{len(e)} pairwise models -> {path}")


def _write_manifest(cfg, results, tables, out, t0):
    manifest = RunManifest(cfg.digest(), cfg.to_dict(), [r.to_dict() for r in results],
                           tables, {"total_seconds": time.perf_counter() - t0})
    for path in emit_report(manifest, out):
        log.info("wrote %s", path)


def cmd_evaluate(args):
    cfg = _config(args)
    out = _out(cfg)
    if args.model:
        e = load_ensemble(args.model)
        test = _load_split(Path(args.data) / "test.npz")
        pred = predict_ovo(e, load_gram(args.gram))
        pos = {c: k for k, c in enumerate(e.classes)}
        rep = metrics([pos[c] for c in test.labels], [pos[c] for c in pred], len(e.classes))
        print(json.dumps(rep.as_dict(), indent=1))
        return
    t0 = time.perf_counter()
    if args.classes and len(args.classes) == 2:
        pair = tuple(sorted(args.classes))
        train, test = ex.task_data(cfg, pair, pair)
        result = ex.run_dual_kernel_task(train, test, args.n or cfg.multiclass_n, cfg,
                                         task=ex.task_name(pair), seed_key=pair)
    else:
        if args.classes:
            cfg.classes = list(args.classes)
        result = ex.run_multiclass(cfg, args.n)
    _write_manifest(cfg, [result], {}, out, t0)
    for m in ex.MODELS:
        r = result.test[m]
        print(f"{m:10s} acc={r.accuracy:.4f} f1={r.f1_macro:.4f} recall={r.recall_macro:.4f} "
              f"specificity={r.specificity_macro:.4f}")


def cmd_sweep_features(args):
    cfg = _config(args)
    t0 = time.perf_counter()
    sweep = ex.sweep_features(cfg)
    tables = {
        "features.tsv": (("task", "n", "model", "train_acc", "test_acc"), sweep.rows()),
        "features_mean.tsv": (("n", "model", "train_acc", "test_acc"), sweep.mean_rows()),
    }
    _write_manifest(cfg, sweep.results, tables, _out(cfg), t0)
    for row in sweep.mean_rows():
        print("\t".join(_fmt(v) for v in row))


def cmd_sweep_alpha(args):
    cfg = _config(args)
    t0 = time.perf_counter()
    sweep = ex.sweep_alpha(cfg, args.n)
    base = [(t.task, float(t.classical_params["gamma"]), float(t.classical_params["C"]),
             t.classical_test_accuracy) for t in sweep.tasks]
    tables = {
        "alpha.tsv": (("task", "alpha", "C", "cv_acc", "test_acc"), sweep.rows()),
        "alpha_mean.tsv": (("alpha", "test_acc"), sweep.mean_rows()),
        "alpha_best.tsv": (("task", "best_alpha"), sweep.best_rows()),
        "alpha_classical_baseline.tsv": (("task", "gamma", "C", "test_acc"), base),
    }
    _write_manifest(cfg, [], tables, _out(cfg), t0)
    for row in sweep.mean_rows():
        print("\t".join(_fmt(v) for v in row))


def _fmt(v):
    return f"{v:.6f}" if isinstance(v, float) else str(v)


def cmd_kernel_info(args):
    version, rows, cols = read_gram_header(args.path)
    K = load_gram(args.path)
    print(f"file: {args.path}\nversion: {version}\nshape: {rows} x {cols}\nkind: {K.kind}")
    print(f"meta: {json.dumps(K.meta, sort_keys=True)}")
    if rows == cols and rows > 1:
        s = kernel_stats(K)
        print(f"offdiag_mean: {s.offdiag_mean:.6e}\noffdiag_var: {s.offdiag_var:.6e}\n"
              f"offdiag_min: {s.offdiag_min:.6e}\noffdiag_max: {s.offdiag_max:.6e}")


def cmd_report(args):
    manifest = load_manifest(args.manifest)
    out = Path(args.output) if args.output else Path(args.manifest).parent
    for path in emit_report(manifest, out):
        print(path)


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="experiment config (JSON)")
    common.add_argument("--seed", type=int)
    common.add_argument("--workers", type=int)
    common.add_argument("--output", help="output directory")
    common.add_argument("-v", "--verbose", action="store_true")

    ap = argparse.ArgumentParser(prog="dualkernel", description=__doc__)
    ap.add_argument("--version", action="version",
                    version=f"%(prog)s (compiled kernels: {_accel.COMPILED})")
    sub = ap.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("preprocess", parents=[common], help="fit and apply the feature pipeline")
    p.add_argument("--n", type=int, help="number of principal components / qubits")
    p.add_argument("--classes", type=int, nargs="+")
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("kernel", parents=[common], help="build a Gram from preprocessed data")
    p.add_argument("--data", required=True, help="directory written by 'preprocess'")
    p.add_argument("--kind", choices=("quantum", "classical", "mixed"), default="quantum")
    p.add_argument("--gamma", type=float, help="RBF gamma (default 1/n)")
    p.add_argument("--alpha", type=float, default=0.5, help="quantum weight for --kind mixed")
    p.add_argument("--test", action="store_true", help="also write the test-by-train Gram")
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("train", parents=[common], help="train one-vs-one SVMs on a Gram file")
    p.add_argument("--gram", required=True)
    p.add_argument("--data", required=True, help="directory holding train.npz labels")
    p.add_argument("--C", type=float, default=1.0)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", parents=[common],
                       help="run the dual-kernel task, or score a trained model")
    p.add_argument("--classes", type=int, nargs="+")
    p.add_argument("--n", type=int)
    p.add_argument("--model", help="model.json from 'train' (score mode)")
    p.add_argument("--gram", help="test-by-train Gram (score mode)")
    p.add_argument("--data", help="directory holding test.npz (score mode)")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("sweep-features", parents=[common], help="accuracy versus n")
    p.set_defaults(func=cmd_sweep_features)

    p = sub.add_parser("sweep-alpha", parents=[common], help="accuracy versus mixing weight")
    p.add_argument("--n", type=int)
    p.set_defaults(func=cmd_sweep_alpha)

    p = sub.add_parser("kernel-info", help="print a Gram file's header and statistics")
    p.add_argument("path")
    p.set_defaults(func=cmd_kernel_info)

    p = sub.add_parser("report", parents=[common], help="re-emit tables from a manifest")
    p.add_argument("--manifest", required=True)
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False) else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    args.func(args)
    return 0


if __name__ == "__main__":
    sys.exit(main())
