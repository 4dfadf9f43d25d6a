"""Dual-kernel experiment flow: preprocess, cross-validate, train, score.

Every kernel hyperparameter is chosen by stratified k-fold cross-validation on
the training split only; each candidate Gram is built once on the full
training split and sliced per fold.
"""
from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from ..kernels import KernelMatrix, kernel_stats, mix, quantum_matrix, rbf_matrix
from ..preprocess import Dataset, fit_pipeline
from ..svm import MetricsReport, metrics, predict_ovo, train_ovo
from .config import ExperimentConfig
from .data import fold_assignment, load_fashion_mnist, split, take_per_class

log = logging.getLogger(__name__)

MODELS = ("classical", "quantum", "dual")


@dataclass
class Selection:
    params: dict
    cv_accuracy: float
    scores: list = field(default_factory=list)


def _tie_key(params, acc):
    return (-round(acc, 12), params["C"], params.get("gamma", 0.0), params.get("alpha", 0.0))


def cv_accuracy(K, labels, fold_ids, C, tol=1e-3) -> float:
    """Mean validation accuracy of one-vs-one SVMs over the given folds."""
    values = K.values if isinstance(K, KernelMatrix) else np.asarray(K)
    labels = np.asarray(labels)
    accs = []
    for f in np.unique(fold_ids):
        tr = np.flatnonzero(fold_ids != f)
        va = np.flatnonzero(fold_ids == f)
        model = train_ovo(values[np.ix_(tr, tr)], labels[tr], C, tol)
        pred = predict_ovo(model, values[np.ix_(va, tr)])
        accs.append(float(np.mean(pred == labels[va])))
    return float(np.mean(accs))


def cv_select(build_kernel, labels, grid, folds: int = 5, seed=0, tol: float = 1e-3) -> Selection:
    """Best candidate by mean CV accuracy.

    ``grid`` is a list of dicts holding ``C`` plus keyword arguments for
    ``build_kernel``, which must return the training Gram for those kernel
    hyperparameters.  Ties go to smaller C, then smaller gamma, then smaller
    alpha.
    """
    if not grid:
        raise ValueError("empty hyperparameter grid")
    fold_ids = fold_assignment(labels, folds, seed)
    grams = {}
    scores = []
    for cand in grid:
        kparams = tuple(sorted((k, v) for k, v in cand.items() if k != "C"))
        if kparams not in grams:
            grams[kparams] = build_kernel(**dict(kparams))
        acc = cv_accuracy(grams[kparams], labels, fold_ids, cand["C"], tol)
        scores.append((dict(cand), acc))
    params, acc = min(scores, key=lambda s: _tie_key(*s))
    return Selection(params, acc, scores)


@lru_cache(maxsize=4)
def _load(path):
    return load_fashion_mnist(path)


def task_data(cfg: ExperimentConfig, classes, seed_key):
    """Per-class subsample of the configured data, split into (train, test)."""
    full = _load(str(cfg.data_path))
    data = take_per_class(full, classes, cfg.samples_per_class, [cfg.seed, *seed_key, 0])
    return split(data, cfg.split_ratio, [cfg.seed, *seed_key, 1])


@dataclass
class TaskResult:
    task: str
    n: int
    classes: list
    selections: dict
    train_accuracy: dict
    test: dict
    kernel_stats: dict
    n_models: int
    timings: dict

    def to_dict(self):
        return {
            "task": self.task,
            "n": self.n,
            "classes": self.classes,
            "selections": {k: {"params": s.params, "cv_accuracy": s.cv_accuracy}
                           for k, s in self.selections.items()},
            "train_accuracy": self.train_accuracy,
            "test": {k: r.as_dict() for k, r in self.test.items()},
            "kernel_stats": {k: vars(s) for k, s in self.kernel_stats.items()},
            "n_models": self.n_models,
            "timings": self.timings,
        }

    @classmethod
    def from_dict(cls, doc):
        from ..kernels import KernelStats
        return cls(
            doc["task"], doc["n"], doc["classes"],
            {k: Selection(v["params"], v["cv_accuracy"]) for k, v in doc["selections"].items()},
            doc["train_accuracy"],
            {k: MetricsReport(v["accuracy"], v["f1_macro"], v["recall_macro"],
                              v["specificity_macro"], np.asarray(v["confusion"]))
             for k, v in doc["test"].items()},
            {k: KernelStats(**v) for k, v in doc["kernel_stats"].items()},
            doc["n_models"], doc["timings"],
        )


@dataclass
class _Prepared:
    Xtr: np.ndarray
    Xte: np.ndarray
    ytr: np.ndarray
    yte: np.ndarray
    Kq: KernelMatrix
    classical: Selection
    fold_seed: list


def _prepare(train, test, n, cfg, pca, workers, seed_key, timings):
    t0 = time.perf_counter()
    pipe = fit_pipeline(train, n, pca)
    Xtr, Xte = pipe(train).features, pipe(test).features
    ytr, yte = train.labels, test.labels
    timings["preprocess"] = time.perf_counter() - t0
    fold_seed = [cfg.seed, *seed_key, 2]

    t0 = time.perf_counter()
    fmap = cfg.feature_map_template(n)
    Kq = quantum_matrix(Xtr, cfg=fmap, tile_size=cfg.tile_size, workers=workers)
    timings["quantum_gram"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    grid = [{"gamma": g, "C": c} for g in cfg.gamma_grid(n) for c in cfg.c_grid()]
    classical = cv_select(lambda gamma: rbf_matrix(Xtr, Xtr, gamma), ytr, grid,
                          cfg.cv_folds, fold_seed, cfg.svm_tol)
    timings["cv_classical"] = time.perf_counter() - t0
    return _Prepared(Xtr, Xte, ytr, yte, Kq, classical, fold_seed)


def _fit_score(K_train, K_test, p: _Prepared, C, classes, tol):
    model = train_ovo(K_train, p.ytr, C, tol)
    pos = {c: k for k, c in enumerate(classes)}
    to_pos = np.vectorize(pos.__getitem__, otypes=[np.int64])
    train_acc = float(np.mean(predict_ovo(model, K_train) == p.ytr))
    pred = predict_ovo(model, K_test)
    report = metrics(to_pos(p.yte), to_pos(pred), len(classes))
    return model, train_acc, report


def run_dual_kernel_task(train: Dataset, test: Dataset, n: int, cfg: ExperimentConfig,
                         pca=None, task: str = "", seed_key=(), workers: int | None = None
                         ) -> TaskResult:
    """Classical, quantum and dual-kernel SVMs on one train/test split at ``n`` features."""
    workers = cfg.workers if workers is None else workers
    timings = {}
    p = _prepare(train, test, n, cfg, pca, workers, seed_key, timings)
    classes = sorted(int(c) for c in np.unique(p.ytr))

    t0 = time.perf_counter()
    quantum = cv_select(lambda: p.Kq, p.ytr, [{"C": c} for c in cfg.c_grid()],
                        cfg.cv_folds, p.fold_seed, cfg.svm_tol)
    gamma = p.classical.params["gamma"]
    Kc = rbf_matrix(p.Xtr, p.Xtr, gamma)
    grid = [{"alpha": a, "C": c} for a in cfg.alpha_grid() for c in cfg.c_grid()]
    dual = cv_select(lambda alpha: mix(p.Kq, Kc, alpha), p.ytr, grid,
                     cfg.cv_folds, p.fold_seed, cfg.svm_tol)
    timings["cv_quantum_dual"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    fmap = cfg.feature_map_template(n)
    Kc_test = rbf_matrix(p.Xte, p.Xtr, gamma)
    Kq_test = quantum_matrix(p.Xte, p.Xtr, cfg=fmap, tile_size=cfg.tile_size, workers=workers)
    alpha = dual.params["alpha"]
    grams = {
        "classical": (Kc, Kc_test, p.classical.params["C"]),
        "quantum": (p.Kq, Kq_test, quantum.params["C"]),
        "dual": (mix(p.Kq, Kc, alpha), mix(Kq_test, Kc_test, alpha), dual.params["C"]),
    }
    train_acc, test_reports, n_models = {}, {}, 0
    for name, (K_tr, K_te, C) in grams.items():
        model, train_acc[name], test_reports[name] = _fit_score(K_tr, K_te, p, C, classes,
                                                                cfg.svm_tol)
        n_models = len(model)
    timings["final"] = time.perf_counter() - t0
    stats = {"quantum": kernel_stats(p.Kq), "classical": kernel_stats(Kc)}
    return TaskResult(task, n, classes, {"classical": p.classical, "quantum": quantum,
                                         "dual": dual},
                      train_acc, test_reports, stats, n_models, timings)


def task_name(classes) -> str:
    return "-".join(str(c) for c in classes)


def _map(fn, items, workers):
    if workers > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(fn, items))
    return [fn(it) for it in items]


def _inner_workers(cfg, n_items):
    return 1 if cfg.workers > 1 and n_items > 1 else cfg.workers


@dataclass
class FeatureSweep:
    results: list

    def rows(self):
        """``(task, n, model, train_acc, test_acc)`` for every run."""
        return [(r.task, r.n, m, r.train_accuracy[m], r.test[m].accuracy)
                for r in self.results for m in MODELS]

    def mean_rows(self):
        """``(n, model, mean_train_acc, mean_test_acc)`` averaged over tasks."""
        out = []
        for n in sorted({r.n for r in self.results}):
            at_n = [r for r in self.results if r.n == n]
            for m in MODELS:
                out.append((n, m, float(np.mean([r.train_accuracy[m] for r in at_n])),
                            float(np.mean([r.test[m].accuracy for r in at_n]))))
        return out


def sweep_features(cfg: ExperimentConfig, dims=None, tasks=None) -> FeatureSweep:
    dims = sorted(cfg.feature_dims if dims is None else dims)
    tasks = cfg.binary_tasks() if tasks is None else tasks
    inner = _inner_workers(cfg, len(tasks))

    def one(pair):
        train, test = task_data(cfg, pair, pair)
        pca = fit_pipeline(train, max(dims)).pca
        out = []
        for n in dims:
            try:
                out.append(run_dual_kernel_task(train, test, n, cfg, pca, task_name(pair),
                                                pair, inner))
            except Exception:
                log.exception("task %s at n=%d failed; sweep continues", task_name(pair), n)
        log.info("feature sweep: task %s done", task_name(pair))
        return out

    return FeatureSweep([r for rs in _map(one, tasks, cfg.workers) for r in rs])


@dataclass
class AlphaTask:
    task: str
    classical_test_accuracy: float
    classical_params: dict
    rows: list  # (alpha, C, cv_accuracy, test_accuracy)

    def best_alpha(self) -> float:
        """Alpha with the best test accuracy; ties -> higher CV accuracy -> smaller alpha."""
        return min(self.rows, key=lambda r: (-r[3], -round(r[2], 12), r[0]))[0]


@dataclass
class AlphaSweep:
    n: int
    tasks: list

    def rows(self):
        """``(task, alpha, C, cv_acc, test_acc)`` for every task and alpha."""
        return [(t.task, *row) for t in self.tasks for row in t.rows]

    def mean_rows(self):
        """``(alpha, mean_test_acc)``."""
        alphas = [row[0] for row in self.tasks[0].rows] if self.tasks else []
        return [(a, float(np.mean([t.rows[k][3] for t in self.tasks])))
                for k, a in enumerate(alphas)]

    def best_rows(self):
        return [(t.task, t.best_alpha()) for t in self.tasks]


def sweep_alpha(cfg: ExperimentConfig, n: int | None = None, tasks=None) -> AlphaSweep:
    """Test accuracy of the mixed kernel at each alpha, with C tuned per alpha by CV."""
    n = cfg.alpha_n if n is None else n
    tasks = cfg.binary_tasks() if tasks is None else tasks
    inner = _inner_workers(cfg, len(tasks))

    def one(pair):
        train, test = task_data(cfg, pair, pair)
        p = _prepare(train, test, n, cfg, None, inner, pair, {})
        classes = sorted(pair)
        gamma = p.classical.params["gamma"]
        Kc = rbf_matrix(p.Xtr, p.Xtr, gamma)
        Kc_test = rbf_matrix(p.Xte, p.Xtr, gamma)
        Kq_test = quantum_matrix(p.Xte, p.Xtr, cfg=cfg.feature_map_template(n),
                                 tile_size=cfg.tile_size, workers=inner)
        _, _, base = _fit_score(Kc, Kc_test, p, p.classical.params["C"], classes, cfg.svm_tol)
        rows = []
        for a in cfg.alpha_grid():
            K = mix(p.Kq, Kc, a)
            sel = cv_select(lambda: K, p.ytr, [{"C": c} for c in cfg.c_grid()],
                            cfg.cv_folds, p.fold_seed, cfg.svm_tol)
            _, _, rep = _fit_score(K, mix(Kq_test, Kc_test, a), p, sel.params["C"], classes,
                                   cfg.svm_tol)
            rows.append((a, sel.params["C"], sel.cv_accuracy, rep.accuracy))
        log.info("alpha sweep: task %s done", task_name(pair))
        return AlphaTask(task_name(pair), base.accuracy, dict(p.classical.params), rows)

    return AlphaSweep(n, _map(one, tasks, cfg.workers))


def run_multiclass(cfg: ExperimentConfig, n: int | None = None) -> TaskResult:
    """All configured classes at once (one-vs-one), default n = ``multiclass_n``."""
    n = cfg.multiclass_n if n is None else n
    classes = cfg.multiclass_classes()
    train, test = task_data(cfg, classes, (len(classes), 99))
    return run_dual_kernel_task(train, test, n, cfg, task=task_name(classes),
                                seed_key=(len(classes), 99))
