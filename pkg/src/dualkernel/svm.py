"""Kernel SVM on precomputed Grams: SMO dual solver, decisions, one-vs-one voting."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import _accel
from .errors import FormatError, InvalidInputError
from .kernels import KernelMatrix

log = logging.getLogger(__name__)

FORMAT_NAME = "dualkernel.svm"
FORMAT_VERSION = 1


def _values(K):
    return K.values if isinstance(K, KernelMatrix) else np.asarray(K, dtype=np.float64)


@dataclass
class SvmModel:
    alphas: np.ndarray
    bias: float
    labels: np.ndarray
    C: float
    converged: bool = True
    n_iter: int = 0
    kernel_meta: dict = field(default_factory=dict)

    @property
    def support_indices(self) -> np.ndarray:
        return np.flatnonzero(self.alphas > 0)

    def coef(self) -> np.ndarray:
        return self.alphas * self.labels


def dual_objective(alphas, K, y) -> float:
    """``sum(a) - 0.5 * sum_ij a_i a_j y_i y_j K_ij`` (the quantity SMO maximizes)."""
    ay = np.asarray(alphas) * np.asarray(y)
    return float(np.sum(alphas) - 0.5 * ay @ _values(K) @ ay)


def _bias(alphas, grad, y, C):
    # r_i = y_i - sum_j a_j y_j K_ji, i.e. the bias that puts sample i on its margin
    r = -y * grad
    eps = 1e-12 * C
    free = (alphas > eps) & (alphas < C - eps)
    if free.any():
        return float(r[free].mean())
    at_zero = alphas <= eps
    lower = (at_zero & (y > 0)) | (~at_zero & (y < 0))
    lb = r[lower].max() if lower.any() else None
    ub = r[~lower].min() if (~lower).any() else None
    if lb is None:
        return float(ub)
    if ub is None:
        return float(lb)
    return float(0.5 * (lb + ub))


def solve_dual(K, y, C: float, tol: float = 1e-3, max_passes: int = 10000) -> SvmModel:
    """Solve the soft-margin dual by SMO with maximal-violating-pair selection.

    Stops once the largest KKT violation drops below ``tol``, or after
    ``max_passes * m`` pair updates (the model is then flagged
    ``converged=False``).  The bias is the mean margin offset over free
    support vectors, or the midpoint of the feasible interval when none is free.
    """
    values = _values(K)
    y = np.asarray(y, dtype=np.float64)
    m = y.shape[0]
    if values.shape != (m, m):
        raise InvalidInputError(f"Gram of shape {values.shape} for {m} labels")
    if not np.all(np.abs(y) == 1):
        raise InvalidInputError("labels must be +1/-1")
    if not C > 0:
        raise InvalidInputError(f"C must be positive, got {C}")
    alphas, grad, n_iter, converged = _accel.smo(values, y, float(C), float(tol),
                                                 int(max_passes) * max(m, 1))
    if not converged:
        log.warning("SMO stopped after %d updates without converging (m=%d, C=%g)",
                    n_iter, m, C)
    meta = dict(K.meta) if isinstance(K, KernelMatrix) else {}
    return SvmModel(alphas, _bias(alphas, grad, y, C), y, float(C), converged, n_iter, meta)


def decision(model: SvmModel, K_test_row) -> float | np.ndarray:
    """``f(x) = sum_i a_i y_i K(x_i, x) + b`` for one row or a matrix of rows."""
    row = _values(K_test_row) if isinstance(K_test_row, KernelMatrix) else np.asarray(
        K_test_row, dtype=np.float64)
    if row.shape[-1] != model.alphas.shape[0]:
        raise InvalidInputError(
            f"kernel row has {row.shape[-1]} entries, model has {model.alphas.shape[0]}")
    f = row @ model.coef() + model.bias
    return float(f) if np.ndim(f) == 0 else f


def predict_sign(f):
    """Sign with ``sign(0) = +1``."""
    return np.where(np.asarray(f) >= 0, 1, -1)


def kkt_violation(model: SvmModel, K, tol: float = 1e-3) -> float:
    """Largest violation of the margin conditions over the training set."""
    v = _values(K)
    margins = model.labels * (v @ model.coef() + model.bias)
    eps = 1e-12 * model.C
    at_zero = model.alphas <= eps
    at_c = model.alphas >= model.C - eps
    free = ~(at_zero | at_c)
    worst = 0.0
    if at_zero.any():
        worst = max(worst, float(np.max(1.0 - margins[at_zero])))
    if at_c.any():
        worst = max(worst, float(np.max(margins[at_c] - 1.0)))
    if free.any():
        worst = max(worst, float(np.max(np.abs(margins[free] - 1.0))))
    return worst


@dataclass
class OvoEnsemble:
    """One binary model per class pair ``(p, q)``, ``p < q``; ``p`` is the +1 side."""

    classes: tuple
    models: dict
    indices: dict

    def __len__(self):
        return len(self.models)


def train_ovo(K_full, labels, C: float, tol: float = 1e-3, workers: int = 1,
              max_passes: int = 10000) -> OvoEnsemble:
    values = _values(K_full)
    labels = np.asarray(labels)
    if values.shape != (labels.size, labels.size):
        raise InvalidInputError(f"Gram of shape {values.shape} for {labels.size} labels")
    classes = tuple(int(c) for c in np.unique(labels))
    if len(classes) < 2:
        raise InvalidInputError("need at least two classes")
    pairs = list(combinations(classes, 2))
    indices = {pq: np.flatnonzero((labels == pq[0]) | (labels == pq[1])) for pq in pairs}

    def fit(pq):
        idx = indices[pq]
        y = np.where(labels[idx] == pq[0], 1.0, -1.0)
        return solve_dual(values[np.ix_(idx, idx)], y, C, tol, max_passes)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            fitted = list(pool.map(fit, pairs))
    else:
        fitted = [fit(pq) for pq in pairs]
    return OvoEnsemble(classes, dict(zip(pairs, fitted)), indices)


def predict_ovo(e: OvoEnsemble, K_test_rows) -> np.ndarray:
    """Majority vote over pairwise models.

    ``K_test_rows`` is either the full test-by-train Gram or a mapping from
    class pair to that model's test rows.  Ties go to the class with the
    larger summed ``|f|`` over its winning votes, then to the lower class.
    """
    if isinstance(K_test_rows, dict):
        missing = [pq for pq in e.models if pq not in K_test_rows]
        if missing:
            raise InvalidInputError(f"no test rows for pairs {missing}")
        rows = {pq: np.atleast_2d(_values(K_test_rows[pq])) for pq in e.models}
    else:
        full = np.atleast_2d(_values(K_test_rows))
        rows = {pq: full[:, idx] for pq, idx in e.indices.items()}
    n_test = next(iter(rows.values())).shape[0]
    pos = {c: k for k, c in enumerate(e.classes)}
    votes = np.zeros((n_test, len(e.classes)), dtype=np.int64)
    strength = np.zeros((n_test, len(e.classes)))
    for (p, q), model in e.models.items():
        f = np.atleast_1d(decision(model, rows[(p, q)]))
        winner = np.where(f >= 0, pos[p], pos[q])
        np.add.at(votes, (np.arange(n_test), winner), 1)
        np.add.at(strength, (np.arange(n_test), winner), np.abs(f))
    out = np.empty(n_test, dtype=np.int64)
    for t in range(n_test):
        tied = np.flatnonzero(votes[t] == votes[t].max())
        best = tied[np.argmax(strength[t, tied])]  # argmax keeps the lowest index on ties
        out[t] = e.classes[best]
    return out


@dataclass
class MetricsReport:
    accuracy: float
    f1_macro: float
    recall_macro: float
    specificity_macro: float
    confusion: np.ndarray

    def as_dict(self):
        return {
            "accuracy": self.accuracy,
            "f1_macro": self.f1_macro,
            "recall_macro": self.recall_macro,
            "specificity_macro": self.specificity_macro,
            "confusion": self.confusion.tolist(),
        }


def metrics(y_true, y_pred, n_classes: int) -> MetricsReport:
    """Accuracy plus macro recall, F1 and specificity.

    Classes absent from ``y_true`` are left out of the recall and F1 means.
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise InvalidInputError("y_true and y_pred differ in length")
    if y_true.size == 0:
        raise InvalidInputError("no predictions to score")
    cm = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    total = cm.sum()
    tp = np.diag(cm).astype(np.float64)
    actual = cm.sum(axis=1).astype(np.float64)
    predicted = cm.sum(axis=0).astype(np.float64)
    present = actual > 0
    recall = np.divide(tp, actual, out=np.zeros(n_classes), where=present)
    precision = np.divide(tp, predicted, out=np.zeros(n_classes), where=predicted > 0)
    denom = precision + recall
    f1 = np.divide(2 * precision * recall, denom, out=np.zeros(n_classes), where=denom > 0)
    tn = total - actual - predicted + tp
    fp = predicted - tp
    has_neg = (tn + fp) > 0
    spec = np.divide(tn, tn + fp, out=np.zeros(n_classes), where=has_neg)
    return MetricsReport(
        accuracy=float(tp.sum() / total),
        f1_macro=float(f1[present].mean()),
        recall_macro=float(recall[present].mean()),
        specificity_macro=float(spec[has_neg].mean()) if has_neg.any() else 1.0,
        confusion=cm,
    )


def _model_doc(model: SvmModel):
    return {
        "alphas": model.alphas.tolist(),
        "bias": model.bias,
        "labels": model.labels.tolist(),
        "C": model.C,
        "converged": model.converged,
        "n_iter": model.n_iter,
        "kernel_meta": model.kernel_meta,
    }


def _model_from(doc):
    return SvmModel(np.asarray(doc["alphas"], float), float(doc["bias"]),
                    np.asarray(doc["labels"], float), float(doc["C"]), bool(doc["converged"]),
                    int(doc["n_iter"]), doc.get("kernel_meta", {}))


def save_ensemble(path, e: OvoEnsemble) -> None:
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "classes": list(e.classes),
        "models": [
            {"pair": list(pq), "indices": e.indices[pq].tolist(), **_model_doc(m)}
            for pq, m in e.models.items()
        ],
    }
    Path(path).write_text(json.dumps(doc, indent=1, default=str))


def load_ensemble(path) -> OvoEnsemble:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FORMAT_NAME or doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"{path}: not a version-{FORMAT_VERSION} {FORMAT_NAME} file")
    models, indices = {}, {}
    for entry in doc["models"]:
        pq = tuple(entry["pair"])
        models[pq] = _model_from(entry)
        indices[pq] = np.asarray(entry["indices"], dtype=np.int64)
    return OvoEnsemble(tuple(doc["classes"]), models, indices)
