"""Feature pipeline: standardization -> PCA truncation -> min-max rescaling.

Conventions fixed here:

* standard deviations are population (divide-by-m) values, matching the
  covariance that PCA diagonalizes;
* zero-variance columns are flagged degenerate and always map to 0;
* each principal axis is signed so that its largest-magnitude entry is >= 0;
* values outside the fitted min/max range are clamped to [0, 1].
"""
from __future__ import annotations

import enum
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import FormatError, InvalidInputError

FORMAT_NAME = "dualkernel.preprocess"
FORMAT_VERSION = 1

_DEGENERATE_STD = 1e-12


class Stage(str, enum.Enum):
    RAW = "raw"
    STANDARDIZED = "standardized"
    PCA = "pca"
    MINMAX = "minmax"


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    stage: Stage = Stage.RAW

    def __post_init__(self):
        features = np.asarray(self.features, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if features.ndim != 2:
            raise InvalidInputError(f"features must be 2-D, got shape {features.shape}")
        if labels.shape != (features.shape[0],):
            raise InvalidInputError(
                f"{features.shape[0]} feature rows but {labels.shape[0]} labels")
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "stage", Stage(self.stage))

    def __len__(self):
        return self.features.shape[0]

    @property
    def n_features(self):
        return self.features.shape[1]

    def subset(self, index):
        index = np.asarray(index)
        return Dataset(self.features[index], self.labels[index], self.stage)


def _check_dims(data, expected, what):
    if data.n_features != expected:
        raise InvalidInputError(
            f"{what} was fit on {expected} features, data has {data.n_features}")


@dataclass(frozen=True)
class StandardScaler:
    means: np.ndarray
    stds: np.ndarray
    degenerate: np.ndarray

    def transform(self, data: Dataset) -> Dataset:
        _check_dims(data, self.means.shape[0], "StandardScaler")
        out = (data.features - self.means) / self.stds
        out[:, self.degenerate] = 0.0
        return Dataset(out, data.labels, Stage.STANDARDIZED)


@dataclass(frozen=True)
class PcaModel:
    components: np.ndarray
    explained_variance: np.ndarray
    mean: np.ndarray

    @property
    def n_components(self):
        return self.components.shape[0]

    def truncate(self, n_components: int) -> "PcaModel":
        """Keep the leading ``n_components`` axes (PCA axes are nested)."""
        if not 1 <= n_components <= self.n_components:
            raise InvalidInputError(
                f"cannot truncate {self.n_components} components to {n_components}")
        return PcaModel(self.components[:n_components],
                        self.explained_variance[:n_components], self.mean)

    def transform(self, data: Dataset) -> Dataset:
        _check_dims(data, self.components.shape[1], "PcaModel")
        return Dataset((data.features - self.mean) @ self.components.T, data.labels, Stage.PCA)

    def inverse_transform(self, scores: np.ndarray) -> np.ndarray:
        return np.asarray(scores) @ self.components + self.mean


@dataclass(frozen=True)
class MinMaxScaler:
    mins: np.ndarray
    ranges: np.ndarray

    def transform(self, data: Dataset) -> Dataset:
        _check_dims(data, self.mins.shape[0], "MinMaxScaler")
        safe = np.where(self.ranges > 0, self.ranges, 1.0)
        out = (data.features - self.mins) / safe
        out[:, self.ranges == 0] = 0.0
        np.clip(out, 0.0, 1.0, out=out)
        return Dataset(out, data.labels, Stage.MINMAX)


def _require_stage(data, stage):
    if data.stage != stage:
        raise InvalidInputError(f"expected a {stage.value} dataset, got {data.stage.value}")


def fit_standardize(train: Dataset) -> StandardScaler:
    _require_stage(train, Stage.RAW)
    if len(train) < 2:
        raise InvalidInputError(f"need at least 2 samples to standardize, got {len(train)}")
    means = train.features.mean(axis=0)
    stds = train.features.std(axis=0)
    degenerate = stds <= _DEGENERATE_STD * np.maximum(1.0, np.abs(means))
    stds = np.where(degenerate, 1.0, stds)
    return StandardScaler(means, stds, degenerate)


def fit_pca(train: Dataset, n_components: int) -> PcaModel:
    """Principal axes of the (population) covariance of ``train``.

    Axes are ordered by descending eigenvalue; explained variances are clipped
    at zero to hide round-off on rank-deficient data.
    """
    _require_stage(train, Stage.STANDARDIZED)
    dims = train.n_features
    if not 1 <= n_components <= dims:
        raise InvalidInputError(f"n_components must be in [1, {dims}], got {n_components}")
    mean = train.features.mean(axis=0)
    centered = train.features - mean
    cov = centered.T @ centered / len(train)
    evals, evecs = np.linalg.eigh(cov)
    order = np.argsort(-evals, kind="stable")[:n_components]
    components = evecs[:, order].T.copy()
    pivots = np.argmax(np.abs(components), axis=1)
    signs = np.where(components[np.arange(n_components), pivots] < 0, -1.0, 1.0)
    components *= signs[:, None]
    return PcaModel(components, np.clip(evals[order], 0.0, None), mean)


def fit_minmax(train: Dataset) -> MinMaxScaler:
    if len(train) == 0:
        raise InvalidInputError("cannot fit min-max scaling on an empty dataset")
    mins = train.features.min(axis=0)
    return MinMaxScaler(mins, train.features.max(axis=0) - mins)


@dataclass(frozen=True)
class Pipeline:
    """The three fitted stages, applied in order."""

    scaler: StandardScaler
    pca: PcaModel
    minmax: MinMaxScaler

    def __call__(self, data: Dataset) -> Dataset:
        return apply_pipeline(data, self.scaler, self.pca, self.minmax)


def apply_pipeline(data: Dataset, scaler: StandardScaler, pca: PcaModel,
                   mm: MinMaxScaler) -> Dataset:
    if pca.n_components != mm.mins.shape[0]:
        raise InvalidInputError(
            f"PCA keeps {pca.n_components} components but min-max scaler has {mm.mins.shape[0]}")
    return mm.transform(pca.transform(scaler.transform(data)))


def fit_pipeline(train: Dataset, n_components: int, pca: PcaModel | None = None) -> Pipeline:
    """Fit all three stages on ``train`` (a raw dataset).

    ``pca`` may be a previously fitted model with at least ``n_components``
    axes; it is truncated instead of refitting, which is how feature sweeps
    share one decomposition across qubit counts.
    """
    scaler = fit_standardize(train)
    standardized = scaler.transform(train)
    if pca is None:
        pca = fit_pca(standardized, n_components)
    else:
        pca = pca.truncate(n_components)
    mm = fit_minmax(pca.transform(standardized))
    return Pipeline(scaler, pca, mm)


def _arr(values):
    return np.asarray(values, dtype=np.float64)


def save_pipeline(path, pipe: Pipeline) -> None:
    """Write fitted stages as versioned JSON (floats round-trip exactly)."""
    doc = {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "standardize": {
            "means": pipe.scaler.means.tolist(),
            "stds": pipe.scaler.stds.tolist(),
            "degenerate": pipe.scaler.degenerate.tolist(),
        },
        "pca": {
            "n_components": pipe.pca.n_components,
            "components": pipe.pca.components.tolist(),
            "explained_variance": pipe.pca.explained_variance.tolist(),
            "mean": pipe.pca.mean.tolist(),
        },
        "minmax": {"mins": pipe.minmax.mins.tolist(), "ranges": pipe.minmax.ranges.tolist()},
    }
    Path(path).write_text(json.dumps(doc, indent=1))


def load_pipeline(path) -> Pipeline:
    doc = json.loads(Path(path).read_text())
    if doc.get("format") != FORMAT_NAME:
        raise FormatError(f"{path}: not a {FORMAT_NAME} file")
    if doc.get("version") != FORMAT_VERSION:
        raise FormatError(f"{path}: unsupported version {doc.get('version')}")
    st, pc, mm = doc["standardize"], doc["pca"], doc["minmax"]
    return Pipeline(
        StandardScaler(_arr(st["means"]), _arr(st["stds"]), np.asarray(st["degenerate"], bool)),
        PcaModel(_arr(pc["components"]).reshape(pc["n_components"], -1),
                 _arr(pc["explained_variance"]), _arr(pc["mean"])),
        MinMaxScaler(_arr(mm["mins"]), _arr(mm["ranges"])),
    )
