"""Experiment configuration, read from JSON."""
from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields
from itertools import combinations
from pathlib import Path

import numpy as np

from ..circuit import FeatureMapConfig
from ..errors import InvalidInputError

DEFAULT_GRIDS = {
    "C": [0.1, 1.0, 10.0, 100.0],
    "gamma": [0.01, 0.1, "1/n", 1.0, 10.0],
    "alpha": [k / 9 for k in range(10)],
}

# fields that change how fast a run goes, not what it produces
_NON_SEMANTIC = ("workers", "output_dir")


@dataclass
class ExperimentConfig:
    data_path: str = "data/fashion-mnist"
    classes: list | None = None
    tasks: list | None = None
    n_tasks: int | None = None
    samples_per_class: int = 200
    seed: int = 0
    split_ratio: float = 0.8
    feature_dims: list = field(default_factory=lambda: [2, 4, 8, 16, 32, 64, 128, 256])
    alpha_n: int = 64
    multiclass_n: int = 64
    feature_map: dict = field(default_factory=dict)
    grids: dict = field(default_factory=lambda: {k: list(v) for k, v in DEFAULT_GRIDS.items()})
    cv_folds: int = 5
    svm_tol: float = 1e-3
    tile_size: int = 32
    workers: int = 1
    output_dir: str = "runs/default"

    def __post_init__(self):
        if not 0.0 < self.split_ratio < 1.0:
            raise InvalidInputError(f"split_ratio must lie in (0, 1), got {self.split_ratio}")
        dims = list(self.feature_dims) + [self.alpha_n, self.multiclass_n]
        if any(not 1 <= int(n) <= 784 for n in dims):
            raise InvalidInputError("every feature dimension must lie in [1, 784]")
        grids = {k: list(v) for k, v in DEFAULT_GRIDS.items()}
        grids.update(self.grids or {})
        for name in ("C", "gamma", "alpha"):
            if not grids[name]:
                raise InvalidInputError(f"grid {name!r} is empty")
        if any(not 0.0 <= a <= 1.0 for a in grids["alpha"]):
            raise InvalidInputError("alpha grid values must lie in [0, 1]")
        self.grids = grids
        if self.cv_folds < 2:
            raise InvalidInputError("cv_folds must be at least 2")
        if self.tasks is not None:
            self.tasks = [tuple(sorted(int(c) for c in t)) for t in self.tasks]
        self.feature_map_template(2)

    def feature_map_template(self, n_qubits: int) -> FeatureMapConfig:
        opts = {k: v for k, v in self.feature_map.items() if k != "n_qubits"}
        return FeatureMapConfig(n_qubits=n_qubits, **opts)

    def gamma_grid(self, n: int) -> list:
        """Gamma values with ``"1/n"`` resolved; duplicates dropped, sorted."""
        vals = {1.0 / n if g == "1/n" else float(g) for g in self.grids["gamma"]}
        return sorted(vals)

    def c_grid(self) -> list:
        return sorted({float(c) for c in self.grids["C"]})

    def alpha_grid(self) -> list:
        return sorted({float(a) for a in self.grids["alpha"]})

    def binary_tasks(self) -> list:
        """Class pairs for binary experiments.

        Explicit ``tasks`` win; otherwise all 45 pairs, or a seeded sample of
        ``n_tasks`` of them listed in sorted order.
        """
        if self.tasks is not None:
            return list(self.tasks)
        pairs = list(combinations(range(10), 2))
        if self.n_tasks is None or self.n_tasks >= len(pairs):
            return pairs
        rng = np.random.default_rng([self.seed, 45])
        pick = rng.choice(len(pairs), size=self.n_tasks, replace=False)
        return [pairs[k] for k in sorted(pick)]

    def multiclass_classes(self) -> list:
        return list(self.classes) if self.classes else list(range(10))

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        doc = {k: v for k, v in self.to_dict().items() if k not in _NON_SEMANTIC}
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]


def load_config(path=None, **overrides) -> ExperimentConfig:
    doc = json.loads(Path(path).read_text()) if path else {}
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**doc)
