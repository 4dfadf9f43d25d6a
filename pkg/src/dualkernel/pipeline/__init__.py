"""End-to-end experiment orchestration."""
from .config import ExperimentConfig, load_config
from .data import fold_assignment, load_fashion_mnist, read_idx, split, take_per_class
from .experiments import (
    AlphaSweep, FeatureSweep, Selection, TaskResult, cv_select, run_dual_kernel_task,
    run_multiclass, sweep_alpha, sweep_features,
)
from .report import RunManifest, emit_report, load_manifest, verify_manifest

__all__ = [
    "AlphaSweep", "ExperimentConfig", "FeatureSweep", "RunManifest", "Selection", "TaskResult",
    "cv_select", "emit_report", "fold_assignment", "load_config", "load_fashion_mnist",
    "load_manifest", "read_idx", "run_dual_kernel_task", "run_multiclass", "split",
    "sweep_alpha", "sweep_features", "take_per_class", "verify_manifest",
]
