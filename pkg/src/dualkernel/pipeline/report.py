"""Tab-separated result tables and the run manifest.

Tables contain only configuration-determined values (no timings), formatted
with fixed precision, so identical configs give byte-identical files.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

from .experiments import MODELS

MANIFEST_FORMAT = "dualkernel.manifest"
MANIFEST_VERSION = 1


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def write_table(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["\t".join(header)] + ["\t".join(_fmt(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    config_digest: str
    config: dict = field(default_factory=dict)
    tasks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    files: dict = field(default_factory=dict)

    def to_dict(self):
        return {
            "format": MANIFEST_FORMAT,
            "version": MANIFEST_VERSION,
            "config_digest": self.config_digest,
            "config": self.config,
            "tasks": self.tasks,
            "tables": {k: {"header": list(h), "rows": [list(r) for r in rs]}
                       for k, (h, rs) in self.tables.items()},
            "timings": self.timings,
            "files": self.files,
        }

    @classmethod
    def from_dict(cls, doc):
        if doc.get("format") != MANIFEST_FORMAT or doc.get("version") != MANIFEST_VERSION:
            raise ValueError("not a version-1 dualkernel manifest")
        tables = {k: (v["header"], [tuple(r) for r in v["rows"]])
                  for k, v in doc.get("tables", {}).items()}
        return cls(doc["config_digest"], doc.get("config", {}), doc.get("tasks", []), tables,
                   doc.get("timings", {}), doc.get("files", {}))


def _task_tables(tasks):
    metric_rows, hyper_rows, stats_rows = [], [], []
    for t in tasks:
        for m in MODELS:
            rep = t["test"][m]
            metric_rows.append((t["task"], t["n"], m, rep["accuracy"], rep["f1_macro"],
                                rep["recall_macro"], rep["specificity_macro"],
                                t["train_accuracy"][m]))
            sel = t["selections"][m]
            p = sel["params"]
            hyper_rows.append((t["task"], t["n"], m, float(p["C"]), _opt(p.get("gamma")),
                               _opt(p.get("alpha")), sel["cv_accuracy"]))
        for kind, s in sorted(t["kernel_stats"].items()):
            stats_rows.append((t["task"], t["n"], kind, f"{s['offdiag_mean']:.6e}",
                               f"{s['offdiag_var']:.6e}", f"{s['offdiag_min']:.6e}",
                               f"{s['offdiag_max']:.6e}"))
    return metric_rows, hyper_rows, stats_rows


def _opt(v):
    return "-" if v is None else float(v)


def emit_report(manifest: RunManifest, output_dir) -> list:
    """Write every table plus ``manifest.json``; returns the written paths."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if manifest.tasks:
        metric_rows, hyper_rows, stats_rows = _task_tables(manifest.tasks)
        written.append(write_table(out / "metrics.tsv", (
            "task", "n", "model", "accuracy", "f1_macro", "recall_macro", "specificity_macro",
            "train_accuracy"), metric_rows))
        written.append(write_table(out / "hyperparameters.tsv", (
            "task", "n", "model", "C", "gamma", "alpha", "cv_accuracy"), hyper_rows))
        written.append(write_table(out / "kernel_stats.tsv", (
            "task", "n", "kernel", "offdiag_mean", "offdiag_var", "offdiag_min",
            "offdiag_max"), stats_rows))
        for t in manifest.tasks:
            for m in MODELS:
                cm = t["test"][m]["confusion"]
                header = ["true\\pred"] + [str(c) for c in t["classes"]]
                rows = [(str(c), *row) for c, row in zip(t["classes"], cm)]
                written.append(write_table(
                    out / "confusion" / f"{t['task']}_n{t['n']}_{m}.tsv", header, rows))
    for name, (header, rows) in sorted(manifest.tables.items()):
        written.append(write_table(out / name, header, rows))
    manifest.files = {str(p.relative_to(out)): sha256_file(p) for p in written}
    (out / "manifest.json").write_text(json.dumps(manifest.to_dict(), indent=1, sort_keys=True))
    return written + [out / "manifest.json"]


def load_manifest(path) -> RunManifest:
    return RunManifest.from_dict(json.loads(Path(path).read_text()))


def verify_manifest(path) -> list:
    """Files listed in the manifest that are missing or whose digest differs."""
    path = Path(path)
    manifest = load_manifest(path)
    bad = []
    for rel, digest in manifest.files.items():
        f = path.parent / rel
        if not f.exists() or sha256_file(f) != digest:
            bad.append(rel)
    return bad
