import json
import subprocess
import sys

import numpy as np
import pytest

from dualkernel.cli import main
from dualkernel.kernels import load_gram

from conftest import ROOT

SMOKE = str(ROOT / "configs" / "smoke.json")


@pytest.fixture
def at_root(monkeypatch, data_dir):
    monkeypatch.chdir(ROOT)


def _run(capsys, *argv):
    assert main(list(argv)) == 0
    return capsys.readouterr().out


def test_preprocess_kernel_train_evaluate(at_root, tmp_path, capsys):
    prep, grams, model = tmp_path / "prep", tmp_path / "grams", tmp_path / "model"
    out = _run(capsys, "preprocess", "--config", SMOKE, "--output", str(prep),
               "--classes", "0", "1", "2", "--n", "4")
    assert "96 train / 24 test" in out
    assert json.loads((prep / "pipeline.json").read_text())["format"] == "dualkernel.preprocess"

    for kind in ("quantum", "classical", "mixed"):
        _run(capsys, "kernel", "--config", SMOKE, "--data", str(prep), "--kind", kind,
             "--test", "--output", str(grams))
    K = load_gram(grams / "mixed_train.gram")
    assert K.shape == (96, 96) and K.kind == "mixed" and K.invariant_errors() == []
    assert load_gram(grams / "quantum_test.gram").shape == (24, 96)

    out = _run(capsys, "kernel-info", str(grams / "quantum_train.gram"))
    assert "shape: 96 x 96" in out and "kind: quantum" in out and "offdiag_var" in out

    out = _run(capsys, "train", "--config", SMOKE, "--gram", str(grams / "quantum_train.gram"),
               "--data", str(prep), "--C", "10", "--output", str(model))
    assert out.startswith("3 pairwise models")

    out = _run(capsys, "evaluate", "--config", SMOKE, "--model", str(model / "model.json"),
               "--gram", str(grams / "quantum_test.gram"), "--data", str(prep),
               "--output", str(model))
    rep = json.loads(out)
    assert np.sum(rep["confusion"]) == 24 and 0.0 <= rep["accuracy"] <= 1.0


def test_evaluate_task_and_report(at_root, tmp_path, capsys):
    run = tmp_path / "eval"
    out = _run(capsys, "evaluate", "--config", SMOKE, "--classes", "2", "6", "--n", "4",
               "--output", str(run))
    assert [line.split()[0] for line in out.splitlines()] == ["classical", "quantum", "dual"]
    assert (run / "confusion" / "2-6_n4_dual.tsv").exists()
    again = tmp_path / "again"
    out = _run(capsys, "report", "--manifest", str(run / "manifest.json"), "--output", str(again))
    assert (again / "metrics.tsv").read_bytes() == (run / "metrics.tsv").read_bytes()


def test_sweeps(at_root, tmp_path, capsys):
    out = _run(capsys, "sweep-features", "--config", SMOKE, "--output", str(tmp_path / "f"))
    assert len(out.splitlines()) == 2 * 3
    rows = (tmp_path / "f" / "features.tsv").read_text().splitlines()
    assert rows[0] == "task\tn\tmodel\ttrain_acc\ttest_acc" and len(rows) == 1 + 2 * 2 * 3
    out = _run(capsys, "sweep-alpha", "--config", SMOKE, "--output", str(tmp_path / "a"),
               "--workers", "2")
    assert [line.split("\t")[0] for line in out.splitlines()] == ["0.000000", "0.500000", "1.000000"]
    for name in ("alpha.tsv", "alpha_mean.tsv", "alpha_best.tsv", "alpha_classical_baseline.tsv"):
        assert (tmp_path / "a" / name).exists()


def test_console_script_help():
    out = subprocess.run([sys.executable, "-m", "dualkernel.cli", "--help"], capture_output=True,
                         text=True, check=True).stdout
    for verb in ("preprocess", "kernel", "train", "evaluate", "sweep-features", "sweep-alpha",
                 "kernel-info", "report"):
        assert verb in out


def test_bad_config_exits(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"split_ratio": 2}')
    with pytest.raises(Exception):
        main(["sweep-alpha", "--config", str(bad)])
