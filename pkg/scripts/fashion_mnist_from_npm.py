"""Convert the Fashion-MNIST pixels bundled in the ``fashion-mnist`` npm package to IDX.

The npm package stores each class as a JSON list of 784-pixel rows (0..255).
This script writes standard big-endian IDX files (gzipped) that
``dualkernel.pipeline.data.load_fashion_mnist`` reads.

    python scripts/fashion_mnist_from_npm.py --per-class 1000 --out data/fashion-mnist

Without ``--package`` the tarball is fetched with ``npm pack fashion-mnist``.
"""
import argparse
import gzip
import json
import pathlib
import subprocess
import tarfile
import tempfile

import numpy as np


def _fetch(workdir):
    subprocess.run(["npm", "pack", "fashion-mnist@1.1.0"], cwd=workdir, check=True,
                   stdout=subprocess.DEVNULL)
    tgz = next(pathlib.Path(workdir).glob("fashion-mnist-*.tgz"))
    with tarfile.open(tgz) as tf:
        tf.extractall(workdir)
    return pathlib.Path(workdir) / "package"


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--package", type=pathlib.Path, help="unpacked npm package directory")
    ap.add_argument("--per-class", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=pathlib.Path, default=pathlib.Path("data/fashion-mnist"))
    args = ap.parse_args()

    with tempfile.TemporaryDirectory() as tmp:
        pkg = args.package or _fetch(tmp)
        images, labels = [], []
        for k in range(10):
            rows = json.loads((pkg / "src" / "clothes" / f"{k}.json").read_text())["data"]
            rows = [r for r in rows if len(r) == 784][: args.per_class]
            images.append(np.asarray(rows, dtype=np.uint8))
            labels.append(np.full(len(rows), k, dtype=np.uint8))

    images = np.concatenate(images)
    labels = np.concatenate(labels)
    order = np.random.default_rng(args.seed).permutation(len(labels))
    images, labels = images[order], labels[order]

    args.out.mkdir(parents=True, exist_ok=True)
    count = len(labels)
    # mtime=0 keeps the gzip bytes reproducible
    with gzip.GzipFile(args.out / "train-images-idx3-ubyte.gz", "wb", mtime=0) as fh:
        fh.write(np.array([0x803, count, 28, 28], dtype=">u4").tobytes())
        fh.write(images.tobytes())
    with gzip.GzipFile(args.out / "train-labels-idx1-ubyte.gz", "wb", mtime=0) as fh:
        fh.write(np.array([0x801, count], dtype=">u4").tobytes())
        fh.write(labels.tobytes())
    print(f"wrote {count} images to {args.out}")


if __name__ == "__main__":
    main()
