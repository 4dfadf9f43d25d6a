"""IDX parsing, per-class subsampling, stratified splits and CV folds."""
from __future__ import annotations

import gzip
from pathlib import Path

import numpy as np

from ..errors import FormatError, InvalidInputError
from ..preprocess import Dataset, Stage

IMAGES_MAGIC = 0x00000803
LABELS_MAGIC = 0x00000801
_UBYTE = 0x08


def _open(path):
    path = Path(path)
    return gzip.open(path, "rb") if path.suffix == ".gz" else open(path, "rb")


def read_idx(path, expected_magic: int | None = None) -> np.ndarray:
    """Parse an unsigned-byte IDX file (optionally gzipped) into an array."""
    with _open(path) as fh:
        blob = fh.read()
    if len(blob) < 4:
        raise FormatError(f"{path}: file too short for an IDX magic number", offset=len(blob))
    magic = int.from_bytes(blob[:4], "big")
    if expected_magic is not None and magic != expected_magic:
        raise FormatError(f"{path}: magic 0x{magic:08x}, expected 0x{expected_magic:08x}", offset=0)
    if blob[0] or blob[1] or blob[2] != _UBYTE:
        raise FormatError(f"{path}: unsupported IDX type code in magic 0x{magic:08x}", offset=0)
    ndim = blob[3]
    head = 4 + 4 * ndim
    if len(blob) < head:
        raise FormatError(f"{path}: truncated dimension header", offset=len(blob))
    dims = tuple(int.from_bytes(blob[4 + 4 * k: 8 + 4 * k], "big") for k in range(ndim))
    expected = int(np.prod(dims, dtype=np.int64))
    payload = len(blob) - head
    if payload != expected:
        raise FormatError(f"{path}: header dims {dims} need {expected} bytes, found {payload}",
                          offset=head + min(payload, expected))
    return np.frombuffer(blob, dtype=np.uint8, offset=head).reshape(dims)


def write_idx(path, array) -> None:
    array = np.asarray(array, dtype=np.uint8)
    header = bytes([0, 0, _UBYTE, array.ndim]) + b"".join(
        int(d).to_bytes(4, "big") for d in array.shape)
    opener = gzip.open if str(path).endswith(".gz") else open
    with opener(path, "wb") as fh:
        fh.write(header + array.tobytes())


def _find(directory, stem):
    for name in (stem, stem + ".gz"):
        if (directory / name).exists():
            return directory / name
    raise FileNotFoundError(f"no {stem}[.gz] in {directory}")


def load_fashion_mnist(directory, kind: str = "train") -> Dataset:
    """Images flattened to 784 raw pixel values (0..255) with labels 0..9."""
    directory = Path(directory)
    prefix = "t10k" if kind == "test" else kind
    img_path = _find(directory, f"{prefix}-images-idx3-ubyte")
    lab_path = _find(directory, f"{prefix}-labels-idx1-ubyte")
    images = read_idx(img_path, IMAGES_MAGIC)
    labels = read_idx(lab_path, LABELS_MAGIC)
    if images.ndim != 3 or images.shape[1:] != (28, 28):
        raise FormatError(f"{img_path}: expected [count, 28, 28] dims, got {list(images.shape)}",
                          offset=8)
    if labels.shape[0] != images.shape[0]:
        raise FormatError(f"{lab_path}: {labels.shape[0]} labels for {images.shape[0]} images",
                          offset=4)
    if labels.size and labels.max() > 9:
        raise FormatError(f"{lab_path}: label {labels.max()} outside 0..9", offset=8)
    return Dataset(images.reshape(images.shape[0], -1).astype(np.float64),
                   labels.astype(np.int64), Stage.RAW)


def take_per_class(d: Dataset, classes, per_class: int, seed) -> Dataset:
    """Seeded draw of ``per_class`` samples of each listed class, in class order."""
    rng = np.random.default_rng(seed)
    picks = []
    for c in classes:
        pool = np.flatnonzero(d.labels == c)
        if pool.size < per_class:
            raise InvalidInputError(f"class {c} has {pool.size} samples, need {per_class}")
        picks.append(np.sort(rng.choice(pool, size=per_class, replace=False)))
    return d.subset(np.concatenate(picks))


def split(d: Dataset, ratio: float = 0.8, seed=0):
    """Stratified shuffle split; returns ``(train, test)``."""
    if not 0.0 < ratio < 1.0:
        raise InvalidInputError(f"split ratio must lie in (0, 1), got {ratio}")
    rng = np.random.default_rng(seed)
    train_idx, test_idx = [], []
    for c in np.unique(d.labels):
        idx = np.flatnonzero(d.labels == c)
        if idx.size < 2:
            raise InvalidInputError(f"class {c} has {idx.size} sample(s); need at least 2")
        idx = rng.permutation(idx)
        n_train = min(max(int(round(ratio * idx.size)), 1), idx.size - 1)
        train_idx.append(idx[:n_train])
        test_idx.append(idx[n_train:])
    return d.subset(np.sort(np.concatenate(train_idx))), d.subset(np.sort(np.concatenate(test_idx)))


def fold_assignment(labels, folds: int, seed=0) -> np.ndarray:
    """Fold id per sample: stratified, round-robin over a seeded shuffle of each class."""
    if folds < 2:
        raise InvalidInputError(f"need at least 2 folds, got {folds}")
    labels = np.asarray(labels)
    rng = np.random.default_rng(seed)
    out = np.empty(labels.size, dtype=np.int64)
    offset = 0
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        out[idx] = (np.arange(idx.size) + offset) % folds
        offset += idx.size
    return out
