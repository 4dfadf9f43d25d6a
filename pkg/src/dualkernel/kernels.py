"""Gram matrices: classical RBF, tiled quantum fidelity, and their convex mix.

Binary Gram file layout (little-endian)::

    offset  size  field
    0       4     magic  b"DKGM"
    4       4     version (uint32, currently 1)
    8       4     rows    (uint32)
    12      4     cols    (uint32)
    16      8*r*c row-major float64 values

Metadata (kind, hyperparameters, sample ids) lives in a JSON sidecar named
``<file>.json``.
"""
from __future__ import annotations

import json
import logging
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.distance import cdist

from . import _accel
from .circuit import FeatureMapConfig
from .errors import FormatError, InvalidInputError, TileError
from .tensornet import BACKENDS, block_states, kernel_entry

log = logging.getLogger(__name__)

GRAM_MAGIC = b"DKGM"
GRAM_VERSION = 1
_HEADER = struct.Struct("<4sIII")
KINDS = ("quantum", "classical", "mixed")
DEFAULT_TILE = 32


@dataclass
class KernelMatrix:
    values: np.ndarray
    kind: str
    meta: dict = field(default_factory=dict)
    row_ids: np.ndarray | None = None
    col_ids: np.ndarray | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise InvalidInputError("kernel values must be a matrix")
        if self.kind not in KINDS:
            raise InvalidInputError(f"kind must be one of {KINDS}, got {self.kind!r}")
        r, c = self.values.shape
        self.row_ids = np.arange(r) if self.row_ids is None else np.asarray(self.row_ids)
        self.col_ids = np.arange(c) if self.col_ids is None else np.asarray(self.col_ids)
        if self.row_ids.shape != (r,) or self.col_ids.shape != (c,):
            raise InvalidInputError("sample id lists do not match matrix shape")

    @property
    def shape(self):
        return self.values.shape

    @property
    def is_square(self):
        r, c = self.values.shape
        return r == c and np.array_equal(self.row_ids, self.col_ids)

    def sub(self, rows, cols=None) -> "KernelMatrix":
        """Sub-matrix by positional indices (``cols`` defaults to ``rows``)."""
        rows = np.asarray(rows)
        cols = rows if cols is None else np.asarray(cols)
        return KernelMatrix(self.values[np.ix_(rows, cols)], self.kind, dict(self.meta),
                            self.row_ids[rows], self.col_ids[cols])

    def invariant_errors(self, sym_tol=1e-10, diag_tol=1e-9, psd_tol=1e-8) -> list:
        """Violated train-Gram invariants, as messages (empty when all hold)."""
        errs = []
        v = self.values
        if not self.is_square:
            return ["not a square train Gram"]
        asym = np.abs(v - v.T).max(initial=0.0)
        if asym > sym_tol:
            errs.append(f"asymmetry {asym:.3g} > {sym_tol}")
        if self.kind in ("quantum", "classical"):
            dev = np.abs(np.diag(v) - 1.0).max(initial=0.0)
            if dev > diag_tol:
                errs.append(f"diagonal deviates from 1 by {dev:.3g}")
        if v.size and (v.min() < 0.0 or v.max() > 1.0):
            errs.append(f"entries outside [0, 1]: [{v.min():.3g}, {v.max():.3g}]")
        report = psd_check(self, psd_tol)
        if not report.passed:
            errs.append(f"min eigenvalue {report.min_eigenvalue:.3g} < -{report.tol:.3g}")
        return errs


def rbf_matrix(X, Y, gamma: float, row_ids=None, col_ids=None) -> KernelMatrix:
    """``exp(-gamma * |x - y|^2)`` between rows of ``X`` and ``Y`` (``Y=None`` means ``X``)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if Y is None:
        Y, col_ids = X, row_ids
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise InvalidInputError(f"column mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if not gamma > 0:
        raise InvalidInputError(f"gamma must be positive, got {gamma}")
    values = np.exp(-gamma * cdist(X, Y, "sqeuclidean"))
    return KernelMatrix(values, "classical", {"gamma": float(gamma)}, row_ids, col_ids)


def _tiles(rows, cols, size, upper_only):
    for r0 in range(0, rows, size):
        for c0 in range(0, cols, size):
            if upper_only and c0 + size <= r0:
                continue
            yield (r0, min(r0 + size, rows), c0, min(c0 + size, cols))


def quantum_matrix(X, Y=None, cfg: FeatureMapConfig | None = None, tile_size: int = DEFAULT_TILE,
                   workers: int = 1, backend: str = "blockwise", row_ids=None,
                   col_ids=None) -> KernelMatrix:
    """Fidelity-kernel Gram between the rows of ``X`` and ``Y``.

    The matrix is cut into ``tile_size`` square tiles scheduled on a pool of
    ``workers`` threads; tiles write disjoint regions.  With ``Y is None`` the
    Gram is symmetric and only tiles on or above the diagonal are computed.

    The ``blockwise`` backend contracts each sample's half of the
    compute-uncompute network once (its per-block states) and joins the halves
    per tile; ``statevector`` and ``greedy`` evaluate every entry's full
    overlap circuit through :func:`kernel_entry`.
    """
    if cfg is None:
        raise InvalidInputError("a FeatureMapConfig is required")
    if backend not in BACKENDS:
        raise InvalidInputError(f"unknown backend {backend!r}")
    if tile_size < 1 or workers < 1:
        raise InvalidInputError("tile_size and workers must be positive")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    symmetric = Y is None
    Y = X if symmetric else np.atleast_2d(np.asarray(Y, dtype=np.float64))
    for M in (X, Y):
        if M.shape[1] != cfg.n_qubits:
            raise InvalidInputError(f"data has {M.shape[1]} columns, feature map {cfg.n_qubits}")
    if symmetric:
        col_ids = row_ids

    if backend == "blockwise":
        SX = block_states(X, cfg)
        SY = SX if symmetric else block_states(Y, cfg)

        def work(tile):
            r0, r1, c0, c1 = tile
            return _accel.overlap_tile(SX[r0:r1], SY[c0:c1])
    else:
        def work(tile):
            r0, r1, c0, c1 = tile
            return np.array([[kernel_entry(X[i], Y[j], cfg, backend) for j in range(c0, c1)]
                             for i in range(r0, r1)])

    out = np.zeros((X.shape[0], Y.shape[0]))
    tiles = list(_tiles(X.shape[0], Y.shape[0], tile_size, symmetric))

    def run(tile):
        try:
            block = work(tile)
        except Exception as exc:
            raise TileError(tile, exc) from exc
        out[tile[0]:tile[1], tile[2]:tile[3]] = block

    if workers == 1:
        for tile in tiles:
            run(tile)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            for fut in [pool.submit(run, t) for t in tiles]:
                fut.result()
    np.clip(out, 0.0, 1.0, out=out)
    if symmetric:
        upper = np.triu(out)
        out = upper + np.triu(out, 1).T
    meta = {"feature_map": cfg.digest(), "backend": backend}
    return KernelMatrix(out, "quantum", meta, row_ids, col_ids)


def mix(Kq: KernelMatrix, Kc: KernelMatrix, alpha: float) -> KernelMatrix:
    """``alpha * Kq + (1 - alpha) * Kc``."""
    if not 0.0 <= alpha <= 1.0:
        raise InvalidInputError(f"alpha must lie in [0, 1], got {alpha}")
    if Kq.shape != Kc.shape:
        raise InvalidInputError(f"shape mismatch {Kq.shape} vs {Kc.shape}")
    if not (np.array_equal(Kq.row_ids, Kc.row_ids) and np.array_equal(Kq.col_ids, Kc.col_ids)):
        raise InvalidInputError("kernels index different samples")
    meta = {"alpha": float(alpha), "quantum": dict(Kq.meta), "classical": dict(Kc.meta)}
    values = alpha * Kq.values + (1.0 - alpha) * Kc.values
    return KernelMatrix(values, "mixed", meta, Kq.row_ids, Kq.col_ids)


@dataclass(frozen=True)
class PsdReport:
    min_eigenvalue: float
    tol: float
    passed: bool


def psd_check(K: KernelMatrix, tol: float | None = None) -> PsdReport:
    """Smallest eigenvalue versus ``-tol``.

    ``tol`` is relative: the threshold is ``tol * trace / m`` (default
    ``tol = 1e-8``), so the check does not depend on matrix size.
    """
    v = K.values
    if v.shape[0] != v.shape[1]:
        raise InvalidInputError("psd_check needs a square matrix")
    m = v.shape[0]
    scaled = (1e-8 if tol is None else tol) * np.trace(v) / max(m, 1)
    lam = float(np.linalg.eigvalsh(0.5 * (v + v.T))[0]) if m else 0.0
    return PsdReport(lam, float(scaled), lam >= -scaled)


@dataclass(frozen=True)
class KernelStats:
    offdiag_mean: float
    offdiag_var: float
    offdiag_min: float
    offdiag_max: float


def kernel_stats(K: KernelMatrix) -> KernelStats:
    """Statistics of the strict off-diagonal entries (concentration diagnostic)."""
    v = K.values
    if v.shape[0] != v.shape[1]:
        raise InvalidInputError("kernel_stats needs a square matrix")
    if v.shape[0] < 2:
        raise InvalidInputError("no off-diagonal entries in a 1x1 matrix")
    off = v[~np.eye(v.shape[0], dtype=bool)]
    return KernelStats(float(off.mean()), float(off.var()), float(off.min()), float(off.max()))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def save_gram(path, K: KernelMatrix) -> None:
    path = Path(path)
    r, c = K.shape
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(GRAM_MAGIC, GRAM_VERSION, r, c))
        fh.write(np.ascontiguousarray(K.values, dtype="<f8").tobytes())
    side = {
        "kind": K.kind,
        "meta": _jsonable(K.meta),
        "row_ids": K.row_ids.tolist(),
        "col_ids": K.col_ids.tolist(),
    }
    Path(str(path) + ".json").write_text(json.dumps(side, indent=1, sort_keys=True))


def read_gram_header(path) -> tuple:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
    if len(head) < _HEADER.size:
        raise FormatError(f"{path}: truncated header", offset=len(head))
    magic, version, rows, cols = _HEADER.unpack(head)
    if magic != GRAM_MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}", offset=0)
    if version != GRAM_VERSION:
        raise FormatError(f"{path}: unsupported version {version}", offset=4)
    return version, rows, cols


def load_gram(path) -> KernelMatrix:
    path = Path(path)
    _, rows, cols = read_gram_header(path)
    raw = path.read_bytes()[_HEADER.size:]
    if len(raw) != 8 * rows * cols:
        raise FormatError(f"{path}: expected {8 * rows * cols} payload bytes, found {len(raw)}",
                          offset=_HEADER.size + min(len(raw), 8 * rows * cols))
    values = np.frombuffer(raw, dtype="<f8").reshape(rows, cols).astype(np.float64)
    side_path = Path(str(path) + ".json")
    if side_path.exists():
        side = json.loads(side_path.read_text())
        return KernelMatrix(values, side["kind"], side["meta"], side["row_ids"], side["col_ids"])
    log.warning("%s has no metadata sidecar; assuming a classical kernel", path)
    return KernelMatrix(values, "classical")
