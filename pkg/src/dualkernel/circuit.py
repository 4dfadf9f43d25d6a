"""Block-product-state feature-map circuits and their compute-uncompute overlap.

A feature map repeats ``depth`` times the layer

    H on every qubit
    rotation(angle_scale * x[k]) on qubit k
    entangler on each adjacent pair (q, q+1) inside a block

where blocks are consecutive runs of ``block_size`` qubits (the last block may
be shorter).  No gate ever touches two blocks.
"""
from __future__ import annotations

import hashlib
import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .errors import FormatError, InvalidInputError

SINGLE_QUBIT = ("H", "RY", "RZ")
TWO_QUBIT = ("CZ", "CX")
ROTATIONS = ("RY", "RZ")


@dataclass(frozen=True)
class GateOp:
    kind: str
    qubits: tuple
    angle: float | None = None

    def __post_init__(self):
        qubits = tuple(int(q) for q in self.qubits)
        object.__setattr__(self, "qubits", qubits)
        if self.kind in SINGLE_QUBIT:
            arity = 1
        elif self.kind in TWO_QUBIT:
            arity = 2
        else:
            raise InvalidInputError(f"unknown gate kind {self.kind!r}")
        if len(qubits) != arity or len(set(qubits)) != arity or min(qubits) < 0:
            raise InvalidInputError(f"bad qubits {qubits} for {self.kind}")
        if self.kind in ROTATIONS:
            if self.angle is None or not math.isfinite(self.angle):
                raise InvalidInputError(f"{self.kind} needs a finite angle, got {self.angle}")
            object.__setattr__(self, "angle", float(self.angle))
        elif self.angle is not None:
            raise InvalidInputError(f"{self.kind} takes no angle")

    def inverse(self) -> "GateOp":
        if self.kind in ROTATIONS:
            return GateOp(self.kind, self.qubits, -self.angle)
        return self

    def __str__(self):
        parts = [self.kind, *map(str, self.qubits)]
        if self.angle is not None:
            parts.append(repr(self.angle))
        return " ".join(parts)


@dataclass(frozen=True)
class Circuit:
    n_qubits: int
    ops: tuple = ()

    def __post_init__(self):
        if self.n_qubits < 1:
            raise InvalidInputError(f"n_qubits must be positive, got {self.n_qubits}")
        ops = tuple(self.ops)
        for op in ops:
            if max(op.qubits) >= self.n_qubits:
                raise InvalidInputError(f"{op} out of range for {self.n_qubits} qubits")
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return len(self.ops)

    def then(self, other: "Circuit") -> "Circuit":
        """Circuit applying ``self`` first, then ``other``."""
        if other.n_qubits != self.n_qubits:
            raise InvalidInputError("cannot compose circuits of different widths")
        return Circuit(self.n_qubits, self.ops + other.ops)

    def to_text(self) -> str:
        lines = [f"qubits {self.n_qubits}"]
        lines.extend(str(op) for op in self.ops)
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Circuit":
        lines = [ln.strip() for ln in text.splitlines()]
        lines = [ln for ln in lines if ln and not ln.startswith("#")]
        if not lines or not lines[0].startswith("qubits "):
            raise FormatError("circuit text must start with 'qubits <n>'")
        n = int(lines[0].split()[1])
        ops = []
        for lineno, line in enumerate(lines[1:], start=2):
            kind, *rest = line.split()
            try:
                if kind in ROTATIONS:
                    ops.append(GateOp(kind, tuple(rest[:-1]), float(rest[-1])))
                else:
                    ops.append(GateOp(kind, tuple(rest)))
            except (ValueError, IndexError) as exc:
                raise FormatError(f"line {lineno}: {line!r}: {exc}") from None
        return cls(n, tuple(ops))


@dataclass(frozen=True)
class FeatureMapConfig:
    n_qubits: int
    block_size: int = 2
    depth: int = 1
    angle_scale: float = math.pi
    rotation_axis: str = "RY"
    entangler: str = "CZ"

    def __post_init__(self):
        if self.n_qubits < 1 or self.block_size < 1 or self.depth < 1:
            raise InvalidInputError("n_qubits, block_size and depth must be positive")
        if self.rotation_axis not in ROTATIONS:
            raise InvalidInputError(f"rotation_axis must be one of {ROTATIONS}")
        if self.entangler not in TWO_QUBIT:
            raise InvalidInputError(f"entangler must be one of {TWO_QUBIT}")
        object.__setattr__(self, "angle_scale", float(self.angle_scale))

    def with_qubits(self, n_qubits: int) -> "FeatureMapConfig":
        return FeatureMapConfig(n_qubits, self.block_size, self.depth, self.angle_scale,
                                self.rotation_axis, self.entangler)

    def blocks(self) -> list:
        """Qubit ranges of each block, in order."""
        b = self.block_size
        return [range(s, min(s + b, self.n_qubits)) for s in range(0, self.n_qubits, b)]

    def block_of(self, qubit: int) -> int:
        return qubit // self.block_size

    def digest(self) -> str:
        blob = json.dumps(asdict(self), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _check_features(x, cfg):
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cfg.n_qubits,):
        raise InvalidInputError(
            f"feature vector of length {x.size} does not match {cfg.n_qubits} qubits")
    return x


def build_feature_map(x, cfg: FeatureMapConfig) -> Circuit:
    x = _check_features(x, cfg)
    n = cfg.n_qubits
    pairs = [(q, q + 1) for blk in cfg.blocks() for q in list(blk)[:-1]]
    layer = [GateOp("H", (q,)) for q in range(n)]
    layer += [GateOp(cfg.rotation_axis, (q,), cfg.angle_scale * x[q]) for q in range(n)]
    layer += [GateOp(cfg.entangler, pair) for pair in pairs]
    return Circuit(n, tuple(layer) * cfg.depth)


def adjoint(c: Circuit) -> Circuit:
    return Circuit(c.n_qubits, tuple(op.inverse() for op in reversed(c.ops)))


def compose_overlap(x_i, x_j, cfg: FeatureMapConfig) -> Circuit:
    """The compute-uncompute circuit: U(x_i) followed by U(x_j)^dagger."""
    return build_feature_map(x_i, cfg).then(adjoint(build_feature_map(x_j, cfg)))


def check_block_locality(c: Circuit, block_size: int):
    """Return the first entangling gate that crosses a block boundary, or None."""
    for op in c.ops:
        if len(op.qubits) == 2 and op.qubits[0] // block_size != op.qubits[1] // block_size:
            return op
    return None
