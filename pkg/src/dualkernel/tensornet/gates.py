"""Matrix and tensor realizations of the five supported gate kinds."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..circuit import GateOp

_SQRT_HALF = 1.0 / math.sqrt(2.0)
_H = np.array([[_SQRT_HALF, _SQRT_HALF], [_SQRT_HALF, -_SQRT_HALF]], dtype=np.complex128)
_CZ = np.diag([1.0, 1.0, 1.0, -1.0]).astype(np.complex128)
_CX = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=np.complex128)


def ry(theta: float) -> np.ndarray:
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    return np.array([[c, -s], [s, c]], dtype=np.complex128)


def rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])


def gate_matrix(g: GateOp) -> np.ndarray:
    """Square unitary of ``g``; two-qubit gates use (first qubit, second qubit) ordering."""
    if g.kind == "H":
        return _H
    if g.kind == "RY":
        return ry(g.angle)
    if g.kind == "RZ":
        return rz(g.angle)
    if g.kind == "CZ":
        return _CZ
    return _CX


@dataclass(frozen=True)
class GateTensor:
    """Gate as a tensor with output legs first: ``[out, in]`` or ``[out0, out1, in0, in1]``."""

    tensor: np.ndarray
    source: GateOp

    def matrix(self) -> np.ndarray:
        d = int(round(math.sqrt(self.tensor.size)))
        return self.tensor.reshape(d, d)


def gate_tensor(g: GateOp) -> GateTensor:
    m = gate_matrix(g)
    shape = (2, 2) if m.shape[0] == 2 else (2, 2, 2, 2)
    return GateTensor(m.reshape(shape), g)


def batched_rotation(kind: str, angles: np.ndarray) -> np.ndarray:
    """Stack of rotation matrices, shape ``(len(angles), 2, 2)``."""
    half = 0.5 * np.asarray(angles, dtype=np.float64)
    out = np.zeros(half.shape + (2, 2), dtype=np.complex128)
    if kind == "RY":
        c, s = np.cos(half), np.sin(half)
        out[..., 0, 0] = c
        out[..., 0, 1] = -s
        out[..., 1, 0] = s
        out[..., 1, 1] = c
    else:
        out[..., 0, 0] = np.exp(-1j * half)
        out[..., 1, 1] = np.exp(1j * half)
    return out
