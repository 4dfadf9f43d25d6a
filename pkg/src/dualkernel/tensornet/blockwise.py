"""Block-factorized amplitudes for circuits whose gates never cross blocks.

For such circuits the all-zeros amplitude is the product of per-block
amplitudes, each a dense simulation over at most ``block_size`` qubits, so the
cost is linear in the number of blocks.
"""
from __future__ import annotations

import numpy as np

from ..circuit import Circuit, FeatureMapConfig, build_feature_map, check_block_locality
from ..errors import InvalidInputError, StructureViolationError
from .gates import batched_rotation, gate_matrix
from .statevector import amplitude_statevector


def _restrict(c: Circuit, qubits: range) -> Circuit:
    offset = qubits.start
    ops = [
        type(op)(op.kind, tuple(q - offset for q in op.qubits), op.angle)
        for op in c.ops
        if op.qubits[0] in qubits
    ]
    return Circuit(len(qubits), tuple(ops))


def amplitude_blockwise(c: Circuit, cfg: FeatureMapConfig) -> complex:
    if c.n_qubits != cfg.n_qubits:
        raise InvalidInputError(f"circuit has {c.n_qubits} qubits, config {cfg.n_qubits}")
    bad = check_block_locality(c, cfg.block_size)
    if bad is not None:
        raise StructureViolationError(f"gate {bad} crosses a block boundary of size {cfg.block_size}")
    amp = 1.0 + 0.0j
    for blk in cfg.blocks():
        amp *= amplitude_statevector(_restrict(c, blk))
    return amp


def _batched_states(angles: np.ndarray, cfg: FeatureMapConfig, width: int) -> np.ndarray:
    """States U_b(x)|0..0> for a batch of blocks of ``width`` qubits.

    ``angles`` has shape ``(batch, width)``; returns ``(batch, 2**width)``.
    """
    batch = angles.shape[0]
    template = build_feature_map(np.zeros(width), cfg.with_qubits(width))
    psi = np.zeros((batch,) + (2,) * width, dtype=np.complex128)
    psi[(slice(None),) + (0,) * width] = 1.0
    rotations = [batched_rotation(cfg.rotation_axis, angles[:, q]) for q in range(width)]
    for op in template.ops:
        qs = [q + 1 for q in op.qubits]
        if op.kind == cfg.rotation_axis and op.angle is not None:
            # per-sample matrix: contract its input leg with the qubit axis, batch-aligned
            mats = rotations[op.qubits[0]]
            psi = np.einsum("bij,bj...->bi...", mats, np.moveaxis(psi, qs[0], 1))
            psi = np.moveaxis(psi, 1, qs[0])
        else:
            m = gate_matrix(op)
            k = len(qs)
            t = m.reshape((2,) * (2 * k))
            psi = np.tensordot(t, psi, axes=(list(range(k, 2 * k)), qs))
            psi = np.moveaxis(psi, list(range(k)), qs)
    return psi.reshape(batch, -1)


def block_states(X, cfg: FeatureMapConfig) -> np.ndarray:
    """Per-sample, per-block feature states, shape ``(m, n_blocks, 2**block_size)``.

    A short trailing block is zero-padded; padding never contributes to inner
    products.  The fidelity amplitude between samples i and j is
    ``prod_b vdot(S[j, b], S[i, b])``.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != cfg.n_qubits:
        raise InvalidInputError(f"expected (m, {cfg.n_qubits}) features, got {X.shape}")
    m, n = X.shape
    b = cfg.block_size
    n_full = n // b
    blocks = cfg.blocks()
    out = np.zeros((m, len(blocks), 2 ** b), dtype=np.complex128)
    angles = cfg.angle_scale * X
    if n_full:
        full = angles[:, : n_full * b].reshape(m * n_full, b)
        out[:, :n_full, :] = _batched_states(full, cfg, b).reshape(m, n_full, 2 ** b)
    tail = n - n_full * b
    if tail:
        out[:, n_full, : 2 ** tail] = _batched_states(angles[:, n_full * b:], cfg, tail)
    return out
