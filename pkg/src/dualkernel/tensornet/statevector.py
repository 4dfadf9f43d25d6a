"""Dense statevector simulation; the small-n oracle for the other backends."""
from __future__ import annotations

import numpy as np

from ..circuit import Circuit
from ..errors import CapacityError
from .gates import gate_tensor

MAX_QUBITS = 24


def apply_gate(state: np.ndarray, op) -> np.ndarray:
    """Apply ``op`` to a state of shape ``(2,) * n`` (qubit k is axis k)."""
    t = gate_tensor(op).tensor
    qs = list(op.qubits)
    k = len(qs)
    out = np.tensordot(t, state, axes=(list(range(k, 2 * k)), qs))
    return np.moveaxis(out, list(range(k)), qs)


def simulate(c: Circuit, state: np.ndarray | None = None) -> np.ndarray:
    """Final state of ``c`` applied to ``state`` (default all-zeros), flattened."""
    n = c.n_qubits
    if n > MAX_QUBITS:
        raise CapacityError(f"statevector limited to {MAX_QUBITS} qubits, circuit has {n}")
    if state is None:
        psi = np.zeros((2,) * n, dtype=np.complex128)
        psi[(0,) * n] = 1.0
    else:
        psi = np.asarray(state, dtype=np.complex128).reshape((2,) * n)
    for op in c.ops:
        psi = apply_gate(psi, op)
    return psi.reshape(-1)


def amplitude_statevector(c: Circuit) -> complex:
    return complex(simulate(c)[0])


def circuit_unitary(c: Circuit) -> np.ndarray:
    """Full ``2**n x 2**n`` matrix of ``c`` (for small n only)."""
    dim = 2 ** c.n_qubits
    cols = [simulate(c, np.eye(dim, dtype=np.complex128)[k]) for k in range(dim)]
    return np.stack(cols, axis=1)
