"""Exact all-zeros return amplitudes and fidelity kernel entries.

Three interchangeable backends:

``statevector``
    dense simulation of the whole register (oracle, n <= 24);
``blockwise``
    product of per-block amplitudes (requires block-local gates);
``greedy``
    greedy pairwise contraction of the gate tensor network.
"""
from __future__ import annotations

from ..circuit import FeatureMapConfig, compose_overlap
from ..errors import InvalidInputError
from .blockwise import amplitude_blockwise, block_states
from .gates import GateTensor, gate_matrix, gate_tensor
from .greedy import TensorGraph, amplitude_graph, amplitude_greedy
from .statevector import amplitude_statevector, circuit_unitary, simulate

BACKENDS = ("statevector", "blockwise", "greedy")


def amplitude(circuit, cfg: FeatureMapConfig, backend: str = "blockwise") -> complex:
    if backend == "statevector":
        return amplitude_statevector(circuit)
    if backend == "blockwise":
        return amplitude_blockwise(circuit, cfg)
    if backend == "greedy":
        return amplitude_greedy(amplitude_graph(circuit))
    raise InvalidInputError(f"unknown backend {backend!r}; choose from {BACKENDS}")


def kernel_entry(x_i, x_j, cfg: FeatureMapConfig, backend: str = "blockwise") -> float:
    """Fidelity kernel ``|<0|U(x_j)^dagger U(x_i)|0>|**2``, clamped to [0, 1]."""
    a = amplitude(compose_overlap(x_i, x_j, cfg), cfg, backend)
    return min(1.0, max(0.0, abs(a) ** 2))


__all__ = [
    "BACKENDS", "GateTensor", "TensorGraph", "amplitude", "amplitude_blockwise",
    "amplitude_graph", "amplitude_greedy", "amplitude_statevector", "block_states",
    "circuit_unitary", "gate_matrix", "gate_tensor", "kernel_entry", "simulate",
]
