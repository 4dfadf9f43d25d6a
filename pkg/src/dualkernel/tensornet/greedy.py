"""Exact contraction of a circuit's amplitude network by greedy pairwise merging."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import count

import numpy as np

from ..circuit import Circuit
from ..errors import InvalidInputError
from .gates import gate_tensor

_KET0 = np.array([1.0, 0.0], dtype=np.complex128)


@dataclass
class TensorGraph:
    """Tensors plus the edge label of each of their legs.

    A label shared by two legs is an edge; a label that appears once is an
    open leg and must be listed in ``open_legs``.
    """

    tensors: list
    legs: list
    open_legs: tuple = ()
    dims: dict = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tensors) != len(self.legs):
            raise InvalidInputError("every tensor needs a leg list")
        seen = {}
        for t, legs in zip(self.tensors, self.legs):
            if np.ndim(t) != len(legs):
                raise InvalidInputError(f"tensor of rank {np.ndim(t)} has {len(legs)} legs")
            for lab, dim in zip(legs, np.shape(t)):
                seen[lab] = seen.get(lab, 0) + 1
                if self.dims.setdefault(lab, dim) != dim:
                    raise InvalidInputError(f"leg {lab} has inconsistent dimensions")
        for lab, n in seen.items():
            expected = 1 if lab in self.open_legs else 2
            if n != expected:
                raise InvalidInputError(f"leg {lab} bound {n} times, expected {expected}")


def amplitude_graph(c: Circuit) -> TensorGraph:
    """Network for <0..0| c |0..0>: kets, one tensor per gate, bras."""
    labels = count()
    wire = []
    tensors, legs = [], []
    for _ in range(c.n_qubits):
        lab = next(labels)
        wire.append(lab)
        tensors.append(_KET0)
        legs.append((lab,))
    for op in c.ops:
        ins = [wire[q] for q in op.qubits]
        outs = [next(labels) for _ in op.qubits]
        for q, lab in zip(op.qubits, outs):
            wire[q] = lab
        tensors.append(gate_tensor(op).tensor)
        legs.append(tuple(outs + ins))
    for q in range(c.n_qubits):
        tensors.append(_KET0.conj())
        legs.append((wire[q],))
    return TensorGraph(tensors, legs)


def _result_size(a, b, dims):
    return math.prod(dims[lab] for lab in set(a) ^ set(b))


def amplitude_greedy(g: TensorGraph, trace: list | None = None) -> complex:
    """Contract ``g`` to a scalar.

    Each step merges the connected pair whose result is smallest, ties going
    to the lowest ``(i, j)`` node indices; the merged tensor takes slot ``i``.
    Disconnected components reduce to scalars that are multiplied together.
    ``trace``, when given, receives one ``(i, j, result_size)`` per merge.
    """
    if g.open_legs:
        raise InvalidInputError("amplitude graphs must have no open legs")
    tensors = list(g.tensors)
    legs = [tuple(lg) for lg in g.legs]
    owners = {}
    for idx, lg in enumerate(legs):
        for lab in lg:
            owners.setdefault(lab, []).append(idx)

    while True:
        best = None
        for pair in owners.values():
            if len(pair) != 2:
                continue
            i, j = sorted(pair)
            key = (_result_size(legs[i], legs[j], g.dims), i, j)
            if best is None or key < best:
                best = key
        if best is None:
            break
        size, i, j = best
        shared = [lab for lab in legs[i] if lab in legs[j]]
        ax_i = [legs[i].index(lab) for lab in shared]
        ax_j = [legs[j].index(lab) for lab in shared]
        tensors[i] = np.tensordot(tensors[i], tensors[j], axes=(ax_i, ax_j))
        new_legs = tuple(lab for lab in legs[i] if lab not in shared) + tuple(
            lab for lab in legs[j] if lab not in shared)
        for lab in shared:
            del owners[lab]
        for lab in legs[j]:
            if lab in owners:
                owners[lab] = [i if o == j else o for o in owners[lab]]
        legs[i] = new_legs
        tensors[j] = None
        legs[j] = ()
        if trace is not None:
            trace.append((i, j, size))

    amp = 1.0 + 0.0j
    for t in tensors:
        if t is not None:
            amp *= complex(t)
    return amp


def format_trace(trace) -> str:
    return "".join(f"{i} {j} {size}\n" for i, j, size in trace)
