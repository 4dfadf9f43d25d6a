"""Exact tensor-network fidelity kernels and a quantum-classical dual-kernel SVM."""
__version__ = "0.1.0"
