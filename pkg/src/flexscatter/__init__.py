"""Backscatter link simulation toolkit: rateless QC-LDPC coding, BP decoding
with feedback, Pareto-modeled Wi-Fi excitation, and predictive scheduling."""

from ._kernels import BACKEND as KERNEL_BACKEND

__version__ = "0.1.0"

__all__ = ["KERNEL_BACKEND", "__version__"]
