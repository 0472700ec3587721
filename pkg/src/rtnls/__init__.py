"""Nonlinear Schroedinger field on a line with a delta impurity: classical series,
PDE oracle, reflection-transmission algebra, Fock representation and scattering."""
from .kernels import ModelParams, b_alpha, bulk_S, defect_TR, verify_kernel_identities

__version__ = "0.1.0"
__all__ = ["ModelParams", "bulk_S", "defect_TR", "b_alpha", "verify_kernel_identities"]
