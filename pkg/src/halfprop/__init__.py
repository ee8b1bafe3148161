"""Propagators for the half-line heat and Schrodinger equations with an
inverse-square plus harmonic potential ``V(x) = k/x^2 + w^2 x^2``."""

from ._accel import backend
from .kernels import (
    CausticError,
    Convention,
    KernelKind,
    KernelSpec,
    KernelValue,
    NonConvergence,
    PotentialParams,
    StencilError,
    evaluate,
    heat_kernel,
    normalization_constant,
    pde_residual,
    schrodinger_kernel,
)

__version__ = "0.1.0"

__all__ = [
    "CausticError",
    "Convention",
    "KernelKind",
    "KernelSpec",
    "KernelValue",
    "NonConvergence",
    "PotentialParams",
    "StencilError",
    "backend",
    "evaluate",
    "heat_kernel",
    "normalization_constant",
    "pde_residual",
    "schrodinger_kernel",
]
