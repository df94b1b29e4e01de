"""Planar symplectic random-matrix ensembles as Pfaffian point processes."""

from .errors import AccuracyError, DomainError
from .pfaffian import pfaffian
from .finite_kernels import (RadialPotential, ScalingWindow, correlation, density,
                             micro_scale, rescaled_correlation, rescaled_kernel,
                             skew_orthogonal_basis)
from .limit_kernels import (CrossoverKernel, EdgeFamilyKernel, MittagLefflerKernel,
                            TranslationInvariantKernel, limit_correlation)

__version__ = "0.1.0"

__all__ = [
    "AccuracyError", "DomainError", "pfaffian", "RadialPotential", "ScalingWindow",
    "correlation", "density", "micro_scale", "rescaled_correlation", "rescaled_kernel",
    "skew_orthogonal_basis", "CrossoverKernel", "EdgeFamilyKernel",
    "MittagLefflerKernel", "TranslationInvariantKernel", "limit_correlation",
]
