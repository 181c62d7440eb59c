"""Sharp spectral-gap lower bounds from one-dimensional model operators."""

from .gapbound import Method, SpectralResult, hat_lambda, lichnerowicz, miss_function, remark_bound
from .models import CurvatureDimension, OneSidedModel, SymmetricModel, d_max

__all__ = [
    "CurvatureDimension",
    "Method",
    "OneSidedModel",
    "SpectralResult",
    "SymmetricModel",
    "d_max",
    "hat_lambda",
    "lichnerowicz",
    "miss_function",
    "remark_bound",
]
