"""Optimal interpolation formulas in W2^(m,m-1)(0,1) on equally spaced nodes."""

from .direct_system import CoefficientVector, norm_squared, solve_direct
from .discrete_operator import OperatorData, build_operator, d_m
from .explicit_coeffs import BoundaryTail, boundary_systems, coeffs_general, coeffs_m1, coeffs_m2_corollary, optimal_coefficients
from .grid import GridSpec
from .interpolator import ErrorReport, SampleSet, coefficients, error_sweep, interpolate, norm_m1
from .kernel import delta_powers, euler_frobenius, green_kernel

__version__ = "0.1.0"

__all__ = [
    "BoundaryTail",
    "CoefficientVector",
    "ErrorReport",
    "GridSpec",
    "OperatorData",
    "SampleSet",
    "boundary_systems",
    "build_operator",
    "coefficients",
    "coeffs_general",
    "coeffs_m1",
    "coeffs_m2_corollary",
    "d_m",
    "delta_powers",
    "error_sweep",
    "euler_frobenius",
    "green_kernel",
    "interpolate",
    "norm_m1",
    "norm_squared",
    "optimal_coefficients",
    "solve_direct",
]
