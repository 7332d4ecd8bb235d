"""Contour-integral solvers for variable-order, distributed-order and multiterm
time-fractional diffusion, with numerical verification tools."""
from .contour import ContourConfig, ContourSpec, build_contour, contour_integrate, unit_check
from .elliptic import EigenBasis, SpatialProblem, assemble_operator, eigensolve, shifted_solve
from .grids import TimeGrid, Trajectory
from .kernels import DistributedOrder, KernelSpec, MultiTerm, VariableOrder
from .solvers import (SourceSpec, apply_S0, apply_S1, duhamel_solve, finite_time_solve,
                      spectral_solve_distributed)

__version__ = "0.1.0"
__all__ = [
    "ContourConfig", "ContourSpec", "DistributedOrder", "EigenBasis", "KernelSpec", "MultiTerm",
    "SourceSpec", "SpatialProblem", "TimeGrid", "Trajectory", "VariableOrder", "apply_S0",
    "apply_S1", "assemble_operator", "build_contour", "contour_integrate", "duhamel_solve",
    "eigensolve", "finite_time_solve", "shifted_solve", "spectral_solve_distributed",
    "unit_check",
]
