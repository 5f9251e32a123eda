"""Subelliptic heat kernels of the quaternionic Hopf fibration S^{4n+3} -> HP^n
and of CP^{2n+1} -> HP^n, evaluated through independent representations."""
from .asymptotics import (VarphiSolution, compute_An_Bn, h_asym_diagonal, h_asym_vertical,
                          p_asym_diagonal, p_asym_general, p_asym_horizontal, p_asym_vertical,
                          solve_varphi, subriemannian_distance)
from .core import KernelEval, ModelParams, Truncation
from .cp_kernel import cp_measure_constant, cp_measure_density, h_t_integral, h_t_intertwined, h_t_spectral
from .errors import (DomainError, GridTooCoarse, HopfHeatError, LinearSolveFailure, NoBracket,
                     NonConvergence, PoleSingularity, SeriesDivergenceGuard)
from .green import green_sphere, green_transform, green_transform_check
from .quadrature import QuadratureSpec
from .riemannian import q_t, q_t_small_time
from .sphere_kernel import (cyl_measure_density, intertwine_check, p_cr_t, p_t_integral,
                            p_t_spectral, sl2_semigroup_apply, sphere_volume)

__version__ = "0.1.0"
