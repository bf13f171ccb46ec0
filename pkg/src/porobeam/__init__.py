"""Finite-element simulation of a porous-elastic beam with microtemperature.

The displacement ``u``, volume fraction ``phi`` and microtemperature ``w`` of
the second-spectrum-free model are advanced by a P1 / implicit Euler scheme
whose discrete energy provably decays; the package also evaluates the
multiplier (Lyapunov) functionals and runs manufactured-solution studies.
"""

from .energy import (DecayFit, EnergyBreakdown, discrete_energy, dissipation_check,
                     fit_decay_rate, lyapunov_values)
from .fem import FemMatrices, Mesh1D, assemble_matrices, build_mesh, interpolate_nodal, norms
from .model import LyapunovConstants, PhysicalParams, lyapunov_constants, reference_params, validate_params
from .timestepper import (Forcing, RunConfig, SolverState, Trajectory, advance,
                          assemble_step_system, init_history, run)

__version__ = "0.1.0"

__all__ = [
    "DecayFit", "EnergyBreakdown", "FemMatrices", "Forcing", "LyapunovConstants", "Mesh1D",
    "PhysicalParams", "RunConfig", "SolverState", "Trajectory", "advance", "assemble_matrices",
    "assemble_step_system", "build_mesh", "discrete_energy", "dissipation_check", "fit_decay_rate",
    "init_history", "interpolate_nodal", "lyapunov_constants", "lyapunov_values", "norms",
    "reference_params", "run", "validate_params",
]
