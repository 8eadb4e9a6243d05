"""Independent reference solutions and benchmark case initializers."""

from .cases import (CaseSetup, canonical_case_init, isentropic_vortex_init,
                    riemann_setup, smoothed_riemann_init)
from .muscl import (energy_to_entropy, entropy_to_energy,
                    muscl_reference_step, muscl_run)
from .profiles import becker_shock_profile, shock_jump, stokes_first_problem
from .riemann import RiemannSolution, exact_riemann_euler

__all__ = [
    "CaseSetup",
    "RiemannSolution",
    "becker_shock_profile",
    "canonical_case_init",
    "energy_to_entropy",
    "entropy_to_energy",
    "exact_riemann_euler",
    "isentropic_vortex_init",
    "muscl_reference_step",
    "muscl_run",
    "riemann_setup",
    "shock_jump",
    "smoothed_riemann_init",
    "stokes_first_problem",
]
