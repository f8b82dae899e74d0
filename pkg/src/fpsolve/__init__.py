"""Exactly solvable 1D Fokker-Planck problems built from solvable quantum potentials.

Units throughout: hbar = m = 1 and diffusion constant D = 1/2, so the
Fokker-Planck operator is ``f''/2 + (f U')'`` and the steady density of a
drift potential ``U`` is ``exp(-2U)``.
"""

__version__ = "0.1.0"

from .catalog import (FAMILY_NAMES, Eigenstate, SolvableFamily, eigenpair, make_family,  # noqa: E402
                      node_locations)
from .fields import REAL_LINE, Interval, ScalarField  # noqa: E402
from .langevin import SamplerConfig, SampleStats, histogram_tv, simulate  # noqa: E402
from .oracle import (DiscreteProblem, EvolutionResult, build_grid, eigensolve_schrodinger,  # noqa: E402
                     evolve_fp, fit_decay_rate, fp_residual, quadrature)
from .solutions import (FPMode, SteadyState, evaluate_solution, mode, nodal_domains,  # noqa: E402
                        spectral_expand, steady_state)
from .susy import (DriftPotential, RiccatiReport, drift, drift_from_state,  # noqa: E402
                   factorization_check, quantum_potential, riccati_residual,
                   superpotential_of_state)

__all__ = [
    "FAMILY_NAMES", "Eigenstate", "SolvableFamily", "eigenpair", "make_family", "node_locations",
    "REAL_LINE", "Interval", "ScalarField",
    "SamplerConfig", "SampleStats", "histogram_tv", "simulate",
    "DiscreteProblem", "EvolutionResult", "build_grid", "eigensolve_schrodinger", "evolve_fp",
    "fit_decay_rate", "fp_residual", "quadrature",
    "FPMode", "SteadyState", "evaluate_solution", "mode", "nodal_domains", "spectral_expand",
    "steady_state",
    "DriftPotential", "RiccatiReport", "drift", "drift_from_state", "factorization_check",
    "quantum_potential", "riccati_residual", "superpotential_of_state",
]
