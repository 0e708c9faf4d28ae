"""Greedy (Leja-type) energy points with external fields on discretized conductors."""
from .conductor import (CandidateSet, ball_grid, box_grid, interval_grid, load_points,
                        save_points, sphere_points)
from .equilibrium import (EquilibriumReference, discrete_equilibrium, essential_support,
                          jacobi_endpoints, jacobi_reference, radial_newtonian_reference,
                          refinement_ladder, riesz_interval_reference)
from .field import FieldKind, FieldSpec, field_eval, growth_admissible
from .kernel import Configuration, KernelSpec, energy, kernel_eval, weighted_energy
from .selector import (GreedyTrace, GuardExceeded, SelectionError, block_greedy_run,
                       block_objective, greedy_run, optimal_configuration)

__version__ = "0.1.0"
