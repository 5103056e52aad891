"""Fractional Laplacian on bounded domains: quadrature, closed forms, a 1-D solver,
Hölder norm estimators and an experiment harness."""

__version__ = "0.1.0"

from .closed_forms import ball_coefficient, ball_solution, halfspace_profile, kelvin_transform
from .functions import FunctionHandle, GridFunction
from .geometry import Domain
from .harness import EXPERIMENTS, ExperimentReport, run_experiment
from .operator import QuadratureSpec, bilinear_I, c_constant, frac_laplacian, product_rule_residual
from .solver import assemble, convergence_study, solve_dirichlet

__all__ = [
    "Domain",
    "EXPERIMENTS",
    "ExperimentReport",
    "FunctionHandle",
    "GridFunction",
    "QuadratureSpec",
    "assemble",
    "ball_coefficient",
    "ball_solution",
    "bilinear_I",
    "c_constant",
    "convergence_study",
    "frac_laplacian",
    "halfspace_profile",
    "kelvin_transform",
    "product_rule_residual",
    "run_experiment",
    "solve_dirichlet",
]
