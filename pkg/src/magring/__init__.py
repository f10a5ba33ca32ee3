"""Sharp interpolation constants for magnetic Schrodinger operators on the circle."""

from .circle import DomainError, Grid, GridFunction, lp_norm
from .forms import ProblemParams, quotient_calQ, quotient_Q
from .shooting import (
    ConvergenceError,
    NoBranchError,
    ShootingResult,
    alpha_inverse,
    bifurcation_alpha,
    dirichlet_nu,
    mu,
    mu_curve,
    solve_branch,
)

__version__ = "0.1.0"
