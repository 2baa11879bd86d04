"""Nystrom solver for a mixed Laplace problem with two small, moderately close holes,
together with the coefficients of its asymptotic expansion."""

__version__ = "0.1.0"

from .config import ProblemConfig, config_from_dict, default_config, load_config
from .geometry import Curve, make_circle, make_ellipse, make_trig_curve, validate_configuration
from .mixed import Placement, evaluate_mixed_solution, solve_mixed
from .representation import EtaSpec, build_field, eval_epsilon_regime, solve_field
from .rescaled import assemble_lambda, solve_densities, solve_limit_quadruple

__all__ = [
    "Curve",
    "EtaSpec",
    "Placement",
    "ProblemConfig",
    "assemble_lambda",
    "build_field",
    "config_from_dict",
    "default_config",
    "eval_epsilon_regime",
    "evaluate_mixed_solution",
    "load_config",
    "make_circle",
    "make_ellipse",
    "make_trig_curve",
    "solve_densities",
    "solve_field",
    "solve_limit_quadruple",
    "solve_mixed",
    "validate_configuration",
]
