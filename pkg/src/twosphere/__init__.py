"""Exact image-charge field between two nearly touching conducting spheres."""

from .analysis import AsymptoticReport, blowup_sweep, fit_rate, residual_eta
from .background import (
    HarmonicPolynomial,
    eval_H,
    format_polynomial,
    grad_H,
    parse_polynomial,
    poly_laplacian,
)
from .coefficients import (
    CoefficientReport,
    c_h_eps,
    c_h_limit,
    coefficient_report,
    potential_difference,
    singular_field,
)
from .estimator import SingularFieldModel
from .geometry import SphereConfig, in_gap_region, make_config, reflect, rho
from .quadrature import SurfaceRule, flux_h, make_rule, weighted_flux
from .sequences import (
    ImageSequence,
    build_sequence,
    contraction_ratio,
    fixed_point,
    q_sum_certified,
)
from .singular import FieldEvaluation, eval_singular, eval_v0_dx, grad_fd_oracle

__version__ = "0.1.0"

__all__ = [
    "AsymptoticReport",
    "CoefficientReport",
    "FieldEvaluation",
    "HarmonicPolynomial",
    "ImageSequence",
    "SingularFieldModel",
    "SphereConfig",
    "SurfaceRule",
    "blowup_sweep",
    "build_sequence",
    "c_h_eps",
    "c_h_limit",
    "coefficient_report",
    "contraction_ratio",
    "eval_H",
    "eval_singular",
    "eval_v0_dx",
    "fit_rate",
    "fixed_point",
    "flux_h",
    "format_polynomial",
    "grad_H",
    "grad_fd_oracle",
    "in_gap_region",
    "make_config",
    "make_rule",
    "parse_polynomial",
    "poly_laplacian",
    "potential_difference",
    "q_sum_certified",
    "reflect",
    "residual_eta",
    "rho",
    "singular_field",
    "weighted_flux",
]
