"""Cartan-Schouten metrics: unit-level solver, metric fields and closed forms."""

from .field import (
    MetricField,
    QuadraticPoly,
    Strategy,
    coordinate_christoffel,
    frame_to_chart,
    heisenberg_geodesic,
    integrate_geodesic,
    levi_civita_frame,
    metric_field_2nil,
    metric_field_series,
    parallelism_residual,
)
from .hyperbolic import hyperbolic_basis, isotropic_dual, random_quadratic_two_step
from .solver import (
    CSMetricSpace,
    MetricAtUnit,
    check_ad_invariance,
    check_cs_condition,
    check_quadratic_structure_constants,
    riemannian_cs_exists,
    riemannian_cs_witness,
    signature,
    solve_cs_space,
)
from .tables import heisenberg_metric_coeffs, htype_metric_coeffs

__all__ = [
    "CSMetricSpace",
    "MetricAtUnit",
    "MetricField",
    "QuadraticPoly",
    "Strategy",
    "check_ad_invariance",
    "check_cs_condition",
    "check_quadratic_structure_constants",
    "coordinate_christoffel",
    "frame_to_chart",
    "heisenberg_geodesic",
    "heisenberg_metric_coeffs",
    "htype_metric_coeffs",
    "hyperbolic_basis",
    "integrate_geodesic",
    "isotropic_dual",
    "levi_civita_frame",
    "metric_field_2nil",
    "metric_field_series",
    "parallelism_residual",
    "random_quadratic_two_step",
    "riemannian_cs_exists",
    "riemannian_cs_witness",
    "signature",
    "solve_cs_space",
]
