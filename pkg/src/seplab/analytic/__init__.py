"""Exact and numerical separability-probability analytics."""

from .chi import (  # noqa: F401
    ChiPoly,
    chi_closed,
    chi_double_sum,
    chi_general,
    chi_special,
    half_I,
    half_J,
    half_J_coefficients,
    master_chi,
)
from .hyper import HyperSeries, hyper, hyper_regularized, poch  # noqa: F401
from .probability import (  # noqa: F401
    Induced,
    OpMonotoneSqrt,
    det_split_exact,
    exact_probability,
    induced_closed_form,
    q_split,
    sqrtx_closed_form,
    sep_prob_exact,
    sep_prob_quadrature,
    t_route_normalization,
    t_route_normalization_series,
    t_route_probability,
    u_eta,
)
