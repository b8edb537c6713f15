"""Ruin probabilities for integer-valued games against an infinitely rich adversary."""

__version__ = "0.1.0"

from .errors import NumericalError, RuinError, ValidationError
from .payoff import (
    AnalyticFamily,
    PayoffDistribution,
    build_distribution,
    evaluate_p,
    h_coefficients,
    load_spec,
    parse_spec,
    poisson_prize,
    table,
    two_point,
)
from .rootfinder import DiskRoots, count_roots_in_disk, find_disk_roots, find_z_star
from .ruin import (
    RuinResult,
    final_fortune_distribution,
    phi,
    ruin_probabilities,
    ruin_probability,
    ruin_probability_lagrange,
    ruin_probability_newton,
)
from .oracles import cross_check, dp_ruin, dp_step, finite_w_ruin, mc_ruin
