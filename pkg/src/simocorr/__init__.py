"""Interference correlation and receive diversity in Poisson networks.

``simocorr.specfun``  gamma/beta and the diversity polynomial D_n
``simocorr.analytic`` closed-form SIR probabilities
``simocorr.mcsim``    Monte Carlo simulator with naive and conditioned estimators
``simocorr.figures``  tables for the five standard figures
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    ModelParams,
    NormalizedParams,
    conditional_success_prob,
    diversity_loss,
    independent_joint_prob,
    independent_selection_prob,
    independent_two_antenna_success,
    indicator_correlation,
    joint_prob_bounds,
    joint_success_prob,
    joint_two_antenna_cdf,
    joint_two_antenna_success,
    selection_combining_curve,
    selection_combining_prob,
    single_success_prob,
)
from .specfun import beta, diversity_poly, diversity_poly_range, log_gamma  # noqa: E402
