"""Noisy boson sampling toolkit.

Exact output-probability tables for an N-boson interferometer under Gaussian
network noise, partial-distinguishability models, truncation bounds, Monte
Carlo samplers, and a small verification service around them.
"""

__version__ = "0.1.0"

from .linalg import (
    fourier_unitary,
    gaussian_matrix,
    haar_unitary,
    noisy_submatrix,
    permanent,
    permanent_batch,
    unitarity_deviation,
)
from .combinat import (
    chi,
    derangement_count,
    enumerate_configurations,
    enumerate_subconfigurations,
    fixed_point_count,
)
from .models import (
    DistinguishabilityFunction,
    ProbabilityTable,
    classical_probability,
    click_truncated_distribution,
    ideal_probability,
    j_evaluate,
    noisy_distribution,
    partial_dist_decomposed,
    poisson_dark_pmf,
    probability_from_j,
    truncated_distribution,
    uniform_dark_pmf,
)
from .analysis import (
    BoundReport,
    average_distinguishability,
    average_tvd_bound,
    binomial_pmf,
    click_tail,
    cutoff_interference_order,
    hoeffding_tail_bound,
    noise_click_ratio,
    sufficient_click_order,
    tvd,
)
from .samplers import (
    EmpiricalDistribution,
    chi_square_gof,
    sample_noise_realizations,
    sample_noisy_compositional,
    sample_table,
)
from .seeding import component_rng, stream_seed
