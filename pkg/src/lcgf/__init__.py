"""Log-correlated Gaussian field toolkit.

Covariance oracles, deterministic samplers, extreme-value statistics,
perturbation checks, the multiscale approximation field, and the
Gumbel-mixture limit machinery, with a CLI front end (``lcgf``).
"""

__version__ = "0.1.0"

from .covariance import (
    FieldSpec,
    DenseCovariance,
    CholeskyFactor,
    brw_covariance,
    mbrw_covariance,
    clrem_covariance,
    build_dense,
    cholesky,
    find_minimal_w,
    oracle_for,
)
from .samplers import (
    SampledField,
    ReplicaPlan,
    sample_brw,
    sample_mbrw,
    sample_dense,
    sample_field,
    run_replicas,
)
from .extremes import (
    m_n,
    max_stat,
    restricted_pair_max,
    near_max_pairs,
    derivative_martingale,
)
from .assumptions import check_a0, check_a1, estimate_fgh
from .perturb import BoxPerturbation, perturbed_field, scaled_mix_field, shift_check
from .approx import (
    XiParams,
    XiField,
    build_xi,
    fine_field,
    backbone,
    count_barrier_events,
    fine_right_tail,
)
from .limitlaw import (
    EmpiricalDistribution,
    GStarParams,
    GumbelMixture,
    levy_distance,
    one_sided_distance,
    sample_y,
    sample_gstar,
    gumbel_mixture_cdf,
    fit_beta_star,
    tail_slope,
    compare_to_limit,
)
