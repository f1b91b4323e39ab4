"""Latent trawl process models for threshold exceedances."""

__version__ = "0.1.0"

from .trawl import (
    GammaSeed,
    SlicePartition,
    TrawlSpec,
    acf_trawl,
    joint_cf,
    joint_laplace,
    leb_intersection,
    leb_trawl,
    seed_cf_cumulant,
    seed_cumulant,
    simulate_trawl,
    slice_partition,
)
from .gpd import gpd_cdf, gpd_pdf, gpd_quantile
from .model import (
    ExceedanceSeries,
    ModelParams,
    acf_exceedance,
    acov_exceedance,
    exceedance_prob,
    inverse_transform_mt,
    joint_exceedance_survivor,
    kappa_for_prob,
    mean_exceedance,
    mt_jacobian,
    simulate_exceedances,
    transform_mt,
)
from .inference import (
    FitResult,
    PLConfig,
    fit,
    full_likelihood_small_k,
    init_heuristic,
    log_pairwise_likelihood,
    pair_density_00,
    pair_density_01,
    pair_density_10,
    pair_density_11,
    pair_density_mt,
    sandwich_covariance,
)
from .extremes import (
    ClusterSummary,
    cond_tail_dep,
    cond_tail_dep_limit,
    empirical_chi,
    extremal_index_curve,
    extremal_index_runs,
    f2e,
    f2e_inverse,
)
from .io import RawSeries, ingest_csv, to_exceedances
