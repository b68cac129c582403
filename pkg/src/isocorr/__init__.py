"""Equicorrelation covariance toolkit.

Closed-form algebra for equicorrelation matrices, effective degrees of
freedom for equal-weight portfolios, a randomized experiment that
discriminates common-correlation from factor covariance structures, and
closed-form portfolio optimizers, with a CLI that writes delimited outputs
and report figures.
"""

__version__ = "0.1.0"

from .allocator import (
    AllocationResult,
    AlphaVector,
    centering_factor,
    laplace_allocation,
    laplace_omega,
    mahalanobis_z_sq,
    mvo_isotropic,
    scaled_allocation,
)
from .corr_stats import (
    KsResult,
    PairSample,
    distinct_pair_count,
    fisher_z,
    ks_test_normal,
    pearson,
    sample_pairs,
)
from .cross_section import (
    DenseCovariance,
    FactorModel,
    IsotropicModel,
    RiskPartition,
    VarianceDecomposition,
    equal_weight_variance,
    factor_nstar,
    iso_nstar_asymptote,
    iso_nstar_curve,
    loadings_mean_inequality,
    rho_hat_from_nstar,
    risk_partition,
)
from .equicorr import (
    EigenStructure,
    EquiCorrMatrix,
    ImplicitInverse,
    eigenvalues,
    feasible_rho_range,
    inv_matvec,
    inverse,
    matvec,
    orthogonal_eigenmatrix,
    projection_matrix,
)
from .experiment import (
    DofTrial,
    ModelVerdict,
    OlsFit,
    default_fit_window,
    fit_large_n,
    model_curves,
    run_dof_experiment,
    sample_variance,
    terminal_nstar,
    verdict,
)
from .market_data import (
    IngestReport,
    PricePanel,
    ReturnsPanel,
    drop_incomplete_assets,
    load_price_csv,
    load_returns_csv,
    to_returns,
    write_price_csv,
    write_returns_csv,
)
