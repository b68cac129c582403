"""Synthetic Gaussian return panels with known covariance structure.

These generators back the Monte-Carlo tests and make it easy to rehearse
the experiment pipeline without market data: one draws returns with an
exact common correlation, the other from an explicit factor structure.
Both are deterministic for a fixed seed.
"""

from __future__ import annotations

from datetime import date, timedelta

import numpy as np

from . import equicorr
from .market_data import ReturnsPanel


def _stamps(n_periods: int, start: date) -> tuple[date, ...]:
    return tuple(start + timedelta(days=i) for i in range(n_periods))


def _ids(n_assets: int) -> tuple[str, ...]:
    return tuple(f"A{j:04d}" for j in range(n_assets))


def isotropic_panel(
    n_assets: int,
    n_periods: int,
    rho: float,
    sigma=1.0,
    seed: int = 0,
    start: date = date(2020, 1, 1),
) -> ReturnsPanel:
    """Zero-mean Gaussian returns with every pairwise correlation equal.

    Nonnegative rho uses the one-common-factor construction
    ``sigma * (sqrt(rho) g_t + sqrt(1-rho) e_it)`` in O(n*t); negative rho
    falls back on synthesis through the closed-form eigendecomposition.
    """
    corr = equicorr.EquiCorrMatrix(n_assets, rho)  # validates feasibility
    rho = corr.rho
    sigmas = np.broadcast_to(np.asarray(sigma, dtype=float), (n_assets,))
    if np.any(sigmas <= 0):
        raise ValueError("sigma must be positive")
    rng = np.random.default_rng(seed)
    if rho >= 0:
        common = rng.standard_normal((n_periods, 1))
        own = rng.standard_normal((n_periods, n_assets))
        unit = np.sqrt(rho) * common + np.sqrt(1.0 - rho) * own
    else:
        eig = equicorr.eigenvalues(corr)
        roots = np.sqrt(
            np.concatenate(
                ([eig.common_eigenvalue], np.full(n_assets - 1, eig.degenerate_eigenvalue))
            )
        )
        q = equicorr.orthogonal_eigenmatrix(n_assets)
        unit = (rng.standard_normal((n_periods, n_assets)) * roots) @ q
    return ReturnsPanel(
        returns=unit * sigmas,
        asset_ids=_ids(n_assets),
        period_stamps=_stamps(n_periods, start),
    )


def factor_panel(
    n_assets: int,
    n_periods: int,
    k: int,
    loading=0.025,
    idio_sigma: float = 1.0,
    seed: int = 0,
    start: date = date(2020, 1, 1),
) -> ReturnsPanel:
    """Zero-mean Gaussian returns from ``r_t = B f_t + eps_t``.

    ``loading`` may be a scalar (every asset loads identically on every
    factor) or a full n x k matrix; factors have unit variance and the
    idiosyncratic noise is homoskedastic.
    """
    if k < 0:
        raise ValueError("k must be nonnegative")
    if idio_sigma <= 0:
        raise ValueError("idio_sigma must be positive")
    loadings = np.broadcast_to(np.asarray(loading, dtype=float), (n_assets, k))
    rng = np.random.default_rng(seed)
    factors = rng.standard_normal((n_periods, k))
    noise = idio_sigma * rng.standard_normal((n_periods, n_assets))
    return ReturnsPanel(
        returns=factors @ loadings.T + noise,
        asset_ids=_ids(n_assets),
        period_stamps=_stamps(n_periods, start),
    )
