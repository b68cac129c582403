"""Closed-form portfolio selection under equicorrelation covariance.

The mean-variance optimum ``h = Sigma^-1 alpha / (2 lambda)`` collapses to
an O(n) expression once the covariance is ``S G S`` with an equicorrelation
``G``: work in volatility-scaled scores ``z = alpha / sigma``, subtract a
centered mean-score term, and rescale.  The same algebra gives the
Mahalanobis length of the alpha vector in closed form.

For heavy-tailed elliptical returns the optimum is the mean-variance
portfolio times a scalar taper; the multivariate-Laplace taper is shipped
in closed form and any alternative scaling function can be plugged into
``scaled_allocation``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .cross_section import IsotropicModel
from .errors import DimensionMismatchError, SingularMatrixError

# below this value of z_sq/(n+1) the Laplace taper switches to its series
OMEGA_SERIES_CUTOFF = 1e-8


@dataclass(frozen=True)
class AlphaVector:
    """Expected returns together with their volatility-scaled scores."""

    alphas: np.ndarray
    z_scores: np.ndarray

    @classmethod
    def for_model(cls, model: IsotropicModel, alphas) -> "AlphaVector":
        a = np.asarray(alphas, dtype=float)
        if a.ndim != 1 or a.shape[0] != model.n:
            raise DimensionMismatchError(
                f"expected {model.n} alphas, got shape {a.shape}"
            )
        return cls(alphas=a, z_scores=a / model.sigmas)


@dataclass(frozen=True)
class AllocationResult:
    """Optimal weights plus the diagnostics behind them.

    ``omega`` is the scalar taper applied on top of the mean-variance
    solution; it is exactly 1 for plain mean-variance output.
    """

    weights: np.ndarray
    lam: float
    z_sq: float
    omega: float


def _require_invertible(model: IsotropicModel) -> None:
    if model.correlation.is_singular():
        raise SingularMatrixError(
            f"correlation rho={model.rho} is singular for n={model.n}"
        )


def centering_factor(rho: float, n: int) -> float:
    """Weight ``rho*n / (1 + (n-1)*rho)`` on the mean-score subtraction.

    Zero for independent assets, rising to 1 in large correlated
    portfolios, where only score differences matter.
    """
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    denom = 1.0 + (n - 1) * rho
    if denom == 0.0:
        raise SingularMatrixError(
            f"centering undefined at the singular correlation rho={rho}, n={n}"
        )
    return rho * n / denom


def mvo_isotropic(model: IsotropicModel, alphas, lam: float) -> AllocationResult:
    """Mean-variance optimal weights in O(n).

    ``h = (z - c * mean(z)) / (sigma * 2 * lam * (1 - rho))`` with the
    centering factor ``c``; identical to the dense solve
    ``Sigma^-1 alpha / (2 lam)``.
    """
    if lam <= 0:
        raise ValueError(f"lambda must be positive, got {lam}")
    _require_invertible(model)
    alpha = AlphaVector.for_model(model, alphas)
    z = alpha.z_scores
    centered = z - centering_factor(model.rho, model.n) * z.mean()
    weights = centered / (model.sigmas * (2.0 * lam * (1.0 - model.rho)))
    return AllocationResult(
        weights=weights,
        lam=lam,
        z_sq=mahalanobis_z_sq(model, alphas),
        omega=1.0,
    )


def mahalanobis_z_sq(model: IsotropicModel, alphas) -> float:
    """Squared Mahalanobis length ``alpha^T Sigma^-1 alpha`` in closed form.

    ``n/(1-rho) * (mean(z^2) - c * mean(z)^2)`` with the centering factor
    ``c``; never negative.
    """
    _require_invertible(model)
    z = AlphaVector.for_model(model, alphas).z_scores
    c = centering_factor(model.rho, model.n)
    value = model.n / (1.0 - model.rho) * (np.mean(z**2) - c * np.mean(z) ** 2)
    return max(0.0, float(value))


def _omega_series(x: float) -> float:
    return 2.0 - 2.0 * x + 4.0 * x * x


def _omega_closed_form(x: float) -> float:
    # rationalized (sqrt(1+4x)-1)/x; stable for small x
    return 4.0 / (1.0 + math.sqrt(1.0 + 4.0 * x))


def laplace_omega(z_sq: float, n: int) -> float:
    """Multivariate-Laplace taper ``(sqrt(1 + 4 z_sq/(n+1)) - 1)/(z_sq/(n+1))``.

    The removable singularity at the origin evaluates to 2 by series;
    strictly decreasing in ``z_sq`` and falling to zero for large scores.
    """
    if z_sq < 0:
        raise ValueError(f"z_sq must be nonnegative, got {z_sq}")
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    x = z_sq / (n + 1.0)
    if x < OMEGA_SERIES_CUTOFF:
        return _omega_series(x)
    return _omega_closed_form(x)


def scaled_allocation(
    model: IsotropicModel,
    alphas,
    lam: float,
    omega_fn: Callable[[float, int], float],
) -> AllocationResult:
    """Mean-variance weights rescaled by ``omega_fn(z_sq, n)``.

    The taper is a scalar, so it never rotates the portfolio, only resizes
    it.
    """
    base = mvo_isotropic(model, alphas, lam)
    omega = float(omega_fn(base.z_sq, model.n))
    return AllocationResult(
        weights=base.weights * omega,
        lam=lam,
        z_sq=base.z_sq,
        omega=omega,
    )


def laplace_allocation(model: IsotropicModel, alphas, lam: float) -> AllocationResult:
    """Optimal portfolio for exponential utility under Laplace returns."""
    return scaled_allocation(model, alphas, lam, laplace_omega)
