"""Portfolio variance decomposition and effective degrees of freedom.

The central statistic is ``n_star = n * V_I / V_P`` for an equal-weight
portfolio: ``V_I`` is the part of portfolio variance coming from the
diagonal of the covariance matrix (what the variance would be if assets
were independent) and ``V_P`` the full quadratic form.  ``n_star`` is the
number of independent assets that would produce the same variance, so
common positive correlation pushes it far below the nominal count.

All covariance structures are consumed through a small accessor interface
(dimension, trace, grand sum, matvec) so the isotropic model, explicit
factor models, and dense sample covariances share one code path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol, Sequence, runtime_checkable

import numpy as np

from . import equicorr
from .errors import DegenerateVarianceError, InfeasibleCorrelationError

DEGENERATE_VP = 1e-15


@runtime_checkable
class CovarianceLike(Protocol):
    """Minimal covariance interface: dimension, trace, grand sum, product."""

    @property
    def n(self) -> int: ...

    def trace(self) -> float: ...

    def grand_sum(self) -> float: ...

    def matvec(self, x: np.ndarray) -> np.ndarray: ...


@dataclass(frozen=True)
class IsotropicModel:
    """Covariance ``S @ G @ S`` with per-asset volatilities and common rho.

    Never materializes the dense matrix on production paths; trace and
    grand sum use exact sums so the homoskedastic formulas fall out of the
    heteroskedastic ones without approximation.
    """

    n: int
    rho: float
    sigmas: np.ndarray

    def __post_init__(self):
        sig = np.asarray(self.sigmas, dtype=float)
        if sig.ndim != 1 or sig.shape[0] != self.n:
            raise ValueError(f"need {self.n} volatilities, got shape {sig.shape}")
        if not np.all(sig > 0):
            raise ValueError("volatilities must be strictly positive")
        object.__setattr__(self, "sigmas", sig)
        # delegates the rho feasibility check (and n == 1 normalization)
        corr = equicorr.EquiCorrMatrix(self.n, self.rho)
        object.__setattr__(self, "rho", corr.rho)

    @classmethod
    def homoskedastic(cls, n: int, rho: float, sigma: float = 1.0) -> "IsotropicModel":
        return cls(n=n, rho=rho, sigmas=np.full(n, float(sigma)))

    @property
    def correlation(self) -> equicorr.EquiCorrMatrix:
        return equicorr.EquiCorrMatrix(self.n, self.rho)

    @property
    def is_homoskedastic(self) -> bool:
        return bool(np.all(self.sigmas == self.sigmas[0]))

    def trace(self) -> float:
        return float(np.sum(self.sigmas**2))

    def grand_sum(self) -> float:
        s1 = float(np.sum(self.sigmas))
        s2 = float(np.sum(self.sigmas**2))
        return s2 + self.rho * (s1 * s1 - s2)

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.sigmas * equicorr.matvec(self.correlation, self.sigmas * x)

    def dense(self) -> np.ndarray:
        """Dense covariance for oracles and debugging."""
        return np.outer(self.sigmas, self.sigmas) * self.correlation.dense()


@dataclass(frozen=True)
class FactorModel:
    """Linear factor covariance ``B @ B.T + diag(idio_var)``.

    ``loadings`` is n x k with unit-variance factors; ``idio_var`` holds the
    idiosyncratic variances.  Positive idiosyncratic variance makes the
    implied covariance automatically positive definite, so the explicit
    Cholesky feasibility check runs lazily, only when the dense matrix is
    requested.
    """

    loadings: np.ndarray
    idio_var: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.loadings, dtype=float))
        s2 = np.asarray(self.idio_var, dtype=float)
        if b.ndim != 2:
            raise ValueError("loadings must be a 2-d array")
        if s2.ndim != 1 or s2.shape[0] != b.shape[0]:
            raise ValueError(
                f"idio_var length {s2.shape} does not match {b.shape[0]} assets"
            )
        if b.shape[1] > b.shape[0]:
            raise ValueError("more factors than assets")
        if np.any(s2 < 0):
            raise ValueError("idiosyncratic variances must be nonnegative")
        object.__setattr__(self, "loadings", b)
        object.__setattr__(self, "idio_var", s2)

    @property
    def n(self) -> int:
        return self.loadings.shape[0]

    @property
    def k(self) -> int:
        return self.loadings.shape[1]

    def trace(self) -> float:
        return float(np.sum(self.loadings**2) + np.sum(self.idio_var))

    def grand_sum(self) -> float:
        colsum = self.loadings.sum(axis=0)
        return float(colsum @ colsum + np.sum(self.idio_var))

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return self.loadings @ (self.loadings.T @ x) + self.idio_var * x

    def dense(self) -> np.ndarray:
        cov = self.loadings @ self.loadings.T + np.diag(self.idio_var)
        np.linalg.cholesky(cov)  # positive definiteness gate
        return cov


@dataclass(frozen=True)
class DenseCovariance:
    """Accessor over an explicit covariance matrix (sample or synthetic)."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise ValueError(f"covariance must be square, got shape {m.shape}")
        object.__setattr__(self, "matrix", m)

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> float:
        return float(np.trace(self.matrix))

    def grand_sum(self) -> float:
        return float(self.matrix.sum())

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)


@dataclass(frozen=True)
class VarianceDecomposition:
    """Equal-weight portfolio variance split into diagonal and covariance parts.

    ``v_p == v_i + v_c`` by construction and ``n_star = n * v_i / v_p``.
    """

    v_p: float
    v_i: float
    v_c: float
    n_star: float


@dataclass(frozen=True)
class RiskPartition:
    """Equal-weight variance split along the eigenstructure.

    ``v_s`` is the variance carried by the common (equal-weight) eigenvector,
    ``v_r`` the variance left in the degenerate eigenspace.  The large-n
    ratio ``v_r/v_s -> (1-rho)/rho`` is reported as ``ratio_asymptote``;
    it is undefined (None) for rho <= 0.
    """

    v_s: float
    v_r: float
    ratio_asymptote: float | None


def equal_weight_variance(cov: CovarianceLike) -> VarianceDecomposition:
    """Decompose the variance of the 1/n portfolio over ``cov``.

    ``v_i = trace/n^2``, ``v_c = (grand_sum - trace)/n^2``; raises
    DegenerateVarianceError when the portfolio variance falls below
    DEGENERATE_VP (a perfect hedge, for which n_star is undefined).
    """
    n = cov.n
    v_i = cov.trace() / (n * n)
    v_c = (cov.grand_sum() - cov.trace()) / (n * n)
    v_p = v_i + v_c
    if v_p < DEGENERATE_VP:
        raise DegenerateVarianceError(
            f"portfolio variance {v_p:.3e} below {DEGENERATE_VP:.0e}"
        )
    return VarianceDecomposition(v_p=v_p, v_i=v_i, v_c=v_c, n_star=n * v_i / v_p)


def iso_nstar_curve(rho: float, n_values: Sequence[int]) -> np.ndarray:
    """Effective degrees of freedom ``n / (1 + (n-1)*rho)`` pointwise over n.

    Monotone increasing in n for rho in (0, 1) with horizontal asymptote
    ``1/rho``.
    """
    ns = np.asarray(n_values, dtype=float)
    if np.any(ns < 1):
        raise ValueError("portfolio sizes must be >= 1")
    n_max = int(ns.max())
    if n_max > 1:
        lo, hi = equicorr.feasible_rho_range(n_max)
        if not lo <= rho <= hi:
            raise InfeasibleCorrelationError(
                f"rho={rho} infeasible for n={n_max} (range [{lo}, {hi}])"
            )
    return ns / (1.0 + (ns - 1.0) * rho)


def iso_nstar_asymptote(rho: float) -> float:
    """Large-portfolio limit of the isotropic n_star curve, ``1/rho``."""
    if rho <= 0:
        raise ValueError("asymptote defined only for rho > 0")
    return 1.0 / rho


def rho_hat_from_nstar(n: int, n_star: float) -> float:
    """Invert the isotropic curve: ``rho = (n - n_star) / ((n-1) * n_star)``."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    if not 0 < n_star <= n:
        raise ValueError(f"n_star must lie in (0, {n}], got {n_star}")
    return (n - n_star) / ((n - 1) * n_star)


def factor_nstar(fm: FactorModel) -> float:
    """Effective degrees of freedom implied by a factor model.

    Uses the exact trace and grand sum of ``B @ B.T + diag(idio_var)``, so it
    agrees with ``equal_weight_variance`` on the dense covariance.  With no
    factors (k == 0) it reduces to the asset count.
    """
    return equal_weight_variance(fm).n_star


def loadings_mean_inequality(fm: FactorModel) -> tuple[float, float, bool]:
    """Mean of squared loadings versus mean of squared column means.

    Returns ``(lhs, rhs, holds)`` with ``lhs = mean(B**2)`` and
    ``rhs = sum(colmeans**2)/k``; ``lhs >= rhs`` for every real matrix,
    with equality when each column is constant.
    """
    if fm.k == 0:
        raise ValueError("inequality needs at least one factor")
    lhs = float(np.mean(fm.loadings**2))
    col_means = fm.loadings.mean(axis=0)
    rhs = float(col_means @ col_means) / fm.k
    holds = lhs >= rhs or np.isclose(lhs, rhs, rtol=1e-12, atol=1e-300)
    return lhs, rhs, holds


def risk_partition(sigma: float, rho: float, n: int) -> RiskPartition:
    """Split homoskedastic equal-weight variance into common and residual parts.

    ``v_s = sigma^2 (1+(n-1)rho)/n^2`` and ``v_r = sigma^2 (n-1)(1-rho)/n^2``;
    they sum to ``sigma^2/n`` identically.  Residual risk survives
    diversification except at rho = 1.
    """
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > 1:
        lo, hi = equicorr.feasible_rho_range(n)
        if not lo <= rho <= hi:
            raise InfeasibleCorrelationError(
                f"rho={rho} infeasible for n={n} (range [{lo}, {hi}])"
            )
    v_s = sigma * sigma * (1.0 + (n - 1) * rho) / (n * n)
    v_r = sigma * sigma * (n - 1) * (1.0 - rho) / (n * n)
    asymptote = (1.0 - rho) / rho if rho > 0 else None
    return RiskPartition(v_s=v_s, v_r=v_r, ratio_asymptote=asymptote)
