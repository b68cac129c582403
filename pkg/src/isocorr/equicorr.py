"""Closed-form algebra for equicorrelation matrices.

An equicorrelation matrix ``G`` of dimension ``n`` has ones on the diagonal
and a single common value ``rho`` everywhere else.  Its spectrum, an
orthogonal eigenmatrix, and its inverse are all available in closed form,
so nothing here ever needs a generic eigensolver or an O(n^3) factorization.
Dense materialization exists only as a debugging and test-oracle utility.

Closed forms used throughout:

* eigenvalues: ``1 + (n-1)*rho`` once (eigenvector along the ones vector)
  and ``1 - rho`` with multiplicity ``n-1``;
* inverse: ``G^-1 = a*I + b*ones*ones^T`` with ``a = 1/(1-rho)`` and
  ``b = -rho / ((1-rho) * (1 + (n-1)*rho))``;
* products: ``G @ x = (1-rho)*x + rho*sum(x)*ones`` in O(n).

``G`` is singular exactly at ``rho = 1`` and ``rho = 1/(1-n)``; values within
``SINGULARITY_EPS`` of either root are treated as singular to avoid
catastrophic cancellation in the inverse coefficients.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    DimensionMismatchError,
    InfeasibleCorrelationError,
    SingularMatrixError,
)

SINGULARITY_EPS = 1e-12


@dataclass(frozen=True)
class EquiCorrMatrix:
    """Implicit equicorrelation matrix, stored as ``(n, rho)`` only.

    For ``n == 1`` the matrix is the 1x1 identity and ``rho`` is meaningless;
    it is normalized to zero at construction.
    """

    n: int
    rho: float

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"dimension must be >= 1, got {self.n}")
        if self.n == 1:
            object.__setattr__(self, "rho", 0.0)
            return
        lo, hi = feasible_rho_range(self.n)
        if not lo <= self.rho <= hi:
            raise InfeasibleCorrelationError(
                f"rho={self.rho} outside feasible range [{lo}, {hi}] for n={self.n}"
            )

    @property
    def singular_roots(self) -> tuple[float, float]:
        """The two rho values at which the matrix is singular."""
        return (1.0 / (1.0 - self.n) if self.n > 1 else np.nan, 1.0)

    def is_singular(self) -> bool:
        if self.n == 1:
            return False
        lo_root, hi_root = self.singular_roots
        return (
            abs(self.rho - hi_root) < SINGULARITY_EPS
            or abs(self.rho - lo_root) < SINGULARITY_EPS
        )

    def dense(self) -> np.ndarray:
        """Materialize the full matrix (debug/oracle use only; O(n^2) memory)."""
        g = np.full((self.n, self.n), self.rho, dtype=float)
        np.fill_diagonal(g, 1.0)
        return g


@dataclass(frozen=True)
class EigenStructure:
    """Spectrum of an equicorrelation matrix.

    ``common_eigenvalue`` belongs to the ones-direction eigenvector; the
    degenerate eigenvalue repeats ``multiplicity`` times on the orthogonal
    complement.
    """

    common_eigenvalue: float
    degenerate_eigenvalue: float
    multiplicity: int


@dataclass(frozen=True)
class ImplicitInverse:
    """Inverse in the form ``diag_coeff * I + rank_one_coeff * ones*ones^T``."""

    n: int
    diag_coeff: float
    rank_one_coeff: float

    def matvec(self, x: np.ndarray) -> np.ndarray:
        x = _check_vector(self.n, x)
        return self.diag_coeff * x + self.rank_one_coeff * x.sum()

    def dense(self) -> np.ndarray:
        out = np.full((self.n, self.n), self.rank_one_coeff, dtype=float)
        np.fill_diagonal(out, self.diag_coeff + self.rank_one_coeff)
        return out


def feasible_rho_range(n: int) -> tuple[float, float]:
    """Admissible common-correlation interval ``[1/(1-n), 1]`` for ``n >= 2``.

    Perfect anti-correlation is only feasible for two assets; the lower
    bound rises toward zero as the universe grows, so large universes admit
    no common negative correlation.
    """
    if n < 2:
        raise ValueError(f"feasible range needs n >= 2, got {n}")
    return (1.0 / (1.0 - n), 1.0)


def eigenvalues(m: EquiCorrMatrix) -> EigenStructure:
    """Closed-form spectrum: ``1+(n-1)rho`` once, ``1-rho`` repeated ``n-1`` times."""
    return EigenStructure(
        common_eigenvalue=1.0 + (m.n - 1) * m.rho,
        degenerate_eigenvalue=1.0 - m.rho,
        multiplicity=m.n - 1,
    )


def projection_matrix(n: int) -> np.ndarray:
    """Integer eigenvector basis: row 1 is all ones; row i > 1 holds i-1
    entries of -1, then i-1 on the diagonal, then zeros.

    Rows are mutually orthogonal and rows 2..n each sum to zero, so the
    matrix diagonalizes every equicorrelation matrix of dimension ``n``
    regardless of rho.
    """
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    p = np.zeros((n, n), dtype=np.int64)
    p[0, :] = 1
    for i in range(1, n):
        p[i, :i] = -1
        p[i, i] = i
    return p


def normalizer_diagonal(n: int) -> np.ndarray:
    """Diagonal of ``P @ P.T`` for the projection matrix: ``n`` then ``j*(j-1)``."""
    if n < 1:
        raise ValueError(f"dimension must be >= 1, got {n}")
    j = np.arange(2, n + 1, dtype=np.int64)
    return np.concatenate(([np.int64(n)], j * (j - 1)))


def orthogonal_eigenmatrix(n: int) -> np.ndarray:
    """Orthogonal eigenmatrix ``Q``: projection rows scaled by 1/sqrt(row norm^2).

    Row 1 is ``ones/sqrt(n)`` (the equal-weight direction); the remaining
    rows span the degenerate eigenspace with the long-position entry
    positive.  ``Q @ Q.T == I`` and ``Q @ G @ Q.T`` is diagonal.
    """
    p = projection_matrix(n)
    scale = 1.0 / np.sqrt(normalizer_diagonal(n).astype(float))
    return scale[:, None] * p


def inverse(m: EquiCorrMatrix) -> ImplicitInverse:
    """Closed-form inverse as an implicit ``a*I + b*ones*ones^T``.

    Raises SingularMatrixError when rho is within SINGULARITY_EPS of a
    singular root (rho = 1 or rho = 1/(1-n)).
    """
    if m.n == 1:
        return ImplicitInverse(n=1, diag_coeff=1.0, rank_one_coeff=0.0)
    if m.is_singular():
        raise SingularMatrixError(
            f"equicorrelation matrix singular near rho={m.rho} for n={m.n}"
        )
    common = 1.0 + (m.n - 1) * m.rho
    a = 1.0 / (1.0 - m.rho)
    b = -m.rho / ((1.0 - m.rho) * common)
    return ImplicitInverse(n=m.n, diag_coeff=a, rank_one_coeff=b)


def matvec(m: EquiCorrMatrix, x: np.ndarray) -> np.ndarray:
    """O(n) product ``G @ x = (1-rho)*x + rho*sum(x)*ones``."""
    x = _check_vector(m.n, x)
    return (1.0 - m.rho) * x + m.rho * x.sum()


def inv_matvec(m: EquiCorrMatrix, x: np.ndarray) -> np.ndarray:
    """O(n) product ``G^-1 @ x`` using the implicit inverse coefficients."""
    return inverse(m).matvec(x)


def _check_vector(n: int, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != n:
        raise DimensionMismatchError(
            f"expected vector of length {n}, got shape {x.shape}"
        )
    return x
