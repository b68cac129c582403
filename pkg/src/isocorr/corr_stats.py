"""Pairwise correlation sampling and Fisher-transform diagnostics.

Under a common-correlation hypothesis the dispersion of sampled pairwise
correlations is pure sampling noise, so after the variance-stabilizing
transform ``z = sqrt(n_obs - 3) * atanh(r)`` the sample should look like a
unit-variance Normal.  This module draws random asset pairs from a returns
panel, transforms their correlations, and tests the result against a
reference Normal with a Kolmogorov-Smirnov statistic.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    InfiniteTransformError,
    InsufficientObservationsError,
    UndefinedCorrelationError,
    ValidationError,
)
from .market_data import ReturnsPanel

# |r| beyond this is reported, since the transform is about to blow up
NEAR_DEGENERATE_R = 1.0 - 1e-12

KS_SERIES_TERMS = 100
KS_SERIES_TOL = 1e-12


@dataclass(frozen=True)
class PairSample:
    """One sampled asset pair with its correlation and transformed score."""

    pair: tuple[int, int]
    pearson_r: float
    fisher_z: float
    n_obs: int


@dataclass(frozen=True)
class KsResult:
    d_statistic: float
    p_value: float


def distinct_pair_count(n: int) -> int:
    """Number of unordered asset pairs, n choose 2."""
    return n * (n - 1) // 2


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    """Product-moment correlation, clipped into [-1, 1].

    Raises UndefinedCorrelationError when either series has zero variance.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValidationError(f"series shapes differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise InsufficientObservationsError("need at least two observations")
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0.0 or syy == 0.0:
        raise UndefinedCorrelationError("zero-variance series")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def fisher_z(r: float, n_obs: int) -> float:
    """Variance-stabilized score ``sqrt(n_obs - 3) * atanh(r)``.

    The transform is asymptotically Normal with unit variance under the
    common-correlation hypothesis.
    """
    if n_obs < 4:
        raise InsufficientObservationsError(
            f"Fisher variance needs n_obs >= 4, got {n_obs}"
        )
    if abs(r) >= 1.0:
        raise InfiniteTransformError(f"transform diverges at r={r}")
    if abs(r) > NEAR_DEGENERATE_R:
        warnings.warn(f"near-degenerate correlation r={r}", stacklevel=2)
    atanh_r = 0.5 * math.log((1.0 + r) / (1.0 - r))
    return math.sqrt(n_obs - 3) * atanh_r


def sample_pairs(panel: ReturnsPanel, trials: int, seed: int) -> list[PairSample]:
    """Draw ``trials`` random asset pairs and correlate their return series.

    Each draw picks two distinct assets uniformly; pairs may repeat across
    draws (the draw count is tiny next to the pair population for any real
    universe).  Deterministic for a fixed seed, ordered by trial index.
    """
    if panel.n_assets < 2:
        raise ValidationError("pair sampling needs at least two assets")
    if panel.n_periods < 4:
        raise ValidationError("pair sampling needs at least four periods")
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    t = panel.n_periods
    out: list[PairSample] = []
    for _ in range(trials):
        i, j = (int(v) for v in rng.choice(panel.n_assets, size=2, replace=False))
        r = pearson(panel.returns[:, i], panel.returns[:, j])
        out.append(
            PairSample(pair=(i, j), pearson_r=r, fisher_z=fisher_z(r, t), n_obs=t)
        )
    return out


def _normal_cdf(t: float) -> float:
    return 0.5 * (1.0 + math.erf(t / math.sqrt(2.0)))


def kolmogorov_pvalue(lam: float) -> float:
    """Asymptotic Kolmogorov tail ``Q(lam) = 2 sum (-1)^(k-1) exp(-2 k^2 lam^2)``.

    Capped at 100 terms with early exit once terms drop below 1e-12; the
    result is clipped into [0, 1].
    """
    # below this the tail is 1 to well past double precision and the
    # alternating series cannot settle within the term cap
    if lam < 0.1:
        return 1.0
    total = 0.0
    for k in range(1, KS_SERIES_TERMS + 1):
        term = math.exp(-2.0 * k * k * lam * lam)
        total += term if k % 2 == 1 else -term
        if term < KS_SERIES_TOL:
            break
    return min(1.0, max(0.0, 2.0 * total))


def ks_test_normal(samples, mean: float, sd: float) -> KsResult:
    """Two-sided KS distance of ``samples`` from Normal(mean, sd).

    Uses the classic one-sample statistic over the sorted sample and the
    asymptotic Kolmogorov distribution for the p-value (adequate for the
    required n >= 8).
    """
    x = np.sort(np.asarray(samples, dtype=float))
    n = x.size
    if n < 8:
        raise InsufficientObservationsError(f"KS test needs >= 8 samples, got {n}")
    if sd <= 0:
        raise ValidationError("sd must be positive")
    u = np.array([_normal_cdf((v - mean) / sd) for v in x])
    i = np.arange(1, n + 1)
    d_plus = np.max(i / n - u)
    d_minus = np.max(u - (i - 1) / n)
    d = float(max(d_plus, d_minus))
    return KsResult(d_statistic=d, p_value=kolmogorov_pvalue(math.sqrt(n) * d))
