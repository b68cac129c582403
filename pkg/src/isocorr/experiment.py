"""Randomized effective-degrees-of-freedom experiment over a returns panel.

Each trial draws a random portfolio size, samples that many distinct assets,
and compares the diagonal-only variance of the equal-weight portfolio with
its realized variance, yielding one ``n_star`` observation.  Over many
trials the scatter of ``n_star`` against ``n`` discriminates covariance
structures: a common-correlation universe flattens toward ``1/rho`` while a
diversifiable factor universe keeps rising.  A least-squares line over the
large-n region quantifies which regime the data is in.

Trials use independent per-trial random streams spawned from the master
seed, so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .cross_section import rho_hat_from_nstar, iso_nstar_curve
from .errors import InsufficientObservationsError, ValidationError
from .market_data import ReturnsPanel, trailing_periods

DEGENERATE_VP = 1e-15
SLOPE_T_THRESHOLD = 2.0


@dataclass(frozen=True)
class DofTrial:
    """One experiment draw: portfolio size, variance split, and n_star.

    Degenerate trials (vanishing portfolio variance) carry ``n_star = nan``
    and are excluded from fits.
    """

    index: int
    n: int
    member_ids: tuple[str, ...]
    v_i: float
    v_p: float
    n_star: float
    degenerate: bool = False


@dataclass(frozen=True)
class OlsFit:
    """Straight-line fit of n_star on n with the standard diagnostics."""

    slope: float
    intercept: float
    slope_se: float
    intercept_se: float
    r_squared: float
    f_statistic: float
    t_slope: float
    t_intercept: float
    n_points: int
    fit_range: tuple[int, int]


@dataclass(frozen=True)
class ModelVerdict:
    """Correlation and factor-count readings of the experiment.

    ``rho_hat_intercept`` interprets the fitted intercept through the
    large-portfolio limit ``n_star -> 1/rho`` (an interpretation, not an
    identity of the factor-model algebra).  ``k_hat_slope = 1/slope`` is
    only meaningful when the slope is significant; ``slope_significant``
    records whether its t-score clears 2.
    """

    rho_hat_terminal: float
    rho_hat_intercept: float | None
    k_hat_asymptote: float
    k_hat_slope: float
    slope_significant: bool
    terminal_n_star: float


def sample_variance(x) -> float:
    """Unbiased sample variance (n-1 denominator)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise InsufficientObservationsError("sample variance needs length >= 2")
    return float(np.var(x, ddof=1))


def _trial_from_members(panel: ReturnsPanel, index: int, members: np.ndarray) -> DofTrial:
    n = members.size
    sub = panel.returns[:, members]
    v_i = float(np.sum(np.var(sub, axis=0, ddof=1))) / (n * n)
    v_p = float(np.var(sub.mean(axis=1), ddof=1))
    ids = tuple(panel.asset_ids[j] for j in members)
    if v_p < DEGENERATE_VP:
        return DofTrial(index, n, ids, v_i, v_p, math.nan, degenerate=True)
    return DofTrial(index, n, ids, v_i, v_p, n * v_i / v_p)


def run_dof_experiment(panel: ReturnsPanel, trials: int, seed: int) -> list[DofTrial]:
    """Run the randomized n_star(n) experiment.

    Per trial: n ~ Uniform{1..n_assets}, then n distinct assets sampled
    uniformly; per-asset sample variances give ``v_i`` and the equal-weight
    portfolio series gives ``v_p``.  Deterministic under ``seed`` with an
    independent spawned stream per trial.
    """
    if trials < 1:
        raise ValidationError("trials must be >= 1")
    if panel.n_periods < 2:
        raise ValidationError("need at least two return periods")
    n_max = panel.n_assets
    streams = np.random.SeedSequence(seed).spawn(trials)
    out = []
    for t, stream in enumerate(streams):
        rng = np.random.default_rng(stream)
        n = int(rng.integers(1, n_max + 1))
        members = np.sort(rng.choice(n_max, size=n, replace=False))
        out.append(_trial_from_members(panel, t, members))
    return out


def terminal_nstar(panel: ReturnsPanel) -> float:
    """n_star of the single full-universe equal-weight portfolio.

    Deterministic, so it anchors the terminal value better than averaging
    the largest random trials.
    """
    trial = _trial_from_members(panel, -1, np.arange(panel.n_assets))
    if trial.degenerate:
        raise ValidationError("full-universe portfolio variance is degenerate")
    return trial.n_star


def default_fit_window(n_max: int) -> tuple[int, int]:
    """Large-n window [ceil(0.6 n_max), n_max] used when none is given."""
    return (math.ceil(0.6 * n_max), n_max)


def fit_large_n(trials: list[DofTrial], n_min: int, n_max: int) -> OlsFit:
    """Least squares of n_star on n over trials with n in [n_min, n_max].

    Degenerate trials are excluded.  Reports coefficient standard errors,
    R^2, the regression F statistic (1, n-2) and both t-scores.
    """
    pts = [
        (t.n, t.n_star)
        for t in trials
        if not t.degenerate and n_min <= t.n <= n_max
    ]
    if len(pts) < 3:
        raise ValidationError(
            f"need at least 3 usable trials in [{n_min}, {n_max}], got {len(pts)}"
        )
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    sxx = float(np.sum((x - x.mean()) ** 2))
    if sxx == 0.0:
        raise ValidationError("portfolio sizes in the window are all identical")
    m = x.size
    slope = float(np.sum((x - x.mean()) * (y - y.mean()))) / sxx
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(resid @ resid)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    sigma2 = ss_res / (m - 2)
    slope_se = math.sqrt(sigma2 / sxx)
    intercept_se = math.sqrt(sigma2 * (1.0 / m + x.mean() ** 2 / sxx))
    r_squared = 1.0 - ss_res / ss_tot if ss_tot > 0 else 0.0
    f_stat = (ss_tot - ss_res) / sigma2 if sigma2 > 0 else math.inf
    return OlsFit(
        slope=slope,
        intercept=intercept,
        slope_se=slope_se,
        intercept_se=intercept_se,
        r_squared=r_squared,
        f_statistic=f_stat,
        t_slope=slope / slope_se if slope_se > 0 else math.inf,
        t_intercept=intercept / intercept_se if intercept_se > 0 else math.inf,
        n_points=m,
        fit_range=(n_min, n_max),
    )


def model_curves(
    rho_hat: float, k_hat: float, n_grid
) -> tuple[np.ndarray, np.ndarray]:
    """Theoretical n_star(n) overlays: common-correlation and n/k curves."""
    if k_hat < 1:
        raise ValidationError(f"k_hat must be >= 1, got {k_hat}")
    ns = np.asarray(n_grid, dtype=float)
    iso = iso_nstar_curve(rho_hat, n_grid)
    return iso, ns / k_hat


def verdict(
    trials: list[DofTrial],
    fit: OlsFit,
    n_max: int,
    terminal_n_star: float | None = None,
) -> ModelVerdict:
    """Read correlation and factor-count estimates out of the experiment.

    The terminal n_star defaults to the mean over trials at n == n_max when
    not supplied directly (the full-universe portfolio is the better
    anchor; pass ``terminal_nstar(panel)``).
    """
    if terminal_n_star is None:
        at_max = [t.n_star for t in trials if t.n == n_max and not t.degenerate]
        if not at_max:
            raise ValidationError(
                f"no trials at n = {n_max}; pass terminal_n_star explicitly"
            )
        terminal_n_star = float(np.mean(at_max))
    rho_terminal = rho_hat_from_nstar(n_max, terminal_n_star)
    rho_intercept = 1.0 / fit.intercept if fit.intercept > 0 else None
    return ModelVerdict(
        rho_hat_terminal=rho_terminal,
        rho_hat_intercept=rho_intercept,
        k_hat_asymptote=n_max / terminal_n_star,
        k_hat_slope=1.0 / fit.slope if fit.slope != 0 else math.inf,
        slope_significant=fit.t_slope >= SLOPE_T_THRESHOLD,
        terminal_n_star=terminal_n_star,
    )


@dataclass(frozen=True)
class NdofResult:
    """Everything one experiment run produces: trials, fit, verdict, curves data."""

    trials: list[DofTrial]
    fit: OlsFit | None
    verdict: ModelVerdict | None
    terminal_n_star: float
    n_max: int
    window: int | None
    warning: str | None


def run_ndof_pipeline(
    panel: ReturnsPanel,
    trials: int,
    seed: int,
    fit_min: int | None = None,
    fit_max: int | None = None,
    window: int | None = None,
) -> NdofResult:
    """Experiment, large-n fit and verdict in one pass.

    ``window`` restricts variance estimation to the panel's trailing
    periods.  When too few usable trials land in the fit range the fit and
    verdict are skipped and the reason recorded, never raised.
    """
    if window is not None:
        panel = trailing_periods(panel, window)
    n_max = panel.n_assets
    lo, hi = default_fit_window(n_max)
    lo = fit_min if fit_min is not None else lo
    hi = fit_max if fit_max is not None else hi
    dof_trials = run_dof_experiment(panel, trials, seed)
    terminal = terminal_nstar(panel)
    fit = None
    result_verdict = None
    warning = None
    try:
        fit = fit_large_n(dof_trials, lo, hi)
    except ValidationError as exc:
        warning = f"fit skipped: {exc}"
    if fit is not None and n_max >= 2:
        result_verdict = verdict(dof_trials, fit, n_max, terminal_n_star=terminal)
    elif fit is not None:
        warning = "verdict skipped: universe too small to invert the n_star curve"
    return NdofResult(
        trials=dof_trials,
        fit=fit,
        verdict=result_verdict,
        terminal_n_star=terminal,
        n_max=n_max,
        window=window,
        warning=warning,
    )
