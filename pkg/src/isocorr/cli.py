"""Command-line surface: ingest, pairs, ndof, allocate, curves.

Every command writes its outputs (delimited data, JSON summaries, report
figures) under one run directory together with a manifest recording the
configuration, input digests and tool version.  Runs are deterministic:
the same seed and inputs produce byte-identical output trees.

Exit codes: 0 success, 2 validation error, 3 numerical error (singular or
degenerate model), 4 I/O error.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
import sys
from datetime import date
from pathlib import Path

import click
import numpy as np

from . import __version__
from . import corr_stats, cross_section, experiment, market_data
from .allocator import centering_factor, laplace_allocation, mvo_isotropic
from .cross_section import IsotropicModel
from .errors import (
    DegenerateVarianceError,
    InfeasibleCorrelationError,
    InfiniteTransformError,
    InsufficientObservationsError,
    IsocorrError,
    SingularMatrixError,
    UndefinedCorrelationError,
    ValidationError,
)

EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_NUMERICAL_ERRORS = (
    SingularMatrixError,
    DegenerateVarianceError,
    UndefinedCorrelationError,
    InfiniteTransformError,
    InsufficientObservationsError,
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return str(float(value))
    return str(value)


def _write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _finish_run(out_dir: Path, command: str, config: dict, inputs: list[Path]) -> None:
    """Write the manifest last, covering every file the run produced."""
    outputs = {
        p.name: _sha256(p)
        for p in sorted(out_dir.iterdir())
        if p.is_file() and p.name != "manifest.json"
    }
    _write_json(out_dir / "manifest.json", {
        "command": command,
        "version": __version__,
        "config": config,
        "inputs": {str(p): _sha256(p) for p in inputs},
        "outputs": outputs,
    })


def _out_dir(path: str) -> Path:
    out = Path(path)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _run_guarded(fn):
    try:
        fn()
    except _NUMERICAL_ERRORS as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except (ValidationError, InfeasibleCorrelationError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_VALIDATION)
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_IO)
    except IsocorrError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_NUMERICAL)


@click.group()
@click.version_option(version=__version__, prog_name="isocorr")
def main():
    """Equicorrelation covariance toolkit."""


@main.command()
@click.option("--input", "input_path", required=True, help="Canonical price CSV.")
@click.option("--out", "out_path", required=True, help="Output directory.")
@click.option("--min-coverage", default=0.9, show_default=True,
              help="Minimum fraction of dates an asset must cover.")
def ingest(input_path, out_path, min_coverage):
    """Validate a price file and emit the canonical price/returns panels."""

    def run():
        out = _out_dir(out_path)
        panel = market_data.load_price_csv(input_path)
        gaps = panel.missing_cells()
        complete, report = market_data.drop_incomplete_assets(panel, min_coverage)
        returns = market_data.to_returns(complete)
        market_data.write_price_csv(complete, out / "prices.csv")
        market_data.write_returns_csv(returns, out / "returns.csv")
        _write_json(out / "ingest_report.json",
                    {"input_missing_cells": gaps, **report.to_dict()})
        _finish_run(out, "ingest",
                    {"input": str(input_path), "min_coverage": min_coverage},
                    [Path(input_path)])
        click.echo(f"ingested {complete.n_assets} assets over "
                   f"{complete.n_dates} dates -> {out}")

    _run_guarded(run)


@main.command()
@click.option("--input", "input_path", required=True,
              help="Returns CSV (or price CSV, converted on the fly).")
@click.option("--out", "out_path", required=True, help="Output directory.")
@click.option("--trials", default=5000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--ref-mean", type=click.Choice(["sample", "scaled"]),
              default="sample", show_default=True,
              help="Reference Normal mean: sample mean of the scores, or the "
                   "transformed mean correlation scaled by sqrt(n_obs-3).")
@click.option("--bins", default=50, show_default=True)
@click.option("--min-coverage", default=0.9, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def pairs(input_path, out_path, trials, seed, ref_mean, bins, min_coverage, figures):
    """Sample random asset pairs and test their transformed correlations."""

    def run():
        out = _out_dir(out_path)
        panel = market_data.load_any_panel(input_path, min_coverage)
        samples = corr_stats.sample_pairs(panel, trials, seed)
        rs = np.array([s.pearson_r for s in samples])
        zs = np.array([s.fisher_z for s in samples])
        n_obs = samples[0].n_obs

        _write_csv(out / "pair_samples.csv",
                   ["asset_a", "asset_b", "r", "z", "n_obs"],
                   [(panel.asset_ids[s.pair[0]], panel.asset_ids[s.pair[1]],
                     s.pearson_r, s.fisher_z, s.n_obs) for s in samples])

        r_counts, r_edges = np.histogram(rs, bins=bins)
        z_counts, z_edges = np.histogram(zs, bins=bins)
        r_rows = [(r_edges[i], r_edges[i + 1], int(r_counts[i]))
                  for i in range(len(r_counts))]
        z_rows = [(z_edges[i], z_edges[i + 1], int(z_counts[i]))
                  for i in range(len(z_counts))]
        _write_csv(out / "rho_hist.csv", ["bin_left", "bin_right", "count"], r_rows)
        _write_csv(out / "fisher_hist.csv", ["bin_left", "bin_right", "count"], z_rows)

        mean_r = float(rs.mean())
        atanh_mean = math.atanh(mean_r) if abs(mean_r) < 1 else math.inf
        reference = (float(zs.mean()) if ref_mean == "sample"
                     else math.sqrt(n_obs - 3) * atanh_mean)
        summary = {
            "n_assets": panel.n_assets,
            "n_periods": panel.n_periods,
            "trials": trials,
            "seed": seed,
            "distinct_pairs": corr_stats.distinct_pair_count(panel.n_assets),
            "mean_r": mean_r,
            "atanh_mean_r": atanh_mean,
            "z_mean": float(zs.mean()),
            "z_std": float(zs.std(ddof=1)) if len(samples) > 1 else None,
            "ref_mean_mode": ref_mean,
            "ref_mean": reference,
            "ks_d": None,
            "ks_p": None,
        }
        if len(samples) >= 8:
            ks = corr_stats.ks_test_normal(zs, mean=reference, sd=1.0)
            summary["ks_d"] = ks.d_statistic
            summary["ks_p"] = ks.p_value
        else:
            summary["warning"] = "too few trials for a KS test"
        _write_json(out / "pairs_summary.json", summary)

        if figures:
            from . import figures as figs
            figs.render_histogram(r_rows, out / "rho_hist.png",
                                  "sampled pairwise correlations", "pearson r")
            figs.render_histogram(z_rows, out / "fisher_hist.png",
                                  "variance-stabilized correlation scores", "z",
                                  overlay_normal=(reference, 1.0))

        _finish_run(out, "pairs",
                    {"input": str(input_path), "trials": trials, "seed": seed,
                     "ref_mean": ref_mean, "bins": bins,
                     "min_coverage": min_coverage, "figures": figures},
                    [Path(input_path)])
        click.echo(f"sampled {trials} pairs from {panel.n_assets} assets -> {out}")

    _run_guarded(run)


@main.command()
@click.option("--input", "input_path", required=True,
              help="Returns CSV (or price CSV, converted on the fly).")
@click.option("--out", "out_path", required=True, help="Output directory.")
@click.option("--trials", default=1000, show_default=True)
@click.option("--seed", default=42, show_default=True)
@click.option("--fit-min", default=None, type=int,
              help="Lower edge of the large-n fit window (default 0.6 * n_max).")
@click.option("--fit-max", default=None, type=int,
              help="Upper edge of the large-n fit window (default n_max).")
@click.option("--window", default=None, type=int,
              help="Estimate variances over only the trailing W periods.")
@click.option("--min-coverage", default=0.9, show_default=True)
@click.option("--figures/--no-figures", default=True, show_default=True)
def ndof(input_path, out_path, trials, seed, fit_min, fit_max, window,
         min_coverage, figures):
    """Run the randomized effective-degrees-of-freedom experiment."""

    def run():
        out = _out_dir(out_path)
        panel = market_data.load_any_panel(input_path, min_coverage)
        result = experiment.run_ndof_pipeline(
            panel, trials, seed, fit_min=fit_min, fit_max=fit_max, window=window
        )
        if result.warning:
            click.echo(f"warning: {result.warning}", err=True)

        _write_csv(out / "dof_trials.csv",
                   ["trial", "n", "v_i", "v_p", "n_star", "degenerate"],
                   [(t.index, t.n, t.v_i, t.v_p, t.n_star, t.degenerate)
                    for t in result.trials])

        fit = result.fit
        v = result.verdict
        payload = {
            "n_max": result.n_max,
            "window": result.window,
            "trials": trials,
            "seed": seed,
            "terminal_n_star": result.terminal_n_star,
            "warning": result.warning,
            "fit": None if fit is None else {
                "slope": fit.slope,
                "intercept": fit.intercept,
                "slope_se": fit.slope_se,
                "intercept_se": fit.intercept_se,
                "r_squared": fit.r_squared,
                "f_statistic": fit.f_statistic,
                "t_slope": fit.t_slope,
                "t_intercept": fit.t_intercept,
                "n_points": fit.n_points,
                "fit_range": list(fit.fit_range),
            },
            "verdict": None if v is None else {
                "rho_hat_terminal": v.rho_hat_terminal,
                "rho_hat_intercept": v.rho_hat_intercept,
                "k_hat_asymptote": v.k_hat_asymptote,
                "k_hat_slope": v.k_hat_slope,
                "slope_significant": v.slope_significant,
                "terminal_n_star": v.terminal_n_star,
            },
        }
        _write_json(out / "ndof_fit.json", payload)

        curve_rows = _curve_rows(result)
        _write_csv(out / "curves.csv",
                   ["n", "n_star_iso", "n_star_factor", "n_star_ols"], curve_rows)

        if figures:
            from . import figures as figs
            points = [(t.n, t.n_star) for t in result.trials if not t.degenerate]
            figs.render_nstar_scatter(
                points, curve_rows,
                fit.fit_range if fit is not None else None,
                out / "nstar_scatter.png",
            )

        _finish_run(out, "ndof",
                    {"input": str(input_path), "trials": trials, "seed": seed,
                     "fit_min": fit_min, "fit_max": fit_max, "window": window,
                     "min_coverage": min_coverage, "figures": figures},
                    [Path(input_path)])
        click.echo(f"{trials} trials over {result.n_max} assets -> {out}")

    _run_guarded(run)


def _curve_rows(result: experiment.NdofResult):
    """Model overlays per n: common-correlation, n/k, and the fitted line."""
    n_grid = range(1, result.n_max + 1)
    terminal = result.terminal_n_star
    rho_hat = None
    if result.n_max >= 2 and 0 < terminal <= result.n_max:
        rho_hat = cross_section.rho_hat_from_nstar(result.n_max, terminal)
    k_hat = result.n_max / terminal if terminal > 0 else None
    rows = []
    for n in n_grid:
        iso = (n / (1.0 + (n - 1) * rho_hat)) if rho_hat is not None else math.nan
        fac = (n / k_hat) if k_hat is not None and k_hat >= 1 else math.nan
        ols = (result.fit.intercept + result.fit.slope * n
               if result.fit is not None else math.nan)
        rows.append((n, iso, fac, ols))
    return rows


@main.command()
@click.option("--input", "input_path", required=True,
              help="CSV with header asset_id,alpha,sigma.")
@click.option("--out", "out_path", required=True, help="Output directory.")
@click.option("--rho", required=True, type=float,
              help="Common correlation of the model.")
@click.option("--lambda", "lam", required=True, type=float,
              help="Risk-aversion multiplier.")
@click.option("--model", "model_kind", type=click.Choice(["mvo", "laplace"]),
              default="mvo", show_default=True)
def allocate(input_path, out_path, rho, lam, model_kind):
    """Closed-form optimal weights for an expected-return vector."""

    def run():
        out = _out_dir(out_path)
        asset_ids, alphas, sigmas = _load_alpha_csv(Path(input_path))
        model = IsotropicModel(n=len(asset_ids), rho=rho, sigmas=sigmas)
        if model_kind == "laplace":
            result = laplace_allocation(model, alphas, lam)
        else:
            result = mvo_isotropic(model, alphas, lam)
        _write_csv(out / "weights.csv", ["asset_id", "weight"],
                   list(zip(asset_ids, result.weights)))
        _write_json(out / "allocation.json", {
            "model": model_kind,
            "n": len(asset_ids),
            "rho": rho,
            "lambda": lam,
            "z_sq": result.z_sq,
            "omega": result.omega,
            "centering_factor": centering_factor(model.rho, model.n),
        })
        _finish_run(out, "allocate",
                    {"input": str(input_path), "rho": rho, "lambda": lam,
                     "model": model_kind},
                    [Path(input_path)])
        click.echo(f"{model_kind} weights for {len(asset_ids)} assets -> {out}")

    _run_guarded(run)


def _load_alpha_csv(path: Path):
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise FileNotFoundError(f"cannot open input file: {path}") from exc
    ids: list[str] = []
    alphas: list[float] = []
    sigmas: list[float] = []
    with handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header != ["asset_id", "alpha", "sigma"]:
            raise ValidationError(
                f"{path}: expected header 'asset_id,alpha,sigma', got {header}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(row)}"
                )
            try:
                alpha, sigma = float(row[1]), float(row[2])
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}: bad number in {row[1:]!r}"
                ) from None
            ids.append(row[0])
            alphas.append(alpha)
            sigmas.append(sigma)
    if not ids:
        raise ValidationError(f"{path}: no data rows")
    return ids, np.array(alphas), np.array(sigmas)


@main.command()
@click.option("--rho", "rhos", required=True, type=float, multiple=True,
              help="Common correlation (repeat for a grid).")
@click.option("--out", "out_path", required=True, help="Output directory.")
@click.option("--sigma", default=1.0, show_default=True)
@click.option("--n-max", default=10000, show_default=True)
@click.option("--n-points", default=60, show_default=True,
              help="Logarithmic grid resolution in n.")
@click.option("--figures/--no-figures", default=True, show_default=True)
def curves(rhos, out_path, sigma, n_max, n_points, figures):
    """Tabulate risk-partition and centering-factor curves over n."""

    def run():
        out = _out_dir(out_path)
        n_grid = np.unique(np.round(np.geomspace(1, n_max, n_points)).astype(int))
        if n_max > 1:
            from .equicorr import feasible_rho_range

            lo, hi = feasible_rho_range(n_max)
            for rho in rhos:
                if not lo <= rho <= hi:
                    raise ValidationError(
                        f"rho={rho} infeasible for the grid up to n={n_max} "
                        f"(range [{lo}, {hi}])"
                    )
        risk_rows = []
        centering_rows = []
        for rho in rhos:
            for n in n_grid:
                part = cross_section.risk_partition(sigma, rho, int(n))
                ratio = part.v_r / part.v_s if part.v_s > 0 else math.inf
                risk_rows.append((rho, int(n), part.v_s, part.v_r, ratio))
                centering_rows.append((rho, int(n), centering_factor(rho, int(n))))
        _write_csv(out / "risk_curves.csv",
                   ["rho", "n", "v_s", "v_r", "ratio"], risk_rows)
        _write_csv(out / "centering_curves.csv",
                   ["rho", "n", "factor"], centering_rows)
        if figures:
            from . import figures as figs
            figs.render_risk_curves(risk_rows, out / "risk_curves.png")
            figs.render_centering_curves(centering_rows,
                                         out / "centering_curves.png")
        _finish_run(out, "curves",
                    {"rho": list(rhos), "sigma": sigma, "n_max": n_max,
                     "n_points": n_points, "figures": figures},
                    [])
        click.echo(f"{len(risk_rows)} curve rows over {len(rhos)} rho values -> {out}")

    _run_guarded(run)


if __name__ == "__main__":
    main()
