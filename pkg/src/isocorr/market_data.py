"""Price and return panels plus the canonical CSV contracts.

The canonical price file is long-form ``date,asset_id,adjusted_close`` with
ISO-8601 dates, dot-decimal prices, UTF-8 and LF line endings; returns files
use ``date,asset_id,return``.  Ingest is order-insensitive (rows may arrive
shuffled) and emitting a loaded panel reproduces a canonical-form input
byte for byte.

Missing (date, asset) combinations become gaps in the panel.  Gaps are never
patched silently: ``drop_incomplete_assets`` applies the documented policy
(drop thin assets, then keep only complete dates) and reports exactly what
it did.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from datetime import date
from pathlib import Path

import numpy as np

from .errors import ValidationError

log = logging.getLogger(__name__)

PRICE_HEADER = ["date", "asset_id", "adjusted_close"]
RETURNS_HEADER = ["date", "asset_id", "return"]


@dataclass(frozen=True)
class PricePanel:
    """Adjusted close prices, dates by assets; NaN marks a missing cell."""

    prices: np.ndarray
    asset_ids: tuple[str, ...]
    dates: tuple[date, ...]

    def __post_init__(self):
        p = np.asarray(self.prices, dtype=float)
        if p.ndim != 2:
            raise ValidationError("prices must be a 2-d array")
        if p.shape != (len(self.dates), len(self.asset_ids)):
            raise ValidationError(
                f"price shape {p.shape} does not match "
                f"{len(self.dates)} dates x {len(self.asset_ids)} assets"
            )
        finite = p[~np.isnan(p)]
        if np.any(finite <= 0) or np.any(~np.isfinite(finite)):
            raise ValidationError("prices must be positive and finite")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValidationError("dates must be strictly increasing")
        if len(set(self.asset_ids)) != len(self.asset_ids):
            raise ValidationError("duplicate asset identifiers")
        object.__setattr__(self, "prices", p)
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "dates", tuple(self.dates))

    @property
    def n_assets(self) -> int:
        return len(self.asset_ids)

    @property
    def n_dates(self) -> int:
        return len(self.dates)

    def missing_cells(self) -> int:
        return int(np.isnan(self.prices).sum())

    def is_complete(self) -> bool:
        return self.missing_cells() == 0


@dataclass(frozen=True)
class ReturnsPanel:
    """Per-period simple returns, periods by assets, with no missing values."""

    returns: np.ndarray
    asset_ids: tuple[str, ...]
    period_stamps: tuple[date, ...]

    def __post_init__(self):
        r = np.asarray(self.returns, dtype=float)
        if r.ndim != 2:
            raise ValidationError("returns must be a 2-d array")
        if r.shape != (len(self.period_stamps), len(self.asset_ids)):
            raise ValidationError(
                f"returns shape {r.shape} does not match "
                f"{len(self.period_stamps)} periods x {len(self.asset_ids)} assets"
            )
        if np.any(~np.isfinite(r)):
            raise ValidationError("returns must be finite with no missing values")
        if any(b <= a for a, b in zip(self.period_stamps, self.period_stamps[1:])):
            raise ValidationError("period stamps must be strictly increasing")
        if len(set(self.asset_ids)) != len(self.asset_ids):
            raise ValidationError("duplicate asset identifiers")
        object.__setattr__(self, "returns", r)
        object.__setattr__(self, "asset_ids", tuple(self.asset_ids))
        object.__setattr__(self, "period_stamps", tuple(self.period_stamps))

    @property
    def n_assets(self) -> int:
        return len(self.asset_ids)

    @property
    def n_periods(self) -> int:
        return len(self.period_stamps)


@dataclass(frozen=True)
class IngestReport:
    """What the completeness policy did to a freshly loaded panel."""

    assets_loaded: int
    assets_dropped: int
    drop_reasons: dict[str, str] = field(default_factory=dict)
    periods: int = 0
    dates_dropped: int = 0
    policy: str = "complete-case-dates"

    def to_dict(self) -> dict:
        return {
            "assets_loaded": self.assets_loaded,
            "assets_dropped": self.assets_dropped,
            "drop_reasons": dict(sorted(self.drop_reasons.items())),
            "periods": self.periods,
            "dates_dropped": self.dates_dropped,
            "policy": self.policy,
        }


def _parse_long_csv(path: Path, header: list[str], value_check) -> tuple[
    dict[tuple[date, str], float], list[str], list[date]
]:
    """Shared strict reader for the long-form contracts."""
    try:
        handle = open(path, "r", encoding="utf-8", newline="")
    except OSError as exc:
        raise FileNotFoundError(f"cannot open input file: {path}") from exc
    cells: dict[tuple[date, str], float] = {}
    with handle:
        reader = csv.reader(handle)
        try:
            got_header = next(reader)
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if got_header != header:
            raise ValidationError(
                f"{path}: expected header {','.join(header)!r}, "
                f"got {','.join(got_header)!r}"
            )
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3:
                raise ValidationError(
                    f"{path}: line {lineno}: expected 3 fields, got {len(row)}"
                )
            raw_date, asset_id, raw_value = row
            try:
                stamp = date.fromisoformat(raw_date)
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}: bad ISO date {raw_date!r}"
                ) from None
            if not asset_id:
                raise ValidationError(f"{path}: line {lineno}: empty asset id")
            try:
                value = float(raw_value)
            except ValueError:
                raise ValidationError(
                    f"{path}: line {lineno}: bad number {raw_value!r}"
                ) from None
            value_check(value, lineno)
            key = (stamp, asset_id)
            if key in cells:
                raise ValidationError(
                    f"{path}: line {lineno}: duplicate entry for "
                    f"({raw_date}, {asset_id})"
                )
            cells[key] = value
    if not cells:
        raise ValidationError(f"{path}: no data rows")
    assets = sorted({a for _, a in cells})
    dates = sorted({d for d, _ in cells})
    return cells, assets, dates


def load_price_csv(path: str | Path) -> PricePanel:
    """Read a canonical price file into a panel, validating as it goes.

    Parsing is locale-independent (dot decimals, ISO dates); rows may be in
    any order.  Errors name the offending line.  Gaps are kept as NaN and
    logged, never dropped here.
    """
    path = Path(path)

    def check(value: float, lineno: int):
        if not value > 0 or not np.isfinite(value):
            raise ValidationError(
                f"{path}: line {lineno}: non-positive price {value!r}"
            )

    cells, assets, dates = _parse_long_csv(path, PRICE_HEADER, check)
    matrix = np.full((len(dates), len(assets)), np.nan)
    asset_index = {a: j for j, a in enumerate(assets)}
    date_index = {d: i for i, d in enumerate(dates)}
    for (stamp, asset_id), value in cells.items():
        matrix[date_index[stamp], asset_index[asset_id]] = value
    panel = PricePanel(prices=matrix, asset_ids=tuple(assets), dates=tuple(dates))
    gaps = panel.missing_cells()
    if gaps:
        log.warning("%s: %d missing (date, asset) cells", path, gaps)
    return panel


def load_returns_csv(path: str | Path) -> ReturnsPanel:
    """Read a canonical returns file; the panel must be complete."""
    path = Path(path)

    def check(value: float, lineno: int):
        if not np.isfinite(value):
            raise ValidationError(f"{path}: line {lineno}: non-finite return")

    cells, assets, dates = _parse_long_csv(path, RETURNS_HEADER, check)
    matrix = np.full((len(dates), len(assets)), np.nan)
    asset_index = {a: j for j, a in enumerate(assets)}
    date_index = {d: i for i, d in enumerate(dates)}
    for (stamp, asset_id), value in cells.items():
        matrix[date_index[stamp], asset_index[asset_id]] = value
    if np.isnan(matrix).any():
        raise ValidationError(f"{path}: returns file has missing (date, asset) cells")
    return ReturnsPanel(
        returns=matrix, asset_ids=tuple(assets), period_stamps=tuple(dates)
    )


def to_returns(panel: PricePanel) -> ReturnsPanel:
    """Simple returns ``P_t / P_(t-1) - 1`` per asset; one fewer row than prices."""
    if panel.n_dates < 2:
        raise ValidationError("need at least two price dates to form returns")
    if not panel.is_complete():
        raise ValidationError(
            f"panel has {panel.missing_cells()} missing cells; apply "
            "drop_incomplete_assets first"
        )
    rets = panel.prices[1:] / panel.prices[:-1] - 1.0
    return ReturnsPanel(
        returns=rets,
        asset_ids=panel.asset_ids,
        period_stamps=panel.dates[1:],
    )


def drop_incomplete_assets(
    panel: PricePanel, min_coverage: float
) -> tuple[PricePanel, IngestReport]:
    """Apply the completeness policy: thin assets out, then complete-case dates.

    Assets observed on fewer than ``min_coverage`` of the dates are removed;
    any dates still containing gaps are then dropped so the surviving panel
    is complete.  No imputation, ever.
    """
    if not 0 < min_coverage <= 1:
        raise ValidationError(f"min_coverage must be in (0, 1], got {min_coverage}")
    present = ~np.isnan(panel.prices)
    coverage = present.mean(axis=0)
    keep = coverage >= min_coverage
    reasons = {
        panel.asset_ids[j]: f"coverage {coverage[j]:.4f} < {min_coverage:.4f}"
        for j in np.flatnonzero(~keep)
    }
    if not keep.any():
        raise ValidationError("no assets satisfy the coverage requirement")
    kept_prices = panel.prices[:, keep]
    complete_dates = ~np.isnan(kept_prices).any(axis=1)
    if not complete_dates.any():
        raise ValidationError("no dates are complete after dropping assets")
    result = PricePanel(
        prices=kept_prices[complete_dates],
        asset_ids=tuple(np.array(panel.asset_ids)[keep]),
        dates=tuple(d for d, ok in zip(panel.dates, complete_dates) if ok),
    )
    report = IngestReport(
        assets_loaded=result.n_assets,
        assets_dropped=panel.n_assets - result.n_assets,
        drop_reasons=reasons,
        periods=result.n_dates,
        dates_dropped=panel.n_dates - result.n_dates,
    )
    return result, report


def _format_value(value: float) -> str:
    return str(float(value))


def write_price_csv(panel: PricePanel, path: str | Path) -> None:
    """Emit the canonical price file: sorted rows, LF endings, shortest floats."""
    _write_long_csv(
        path,
        PRICE_HEADER,
        panel.dates,
        panel.asset_ids,
        panel.prices,
    )


def write_returns_csv(panel: ReturnsPanel, path: str | Path) -> None:
    """Emit the canonical returns file with the same conventions as prices."""
    _write_long_csv(
        path,
        RETURNS_HEADER,
        panel.period_stamps,
        panel.asset_ids,
        panel.returns,
    )


def _write_long_csv(path, header, stamps, asset_ids, matrix) -> None:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for i, stamp in enumerate(stamps):
            for j, asset_id in enumerate(asset_ids):
                value = matrix[i, j]
                if np.isnan(value):
                    continue
                writer.writerow([stamp.isoformat(), asset_id, _format_value(value)])


def trailing_periods(panel: ReturnsPanel, window: int) -> ReturnsPanel:
    """Restrict a returns panel to its last ``window`` periods.

    Mirrors estimating over a short recent history (for daily data a
    since-last-rebalance window is around 20 observations).
    """
    if not 2 <= window <= panel.n_periods:
        raise ValidationError(
            f"window must be in [2, {panel.n_periods}], got {window}"
        )
    return ReturnsPanel(
        returns=panel.returns[-window:],
        asset_ids=panel.asset_ids,
        period_stamps=panel.period_stamps[-window:],
    )


def load_any_panel(path: str | Path, min_coverage: float = 1.0) -> ReturnsPanel:
    """Route a CSV to a complete returns panel by inspecting its header.

    Price files run through the completeness policy and are converted to
    returns; returns files load directly.
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8", newline="") as handle:
            first = handle.readline().strip()
    except OSError as exc:
        raise FileNotFoundError(f"cannot open input file: {path}") from exc
    if first == ",".join(RETURNS_HEADER):
        return load_returns_csv(path)
    panel = load_price_csv(path)
    complete, _ = drop_incomplete_assets(panel, min_coverage)
    return to_returns(complete)
