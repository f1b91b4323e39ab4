"""CSV ingestion, thresholding and plain-text output helpers."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .model import ExceedanceSeries

__all__ = [
    "RawSeries",
    "IngestError",
    "MISSING_MARKERS",
    "ingest_csv",
    "to_exceedances",
    "write_series_csv",
    "write_table_csv",
    "dump_json",
    "fmt",
]

MISSING_MARKERS = ("", "NA")
QUANTILE_METHOD = "linear"


class IngestError(ValueError):
    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


@dataclass
class RawSeries:
    """Observed series; missing values are NaN and never imputed."""

    times: np.ndarray
    values: np.ndarray
    source: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.times)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.values)


def _parse_time(text):
    try:
        return float(text)
    except ValueError:
        pass
    stamp = datetime.fromisoformat(text)
    if stamp.tzinfo is None:
        stamp = stamp.replace(tzinfo=timezone.utc)
    # days since the Unix epoch
    return stamp.timestamp() / 86400.0


def ingest_csv(path, time_column: str = "time", value_column: str = "value") -> RawSeries:
    """Read a headed CSV file with a time and a value column.

    Times may be numbers or ISO-8601 dates (converted to days since
    1970-01-01).  Empty fields and ``NA`` mark missing values.  Lines
    starting with ``#`` are comments.
    """
    path = Path(path)
    times, values = [], []
    with path.open(newline="") as fh:
        rows = ((n, line) for n, line in enumerate(fh, start=1) if not line.lstrip().startswith("#"))
        numbered = list(rows)
    if not numbered:
        raise IngestError(f"{path} is empty")
    reader = csv.reader([line for _, line in numbered])
    header = next(reader)
    header = [h.strip() for h in header]
    for col in (time_column, value_column):
        if col not in header:
            raise IngestError(f"column {col!r} not found in header {header}", numbered[0][0])
    it, iv = header.index(time_column), header.index(value_column)
    last_t, last_line = None, None
    for (lineno, _), row in zip(numbered[1:], reader):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise IngestError(f"expected {len(header)} fields, got {len(row)}", lineno)
        t_text, v_text = row[it].strip(), row[iv].strip()
        try:
            t = _parse_time(t_text)
        except ValueError:
            raise IngestError(f"malformed timestamp {t_text!r}", lineno) from None
        if v_text in MISSING_MARKERS:
            v = np.nan
        else:
            try:
                v = float(v_text)
            except ValueError:
                raise IngestError(f"malformed value {v_text!r}", lineno) from None
            if not np.isfinite(v):
                raise IngestError(f"non-finite value {v_text!r}", lineno)
        if last_t is not None:
            if t == last_t:
                raise IngestError(f"duplicate timestamp {t_text!r} (also on line {last_line})", lineno)
            if t < last_t:
                raise IngestError(f"timestamps not increasing ({t_text!r} after line {last_line})", lineno)
        last_t, last_line = t, lineno
        times.append(t)
        values.append(v)
    values = np.array(values, dtype=float)
    if len(values) == 0 or np.all(np.isnan(values)):
        raise IngestError(f"{path} has no non-missing values")
    source = {"path": str(path), "time_column": time_column, "value_column": value_column}
    return RawSeries(np.array(times), values, source)


def to_exceedances(raw: RawSeries, threshold: float = None, percentile: float = None) -> ExceedanceSeries:
    """Apply ``X = max(Y - u, 0)`` with an absolute or percentile threshold.

    Percentiles use linear interpolation between order statistics of the
    non-missing values.  Missing observations are dropped but keep their
    position in ``index``.
    """
    if (threshold is None) == (percentile is None):
        raise ValueError("give exactly one of threshold or percentile")
    ok = ~np.isnan(raw.values)
    if not np.any(ok):
        raise ValueError("series has no non-missing values")
    y = raw.values[ok]
    meta = {"n_missing": int(np.count_nonzero(~ok)), "source": dict(raw.source)}
    if percentile is not None:
        if not 0 < percentile < 1:
            raise ValueError("percentile must lie in (0, 1)")
        threshold = float(np.quantile(y, percentile, method=QUANTILE_METHOD))
        meta.update(percentile=float(percentile), quantile_method=QUANTILE_METHOD)
    series = ExceedanceSeries.from_observations(
        raw.times[ok], y, float(threshold), index=np.flatnonzero(ok), metadata=meta
    )
    if series.n_pos == 0:
        msg = f"no observation exceeds the threshold {threshold}"
        series.metadata["warning"] = msg
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
    series.metadata.update(n_exceedances=series.n_pos, n_zeros=series.n_zero)
    return series


def fmt(x) -> str:
    """Locale-independent round-trip float formatting (17 significant digits)."""
    if x is None:
        return "NA"
    x = float(x)
    if np.isnan(x):
        return "NA"
    return format(x, ".17g")


def _comment(config: dict) -> str:
    return "# config: " + json.dumps(config, sort_keys=True, default=_json_default) + "\n"


def write_table_csv(path, columns: dict, config: dict = None):
    """Write equal-length columns with an optional leading config comment."""
    names = list(columns)
    cols = [np.asarray(columns[n]) for n in names]
    with open(path, "w", newline="") as fh:
        if config is not None:
            fh.write(_comment(config))
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(names)
        for row in zip(*cols):
            writer.writerow([fmt(v) for v in row])


def write_series_csv(path, series: ExceedanceSeries, config: dict = None):
    write_table_csv(path, {"time": series.times, "value": series.values}, config)


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
