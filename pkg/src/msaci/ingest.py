"""Loading an hourly demand series and turning it into MIMO supervised pairs."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Mapping, Sequence

import numpy as np
import pandas as pd

from .errors import ContinuityError, InsufficientDataError, ParseError, SchemaError

CALENDAR_FEATURES = ("week", "weekday", "hour")

DEFAULT_SCHEMA = {
    "timestamp": "Datetime",
    "demand": "Demand",
    "temperature": "Temperature",
}

_HOUR = np.timedelta64(1, "h")


def calendar_features(timestamps: np.ndarray) -> dict[str, np.ndarray]:
    """ISO week (1-53), weekday (Monday=0) and hour of day, as floats."""
    idx = pd.DatetimeIndex(timestamps)
    return {
        "week": idx.isocalendar().week.to_numpy(dtype=float),
        "weekday": idx.weekday.to_numpy(dtype=float),
        "hour": idx.hour.to_numpy(dtype=float),
    }


@dataclass(frozen=True)
class SeriesFrame:
    """Hourly target series with aligned exogenous and calendar features.

    ``exogenous`` holds raw covariates (e.g. ``temperature``) as well as the
    derived calendar columns, all keyed by name.
    """

    timestamps: np.ndarray
    demand: np.ndarray
    exogenous: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        n = len(self.timestamps)
        if len(self.demand) != n or any(len(v) != n for v in self.exogenous.values()):
            raise SchemaError("all sequences in a SeriesFrame must have equal length")
        _check_continuity(self.timestamps)
        if np.isnan(self.demand).any() or any(np.isnan(v).any() for v in self.exogenous.values()):
            raise ParseError("missing values after ingestion")

    def __len__(self) -> int:
        return len(self.timestamps)

    def feature(self, name: str) -> np.ndarray:
        try:
            return self.exogenous[name]
        except KeyError:
            raise SchemaError(f"unknown feature {name!r}; have {sorted(self.exogenous)}") from None

    @classmethod
    def from_arrays(cls, timestamps, demand, **covariates) -> "SeriesFrame":
        ts = np.asarray(timestamps, dtype="datetime64[s]")
        exog = {k: np.asarray(v, dtype=float) for k, v in covariates.items()}
        exog.update(calendar_features(ts))
        return cls(ts, np.asarray(demand, dtype=float), exog)


def _check_continuity(ts: np.ndarray) -> None:
    if len(ts) < 2:
        return
    steps = np.diff(ts.astype("datetime64[s]"))
    bad = np.flatnonzero(steps != _HOUR)
    if bad.size:
        i = int(bad[0])
        kind = "non-increasing" if steps[i] <= np.timedelta64(0, "s") else "gapped"
        raise ContinuityError(f"{kind} timestamps between rows {i} and {i + 1}: {ts[i]} -> {ts[i + 1]}")


def _numeric_column(df: pd.DataFrame, col: str) -> np.ndarray:
    values = pd.to_numeric(df[col], errors="coerce")
    bad = values.isna()
    if bad.any():
        row = int(np.flatnonzero(bad.to_numpy())[0])
        raise ParseError(f"cannot parse {col!r} value {df[col].iloc[row]!r} at row {row}", row=row)
    return values.to_numpy(dtype=float)


def load_csv(path: str | Path, schema: Mapping[str, str] | None = None) -> SeriesFrame:
    """Read a demand/temperature CSV.

    ``schema`` maps the logical names ``timestamp``, ``demand`` and
    ``temperature`` to column headers. A ``temperature`` entry of ``None``
    loads demand only. Rows are sorted by timestamp before the continuity
    check, so shuffled files load fine but duplicates and gaps do not.
    """
    schema = {**DEFAULT_SCHEMA, **(schema or {})}
    df = pd.read_csv(path, dtype=str, keep_default_na=False)
    wanted = [c for c in (schema["timestamp"], schema["demand"], schema.get("temperature")) if c]
    missing = [c for c in wanted if c not in df.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}; found {list(df.columns)}")

    ts = pd.to_datetime(df[schema["timestamp"]], errors="coerce")
    if ts.isna().any():
        row = int(np.flatnonzero(ts.isna().to_numpy())[0])
        raise ParseError(f"cannot parse timestamp {df[schema['timestamp']].iloc[row]!r} at row {row}", row=row)
    if ts.dt.tz is not None:
        ts = ts.dt.tz_localize(None)

    demand = _numeric_column(df, schema["demand"])
    covariates = {}
    if schema.get("temperature"):
        covariates["temperature"] = _numeric_column(df, schema["temperature"])

    order = np.argsort(ts.to_numpy(), kind="stable")
    stamps = ts.to_numpy()[order]
    return SeriesFrame.from_arrays(stamps, demand[order], **{k: v[order] for k, v in covariates.items()})


@dataclass(frozen=True)
class WindowConfig:
    p_lags: int
    horizon: int
    exogenous_features: tuple[str, ...] = ()

    def __post_init__(self):
        if self.p_lags < 1 or self.horizon < 1:
            raise ValueError(f"p_lags and horizon must be >= 1, got {self.p_lags}, {self.horizon}")
        object.__setattr__(self, "exogenous_features", tuple(self.exogenous_features))

    @property
    def dim(self) -> int:
        return self.p_lags + len(self.exogenous_features)


@dataclass(frozen=True)
class SupervisedPair:
    x: np.ndarray
    y: np.ndarray
    origin_index: int


def window_matrices(frame: SeriesFrame, cfg: WindowConfig) -> tuple[np.ndarray, np.ndarray]:
    """Object matrix (m, p) and label matrix (m, h), m = len - p - h + 1.

    Row t holds lags w[t:t+p] followed by the exogenous features at the
    forecast origin t+p-1; its label is w[t+p:t+p+h].
    """
    n, p, h = len(frame), cfg.p_lags, cfg.horizon
    if n < p + h:
        raise InsufficientDataError(f"series of length {n} is shorter than p_lags + horizon = {p + h}")
    m = n - p - h + 1
    w = frame.demand
    lags = np.lib.stride_tricks.sliding_window_view(w, p)[:m]
    labels = np.lib.stride_tricks.sliding_window_view(w, h)[p : p + m]
    cols = [lags] + [frame.feature(f)[p - 1 : p - 1 + m, None] for f in cfg.exogenous_features]
    return np.hstack(cols).astype(float), np.array(labels, dtype=float)


def make_windows(frame: SeriesFrame, cfg: WindowConfig) -> list[SupervisedPair]:
    X, Y = window_matrices(frame, cfg)
    return [SupervisedPair(X[t], Y[t], t) for t in range(len(X))]


def stream_pairs(frame: SeriesFrame, cfg: WindowConfig, start: int = 0) -> Iterator[SupervisedPair]:
    """Pairs from ``start`` onward in origin order.

    The caller is responsible for the label delay: component i of pair t
    is only observable once raw index t + p_lags + i - 1 has arrived.
    """
    X, Y = window_matrices(frame, cfg)
    if not 0 <= start < len(X):
        raise IndexError(f"start {start} outside [0, {len(X)})")
    for t in range(start, len(X)):
        yield SupervisedPair(X[t], Y[t], t)


def label_arrival_index(origin: int, step: int, cfg: WindowConfig) -> int:
    """Raw series index at which step ``step`` (1-based) of pair ``origin`` is revealed."""
    return origin + cfg.p_lags + step - 1


def pairs_as_arrays(pairs: Sequence[SupervisedPair]) -> tuple[np.ndarray, np.ndarray]:
    return np.vstack([q.x for q in pairs]), np.vstack([q.y for q in pairs])
