"""Error-rate / width accounting, finite-sample bound checks and summary tables."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .aci import AciConfig

TRACE_COLUMNS = ("t", "step", "lower", "upper", "eps_t", "covered", "width")
SUMMARY_COLUMNS = ("hour", "target_eps", "error_rate", "avg_length", "infinite_count")


@dataclass
class RunMetrics:
    h: int
    target_eps: Optional[Sequence[float]] = None
    trials: np.ndarray = field(init=False)
    errors: np.ndarray = field(init=False)
    width_sum: np.ndarray = field(init=False)
    finite_count: np.ndarray = field(init=False)
    infinite_count: np.ndarray = field(init=False)
    clamp_count: int = 0

    def __post_init__(self):
        self.trials = np.zeros(self.h, dtype=int)
        self.errors = np.zeros(self.h, dtype=int)
        self.width_sum = np.zeros(self.h)
        self.finite_count = np.zeros(self.h, dtype=int)
        self.infinite_count = np.zeros(self.h, dtype=int)

    def accumulate(self, step: int, err: int | float, width: float) -> "RunMetrics":
        """Record one scored forecast at 1-based ``step``."""
        if not 1 <= step <= self.h:
            raise ValueError(f"step {step} outside 1..{self.h}")
        i = step - 1
        self.trials[i] += 1
        self.errors[i] += int(err)
        if math.isinf(width):
            self.infinite_count[i] += 1
        else:
            self.width_sum[i] += width
            self.finite_count[i] += 1
        return self

    def error_rate(self, step: int) -> Optional[float]:
        i = step - 1
        return self.errors[i] / self.trials[i] if self.trials[i] else None

    def mean_width(self, step: int) -> Optional[float]:
        i = step - 1
        return self.width_sum[i] / self.finite_count[i] if self.finite_count[i] else None

    @property
    def error_rates(self) -> list[Optional[float]]:
        return [self.error_rate(i) for i in range(1, self.h + 1)]

    @property
    def mean_widths(self) -> list[Optional[float]]:
        return [self.mean_width(i) for i in range(1, self.h + 1)]

    @property
    def overall_error_rate(self) -> Optional[float]:
        total = self.trials.sum()
        return self.errors.sum() / total if total else None

    @property
    def overall_mean_width(self) -> Optional[float]:
        total = self.finite_count.sum()
        return self.width_sum.sum() / total if total else None


def accumulate(metrics: RunMetrics, step: int, err, width) -> RunMetrics:
    return metrics.accumulate(step, err, width)


def per_step_bound(eps: float, gamma: float, T: int, eps_first: float | None = None) -> float:
    """(max{e, 1 - e} + gamma) / (gamma T), e the level in force at the first update."""
    e = eps if eps_first is None else eps_first
    return (max(e, 1.0 - e) + gamma) / (gamma * T)


@dataclass(frozen=True)
class StepBound:
    step: int
    trials: int
    error_rate: float
    target: float
    deviation: float
    bound: float

    @property
    def satisfied(self) -> bool:
        return self.deviation <= self.bound


@dataclass(frozen=True)
class BoundReport:
    steps: tuple[StepBound, ...]
    overall_deviation: float
    overall_bound: float
    clamped: bool

    @property
    def overall_satisfied(self) -> bool:
        return self.overall_deviation <= self.overall_bound

    @property
    def all_satisfied(self) -> bool:
        return self.overall_satisfied and all(s.satisfied for s in self.steps)

    @property
    def advisory(self) -> bool:
        """Clamping was active, so the guarantees need not hold."""
        return self.clamped

    def render(self) -> str:
        lines = ["step  T       rate      target  deviation   bound       ok"]
        for s in self.steps:
            lines.append(
                f"{s.step:<5} {s.trials:<7} {s.error_rate:<9.5f} {s.target:<7.4g} "
                f"{s.deviation:<11.6f} {s.bound:<11.6f} {'yes' if s.satisfied else 'NO'}"
            )
        lines.append(
            f"overall deviation {self.overall_deviation:.6f} vs bound {self.overall_bound:.6f}: "
            f"{'yes' if self.overall_satisfied else 'NO'}"
        )
        if self.clamped:
            lines.append("clamping was active: bounds are advisory only")
        return "\n".join(lines) + "\n"


def check_bounds(metrics: RunMetrics, cfg: AciConfig, T: Optional[int] = None) -> BoundReport:
    """Compare per-step and averaged deviations with the ACI finite-sample bounds.

    Each step is judged over its own trial count unless ``T`` is given. The
    overall check uses the mean of the per-step rates against the mean
    target, bounded by the mean of the per-step bounds.
    """
    steps = []
    for i in range(cfg.h):
        n = int(T if T is not None else metrics.trials[i])
        if n == 0:
            raise ValueError(f"step {i + 1} has no trials")
        rate = metrics.errors[i] / metrics.trials[i] if T is None else metrics.errors[i] / n
        dev = abs(rate - cfg.eps[i])
        steps.append(StepBound(i + 1, n, float(rate), cfg.eps[i], float(dev), per_step_bound(cfg.eps[i], cfg.gamma[i], n)))
    overall_dev = abs(np.mean([s.error_rate - s.target for s in steps]))
    overall_bound = float(np.mean([s.bound for s in steps]))
    return BoundReport(tuple(steps), float(overall_dev), overall_bound, metrics.clamp_count > 0)


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.3g}"


def _opt_float(v) -> Optional[float]:
    return None if v is None else float(v)


def summary_rows(metrics: RunMetrics) -> list[dict]:
    eps = list(metrics.target_eps) if metrics.target_eps is not None else [None] * metrics.h
    rows = []
    for i in range(metrics.h):
        rows.append(
            dict(
                hour=str(i + 1),
                target_eps=_opt_float(eps[i]),
                error_rate=_opt_float(metrics.error_rate(i + 1)),
                avg_length=_opt_float(metrics.mean_width(i + 1)),
                infinite_count=int(metrics.infinite_count[i]),
            )
        )
    rows.append(
        dict(
            hour="overall",
            target_eps=float(np.mean(eps)) if eps[0] is not None else None,
            error_rate=_opt_float(metrics.overall_error_rate),
            avg_length=_opt_float(metrics.overall_mean_width),
            infinite_count=int(metrics.infinite_count.sum()),
        )
    )
    return rows


def render_table(metrics: RunMetrics) -> tuple[str, str]:
    """(aligned text table at 3 significant figures, full-precision CSV)."""
    if metrics.trials.sum() == 0:
        raise ValueError("no trials recorded")
    rows = summary_rows(metrics)

    grid = [["hour"] + [r["hour"] for r in rows]]
    grid.append(["eps"] + [_fmt(r["target_eps"]) for r in rows])
    grid.append(["error rate"] + [_fmt(r["error_rate"]) for r in rows])
    grid.append(["avg length"] + [_fmt(r["avg_length"]) for r in rows])
    if metrics.infinite_count.any():
        grid.append(["infinite"] + [str(r["infinite_count"]) for r in rows])
    widths = [max(len(row[c]) for row in grid) for c in range(len(grid[0]))]
    text = "\n".join("  ".join(cell.rjust(w) for cell, w in zip(row, widths)) for row in grid) + "\n"

    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for r in rows:
        writer.writerow(["" if r[c] is None else (repr(r[c]) if isinstance(r[c], float) else r[c]) for c in SUMMARY_COLUMNS])
    return text, buf.getvalue()


def parse_summary_csv(text: str) -> list[dict]:
    out = []
    for r in csv.DictReader(io.StringIO(text)):
        out.append(
            dict(
                hour=r["hour"],
                target_eps=float(r["target_eps"]) if r["target_eps"] else None,
                error_rate=float(r["error_rate"]) if r["error_rate"] else None,
                avg_length=float(r["avg_length"]) if r["avg_length"] else None,
                infinite_count=int(r["infinite_count"]),
            )
        )
    return out


def metrics_from_trace(path: str | Path, h: Optional[int] = None, target_eps=None) -> RunMetrics:
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    if h is None:
        h = max(int(r["step"]) for r in rows)
    m = RunMetrics(h, target_eps)
    for r in rows:
        m.accumulate(int(r["step"]), 1 - int(r["covered"]), float(r["width"]))
    return m
