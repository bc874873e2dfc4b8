"""The online protocol: tune, train, then predict / observe / absorb / adapt."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .aci import ClampEvent, MultiStepACI, extract_errors
from .config import ExperimentConfig, dump_config
from .crr import compute_components, predict_intervals
from .errors import ConfigError, InsufficientDataError
from .evaluation import TRACE_COLUMNS, BoundReport, RunMetrics, check_bounds, render_table
from .ingest import SeriesFrame, load_csv, window_matrices
from .ridge import RidgeState, gcv_tune

logger = logging.getLogger(__name__)


@dataclass
class RunResult:
    config: ExperimentConfig
    ridge_param: float
    metrics: RunMetrics
    bounds: BoundReport
    trace: list[tuple] = field(default_factory=list)
    eps_path: np.ndarray = None  # (ticks, h): control input in force at each prediction
    events: list[tuple] = field(default_factory=list)
    clamp_log: list[ClampEvent] = field(default_factory=list)
    aci_checkpoint: str = ""

    @property
    def n_test(self) -> int:
        return int(self.metrics.trials[0])


def generate_series(kind: str, n: int, seed: int = 0) -> SeriesFrame:
    """Synthetic hourly series with a noise 'temperature' covariate."""
    rng = np.random.default_rng(seed)
    noise = rng.standard_normal(n)
    if kind == "iid-gaussian":
        w = noise
    elif kind == "ar1":
        w = np.empty(n)
        w[0] = noise[0]
        for k in range(1, n):
            w[k] = 0.7 * w[k - 1] + noise[k]
    elif kind == "mean-shift":
        w = noise + np.where(np.arange(n) >= n // 2, 3.0, 0.0)
    elif kind == "trend":
        w = noise + 0.01 * np.arange(n)
    else:
        raise ConfigError(f"unknown generator {kind!r}")
    temperature = 20.0 + 5.0 * rng.standard_normal(n)
    stamps = np.datetime64("2020-01-01T00:00:00") + np.arange(n) * np.timedelta64(1, "h")
    return SeriesFrame.from_arrays(stamps, w, temperature=temperature)


def run_on_frame(frame: SeriesFrame, cfg: ExperimentConfig) -> RunResult:
    """Run the online protocol over ``frame``.

    The first ``cfg.history_length`` values form the initial history. Pairs whose
    labels lie entirely inside it seed the ridge state; forecasting starts at
    the origin whose last lag is the last history value. At every tick the
    next raw value arrives, the pending forecasts it settles are scored, the
    pair whose label it completes is absorbed (``refit = online``) and the
    control inputs are updated. After the last origin the remaining values
    are consumed so every issued forecast gets scored.
    """
    win = cfg.window
    p, h = win.p_lags, win.horizon
    X, Y = window_matrices(frame, win)
    m = len(X)
    w = frame.demand
    start = cfg.history_length - p
    n_ready = cfg.history_length - p - h + 1
    if start >= m:
        raise InsufficientDataError(
            f"history of {cfg.history_length} values leaves no test origins in a series of length {len(frame)}"
        )

    if cfg.ridge is None:
        if n_ready < 2:
            raise InsufficientDataError("GCV needs at least 2 complete training pairs")
        a = gcv_tune(X[:n_ready], Y[:n_ready], cfg.gcv_grid)
    else:
        a = cfg.ridge
    ridge = RidgeState(a, X.shape[1], h)
    ridge.absorb_many(X[:n_ready], Y[:n_ready])
    next_absorb = n_ready

    aci_cfg = cfg.aci_config()
    aci = MultiStepACI(aci_cfg)
    metrics = RunMetrics(h, cfg.eps)
    trace: list[tuple] = []
    events: list[tuple] = []
    eps_path = []

    for t in range(start, m + h - 1):
        arrival = t + p  # raw index of the value revealed this tick
        if t < m:
            n = ridge.n_train + 1
            if cfg.clamp:
                _apply_floor(aci, 2.0 / n)
            eps_t = aci.eps_t
            eps_path.append(eps_t)
            view = ridge.peek_with_test(X[t])
            iv = predict_intervals(compute_components(view), eps_t, origin_index=t, allow_infinite=not cfg.clamp)
            aci.record(iv)
            events.append(("predict", arrival - 1, t, 0))

        y = w[arrival]
        errs = aci.observe(t, y, floor=None, require_current=t < m) if cfg.adaptive else _score_only(aci, t, y, t < m)
        for i, e in enumerate(errs, start=1):
            if e is None:
                continue
            origin = t - i + 1
            iv = aci.buffer.get(origin)
            lo, hi = float(iv.lower[i - 1]), float(iv.upper[i - 1])
            width = hi - lo
            trace.append((origin, i, lo, hi, float(iv.eps[i - 1]), int(e == 0.0), width))
            metrics.accumulate(i, e, width)
            events.append(("score", arrival, origin, i))

        if cfg.refit == "online":
            done = min(t - h + 1, m - 1)
            while next_absorb <= done:
                ridge.absorb(X[next_absorb], Y[next_absorb])
                events.append(("absorb", arrival, next_absorb, h))
                next_absorb += 1

    metrics.clamp_count = len(aci.state.clamp_log)
    bounds = check_bounds(metrics, aci_cfg)
    if bounds.clamped:
        logger.warning("clamping bound %d time(s); finite-sample bounds are advisory", metrics.clamp_count)
    elif not bounds.all_satisfied:
        logger.error("finite-sample bound violated without clamping:\n%s", bounds.render())
    return RunResult(
        config=cfg,
        ridge_param=a,
        metrics=metrics,
        bounds=bounds,
        trace=trace,
        eps_path=np.array(eps_path),
        events=events,
        clamp_log=list(aci.state.clamp_log),
        aci_checkpoint=aci.state.to_text(),
    )


def _apply_floor(aci: MultiStepACI, floor: float) -> None:
    state = aci.state
    low = state.eps_t < floor
    for i in np.flatnonzero(low):
        state.clamp_log.append(ClampEvent(state.t, int(i) + 1, float(state.eps_t[i]), floor))
    state.eps_t = np.where(low, floor, state.eps_t)


def _score_only(aci: MultiStepACI, t: int, y: float, require_current: bool):
    return extract_errors(aci.buffer, t, y, require_current=require_current)


def run_experiment(cfg: ExperimentConfig) -> RunResult:
    if not cfg.data_path:
        raise ConfigError("config has no [data] path")
    frame = load_csv(cfg.data_path, cfg.schema)
    result = run_on_frame(frame, cfg)
    if cfg.output_dir:
        write_outputs(result, cfg.output_dir)
    return result


def run_synthetic(cfg: ExperimentConfig) -> RunResult:
    n = cfg.history_length + cfg.steps + cfg.h - 1
    frame = generate_series(cfg.generator, n, cfg.seed)
    result = run_on_frame(frame, cfg)
    if cfg.output_dir:
        write_outputs(result, cfg.output_dir)
    return result


def _cell(v) -> str:
    return repr(v) if isinstance(v, float) else str(v)


def write_trace(rows, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(TRACE_COLUMNS)
        for r in rows:
            writer.writerow([_cell(v) for v in r])


def write_outputs(result: RunResult, out_dir: str | Path) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_trace(result.trace, out / "trace.csv")
    text, summary_csv = render_table(result.metrics)
    (out / "summary.csv").write_text(summary_csv)
    (out / "summary.txt").write_text(text)
    (out / "bounds.txt").write_text(f"ridge a = {result.ridge_param!r}\n" + result.bounds.render())
    (out / "config.ini").write_text(dump_config(result.config))
    (out / "aci_state.txt").write_text(result.aci_checkpoint)
    with open(out / "clamp_log.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("tick", "step", "raw", "clamped"))
        for e in result.clamp_log:
            writer.writerow((e.t, e.step, repr(e.raw), repr(e.clamped)))
    with open(out / "control_inputs.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        h = result.config.h
        writer.writerow(["tick"] + [f"eps_{i}" for i in range(1, h + 1)])
        for k, row in enumerate(result.eps_path):
            writer.writerow([k] + [repr(float(v)) for v in row])
    with open(out / "events.csv", "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(("kind", "time", "pair", "step"))
        writer.writerows(result.events)
    return out
