"""Multi-step-ahead adaptive conformal inference.

One ACI recurrence per forecast step, eps_{t+1,i} = eps_{t,i} + gamma_i (eps_i - err_{t,i}),
fed from the diagonal of the pending-prediction bound matrices: the value
observed at time t is the step-i target of the forecast made at origin
t - i + 1.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .crr import IntervalVector

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1


@dataclass(frozen=True)
class AciConfig:
    """Targets, learning rates and optional clamping bounds (scalars or per-step)."""

    eps: tuple[float, ...]
    gamma: tuple[float, ...]
    clamp_floor: Optional[tuple[float, ...]] = None
    clamp_ceiling: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        eps = tuple(float(e) for e in np.atleast_1d(self.eps))
        gamma = tuple(float(g) for g in np.atleast_1d(self.gamma))
        if len(eps) != len(gamma):
            raise ValueError(f"eps has {len(eps)} entries but gamma has {len(gamma)}")
        if not all(0 < e < 1 for e in eps):
            raise ValueError(f"target levels must lie in (0, 1), got {eps}")
        if not all(g > 0 for g in gamma):
            raise ValueError(f"learning rates must be > 0, got {gamma}")
        object.__setattr__(self, "eps", eps)
        object.__setattr__(self, "gamma", gamma)
        for name in ("clamp_floor", "clamp_ceiling"):
            v = getattr(self, name)
            if v is not None:
                v = np.broadcast_to(np.asarray(v, dtype=float), (len(eps),))
                object.__setattr__(self, name, tuple(float(x) for x in v))

    @property
    def h(self) -> int:
        return len(self.eps)


@dataclass(frozen=True)
class ClampEvent:
    t: int
    step: int
    raw: float
    clamped: float


@dataclass
class AciState:
    eps_t: np.ndarray
    t: int = 0
    updates: np.ndarray = None
    clamp_log: list[ClampEvent] = field(default_factory=list)

    def __post_init__(self):
        self.eps_t = np.asarray(self.eps_t, dtype=float)
        if self.updates is None:
            self.updates = np.zeros(len(self.eps_t), dtype=int)

    @classmethod
    def fresh(cls, cfg: AciConfig) -> "AciState":
        return cls(np.array(cfg.eps, dtype=float))

    def to_text(self) -> str:
        """Versioned ``key=value`` checkpoint."""
        lines = [f"version={CHECKPOINT_VERSION}", f"t={self.t}", f"h={len(self.eps_t)}"]
        lines += [f"eps_t.{i + 1}={v!r}" for i, v in enumerate(self.eps_t.tolist())]
        lines += [f"updates.{i + 1}={int(v)}" for i, v in enumerate(self.updates)]
        lines += [f"clamp.{k}={e.t},{e.step},{e.raw!r},{e.clamped!r}" for k, e in enumerate(self.clamp_log)]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "AciState":
        kv = dict(line.split("=", 1) for line in text.splitlines() if line.strip())
        if int(kv.get("version", -1)) != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {kv.get('version')}")
        h = int(kv["h"])
        eps_t = np.array([float(kv[f"eps_t.{i + 1}"]) for i in range(h)])
        updates = np.array([int(kv[f"updates.{i + 1}"]) for i in range(h)])
        log = []
        k = 0
        while f"clamp.{k}" in kv:
            t, step, raw, clamped = kv[f"clamp.{k}"].split(",")
            log.append(ClampEvent(int(t), int(step), float(raw), float(clamped)))
            k += 1
        return cls(eps_t, int(kv["t"]), updates, log)


def current_significance(state: AciState) -> np.ndarray:
    return state.eps_t.copy()


def update(state: AciState, cfg: AciConfig, errs: Sequence[Optional[float]], floor=None) -> AciState:
    """Advance the clock by one tick, updating steps whose error is available.

    ``errs[i]`` is 0, 1 or None (not yet observable). ``floor`` overrides
    ``cfg.clamp_floor`` for this tick, e.g. 2/n for a growing training set.
    Mutates and returns ``state``.
    """
    h = cfg.h
    if len(errs) != h:
        raise ValueError(f"expected {h} error entries, got {len(errs)}")
    eps = np.asarray(cfg.eps)
    gamma = np.asarray(cfg.gamma)
    new = state.eps_t.copy()
    for i, e in enumerate(errs):
        if e is None:
            continue
        new[i] = state.eps_t[i] + gamma[i] * (eps[i] - float(e))
        state.updates[i] += 1

    lo = floor if floor is not None else cfg.clamp_floor
    hi = cfg.clamp_ceiling
    if lo is not None or hi is not None:
        raw = new.copy()
        if lo is not None:
            new = np.maximum(new, np.broadcast_to(np.asarray(lo, dtype=float), (h,)))
        if hi is not None:
            new = np.minimum(new, np.asarray(hi))
        for i in np.flatnonzero(new != raw):
            event = ClampEvent(state.t, int(i) + 1, float(raw[i]), float(new[i]))
            state.clamp_log.append(event)
            logger.debug("clamp: %s", event)
    state.eps_t = new
    state.t += 1
    return state


class PendingBuffer:
    """The last h interval vectors, keyed by origin (rows of the U_t / L_t matrices)."""

    def __init__(self, h: int):
        self.h = h
        self._items: deque[IntervalVector] = deque(maxlen=h)

    def __len__(self) -> int:
        return len(self._items)

    @property
    def origins(self) -> list[int]:
        return [iv.origin_index for iv in self._items]

    def get(self, origin: int) -> Optional[IntervalVector]:
        for iv in self._items:
            if iv.origin_index == origin:
                return iv
        return None

    def record(self, iv: IntervalVector) -> "PendingBuffer":
        if self._items and iv.origin_index <= self._items[-1].origin_index:
            raise ValueError(
                f"origin {iv.origin_index} is not after the latest stored origin {self._items[-1].origin_index}"
            )
        self._items.append(iv)
        return self

    def diagonal(self, t: int) -> list[Optional[tuple[float, float]]]:
        """(lower, upper) of the step-i forecast from origin t - i + 1, i = 1..h."""
        out = []
        for i in range(1, self.h + 1):
            iv = self.get(t - i + 1)
            out.append(None if iv is None else (float(iv.lower[i - 1]), float(iv.upper[i - 1])))
        return out


def record_prediction(buf: PendingBuffer, iv: IntervalVector) -> PendingBuffer:
    return buf.record(iv)


def extract_errors(buf: PendingBuffer, t: int, y_true: float, require_current: bool = True):
    """Miss indicators for the value that is step 1 of origin ``t``.

    Entry i-1 is 1.0 if ``y_true`` falls outside the step-i interval issued
    at origin t - i + 1, 0.0 if inside (closed), None if that forecast is
    not in the buffer.
    """
    if require_current and buf.get(t) is None:
        raise KeyError(f"no prediction stored for origin {t}")
    errs = []
    for bounds in buf.diagonal(t):
        if bounds is None:
            errs.append(None)
        else:
            lo, hi = bounds
            errs.append(0.0 if lo <= y_true <= hi else 1.0)
    return errs


class MultiStepACI:
    """Convenience wrapper bundling config, state and the pending buffer."""

    def __init__(self, cfg: AciConfig):
        self.cfg = cfg
        self.state = AciState.fresh(cfg)
        self.buffer = PendingBuffer(cfg.h)

    @property
    def eps_t(self) -> np.ndarray:
        return current_significance(self.state)

    def record(self, iv: IntervalVector) -> None:
        self.buffer.record(iv)

    def observe(self, t: int, y_true: float, floor=None, require_current: bool = True):
        errs = extract_errors(self.buffer, t, y_true, require_current=require_current)
        update(self.state, self.cfg, errs, floor=floor)
        return errs

