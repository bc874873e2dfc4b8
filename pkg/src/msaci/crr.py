"""MIMO conformalised ridge regression.

Residuals of ridge regression are affine in the hypothesised test label,
r_j(y) = a_j + b_j y, so the full conformal interval for every output step
can be read off sorted critical points instead of refitting per candidate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DefinednessError
from .ridge import TestAugmentedView


@dataclass(frozen=True)
class ResidualComponents:
    """Rows of A = C (y_1, ..., y_{n-1}, 0)^T and of B = C (0, ..., 0, 1)^T.

    ``A`` has shape (n, h); ``b`` is the single column shared by all steps.
    ``gap_a`` (n-1, h) and ``gap_b`` (n-1,) optionally hold a_j - a_n and
    b_n - b_j computed without cancellation; otherwise they are derived
    from ``A`` and ``b``.
    """

    A: np.ndarray
    b: np.ndarray
    gap_a: np.ndarray | None = None
    gap_b: np.ndarray | None = None

    @property
    def n(self) -> int:
        return len(self.b)

    @property
    def h(self) -> int:
        return self.A.shape[1]

    @property
    def B(self) -> np.ndarray:
        return np.repeat(self.b[:, None], self.h, axis=1)


@dataclass(frozen=True)
class IntervalVector:
    lower: np.ndarray
    upper: np.ndarray
    eps: np.ndarray
    origin_index: int = -1

    def __post_init__(self):
        if np.any(self.lower > self.upper):
            raise ValueError("interval with lower > upper")

    @property
    def h(self) -> int:
        return len(self.lower)

    @property
    def width(self) -> np.ndarray:
        return self.upper - self.lower

    def covers(self, step: int, y: float) -> bool:
        """Closed-interval membership for 1-based ``step``."""
        return bool(self.lower[step - 1] <= y <= self.upper[step - 1])


def compute_components(view: TestAugmentedView) -> ResidualComponents:
    """Residual components without forming the n x n hat matrix.

    a_j = y0_j - x_j^T M S and b_j = [j = n] - x_j^T M x_n, where M is the
    Gram inverse including the test object and S = sum_{k<n} x_k y_k^T.
    """
    if view.n < 2:
        raise ValueError("need at least one training example")
    M, x_n = view.M_aug, view.x_n
    Mx = M @ x_n
    MS = M @ view.S
    b = np.empty(view.n)
    b[:-1] = -(view.X_train @ Mx)
    b[-1] = 1.0 - x_n @ Mx
    A = np.empty((view.n, view.S.shape[1]))
    A[:-1] = view.Y_train - view.X_train @ MS
    A[-1] = -(x_n @ MS)
    # differences against the test row, formed before multiplying so rows
    # equal to x_n give exactly y_j and 1
    D = view.X_train - x_n
    gap_a = view.Y_train - D @ MS
    gap_b = 1.0 + D @ Mx
    return ResidualComponents(A, b, gap_a, gap_b)


def _floor_snapped(v: float) -> int:
    # eps * n / 2 is often an integer in exact arithmetic (eps=0.4, n=5)
    r = round(v)
    return int(r) if abs(v - r) < 1e-9 else math.floor(v)


def order_indices(eps: float, n: int) -> tuple[int, int]:
    """1-based ranks (floor(eps n / 2), ceil((1 - eps/2) n)) among n - 1 critical points."""
    k = _floor_snapped(eps * n / 2.0)
    return k, n - k


def critical_points(comp: ResidualComponents) -> np.ndarray:
    """(n-1, h) label values where the test residual ties a training residual.

    Entries are NaN where b_n <= b_j; those rows contribute an infinite
    bound on both sides.
    """
    if comp.gap_b is None:
        da, db = comp.A[:-1] - comp.A[-1], comp.b[-1] - comp.b[:-1]
    else:
        da, db = comp.gap_a, comp.gap_b
    ok = db > 0
    crit = np.full((comp.n - 1, comp.h), np.nan)
    crit[ok] = da[ok] / db[ok, None]
    return crit


def predict_intervals(
    comp: ResidualComponents,
    eps: Sequence[float] | np.ndarray,
    origin_index: int = -1,
    allow_infinite: bool = False,
) -> IntervalVector:
    """Conformal interval per output step at significance levels ``eps``.

    Step i gets [l_(k), u_(n-k)] with k = floor(eps_i n / 2), ranks counted
    among the n - 1 critical points. ``eps_i < 2/n`` makes k < 1, which
    raises :class:`DefinednessError` unless ``allow_infinite`` is set; then
    the missing order statistics are taken as -inf / +inf.
    """
    eps = np.asarray(eps, dtype=float).reshape(-1)
    n, h = comp.n, comp.h
    if eps.shape != (h,):
        raise ValueError(f"need {h} significance levels, got {eps.size}")
    if np.any(eps > 1):
        raise ValueError(f"significance levels must be <= 1, got {eps}")
    crit = critical_points(comp)
    lo_pts = np.sort(np.where(np.isnan(crit), -np.inf, crit), axis=0)
    hi_pts = np.sort(np.where(np.isnan(crit), np.inf, crit), axis=0)

    lower = np.empty(h)
    upper = np.empty(h)
    for i in range(h):
        k_lo, k_hi = order_indices(eps[i], n)
        if k_lo < 1:
            if not allow_infinite:
                raise DefinednessError(
                    f"step {i + 1}: eps={eps[i]:.6g} < 2/n={2 / n:.6g}, interval undefined", step=i + 1
                )
            lower[i], upper[i] = -np.inf, np.inf
            continue
        lower[i] = lo_pts[k_lo - 1, i]
        upper[i] = hi_pts[k_hi - 1, i]
    return IntervalVector(lower, upper, eps.copy(), origin_index)


def conformal_interval(view: TestAugmentedView, eps, origin_index: int = -1, allow_infinite: bool = False):
    return predict_intervals(compute_components(view), eps, origin_index, allow_infinite)
