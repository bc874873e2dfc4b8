"""Online ridge state (Sherman-Morrison updated Gram inverse) and GCV tuning."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import RankDeficientError

logger = logging.getLogger(__name__)


def sherman_morrison(M: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Inverse of (M^{-1} + x x^T), symmetrised."""
    Mx = M @ x
    out = M - np.outer(Mx, Mx) / (1.0 + x @ Mx)
    return 0.5 * (out + out.T)


class RidgeState:
    """Regularised Gram inverse (X^T X + a I)^{-1} maintained online.

    Besides the inverse, the state keeps the absorbed objects and labels and
    the accumulator S = sum_k x_k y_k^T, which is all conformalised ridge
    needs to form residual components without building the hat matrix.

    With ``a == 0`` the inverse does not exist until the absorbed objects span
    R^p; until then the raw Gram matrix is accumulated and queries raise
    :class:`RankDeficientError`.
    """

    def __init__(self, a: float, p: int, h: int | None = None):
        if a < 0:
            raise ValueError(f"ridge parameter must be >= 0, got {a}")
        if p < 1:
            raise ValueError(f"dimension must be >= 1, got {p}")
        self.a = float(a)
        self.p = int(p)
        self.h = h
        self._n = 0
        self._Xbuf = np.empty((16, p))
        self._Ybuf = None if h is None else np.empty((16, h))
        self.S = None if h is None else np.zeros((p, h))
        if self.a > 0:
            self._M = np.eye(p) / self.a
            self._gram = None
        else:
            self._M = None
            self._gram = np.zeros((p, p))

    @property
    def n_train(self) -> int:
        return self._n

    @property
    def queryable(self) -> bool:
        return self._M is not None

    @property
    def gram_inverse(self) -> np.ndarray:
        if self._M is None:
            raise RankDeficientError(
                f"a=0 and only {self.n_train} example(s) absorbed: X^T X is not invertible yet"
            )
        return self._M

    @property
    def X(self) -> np.ndarray:
        """Absorbed objects, (n_train, p). A view: do not write to it."""
        return self._Xbuf[: self._n]

    @property
    def Y(self) -> np.ndarray:
        if self._Ybuf is None:
            return np.empty((0, 0))
        return self._Ybuf[: self._n]

    def _check(self, x, y=None):
        x = np.asarray(x, dtype=float).reshape(-1)
        if x.shape != (self.p,):
            raise ValueError(f"object has dimension {x.size}, expected {self.p}")
        if y is None:
            return x, None
        y = np.asarray(y, dtype=float).reshape(-1)
        if self.h is None:
            self.h = y.size
            self.S = np.zeros((self.p, self.h))
            self._Ybuf = np.empty((len(self._Xbuf), self.h))
        if y.shape != (self.h,):
            raise ValueError(f"label has dimension {y.size}, expected {self.h}")
        return x, y

    def absorb(self, x, y) -> "RidgeState":
        x, y = self._check(x, y)
        if self._M is not None:
            self._M = sherman_morrison(self._M, x)
        else:
            self._gram += np.outer(x, x)
            if np.linalg.matrix_rank(self._gram) == self.p:
                inv = np.linalg.inv(self._gram)
                self._M = 0.5 * (inv + inv.T)
                self._gram = None
        if self._n == len(self._Xbuf):
            # fresh arrays, so views handed out earlier stay valid
            self._Xbuf = np.concatenate([self._Xbuf, np.empty_like(self._Xbuf)])
            self._Ybuf = np.concatenate([self._Ybuf, np.empty_like(self._Ybuf)])
        self._Xbuf[self._n] = x
        self._Ybuf[self._n] = y
        self._n += 1
        self.S += np.outer(x, y)
        return self

    def absorb_many(self, X, Y) -> "RidgeState":
        for x, y in zip(X, Y):
            self.absorb(x, y)
        return self

    def peek_with_test(self, x_n) -> "TestAugmentedView":
        """Non-destructive view of the Gram inverse with the test object added."""
        x_n, _ = self._check(x_n)
        if self._M is not None:
            M_aug = sherman_morrison(self._M, x_n)
        else:
            gram = self._gram + np.outer(x_n, x_n)
            if np.linalg.matrix_rank(gram) < self.p:
                raise RankDeficientError("a=0 and the design including the test object is rank deficient")
            M_aug = np.linalg.inv(gram)
            M_aug = 0.5 * (M_aug + M_aug.T)
        if self.S is None:
            raise ValueError("label dimension unknown: absorb an example or pass h at construction")
        return TestAugmentedView(M_aug=M_aug, X_train=self.X, Y_train=self.Y, S=self.S.copy(), x_n=x_n)


@dataclass(frozen=True)
class TestAugmentedView:
    __test__ = False  # not a pytest class

    M_aug: np.ndarray
    X_train: np.ndarray
    Y_train: np.ndarray
    S: np.ndarray
    x_n: np.ndarray

    @property
    def n(self) -> int:
        return len(self.X_train) + 1

    @property
    def X_all(self) -> np.ndarray:
        return np.vstack([self.X_train, self.x_n[None, :]])

    def hat_with_test(self, j: int) -> float:
        """x_j^T M_aug x_n; row n-1 (0-based) is the test object itself."""
        return float(self.X_all[j] @ self.M_aug @ self.x_n)

    def fitted_from_train(self, j: int) -> np.ndarray:
        """x_j^T M_aug S, the h-vector of fitted contributions of training labels."""
        return self.X_all[j] @ self.M_aug @ self.S


@dataclass(frozen=True)
class GcvGrid:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if not vals:
            raise ValueError("GCV grid is empty")
        if any(v <= 0 for v in vals):
            raise ValueError("GCV grid entries must be strictly positive")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValueError("GCV grid must be strictly ascending")
        object.__setattr__(self, "values", vals)

    @classmethod
    def logspace(cls, lo: float = 1e-4, hi: float = 1e4, num: int = 25) -> "GcvGrid":
        return cls(tuple(np.logspace(np.log10(lo), np.log10(hi), num)))


def gcv_scores(X: np.ndarray, Y: np.ndarray, grid: Sequence[float]) -> np.ndarray:
    """n ||(I - H_a) Y||_F^2 / tr(I - H_a)^2 for each a, via one SVD of X.

    Grid points where the score is undefined (a = 0 with rank-deficient X)
    come back as NaN.
    """
    X = np.asarray(X, dtype=float)
    Y = np.asarray(Y, dtype=float).reshape(len(X), -1)
    n = len(X)
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    UtY = U.T @ Y
    s2 = s**2
    tol = s.max(initial=0.0) * max(X.shape) * np.finfo(float).eps
    out = np.empty(len(grid))
    for k, a in enumerate(grid):
        if a == 0 and np.sum(s > tol) < X.shape[1]:
            out[k] = np.nan
            continue
        shrink = s2 / (s2 + a) if a > 0 else (s > tol).astype(float)
        rss = np.sum((Y - U @ (shrink[:, None] * UtY)) ** 2)
        df_resid = n - shrink.sum()
        out[k] = n * rss / df_resid**2 if df_resid > 0 else np.inf
    return out


def gcv_tune(X, Y, grid: GcvGrid | Sequence[float]) -> float:
    """Ridge parameter minimising the multi-output GCV score; ties go to the larger a."""
    values = grid.values if isinstance(grid, GcvGrid) else tuple(float(v) for v in grid)
    if len(values) == 0:
        raise ValueError("GCV grid is empty")
    if len(X) < 2:
        raise ValueError("GCV needs at least 2 training pairs")
    scores = gcv_scores(X, Y, values)
    best, best_score = None, np.inf
    for a, score in zip(values, scores):
        if np.isnan(score):
            logger.warning("GCV: skipping a=%g, design is singular", a)
            continue
        if best is None or score < best_score or (score == best_score and a > best):
            best, best_score = a, score
    if best is None:
        raise RankDeficientError("GCV: no grid point gave a finite score")
    logger.info("GCV selected a=%g (score %.6g)", best, best_score)
    return best
