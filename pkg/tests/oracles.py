"""Independent reference computations used as test oracles.

Everything here works from dense definitions (explicit inverses, explicit
hat matrices, brute-force label grids) and shares no code with the package.
"""

import numpy as np


def dense_gram_inverse(X, a):
    X = np.atleast_2d(X)
    return np.linalg.inv(X.T @ X + a * np.eye(X.shape[1]))


def dense_hat(X_all, a):
    return X_all @ dense_gram_inverse(X_all, a) @ X_all.T


def dense_components(X_train, Y_train, x_test, a):
    """A = C (Y, 0)^T and B = C (0, ..., 0, 1)^T with C = I - H_n, as in the algorithm box."""
    X_all = np.vstack([X_train, x_test])
    n = len(X_all)
    h = Y_train.shape[1]
    C = np.eye(n) - dense_hat(X_all, a)
    Y0 = np.vstack([Y_train, np.zeros((1, h))])
    E = np.zeros((n, h))
    E[-1] = 1.0
    return C @ Y0, C @ E


def dense_gcv(X, Y, a):
    n = len(X)
    H = X @ np.linalg.inv(X.T @ X + a * np.eye(X.shape[1])) @ X.T
    R = (np.eye(n) - H) @ Y
    return n * np.sum(R**2) / np.trace(np.eye(n) - H) ** 2


def full_conformal_interval(X_train, y_train, x_test, a, eps, step=1e-3, half_range=None):
    """Brute-force two-sided ridge conformal set for one output column.

    A candidate label y is accepted when both one-sided p-values
    #{j: r_j >= r_n}/n and #{j: r_j <= r_n}/n exceed eps/2, with signed
    residuals r recomputed by refitting ridge on all n rows. Returns the
    hull (min, max) of accepted grid points; an endpoint on the edge of the
    grid is reported as infinite.
    """
    X_all = np.vstack([X_train, x_test])
    n = len(X_all)
    H = dense_hat(X_all, a)
    if half_range is None:
        half_range = 10.0 * (np.ptp(y_train) + np.abs(y_train).max() + 1.0)
    centre = float(np.mean(y_train))
    grid = np.arange(centre - half_range, centre + half_range + step, step)
    Yc = np.empty((n, len(grid)))
    Yc[:-1] = y_train[:, None]
    Yc[-1] = grid
    R = Yc - H @ Yc
    r_n = R[-1]
    p_up = np.sum(R >= r_n, axis=0) / n
    p_lo = np.sum(R <= r_n, axis=0) / n
    ok = (p_up > eps / 2) & (p_lo > eps / 2)
    if not ok.any():
        return np.nan, np.nan
    idx = np.flatnonzero(ok)
    lo = -np.inf if idx[0] == 0 else grid[idx[0]]
    hi = np.inf if idx[-1] == len(grid) - 1 else grid[idx[-1]]
    return lo, hi


def scalar_aci(eps, gamma, errors, eps0=None):
    """Plain-float single-step ACI recurrence; returns eps_1 .. eps_{T+1}."""
    out = [eps if eps0 is None else eps0]
    for e in errors:
        out.append(out[-1] + gamma * (eps - e))
    return out


def random_crr_instance(rng):
    """Small random ridge problem: (X_train, Y_train, x_test, a, eps)."""
    n = int(rng.integers(7, 13))
    p = int(rng.integers(1, 4))
    h = int(rng.integers(1, 3))
    a = float(rng.choice([0.5, 1.0, 5.0]))
    eps = float(rng.choice([0.3, 0.4]))
    X = rng.normal(size=(n - 1, p))
    Y = X @ rng.normal(size=(p, h)) + rng.normal(size=(n - 1, h))
    return X, Y, rng.normal(size=p), a, eps
