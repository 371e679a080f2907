"""Linear rating models: minimum-norm least squares and the elastic net.

The elastic net objective used throughout is

    (1/2n) * ||y - X b||^2 + alpha * lam * ||b||_1 + (1 - alpha) * lam * ||b||_2^2

with mixing weight alpha in [0, 1]. alpha = 0 is ridge, alpha = 1 the
lasso. Note the ridge term carries (1 - alpha) * lam directly, not the
halved form some libraries use, so coefficients are comparable across
alpha at fixed lam.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_is_fitted, check_X_y
from .errors import NumericalError


@njit(cache=True)
def _cd_enet(X, y, beta, alpha, lam, tol, max_iter):
    """Cyclic coordinate descent on the elastic net objective.

    ``beta`` is updated in place (warm starts come in through it).
    Returns (sweeps run, converged flag). Convergence is declared when
    no coefficient moves more than ``tol`` during a full sweep.
    """
    n, p = X.shape
    col_sq = np.empty(p)
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += X[i, j] * X[i, j]
        col_sq[j] = acc / n
    resid = y - X @ beta
    l1 = alpha * lam
    l2 = 2.0 * (1.0 - alpha) * lam
    for sweep in range(1, max_iter + 1):
        max_delta = 0.0
        for j in range(p):
            old = beta[j]
            rho = 0.0
            for i in range(n):
                rho += X[i, j] * resid[i]
            z = rho / n + col_sq[j] * old
            mag = abs(z) - l1
            if mag > 0.0 and col_sq[j] + l2 > 0.0:
                new = np.sign(z) * mag / (col_sq[j] + l2)
            else:
                new = 0.0
            diff = new - old
            if diff != 0.0:
                beta[j] = new
                for i in range(n):
                    resid[i] -= X[i, j] * diff
                if abs(diff) > max_delta:
                    max_delta = abs(diff)
        if max_delta <= tol:
            return sweep, True
    return max_iter, False


@njit(cache=True)
def _max_abs_col_dot(X, v):
    """max_j |x_j . v| accumulated in the solver's summation order.

    Thresholds sized from this value dominate the correlations the
    coordinate kernel sees at beta = 0 exactly; a BLAS-order dot can
    disagree in the last ulp and leak a spurious nonzero coefficient.
    """
    n, p = X.shape
    best = 0.0
    for j in range(p):
        acc = 0.0
        for i in range(n):
            acc += X[i, j] * v[i]
        mag = abs(acc)
        if mag > best:
            best = mag
    return best


def elastic_net_objective(X, y, beta, alpha, lam) -> float:
    """Value of the penalized least-squares objective at ``beta``."""
    n = X.shape[0]
    resid = y - X @ beta
    penalty = alpha * lam * np.abs(beta).sum() + (1.0 - alpha) * lam * (beta @ beta)
    return float((resid @ resid) / (2.0 * n) + penalty)


def kkt_residual(X, y, beta, alpha, lam) -> float:
    """Largest stationarity violation of the elastic net at ``beta``.

    For an active coordinate the subgradient condition pins the
    correlation exactly; for a zero coordinate it only bounds it, so the
    violation there is the excess over alpha * lam. A true minimizer
    returns 0 up to solver tolerance.
    """
    beta = np.asarray(beta, dtype=np.float64).ravel()
    n = X.shape[0]
    resid = y - X @ beta
    corr = np.asarray(X.T @ resid).ravel() / n
    l1 = alpha * lam
    l2 = 2.0 * (1.0 - alpha) * lam
    active = beta != 0.0
    worst = 0.0
    if active.any():
        stationary = corr[active] - l1 * np.sign(beta[active]) - l2 * beta[active]
        worst = float(np.abs(stationary).max())
    if (~active).any():
        slack = np.abs(corr[~active]) - l1
        worst = max(worst, float(np.maximum(slack, 0.0).max()))
    return worst


class OLSRating(RegressorMixin, BaseEstimator):
    """Unpenalized least-squares ratings via the minimum-norm solution.

    With ten entries per row the appearance matrix is rank deficient
    (every row sums to zero), so the normal equations have infinitely
    many solutions; the SVD-based solve picks the one with the smallest
    Euclidean norm.
    """

    def fit(self, X, y):
        X, y = check_X_y(X, y, order="C")
        coef, _, rank, _ = np.linalg.lstsq(X, y, rcond=None)
        if not np.all(np.isfinite(coef)):
            raise NumericalError("least-squares solve produced non-finite values")
        self.coef_ = coef
        self.rank_ = int(rank)
        self.n_iter_ = 1
        self.converged_ = True
        resid = y - X @ coef
        self.objective_ = float((resid @ resid) / (2.0 * max(X.shape[0], 1)))
        return self

    def predict(self, X):
        check_is_fitted(self)
        return np.asarray(X @ self.coef_).ravel()


class ElasticNetRating(RegressorMixin, BaseEstimator):
    """Elastic net ratings solved by cyclic coordinate descent.

    Parameters
    ----------
    alpha : float in [0, 1]
        Mixing weight between the l1 (alpha) and squared-l2 (1 - alpha)
        penalties.
    lam : float >= 0
        Overall penalty strength.
    tol : float
        Sweep-to-sweep coefficient movement below which the solver
        stops.
    max_iter : int
        Maximum number of full coordinate sweeps.
    warm_start : bool
        Reuse the previous fit's coefficients as the starting point.
    """

    def __init__(self, alpha=0.5, lam=1.0, tol=1e-7, max_iter=100_000,
                 warm_start=False):
        self.alpha = alpha
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter
        self.warm_start = warm_start

    def _check_params(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")

    def fit(self, X, y):
        self._check_params()
        X, y = check_X_y(X, y)
        p = X.shape[1]
        if self.warm_start and hasattr(self, "coef_") and self.coef_.shape == (p,):
            beta = self.coef_.astype(np.float64, copy=True)
        else:
            beta = np.zeros(p, dtype=np.float64)
        n_iter, converged = _cd_enet(
            X, y, beta, float(self.alpha), float(self.lam), float(self.tol),
            int(self.max_iter),
        )
        if not np.all(np.isfinite(beta)):
            raise NumericalError("coordinate descent diverged")
        self.coef_ = beta
        self.n_iter_ = int(n_iter)
        self.converged_ = bool(converged)
        self.objective_ = elastic_net_objective(X, y, beta, self.alpha, self.lam)
        return self

    def predict(self, X):
        check_is_fitted(self)
        return np.asarray(X @ self.coef_).ravel()


def enet_path(X, y, alpha, lams, tol=1e-7, max_iter=100_000):
    """Fit a sequence of penalty strengths with warm starts.

    ``lams`` should be sorted descending; each solution seeds the next.
    Returns an array of shape (len(lams), p) plus a converged flag per
    step.
    """
    X, y = check_X_y(X, y)
    lams = np.asarray(lams, dtype=np.float64)
    p = X.shape[1]
    beta = np.zeros(p, dtype=np.float64)
    coefs = np.empty((lams.size, p), dtype=np.float64)
    flags = np.empty(lams.size, dtype=bool)
    for k, lam in enumerate(lams):
        _, ok = _cd_enet(X, y, beta, float(alpha), float(lam), float(tol),
                         int(max_iter))
        coefs[k] = beta
        flags[k] = ok
    return coefs, flags
