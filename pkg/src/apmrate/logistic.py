"""Penalized logistic rating models fit by a majorized Newton scheme.

The loss is the half-scaled negative log likelihood

    -(1/2n) * sum_i [ y_i log p_i + (1 - y_i) log(1 - p_i) ]

plus the same elastic net penalty as the linear model. Each outer step
replaces the Hessian with its global bound (every Bernoulli variance is
at most 1/4), which turns the step into a penalized least-squares
problem on a working response; that inner problem is handed to the same
coordinate descent kernel. The bound majorizes the loss, so the
penalized objective never increases across outer steps.
"""

from __future__ import annotations

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, ClassifierMixin

from ._validation import check_binary_labels, check_is_fitted, check_X_y
from .errors import NumericalError
from .linear import _cd_enet

PROB_EPS = 1e-12

# Inner solves are warm started from the current iterate, so they need
# few sweeps; the cap only guards pathological cases.
_INNER_MAX_SWEEPS = 1000


def predict_prob(beta, X):
    """Win probability of team 1 under coefficient vector ``beta``.

    Accepts a single row or a matrix. Probabilities are clamped away
    from 0 and 1 so downstream logs stay finite.
    """
    margin = np.asarray(X @ np.asarray(beta, dtype=np.float64))
    return np.clip(expit(margin), PROB_EPS, 1.0 - PROB_EPS)


def logistic_loss(X, labels, beta) -> float:
    """Half-scaled negative log likelihood, computed from the margins."""
    labels = np.asarray(labels, dtype=np.float64).ravel()
    n = X.shape[0]
    margin = np.asarray(X @ np.asarray(beta, dtype=np.float64)).ravel()
    # y log p + (1 - y) log(1 - p) simplifies to y*m - log(1 + e^m).
    loglik = labels @ margin - np.logaddexp(0.0, margin).sum()
    return float(-loglik / (2.0 * n))


def logistic_objective(X, labels, beta, alpha, lam) -> float:
    beta = np.asarray(beta, dtype=np.float64).ravel()
    penalty = alpha * lam * np.abs(beta).sum() + (1.0 - alpha) * lam * (beta @ beta)
    return logistic_loss(X, labels, beta) + float(penalty)


def logistic_gradient(X, labels, beta) -> np.ndarray:
    """Gradient of the smooth loss term only (penalty excluded)."""
    labels = np.asarray(labels, dtype=np.float64).ravel()
    n = X.shape[0]
    probs = expit(np.asarray(X @ np.asarray(beta, dtype=np.float64)).ravel())
    return -np.asarray(X.T @ (labels - probs)).ravel() / (2.0 * n)


def logistic_kkt_residual(X, labels, beta, alpha, lam) -> float:
    """Largest stationarity violation of the penalized logistic fit."""
    beta = np.asarray(beta, dtype=np.float64).ravel()
    grad = logistic_gradient(X, labels, beta)
    l1 = alpha * lam
    l2 = 2.0 * (1.0 - alpha) * lam
    active = beta != 0.0
    worst = 0.0
    if active.any():
        stationary = grad[active] + l1 * np.sign(beta[active]) + l2 * beta[active]
        worst = float(np.abs(stationary).max())
    if (~active).any():
        slack = np.abs(grad[~active]) - l1
        worst = max(worst, float(np.maximum(slack, 0.0).max()))
    return worst


def _fit_logistic(X, labels, beta, alpha, lam, tol, max_iter):
    """Majorized Newton loop; ``beta`` is updated in place.

    Minimizing the quadratic majorizer around beta0 is least squares on
    the working response z = X beta0 + 4 (y - p0) with the penalty
    scaled by 8, because the curvature bound is (1/8n) X'X while the
    least-squares kernel uses (1/n) X'X.
    """
    margin = np.asarray(X @ beta).ravel()
    n_outer = 0
    converged = False
    for n_outer in range(1, max_iter + 1):
        probs = expit(margin)
        working = margin + 4.0 * (labels - probs)
        before = beta.copy()
        _cd_enet(X, working, beta, alpha, 8.0 * lam, tol, _INNER_MAX_SWEEPS)
        margin = np.asarray(X @ beta).ravel()
        if np.abs(beta - before).max() <= tol:
            converged = True
            break
    return n_outer, converged, margin


def _separation_witness(margins, labels) -> bool:
    """True when the fitted margins certify (quasi-)separated labels.

    If every observation satisfies sign-agreement (2y - 1) * margin >= 0
    with at least one strict, scaling the coefficients up forever keeps
    improving the likelihood, so no finite maximizer exists.
    """
    agreement = (2.0 * labels - 1.0) * margins
    return bool(np.all(agreement >= 0.0) and np.any(agreement > 0.0))


class LogisticRating(ClassifierMixin, BaseEstimator):
    """Win-probability ratings with an optional elastic net penalty.

    Parameters mirror the linear model; ``lam = 0`` gives the plain
    maximum-likelihood fit. ``separation_bound`` is the coefficient
    magnitude beyond which an unpenalized fit is flagged as separated
    even without a margin certificate.
    """

    def __init__(self, alpha=0.5, lam=0.0, tol=1e-7, max_iter=1000,
                 separation_bound=30.0):
        self.alpha = alpha
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter
        self.separation_bound = separation_bound

    def _check_params(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must be in [0, 1], got {self.alpha}")
        if self.lam < 0.0:
            raise ValueError(f"lam must be non-negative, got {self.lam}")
        if self.tol <= 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be at least 1, got {self.max_iter}")

    def fit(self, X, labels):
        self._check_params()
        X, labels = check_X_y(X, labels)
        labels = check_binary_labels(labels)
        beta = np.zeros(X.shape[1], dtype=np.float64)
        n_outer, converged, margin = _fit_logistic(
            X, labels, beta, float(self.alpha), float(self.lam),
            float(self.tol), int(self.max_iter),
        )
        if not np.all(np.isfinite(beta)):
            raise NumericalError("logistic solver diverged")
        self.coef_ = beta
        self.n_iter_ = int(n_outer)
        self.converged_ = bool(converged)
        self.objective_ = logistic_objective(X, labels, beta, self.alpha, self.lam)
        self.separation_ = bool(
            self.lam == 0.0
            and (
                np.abs(beta).max(initial=0.0) > self.separation_bound
                or _separation_witness(margin, labels)
            )
        )
        return self

    def predict_proba(self, X):
        check_is_fitted(self)
        prob1 = np.atleast_1d(predict_prob(self.coef_, X))
        return np.column_stack([1.0 - prob1, prob1])

    def predict(self, X):
        check_is_fitted(self)
        return (np.atleast_1d(predict_prob(self.coef_, X)) >= 0.5).astype(np.float64)
