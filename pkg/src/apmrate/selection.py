"""Cross-validated selection of the penalty mixing weight and strength."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._validation import check_binary_labels, check_X_y
from .errors import DataValidationError, SingleClassFoldWarning
from .linear import _cd_enet, _max_abs_col_dot
from .logistic import _fit_logistic, predict_prob

FAMILIES = ("gaussian", "binomial")

# Floor on alpha when sizing the largest penalty: at alpha = 0 the lasso
# entry point is infinite, so the conventional stand-in treats the grid
# as if alpha were 0.001.
ALPHA_FLOOR = 1e-3


def lambda_path(X, y, alpha, family="gaussian", n_lambdas=100):
    """Geometric penalty grid from just-all-zero down to a small floor.

    The top value is the smallest penalty whose fit is identically zero;
    for the binomial family the zero fit predicts probability one half,
    which is what the score is measured against. The floor is 1e-4 of
    the top when rows outnumber columns and 1e-2 otherwise.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    if n_lambdas < 1:
        raise ValueError("n_lambdas must be at least 1")
    if hasattr(X, "toarray"):
        X = X.toarray()
    X = np.asfortranarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    n = X.shape[0]
    if family == "gaussian":
        threshold = _max_abs_col_dot(X, y) / n
    else:
        y = check_binary_labels(y)
        threshold = _max_abs_col_dot(X, y - 0.5) / (2.0 * n)
    if threshold <= 0.0:
        raise DataValidationError(
            "response carries no signal, cannot size a penalty grid"
        )
    divisor = max(alpha, ALPHA_FLOOR)
    top = threshold / divisor
    # alpha * (threshold / alpha) can round one ulp under the threshold;
    # nudge up so the top of the path really zeroes every coefficient.
    if alpha >= ALPHA_FLOOR:
        while alpha * top < threshold:
            top = np.nextafter(top, np.inf)
    ratio = 1e-4 if n > X.shape[1] else 1e-2
    return np.geomspace(top, top * ratio, n_lambdas)


def kfold_indices(n, n_folds, seed):
    """Seeded fold assignment: a permutation split into near-equal runs."""
    if n_folds < 2:
        raise ValueError("need at least two folds")
    if n_folds > n:
        raise DataValidationError(f"cannot split {n} rows into {n_folds} folds")
    rng = np.random.default_rng(seed)
    perm = rng.permutation(n)
    return [np.sort(part) for part in np.array_split(perm, n_folds)]


@dataclass
class CvGrid:
    """Search grid: alpha values crossed with per-alpha penalty paths."""

    alphas: np.ndarray = field(
        default_factory=lambda: np.linspace(0.0, 1.0, 100)
    )
    n_lambdas: int = 100
    n_folds: int = 10
    seed: int = 0

    def __post_init__(self):
        self.alphas = np.atleast_1d(np.asarray(self.alphas, dtype=np.float64))
        if self.alphas.size == 0:
            raise ValueError("alpha grid is empty")
        if np.any((self.alphas < 0.0) | (self.alphas > 1.0)):
            raise ValueError("alpha grid must lie in [0, 1]")


@dataclass(frozen=True, eq=False)
class CvResult:
    """Mean and spread of the fold scores over the whole grid.

    ``lambdas[i]`` is the descending penalty path used for
    ``alphas[i]``; error arrays have shape (len(alphas), n_lambdas).
    The winning cell minimizes the mean error, with ties broken toward
    the larger penalty and then the smaller alpha.
    """

    alphas: np.ndarray
    lambdas: np.ndarray
    mean_error: np.ndarray
    sd_error: np.ndarray
    best_alpha: float
    best_lambda: float
    metric: str
    notes: tuple[str, ...] = ()


def _best_cell(alphas, lambdas, mean_error):
    """Grid argmin: lowest mean, ties to larger lambda, then smaller alpha."""
    best_key = None
    best = (0, 0)
    for a_idx in range(mean_error.shape[0]):
        for l_idx in range(mean_error.shape[1]):
            key = (mean_error[a_idx, l_idx], -lambdas[a_idx, l_idx],
                   alphas[a_idx])
            if best_key is None or key < best_key:
                best_key = key
                best = (a_idx, l_idx)
    return best


def _gaussian_fold_error(X_test, y_test, coefs):
    preds = coefs @ X_test.T
    resid = preds - y_test[None, :]
    return np.mean(resid * resid, axis=1)


def _binomial_fold_error(X_test, labels_test, coefs):
    errors = np.empty(coefs.shape[0])
    for k in range(coefs.shape[0]):
        probs = predict_prob(coefs[k], X_test)
        ll = labels_test * np.log(probs) + (1.0 - labels_test) * np.log(1.0 - probs)
        errors[k] = -2.0 * ll.mean()
    return errors


def cross_validate(X, y, family="gaussian", grid=None, tol=1e-7,
                   max_iter=None, folds=None) -> CvResult:
    """K-fold search over the (alpha, lambda) grid.

    Penalty paths are sized on the full data and shared across folds so
    every fold scores the same candidate cells. Within one fold and
    alpha, fits walk the path from large penalties down with warm
    starts. ``folds`` overrides the seeded assignment with an explicit
    list of held-out index arrays.

    Gaussian fits score held-out mean squared error; binomial fits score
    twice the mean negative log likelihood with probabilities clamped to
    [1e-12, 1 - 1e-12], so a held-out fold containing a single class
    stays finite (a note records it).
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if max_iter is None:
        # Sweeps for the linear kernel, outer steps for the logistic one.
        max_iter = 100_000 if family == "gaussian" else 1000
    if grid is None:
        grid = CvGrid()
    X, y = check_X_y(X, y)
    if family == "binomial":
        y = check_binary_labels(y)
    n, p = X.shape
    if folds is None:
        folds = kfold_indices(n, grid.n_folds, grid.seed)
    else:
        folds = [np.asarray(f, dtype=np.int64) for f in folds]
        stacked = np.sort(np.concatenate(folds))
        if not np.array_equal(stacked, np.arange(n)):
            raise ValueError("explicit folds must partition the rows exactly")
    alphas = grid.alphas
    n_alpha = alphas.size
    n_lam = grid.n_lambdas
    lambdas = np.stack(
        [lambda_path(X, y, a, family=family, n_lambdas=n_lam) for a in alphas]
    )
    notes = []
    errors = np.empty((len(folds), n_alpha, n_lam))
    for f, held_out in enumerate(folds):
        mask = np.ones(n, dtype=bool)
        mask[held_out] = False
        X_train = np.asfortranarray(X[mask])
        y_train = y[mask]
        X_test = np.ascontiguousarray(X[held_out])
        y_test = y[held_out]
        if family == "binomial" and (y_test.min() == y_test.max()):
            message = f"fold {f}: held-out rows are single-class"
            warnings.warn(message, SingleClassFoldWarning, stacklevel=2)
            notes.append(message)
        for a_idx in range(n_alpha):
            alpha = float(alphas[a_idx])
            path = lambdas[a_idx]
            beta = np.zeros(p)
            coefs = np.empty((n_lam, p))
            for l_idx in range(n_lam):
                lam = float(path[l_idx])
                if family == "gaussian":
                    _cd_enet(X_train, y_train, beta, alpha, lam, tol,
                             int(max_iter))
                else:
                    _fit_logistic(X_train, y_train, beta, alpha, lam, tol,
                                  int(max_iter))
                coefs[l_idx] = beta
            if family == "gaussian":
                errors[f, a_idx] = _gaussian_fold_error(X_test, y_test, coefs)
            else:
                errors[f, a_idx] = _binomial_fold_error(X_test, y_test, coefs)
    mean_error = errors.mean(axis=0)
    sd_error = errors.std(axis=0, ddof=1)
    best_cell = _best_cell(alphas, lambdas, mean_error)
    metric = "mse" if family == "gaussian" else "binomial_deviance"
    return CvResult(
        alphas=alphas.copy(),
        lambdas=lambdas,
        mean_error=mean_error,
        sd_error=sd_error,
        best_alpha=float(alphas[best_cell[0]]),
        best_lambda=float(lambdas[best_cell]),
        metric=metric,
        notes=tuple(notes),
    )


def write_cv_csv(path, result: CvResult):
    """Dump the scored grid as alpha,lambda,mean_error,sd_error rows."""
    import csv

    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["alpha", "lambda", "mean_error", "sd_error"])
        for a_idx, alpha in enumerate(result.alphas):
            for l_idx in range(result.lambdas.shape[1]):
                writer.writerow([
                    repr(float(alpha)),
                    repr(float(result.lambdas[a_idx, l_idx])),
                    repr(float(result.mean_error[a_idx, l_idx])),
                    repr(float(result.sd_error[a_idx, l_idx])),
                ])
