"""Input validation helpers shared by the estimators."""

import numpy as np
import scipy.sparse as sp


def check_design_matrix(X, *, order="F"):
    """Coerce X to a dense float64 matrix with finite entries.

    Sparse inputs are densified; the coordinate descent kernel walks
    columns, so Fortran order is the default layout.
    """
    if sp.issparse(X):
        X = X.toarray()
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"design matrix must be 2-dimensional, got ndim={X.ndim}")
    if X.shape[1] == 0:
        raise ValueError("design matrix has no columns")
    if not np.all(np.isfinite(X)):
        raise ValueError("design matrix contains non-finite values")
    if order == "F":
        return np.asfortranarray(X)
    return np.ascontiguousarray(X)


def check_X_y(X, y, *, order="F", allow_empty=False):
    X = check_design_matrix(X, order=order)
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != X.shape[0]:
        raise ValueError(
            f"X has {X.shape[0]} rows but y has {y.shape[0]} entries"
        )
    if not allow_empty and X.shape[0] == 0:
        raise ValueError("need at least one observation")
    if not np.all(np.isfinite(y)):
        raise ValueError("response contains non-finite values")
    return X, y


def check_binary_labels(y):
    """Require labels to be exactly 0 or 1."""
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.all((y == 0.0) | (y == 1.0)):
        raise ValueError("labels must be 0 or 1")
    return y


def check_is_fitted(estimator, attribute="coef_"):
    if not hasattr(estimator, attribute):
        raise RuntimeError(
            f"{type(estimator).__name__} instance is not fitted; call fit first"
        )
