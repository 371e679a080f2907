"""Logistic solver checks: gradients, optimality, separation handling."""

import numpy as np
import pytest
from scipy.special import expit

from apmrate.logistic import (
    LogisticRating,
    logistic_gradient,
    logistic_kkt_residual,
    logistic_loss,
    logistic_objective,
    predict_prob,
)
from apmrate.selection import lambda_path

from conftest import ternary_matrix


def random_instance(rng, n=None, p=None):
    n = n or int(rng.integers(20, 60))
    p = p or int(rng.integers(2, 8))
    X = ternary_matrix(rng, n, p)
    beta = rng.normal(scale=0.8, size=p)
    labels = (rng.random(n) < expit(X @ beta)).astype(float)
    if labels.min() == labels.max():
        labels[0] = 1.0 - labels[0]
    return X, labels


class TestGradient:
    def test_finite_difference(self):
        rng = np.random.default_rng(17)
        for _ in range(20):
            X, labels = random_instance(rng)
            beta = rng.normal(scale=0.5, size=X.shape[1])
            grad = logistic_gradient(X, labels, beta)
            eps = 1e-6
            for j in range(X.shape[1]):
                step = np.zeros(X.shape[1])
                step[j] = eps
                fd = (
                    logistic_loss(X, labels, beta + step)
                    - logistic_loss(X, labels, beta - step)
                ) / (2 * eps)
                assert abs(grad[j] - fd) < 1e-8

    def test_zero_coefficients_gradient_form(self):
        # At beta = 0 every probability is 1/2, so the gradient reduces
        # to -(1/2n) X'(y - 1/2).
        rng = np.random.default_rng(18)
        X, labels = random_instance(rng)
        n = X.shape[0]
        expected = -(X.T @ (labels - 0.5)) / (2.0 * n)
        assert np.allclose(logistic_gradient(X, labels, np.zeros(X.shape[1])),
                           expected, atol=1e-15)


class TestSolver:
    def test_kkt_residual_small_at_solution(self):
        rng = np.random.default_rng(19)
        for _ in range(10):
            X, labels = random_instance(rng)
            alpha = float(rng.uniform(0, 1))
            lam = float(rng.uniform(0.005, 0.1))
            fit = LogisticRating(alpha=alpha, lam=lam, tol=1e-12,
                                 max_iter=20000).fit(X, labels)
            assert fit.converged_
            assert logistic_kkt_residual(X, labels, fit.coef_, alpha, lam) < 1e-9

    def test_objective_never_increases(self):
        from apmrate.linear import _cd_enet

        rng = np.random.default_rng(20)
        X, labels = random_instance(rng, n=50, p=6)
        alpha, lam = 0.3, 0.02
        beta = np.zeros(6)
        margin = X @ beta
        previous = logistic_objective(X, labels, beta, alpha, lam)
        for _ in range(60):
            probs = expit(margin)
            working = margin + 4.0 * (labels - probs)
            _cd_enet(X, working, beta, alpha, 8.0 * lam, 1e-10, 1000)
            margin = X @ beta
            current = logistic_objective(X, labels, beta, alpha, lam)
            assert current <= previous + 1e-12
            previous = current

    def test_objective_beats_null_fit(self):
        rng = np.random.default_rng(21)
        X, labels = random_instance(rng, n=80, p=5)
        fit = LogisticRating(alpha=0.0, lam=0.01, tol=1e-10).fit(X, labels)
        null_objective = logistic_objective(X, labels, np.zeros(5), 0.0, 0.01)
        assert fit.objective_ < null_objective

    def test_full_shrinkage_at_path_top(self):
        rng = np.random.default_rng(22)
        for alpha in (0.001, 0.4, 1.0):
            X, labels = random_instance(rng, n=40, p=6)
            top = lambda_path(X, labels, alpha, family="binomial")[0]
            fit = LogisticRating(alpha=alpha, lam=float(top), tol=1e-10).fit(
                X, labels
            )
            assert np.array_equal(fit.coef_, np.zeros(6))
        # strictly inside the path the fit picks up signal
        loose = LogisticRating(alpha=1.0, lam=float(top) * 0.5, tol=1e-10).fit(
            X, labels
        )
        assert np.abs(loose.coef_).max() > 0.0

    def test_side_and_label_flip_equivalence(self):
        # expit(-t) and 1 - expit(t) differ in the last ulp, so the two
        # runs are not bit-identical; they agree at solver tolerance.
        rng = np.random.default_rng(23)
        for _ in range(10):
            X, labels = random_instance(rng)
            fit = LogisticRating(alpha=0.5, lam=0.05, tol=1e-12).fit(X, labels)
            flipped = LogisticRating(alpha=0.5, lam=0.05, tol=1e-12).fit(
                np.asfortranarray(-X), 1.0 - labels
            )
            assert np.abs(fit.coef_ - flipped.coef_).max() < 1e-9


class TestSeparation:
    def test_flagged_on_separable_data(self):
        X = np.asfortranarray([[1.0], [1.0], [-1.0]])
        labels = np.array([1.0, 1.0, 0.0])
        fit = LogisticRating(alpha=0.0, lam=0.0, max_iter=200).fit(X, labels)
        assert fit.separation_
        assert not fit.converged_

    def test_not_flagged_with_penalty(self):
        X = np.asfortranarray([[1.0], [1.0], [-1.0]])
        labels = np.array([1.0, 1.0, 0.0])
        fit = LogisticRating(alpha=0.0, lam=0.1, tol=1e-10).fit(X, labels)
        assert not fit.separation_
        assert fit.converged_

    def test_not_flagged_on_overlapping_data(self):
        rng = np.random.default_rng(24)
        X, labels = random_instance(rng, n=80, p=3)
        # force overlap: identical rows with both labels
        X[0] = X[1]
        labels[0], labels[1] = 0.0, 1.0
        fit = LogisticRating(alpha=0.0, lam=0.0, tol=1e-8, max_iter=2000).fit(
            X, labels
        )
        assert not fit.separation_


class TestPredictions:
    def test_probability_shapes_and_clamping(self):
        beta = np.array([40.0])
        single = predict_prob(beta, np.array([1.0]))
        assert float(single) == 1.0 - 1e-12
        matrix = predict_prob(beta, np.array([[1.0], [-1.0], [0.0]]))
        assert matrix.shape == (3,)
        assert matrix[2] == 0.5

    def test_predict_proba_columns_sum_to_one(self):
        rng = np.random.default_rng(25)
        X, labels = random_instance(rng, n=30, p=4)
        fit = LogisticRating(alpha=0.2, lam=0.02, tol=1e-9).fit(X, labels)
        proba = fit.predict_proba(X)
        assert proba.shape == (30, 2)
        assert np.allclose(proba.sum(axis=1), 1.0, atol=1e-12)
        hard = fit.predict(X)
        assert set(np.unique(hard)) <= {0.0, 1.0}

    @pytest.mark.parametrize(
        "kwargs",
        [{"alpha": 2.0}, {"lam": -0.5}, {"tol": -1e-9}, {"max_iter": 0}],
    )
    def test_invalid_params(self, kwargs):
        with pytest.raises(ValueError):
            LogisticRating(**kwargs).fit(np.eye(2), np.array([0.0, 1.0]))

    def test_labels_must_be_binary(self):
        with pytest.raises(ValueError):
            LogisticRating().fit(np.eye(2), np.array([0.0, 2.0]))
