"""Gibbs samplers for rating models with an external prior rating.

Both models share the likelihood y | b ~ N(X b, sigma2 I). The simple
model places b ~ N(r, tau2 I) around the standardized external ratings
r, which makes the posterior Gaussian in closed form; the sampler draws
from it exactly. The hierarchical model inserts per-player scale
factors, b | eta ~ N(eta * r, tau2 I) with eta ~ N(0, I), and
alternates exact conditional draws of b and eta.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular
from sklearn.base import BaseEstimator, RegressorMixin

from ._validation import check_is_fitted, check_X_y
from .errors import NeedTwoChains, NumericalError
from .seeding import chain_rngs


def conjugate_posterior(X, y, prior_mean, sigma2, tau2):
    """Closed-form posterior mean and covariance of the simple model."""
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    prior_mean = np.asarray(prior_mean, dtype=np.float64).ravel()
    p = X.shape[1]
    precision = (X.T @ X) / sigma2 + np.eye(p) / tau2
    shift = (X.T @ y) / sigma2 + prior_mean / tau2
    cov = np.linalg.inv(precision)
    mean = cov @ shift
    return mean, cov


def _split_chains(samples: np.ndarray) -> np.ndarray:
    """Halve every chain so trends show up as between-chain variance."""
    n_draws = samples.shape[1]
    half = n_draws // 2
    return np.concatenate([samples[:, :half], samples[:, n_draws - half:]], axis=0)


def split_rhat(samples) -> np.ndarray:
    """Split potential scale reduction factor per coordinate.

    ``samples`` has shape (chains, draws, params). Coordinates whose
    within-chain variance is zero come back as NaN; see ``diagnostics``
    for how those are flagged.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] < 2:
        raise NeedTwoChains("split R-hat needs at least two chains")
    if samples.shape[1] < 4:
        raise ValueError("split R-hat needs at least four draws per chain")
    halves = _split_chains(samples)
    n = halves.shape[1]
    within = halves.var(axis=1, ddof=1).mean(axis=0)
    between_over_n = halves.mean(axis=1).var(axis=0, ddof=1)
    var_plus = (n - 1) / n * within + between_over_n
    rhat = np.full(samples.shape[2], np.nan)
    ok = within > 0.0
    rhat[ok] = np.sqrt(var_plus[ok] / within[ok])
    return rhat


def _autocovariances(chains: np.ndarray) -> np.ndarray:
    """Biased per-chain autocovariance at all lags, via FFT."""
    n = chains.shape[1]
    centered = chains - chains.mean(axis=1, keepdims=True)
    size = 1
    while size < 2 * n:
        size *= 2
    freq = np.fft.rfft(centered, n=size, axis=1)
    acov = np.fft.irfft(freq * np.conj(freq), n=size, axis=1)[:, :n, :]
    return acov / n


def effective_sample_size(samples) -> np.ndarray:
    """ESS per coordinate from split chains.

    Lag correlations are estimated from pooled autocovariances and
    summed using the initial positive then monotone pair-sum rule, which
    truncates the noisy tail. The result is capped at the total number
    of retained draws.
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.shape[0] < 2:
        raise NeedTwoChains("effective sample size needs at least two chains")
    if samples.shape[1] < 4:
        raise ValueError("effective sample size needs at least four draws")
    halves = _split_chains(samples)
    m, n, p = halves.shape
    within = halves.var(axis=1, ddof=1).mean(axis=0)
    between_over_n = halves.mean(axis=1).var(axis=0, ddof=1)
    var_plus = (n - 1) / n * within + between_over_n
    mean_acov = _autocovariances(halves).mean(axis=0)
    total = m * n
    ess = np.full(p, np.nan)
    for j in range(p):
        if not var_plus[j] > 0.0:
            continue
        rho = 1.0 - (within[j] - mean_acov[:, j]) / var_plus[j]
        even_lags = (n // 2) * 2
        pair = rho[0:even_lags:2] + rho[1:even_lags:2]
        positive = np.flatnonzero(pair <= 0.0)
        cut = positive[0] if positive.size else pair.size
        if cut == 0:
            ess[j] = float(total)
            continue
        kept = np.minimum.accumulate(pair[:cut])
        tau = -1.0 + 2.0 * kept.sum()
        ess[j] = min(total / max(tau, 1e-12), float(total))
    return ess


@dataclass(frozen=True, eq=False)
class DiagnosticReport:
    """Convergence verdict over one block of chains."""

    rhat: np.ndarray
    ess: np.ndarray
    degenerate: np.ndarray
    passed: bool


RHAT_THRESHOLD = 1.05


def diagnostics(samples) -> DiagnosticReport:
    """Split R-hat and ESS with a single pass/fail verdict.

    A coordinate with no within-chain variance cannot be assessed and is
    marked degenerate, which fails the block.
    """
    samples = np.asarray(samples, dtype=np.float64)
    rhat = split_rhat(samples)
    ess = effective_sample_size(samples)
    degenerate = ~np.isfinite(rhat)
    passed = bool(not degenerate.any() and np.all(rhat < RHAT_THRESHOLD))
    return DiagnosticReport(rhat=rhat, ess=ess, degenerate=degenerate, passed=passed)


@dataclass(frozen=True, eq=False)
class PosteriorSummary:
    """Per-parameter posterior summaries over all retained draws.

    ``samples`` keeps the raw (chains, draws, params) block; the scalar
    summaries pool every chain. ``mcse`` is sd / sqrt(ess).
    """

    names: tuple[str, ...]
    samples: np.ndarray
    mean: np.ndarray
    sd: np.ndarray
    q05: np.ndarray
    q50: np.ndarray
    q95: np.ndarray
    rhat: np.ndarray
    ess: np.ndarray
    mcse: np.ndarray
    degenerate: np.ndarray

    @property
    def n_chains(self) -> int:
        return self.samples.shape[0]

    @property
    def n_draws(self) -> int:
        return self.samples.shape[1]

    @property
    def passed(self) -> bool:
        return bool(
            not self.degenerate.any() and np.all(self.rhat < RHAT_THRESHOLD)
        )


def summarize(names, samples) -> PosteriorSummary:
    samples = np.asarray(samples, dtype=np.float64)
    n_chains, n_draws, p = samples.shape
    if len(names) != p:
        raise ValueError("one name per parameter required")
    flat = samples.reshape(n_chains * n_draws, p)
    if n_chains >= 2 and n_draws >= 4:
        rhat = split_rhat(samples)
        ess = effective_sample_size(samples)
        degenerate = ~np.isfinite(rhat)
    else:
        rhat = np.full(p, np.nan)
        ess = np.full(p, np.nan)
        degenerate = np.zeros(p, dtype=bool)
    sd = flat.std(axis=0, ddof=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        mcse = sd / np.sqrt(ess)
    q05, q50, q95 = np.quantile(flat, [0.05, 0.5, 0.95], axis=0)
    samples = samples.copy()
    samples.setflags(write=False)
    return PosteriorSummary(
        names=tuple(names),
        samples=samples,
        mean=flat.mean(axis=0),
        sd=sd,
        q05=q05,
        q50=q50,
        q95=q95,
        rhat=rhat,
        ess=ess,
        mcse=mcse,
        degenerate=degenerate,
    )


def _run_chains(X, y, prior, hierarchical, sigma2, tau2, n_chains, n_warmup,
                n_draws, seed):
    n, p = X.shape
    precision = (X.T @ X) / sigma2 + np.eye(p) / tau2
    try:
        lower = cholesky(precision, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"posterior precision is not positive definite: {exc}")
    shift_data = (X.T @ y) / sigma2
    beta_out = np.empty((n_chains, n_draws, p))
    eta_out = np.empty((n_chains, n_draws, p)) if hierarchical else None
    # Conditional scale updates for the hierarchical model; constants
    # depend only on the prior, so hoist them out of the loop.
    if hierarchical:
        eta_prec = 1.0 + prior * prior / tau2
        eta_sd = 1.0 / np.sqrt(eta_prec)
    for c, rng in enumerate(chain_rngs(seed, n_chains)):
        eta = rng.normal(0.0, 2.0, size=p)
        for t in range(n_warmup + n_draws):
            loc = eta * prior if hierarchical else prior
            mu = cho_solve((lower, True), shift_data + loc / tau2)
            noise = solve_triangular(lower, rng.standard_normal(p),
                                     lower=True, trans="T")
            beta = mu + noise
            if hierarchical:
                eta_mean = (prior * beta / tau2) / eta_prec
                eta = eta_mean + eta_sd * rng.standard_normal(p)
            if t >= n_warmup:
                beta_out[c, t - n_warmup] = beta
                if hierarchical:
                    eta_out[c, t - n_warmup] = eta
    return beta_out, eta_out


class BayesianRating(RegressorMixin, BaseEstimator):
    """Posterior-mean ratings anchored to an external rating prior.

    Parameters
    ----------
    kind : {"simple", "hierarchical"}
        Fixed prior location versus per-player scale factors on it.
    sigma2 : float or None
        Observation noise variance; None means the sample variance of
        the training response (falling back to 1.0 when that is
        undefined or zero).
    tau2 : float
        Prior variance around the prior location.
    n_chains, n_warmup, n_samples : int
        Chain count, warmup draws discarded per chain, and retained
        draws per chain.
    seed : int
        Top-level seed; chains receive independent substreams.

    Attributes after fit include ``coef_`` (posterior mean),
    ``summary_`` and, for the hierarchical model, ``eta_summary_``.
    """

    def __init__(self, kind="simple", sigma2=None, tau2=1.0, n_chains=4,
                 n_warmup=1000, n_samples=2000, seed=0):
        self.kind = kind
        self.sigma2 = sigma2
        self.tau2 = tau2
        self.n_chains = n_chains
        self.n_warmup = n_warmup
        self.n_samples = n_samples
        self.seed = seed

    def _check_params(self):
        if self.kind not in ("simple", "hierarchical"):
            raise ValueError(f"unknown model kind {self.kind!r}")
        if self.sigma2 is not None and not self.sigma2 > 0.0:
            raise ValueError("sigma2 must be positive when given")
        if not self.tau2 > 0.0:
            raise ValueError("tau2 must be positive")
        if self.n_chains < 1:
            raise ValueError("n_chains must be at least 1")
        if self.n_warmup < 0:
            raise ValueError("n_warmup must be non-negative")
        if self.n_samples < 4:
            raise ValueError("n_samples must be at least 4")

    def fit(self, X, y, prior_mean, names=None):
        self._check_params()
        X, y = check_X_y(X, y, order="C", allow_empty=True)
        p = X.shape[1]
        prior = np.asarray(prior_mean, dtype=np.float64).ravel()
        if prior.shape[0] != p:
            raise ValueError(
                f"prior_mean has {prior.shape[0]} entries for {p} players"
            )
        if not np.all(np.isfinite(prior)):
            raise ValueError("prior_mean contains non-finite values")
        if self.sigma2 is not None:
            sigma2 = float(self.sigma2)
        else:
            sigma2 = float(np.var(y, ddof=1)) if y.size >= 2 else 0.0
            if not sigma2 > 0.0:
                sigma2 = 1.0
        if names is None:
            names = tuple(f"b{j}" for j in range(p))
        beta_draws, eta_draws = _run_chains(
            X, y, prior, self.kind == "hierarchical", sigma2, float(self.tau2),
            int(self.n_chains), int(self.n_warmup), int(self.n_samples),
            int(self.seed),
        )
        self.summary_ = summarize(names, beta_draws)
        if eta_draws is not None:
            self.eta_summary_ = summarize(
                tuple(f"eta:{name}" for name in names), eta_draws
            )
        elif hasattr(self, "eta_summary_"):
            del self.eta_summary_
        self.coef_ = self.summary_.mean
        self.sigma2_ = sigma2
        self.tau2_ = float(self.tau2)
        return self

    def predict(self, X):
        check_is_fitted(self)
        return np.asarray(X @ self.coef_).ravel()


def write_chain_csv(path, summaries):
    """Dump raw draws as chain,iter,param,value rows.

    ``summaries`` is an iterable of PosteriorSummary blocks; parameters
    keep their summary names, chains and iterations are 1-based.
    """
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(["chain", "iter", "param", "value"])
        for summary in summaries:
            chains, draws, p = summary.samples.shape
            for c in range(chains):
                for t in range(draws):
                    row = summary.samples[c, t]
                    for j in range(p):
                        writer.writerow([c + 1, t + 1, summary.names[j],
                                         repr(float(row[j]))])
