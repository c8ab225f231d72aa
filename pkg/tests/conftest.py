"""Shared fixtures and independent oracles used across the test modules.

The oracles deliberately avoid the package's incremental code paths: set
partitions are enumerated from restricted-growth strings, posteriors are
recomputed from raw member lists, and marginal likelihoods come from the
closed-form normal-Gamma evidence.
"""

import math

import numpy as np
import pytest
from scipy.special import gammaln

from crpmap import Dataset, NGPrior, Partition


def set_partition_labels(n):
    """All set partitions of n items as restricted-growth label lists
    (labels appear in first-appearance order)."""
    if n == 1:
        return [[0]]
    out = []

    def rec(i, a, k):
        if i == n:
            out.append(a.copy())
            return
        for c in range(k + 1):
            a[i] = c
            rec(i + 1, a, k + 1 if c == k else k)

    rec(1, [0] * n, 1)
    return out


BELL = {1: 1, 2: 2, 3: 5, 4: 15, 5: 52, 6: 203, 7: 877, 8: 4140}


def naive_ng_posterior(prior: NGPrior, members: np.ndarray):
    """Posterior parameters from the raw member list via the deviation form:
    b_d = b0_d + (1/2) sum_j (x_jd - xbar_d)^2 + c0 n (xbar_d - m0_d)^2 / (2 (c0 + n))."""
    members = np.atleast_2d(members)
    n = members.shape[0]
    if n == 0:
        return prior.m0.copy(), prior.c0, prior.b0.copy(), prior.a0
    xbar = members.mean(axis=0)
    c = prior.c0 + n
    a = prior.a0 + n / 2.0
    m = (prior.c0 * prior.m0 + n * xbar) / c
    b = (prior.b0 + 0.5 * ((members - xbar) ** 2).sum(axis=0)
         + prior.c0 * n * (xbar - prior.m0) ** 2 / (2.0 * c))
    return m, c, b, a


def naive_log_student_t(x, mu, lam, nu):
    return (gammaln((nu + 1) / 2.0) - gammaln(nu / 2.0)
            + 0.5 * math.log(lam / (nu * math.pi))
            - (nu + 1) / 2.0 * math.log(1.0 + lam * (x - mu) ** 2 / nu))


def naive_log_predictive(x, prior: NGPrior, members: np.ndarray):
    """Leave-nothing-out Student-T predictive of x given a member list."""
    m, c, b, a = naive_ng_posterior(prior, members)
    x = np.atleast_1d(x)
    return float(sum(naive_log_student_t(x[d], m[d], a * c / (b[d] * (c + 1.0)), 2 * a)
                     for d in range(x.shape[0])))


def log_cluster_evidence(members: np.ndarray, prior: NGPrior) -> float:
    """Closed-form marginal likelihood of one cluster's members under the
    normal-Gamma prior (per-dimension product)."""
    members = np.atleast_2d(members)
    n, d = members.shape
    m, c, b, a = naive_ng_posterior(prior, members)
    val = -0.5 * n * d * math.log(2.0 * math.pi)
    val += d * (gammaln(a) - gammaln(prior.a0) + 0.5 * (math.log(prior.c0) - math.log(c)))
    val += float((prior.a0 * np.log(prior.b0) - a * np.log(b)).sum())
    return val


def naive_crp_log_joint(counts, alpha: float) -> float:
    counts = np.asarray(counts, dtype=np.float64)
    n = counts.sum()
    return float(gammaln(alpha) - gammaln(n + alpha)
                 + counts.shape[0] * math.log(alpha)
                 + gammaln(counts).sum())


def true_log_posterior(X: np.ndarray, labels, prior: NGPrior, alpha: float) -> float:
    """Log of the exact collapsed joint p(z, X): CRP(z) times the product of
    per-cluster closed-form evidences. The Gibbs sampler's stationary law."""
    part = Partition.from_labels(np.asarray(labels))
    lp = naive_crp_log_joint(part.counts, alpha)
    for k in range(1, part.K + 1):
        lp += log_cluster_evidence(X[part.z == k], prior)
    return lp


def naive_complete_data_nll(X, labels, prior: NGPrior, alpha: float) -> float:
    """Member-list reimplementation of the pseudo-likelihood convergence score."""
    part = Partition.from_labels(np.asarray(labels))
    total = 0.0
    for i in range(X.shape[0]):
        idx = np.flatnonzero(part.z == part.z[i])
        idx = idx[idx != i]
        total -= naive_log_predictive(X[i], prior, X[idx]) if idx.size else \
            naive_log_predictive_prior(X[i], prior)
    return total - naive_crp_log_joint(part.counts, alpha)


def naive_log_predictive_prior(x, prior: NGPrior) -> float:
    x = np.atleast_1d(x)
    return float(sum(naive_log_student_t(
        x[d], prior.m0[d],
        prior.a0 * prior.c0 / (prior.b0[d] * (prior.c0 + 1.0)), 2 * prior.a0)
        for d in range(x.shape[0])))


@pytest.fixture
def rng():
    return np.random.default_rng(20240810)


@pytest.fixture
def paper_prior():
    """The synthetic-experiment prior: m0=[1,1], c0=0.1, b0=[10,10], a0=1."""
    return NGPrior(m0=np.array([1.0, 1.0]), c0=0.1, b0=np.array([10.0, 10.0]), a0=1.0)


@pytest.fixture
def small_dataset(rng):
    X = np.vstack([rng.normal(-2.0, 0.4, (12, 2)), rng.normal(2.0, 0.4, (10, 2))])
    return Dataset(X=X)
