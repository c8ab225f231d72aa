"""Clustering agreement metrics and out-of-sample prediction.

NMI uses mutual information over the joint contingency table with the sum
(2 I / (H(U)+H(V))) or max (I / max(H)) normalization; AMI subtracts the
exact hypergeometric expectation of I and max-normalizes. Prediction mixes
the per-cluster Student-T predictives with CRP weights N_k/(alpha+N) and
alpha/(alpha+N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
import numpy as np
from scipy.special import gammaln, logsumexp

from .core import Dataset, NGPrior, Partition, SufficientStats, ng_posterior, stats_remove
from .errors import InputError
from .predictive import log_marginal


def _contingency(u, v):
    u = np.asarray(u)
    v = np.asarray(v)
    if u.ndim != 1 or u.shape != v.shape:
        raise InputError("labelings must be 1-D and of equal length")
    if u.shape[0] < 1:
        raise InputError("labelings must be non-empty")
    _, ui = np.unique(u, return_inverse=True)
    _, vi = np.unique(v, return_inverse=True)
    table = np.zeros((ui.max() + 1, vi.max() + 1))
    np.add.at(table, (ui, vi), 1.0)
    return table


def _entropy(counts: np.ndarray) -> float:
    p = counts[counts > 0] / counts.sum()
    return float(-(p * np.log(p)).sum())


def _mutual_information(table: np.ndarray) -> float:
    n = table.sum()
    pi = table.sum(axis=1)
    pj = table.sum(axis=0)
    nz = table > 0
    t = table[nz]
    outer = np.outer(pi, pj)[nz]
    # sorted summation makes the value exactly invariant to transposition
    contrib = t / n * (np.log(t * n) - np.log(outer))
    return float(np.sort(contrib).sum())


def nmi(u, v, variant: str = "sum") -> float:
    """Normalized mutual information between two labelings.

    Degenerate cases: both single-cluster -> 1.0 (perfect agreement);
    exactly one single-cluster -> 0.0.
    """
    table = _contingency(u, v)
    hu = _entropy(table.sum(axis=1))
    hv = _entropy(table.sum(axis=0))
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    mi = _mutual_information(table)
    if variant == "sum":
        return 2.0 * mi / (hu + hv)
    if variant == "max":
        return mi / max(hu, hv)
    raise InputError(f"unknown NMI variant {variant!r} (expected 'sum' or 'max')")


def expected_mutual_information(table: np.ndarray) -> float:
    """Exact E[I] under the permutation model with fixed marginals."""
    n = table.sum()
    ai = table.sum(axis=1)
    bj = table.sum(axis=0)
    log_fact = gammaln(np.arange(int(n) + 2) + 1.0)  # log_fact[k] = log k!
    contribs = []
    for a in ai:
        for b in bj:
            lo = int(max(a + b - n, 1))
            hi = int(min(a, b))
            if hi < lo:
                continue
            nij = np.arange(lo, hi + 1, dtype=np.float64)
            term = nij / n * (np.log(n * nij) - math.log(a * b))
            log_delta = (log_fact[int(a)] + log_fact[int(b)]
                         + log_fact[int(n - a)] + log_fact[int(n - b)]
                         - log_fact[int(n)]
                         - gammaln(nij + 1.0) - gammaln(a - nij + 1.0)
                         - gammaln(b - nij + 1.0) - gammaln(n - a - b + nij + 1.0))
            contribs.extend((term * np.exp(log_delta)).tolist())
    # sorted summation keeps E[I] exactly symmetric under transposition
    return float(np.sort(np.array(contribs)).sum()) if contribs else 0.0


def ami(u, v) -> float:
    """Adjusted mutual information, (I - E[I]) / (max(H(U), H(V)) - E[I])."""
    table = _contingency(u, v)
    hu = _entropy(table.sum(axis=1))
    hv = _entropy(table.sum(axis=0))
    if hu == 0.0 and hv == 0.0:
        return 1.0
    if hu == 0.0 or hv == 0.0:
        return 0.0
    mi = _mutual_information(table)
    emi = expected_mutual_information(table)
    denom = max(hu, hv) - emi
    if denom <= 0:
        return 1.0 if mi >= emi else 0.0
    return float((mi - emi) / denom)


@dataclass
class MetricReport:
    nmi_sum: float
    nmi_max: float
    ami: float
    delta_k: int
    n_clusters_est: int


def metric_report(truth, estimate) -> MetricReport:
    truth = np.asarray(truth)
    estimate = np.asarray(estimate)
    k_true = np.unique(truth).shape[0]
    k_est = np.unique(estimate).shape[0]
    return MetricReport(nmi_sum=nmi(truth, estimate, "sum"),
                        nmi_max=nmi(truth, estimate, "max"),
                        ami=ami(truth, estimate),
                        delta_k=int(k_est - k_true),
                        n_clusters_est=int(k_est))


@dataclass
class CollapsedModel:
    """Everything out-of-sample prediction needs: prior, alpha and the
    per-cluster sufficient statistics of the fitted partition."""

    prior: NGPrior
    alpha: float
    stats: list = field(default_factory=list)

    def __post_init__(self):
        self.alpha = float(self.alpha)
        if not (self.alpha > 0):
            raise InputError("alpha must be positive")
        for s in self.stats:
            if s.Nk < 1:
                raise InputError("model clusters must be non-empty")

    @property
    def n(self) -> int:
        return sum(s.Nk for s in self.stats)

    @property
    def k(self) -> int:
        return len(self.stats)

    @classmethod
    def from_partition(cls, dataset: Dataset, partition: Partition, prior: NGPrior,
                       alpha: float) -> "CollapsedModel":
        if partition.n != dataset.n:
            raise InputError("partition and dataset sizes differ")
        stats = [SufficientStats.from_points(dataset.X[partition.z == k + 1])
                 for k in range(partition.K)]
        return cls(prior=prior, alpha=alpha, stats=stats)

    def component_log_terms(self, x) -> np.ndarray:
        """log w_k + log p(x | component k) for k = 1..K then the new-cluster slot."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape != self.prior.m0.shape:
            raise InputError("x dimension does not match the model")
        denom = self.alpha + self.n
        terms = np.empty(self.k + 1)
        for k, s in enumerate(self.stats):
            terms[k] = math.log(s.Nk / denom) + log_marginal(x, ng_posterior(self.prior, s))
        terms[self.k] = math.log(self.alpha / denom) + log_marginal(x, self.prior)
        return terms


def predict_marginal(x_new, model: CollapsedModel) -> float:
    """Log density of the CRP-weighted Student-T mixture at x_new."""
    return float(logsumexp(model.component_log_terms(x_new)))


def predict_modal(x_new, model: CollapsedModel):
    """Most probable component for x_new: (cluster id in 1..K+1, its log density).

    Ties go to the lowest cluster id; the new-cluster slot loses ties.
    """
    terms = model.component_log_terms(x_new)
    best = int(np.argmax(terms))  # first occurrence wins ties
    x = np.asarray(x_new, dtype=np.float64)
    if best == model.k:
        dens = log_marginal(x, model.prior)
    else:
        dens = log_marginal(x, ng_posterior(model.prior, model.stats[best]))
    return best + 1, float(dens)


def modal_labels(X, model: CollapsedModel) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    return np.array([predict_modal(x, model)[0] for x in X], dtype=np.int64)


def loo_nll(dataset: Dataset, partition: Partition, prior: NGPrior, alpha: float) -> float:
    """Mean over observations of -log predictive density with that observation's
    contribution removed from its own cluster's statistics."""
    model = CollapsedModel.from_partition(dataset, partition, prior, alpha)
    total = 0.0
    for i in range(dataset.n):
        k = int(partition.z[i]) - 1
        kept = model.stats[k]
        reduced = stats_remove(kept, dataset.X[i])
        if reduced.Nk == 0:
            stats = model.stats[:k] + model.stats[k + 1:]
        else:
            stats = list(model.stats)
            stats[k] = reduced
        holdout = CollapsedModel(prior=prior, alpha=alpha, stats=stats)
        total -= predict_marginal(dataset.X[i], holdout)
    return total / dataset.n
