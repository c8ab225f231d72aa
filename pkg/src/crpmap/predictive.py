"""Student-T posterior predictives, negative-log assignment scores and the
complete-data negative log likelihood of the collapsed model.

All constant terms are kept in the scores so the same quantities serve as
assignment criteria, convergence score and out-of-sample log densities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .core import Dataset, NGPosterior, NGPrior, Partition, SufficientStats, ng_posterior
from .crp import crp_log_joint
from .errors import InputError

LOG_2PI = math.log(2.0 * math.pi)

PosteriorLike = Union[NGPosterior, NGPrior]


@dataclass
class StudentTParams:
    mu: float
    lam: float
    nu: float

    def __post_init__(self):
        if not (self.lam > 0 and self.nu > 0):
            raise InputError("Student-T requires lam > 0 and nu > 0")


@dataclass
class AssignmentScores:
    """Negative log unnormalized assignment probabilities, new-cluster slot last."""

    q: np.ndarray
    cluster_ids: list

    @property
    def argmin(self) -> int:
        # ties: lowest cluster id wins; the new-cluster slot loses ties
        return int(np.argmin(self.q))


def _params(post: PosteriorLike) -> NGPosterior:
    if isinstance(post, NGPrior):
        return NGPosterior(m=post.m0, c=post.c0, b=post.b0, a=post.a0)
    return post


def student_t_params_existing(post: NGPosterior, d: int) -> StudentTParams:
    """Marginal predictive for dimension d of a cluster posterior:
    mu = m_d, lam = a c / (b_d (c + 1)), nu = 2a."""
    return StudentTParams(mu=float(post.m[d]),
                          lam=float(post.a * post.c / (post.b[d] * (post.c + 1.0))),
                          nu=2.0 * post.a)


def student_t_params_prior(prior: NGPrior, d: int) -> StudentTParams:
    return student_t_params_existing(_params(prior), d)


def log_student_t(x: float, p: StudentTParams) -> float:
    """Log density of St(x | mu, lam, nu) with precision parameter lam."""
    half = 0.5 * (p.nu + 1.0)
    return float(gammaln(half) - gammaln(0.5 * p.nu)
                 + 0.5 * (math.log(p.lam) - math.log(p.nu) - math.log(math.pi))
                 - half * math.log1p(p.lam * (x - p.mu) ** 2 / p.nu))


def log_marginal(x, post: PosteriorLike) -> float:
    """Sum over dimensions of the Student-T log predictive at x."""
    post = _params(post)
    x = np.asarray(x, dtype=np.float64)
    if x.shape != post.m.shape:
        raise InputError(f"x has dimension {x.shape}, posterior has {post.m.shape}")
    lam = post.a * post.c / (post.b * (post.c + 1.0))
    nu = 2.0 * post.a
    half = 0.5 * (nu + 1.0)
    terms = (gammaln(half) - gammaln(0.5 * nu)
             + 0.5 * (np.log(lam) - math.log(nu) - math.log(math.pi))
             - half * np.log1p(lam * (x - post.m) ** 2 / nu))
    return float(terms.sum())


def assignment_scores(x, stats: Sequence[SufficientStats], prior: NGPrior,
                      alpha: float) -> AssignmentScores:
    """Scores q_k = -log N_k - log p(x | cluster k without x) for each existing
    cluster, plus q_{K+1} = -log alpha - log p(x | prior).

    Every entry of stats must describe a cluster with the current observation
    already removed and at least one remaining member.
    """
    x = np.asarray(x, dtype=np.float64)
    if not (alpha > 0):
        raise InputError("alpha must be positive")
    K = len(stats)
    if any(s.Nk < 1 for s in stats):
        raise InputError("assignment_scores requires N_k >= 1 for every retained cluster")
    q = np.empty(K + 1)
    for k, s in enumerate(stats):
        q[k] = -math.log(s.Nk) - log_marginal(x, ng_posterior(prior, s))
    q[K] = -math.log(alpha) - log_marginal(x, prior)
    return AssignmentScores(q=q, cluster_ids=list(range(1, K + 1)) + [K + 1])


def assignment_probabilities(scores: AssignmentScores) -> np.ndarray:
    """Normalized probabilities exp(-q) / sum exp(-q), computed max-shifted."""
    w = np.exp(-(scores.q - scores.q.min()))
    return w / w.sum()


def _check_fit_inputs(dataset: Dataset, partition: Partition, prior: NGPrior) -> None:
    if partition.n != dataset.n:
        raise InputError("partition and dataset sizes differ")
    if prior.dim != dataset.dim:
        raise InputError("prior and dataset dimensions differ")


def complete_data_nll(dataset: Dataset, partition: Partition, prior: NGPrior,
                      alpha: float, backend: str | None = None) -> float:
    """Exact negative log of the collapsed complete-data likelihood,
    -log p(X, z | alpha) = -log CRP(z) - sum_k log m(X_k), with m(X_k) the
    closed-form normal-Gamma evidence of cluster k's members.

    This is the score the assignment updates coordinate-descend on: it never
    increases along a fit, and exp(-nll) enumerates the exact posterior over
    partitions. It serves as the convergence criterion, the restart selector
    and the sampler's monitored scalar.
    """
    _check_fit_inputs(dataset, partition, prior)
    state = _kernels.ClusterState.from_partition(dataset.X, partition)
    lgam = _kernels.lgamma_table(prior.a0, dataset.n)
    ev = _kernels.evidence_total(state.S, state.V, state.Nk, state.K,
                                 prior.m0, prior.c0, prior.b0, prior.a0, lgam,
                                 backend=backend)
    return float(-ev - crp_log_joint(partition, alpha))


def complete_data_pseudo_nll(dataset: Dataset, partition: Partition, prior: NGPrior,
                             alpha: float, backend: str | None = None) -> float:
    """Leave-one-out product score:
    -sum_i log p(x_i | posterior of its own cluster with x_i removed) - log CRP(z).

    Each factor conditions on all other assignments, so this is a
    pseudo-likelihood rather than a joint density; unlike complete_data_nll
    it is not guaranteed monotone under the assignment updates. Kept as a
    diagnostic score.
    """
    _check_fit_inputs(dataset, partition, prior)
    state = _kernels.ClusterState.from_partition(dataset.X, partition)
    lgam = _kernels.lgamma_table(prior.a0, dataset.n)
    pts = _kernels.nll_points(dataset.X, state.z, state.S, state.V, state.Nk, state.K,
                              prior.m0, prior.c0, prior.b0, prior.a0, lgam,
                              backend=backend)
    return float(pts - crp_log_joint(partition, alpha))
