"""Chinese restaurant process probabilities, partition sampling and the
synthetic CRP-mixture data generator.

All samplers take an explicit numpy Generator (PCG64 via
numpy.random.default_rng); independent streams for parallel work should be
derived with numpy.random.SeedSequence.spawn.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .core import Dataset, NGPrior, Partition
from .errors import InputError


@dataclass
class CrpConfig:
    alpha: float
    N: int

    def __post_init__(self):
        self.alpha = float(self.alpha)
        self.N = int(self.N)
        if not (self.alpha > 0 and np.isfinite(self.alpha)):
            raise InputError(f"alpha must be positive, got {self.alpha}")
        if self.N < 1:
            raise InputError(f"N must be >= 1, got {self.N}")


@dataclass
class GeneratorConfig:
    crp: CrpConfig
    prior: NGPrior
    D: int
    seed: int

    def __post_init__(self):
        self.D = int(self.D)
        if self.D < 1:
            raise InputError("D must be >= 1")
        if self.prior.dim != self.D:
            raise InputError(f"prior dimension {self.prior.dim} != D={self.D}")
        self.seed = int(self.seed)


@dataclass
class ClusterParams:
    """Ground-truth component parameters drawn by the generator."""

    mu: np.ndarray   # (K, D) component means
    tau: np.ndarray  # (K, D) component precisions


def crp_log_joint(partition: Partition, alpha: float) -> float:
    """Log probability of a partition under the CRP with concentration alpha.

    log Gamma(alpha) - log Gamma(N + alpha) + K log alpha + sum_k log Gamma(N_k).
    """
    if not (alpha > 0):
        raise InputError("alpha must be positive")
    n = partition.n
    return float(gammaln(alpha) - gammaln(n + alpha)
                 + partition.K * np.log(alpha)
                 + gammaln(partition.counts).sum())


def crp_conditional(counts, n_seated: int, alpha: float) -> np.ndarray:
    """Seating probabilities for the next customer: existing tables then a new one.

    Entry k is N_k / (alpha + n_seated); the last entry is alpha / (alpha + n_seated),
    where n_seated counts the customers already seated.
    """
    counts = np.asarray(counts, dtype=np.float64)
    if not (alpha > 0):
        raise InputError("alpha must be positive")
    if counts.sum() != n_seated:
        raise InputError("counts must sum to n_seated")
    denom = alpha + n_seated
    return np.concatenate([counts / denom, [alpha / denom]])


def sample_partition(config: CrpConfig, rng: np.random.Generator) -> Partition:
    """Draw a partition by sequential seating; labels come out in first-appearance order."""
    alpha = config.alpha
    counts = [1]
    z = np.empty(config.N, dtype=np.int64)
    z[0] = 1
    for i in range(1, config.N):
        u = rng.random() * (alpha + i)
        acc = 0.0
        seat = len(counts)  # new table unless an existing one absorbs u
        for k, nk in enumerate(counts):
            acc += nk
            if u <= acc:
                seat = k
                break
        if seat == len(counts):
            counts.append(1)
        else:
            counts[seat] += 1
        z[i] = seat + 1
    return Partition(z=z, K=len(counts), counts=np.array(counts, dtype=np.int64))


def _draw_components(prior: NGPrior, k: int, rng: np.random.Generator) -> ClusterParams:
    # tau ~ Gamma(shape a0, rate b0_d); mu | tau ~ Normal(m0_d, (c0 tau)^-1)
    tau = rng.gamma(shape=prior.a0, scale=1.0 / prior.b0, size=(k, prior.dim))
    mu = rng.normal(loc=prior.m0, scale=1.0 / np.sqrt(prior.c0 * tau))
    return ClusterParams(mu=mu, tau=tau)


def generate_dataset(config: GeneratorConfig,
                     rng: np.random.Generator | None = None):
    """Sample (Dataset, Partition, ClusterParams) from the CRP mixture model.

    Partition ~ CRP(alpha, N); per cluster and dimension tau ~ Gamma(a0, b0_d)
    and mu ~ Normal(m0_d, (c0 tau)^-1); observations are Normal(mu_z, tau_z^-1).
    The ground-truth labels are returned in Dataset.labels.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    partition = sample_partition(config.crp, rng)
    params = _draw_components(config.prior, partition.K, rng)
    idx = partition.z - 1
    X = rng.normal(loc=params.mu[idx], scale=1.0 / np.sqrt(params.tau[idx]))
    dataset = Dataset(X=X, labels=partition.z.copy())
    return dataset, partition, params


def continue_crp_mixture(partition: Partition, params: ClusterParams, prior: NGPrior,
                         alpha: float, n_new: int, rng: np.random.Generator):
    """Sample n_new further observations from the same restaurant and components.

    Seating continues from the given partition's counts; tables created during
    the continuation get fresh component draws from the prior. Returns a test
    Dataset whose labels extend the training cluster ids.
    """
    counts = list(partition.counts)
    mu = [params.mu[k].copy() for k in range(partition.K)]
    tau = [params.tau[k].copy() for k in range(partition.K)]
    n_seated = partition.n
    z = np.empty(n_new, dtype=np.int64)
    X = np.empty((n_new, prior.dim))
    for j in range(n_new):
        u = rng.random() * (alpha + n_seated)
        acc = 0.0
        seat = len(counts)
        for k, nk in enumerate(counts):
            acc += nk
            if u <= acc:
                seat = k
                break
        if seat == len(counts):
            counts.append(1)
            fresh = _draw_components(prior, 1, rng)
            mu.append(fresh.mu[0])
            tau.append(fresh.tau[0])
        else:
            counts[seat] += 1
        n_seated += 1
        z[j] = seat + 1
        X[j] = rng.normal(loc=mu[seat], scale=1.0 / np.sqrt(tau[seat]))
    return Dataset(X=X, labels=z)
