"""Collapsed CRP Gibbs sampling with Raftery-Lewis stopping.

Cluster parameters stay integrated out; a sweep resamples every indicator
from the categorical distribution proportional to exp(-q) of the assignment
scores. The per-iteration complete-data NLL is the scalar monitored by the
Raftery-Lewis diagnostic.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import ndtri

from . import _kernels
from .core import Dataset, NGPrior, Partition
from .crp import crp_log_joint
from .errors import InputError, InsufficientChain
from .evaluation import ami, nmi


@dataclass
class RafteryConfig:
    q: float = 0.025
    r: float = 0.1
    s: float = 0.95

    def __post_init__(self):
        if not (0 < self.q < 1 and 0 < self.s < 1 and self.r > 0):
            raise InputError("raftery needs 0 < q < 1, 0 < s < 1, r > 0")


@dataclass
class RafteryResult:
    n_required: int
    burn_in: int
    thin: int
    n_min: int

    @property
    def total(self) -> int:
        return self.burn_in + self.n_required


@dataclass
class GibbsConfig:
    alpha: float
    prior: NGPrior
    max_iters: int = 1000
    burn_in: int = 0
    raftery: Optional[RafteryConfig] = None
    seed: int = 0
    thin: int = 1                 # storage thinning for samples (memory only)
    check_interval: int = 100     # how often to re-run the diagnostic
    stats_refresh: int = 100      # batch-recompute running sums every this many sweeps
    min_samples: int = 0          # floor on post-burn-in samples before stopping

    def __post_init__(self):
        self.alpha = float(self.alpha)
        if not (self.alpha > 0):
            raise InputError("alpha must be positive")
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")
        if self.burn_in < 0:
            raise InputError("burn_in must be >= 0")
        if self.thin < 1:
            raise InputError("thin must be >= 1")


@dataclass
class GibbsTrace:
    samples: list
    nll_chain: np.ndarray
    iterations_run: int
    empty_cluster_events: int
    burn_in_used: int = 0
    raftery_result: Optional[RafteryResult] = None
    wall_time: float = 0.0

    def final_partition(self) -> Partition:
        if not self.samples:
            raise InputError("no stored samples")
        return self.samples[-1]


def raftery_nmin(q: float, r: float, s: float) -> int:
    """Closed-form minimum chain length z^2 q (1-q) / r^2 for an i.i.d. chain."""
    z = ndtri(0.5 * (1.0 + s))
    return int(math.ceil(z * z * q * (1.0 - q) / (r * r)))


def _markov_bic(binary: np.ndarray) -> float:
    """BIC comparing a second-order to a first-order Markov fit of a 0/1 chain.

    Positive values favour the second-order model (keep thinning).
    """
    n = binary.shape[0]
    counts = np.zeros((2, 2, 2))
    for t in range(2, n):
        counts[binary[t - 2], binary[t - 1], binary[t]] += 1
    g2 = 0.0
    for i in range(2):
        for j in range(2):
            for k in range(2):
                c_ijk = counts[i, j, k]
                if c_ijk == 0:
                    continue
                expected = counts[i, j, :].sum() * counts[:, j, k].sum() / counts[:, j, :].sum()
                g2 += 2.0 * c_ijk * math.log(c_ijk / expected)
    return g2 - math.log(max(n - 2, 1)) * 2.0


def raftery_lewis(chain, q: float = 0.025, r: float = 0.1, s: float = 0.95) -> RafteryResult:
    """Raftery-Lewis run-length estimate from a scalar chain.

    Dichotomizes the chain at its empirical q-quantile, searches for the
    smallest thinning step at which a first-order two-state Markov chain is
    preferred over a second-order one (BIC), and converts the fitted
    transition probabilities into burn-in and required iteration counts for
    estimating the q-quantile to within +/- r with probability s.
    """
    chain = np.asarray(chain, dtype=np.float64)
    n_min = raftery_nmin(q, r, s)
    if chain.ndim != 1:
        raise InputError("chain must be 1-D")
    if chain.shape[0] < n_min:
        raise InsufficientChain(
            f"chain length {chain.shape[0]} < n_min {n_min}; keep sampling")
    cutoff = np.quantile(chain, q)
    binary = (chain <= cutoff).astype(np.int64)
    if binary.min() == binary.max():
        # no serial dependence measurable on a constant dichotomization
        return RafteryResult(n_required=n_min, burn_in=0, thin=1, n_min=n_min)

    thin = 1
    while True:
        thinned = binary[::thin]
        if thinned.shape[0] < 8 or thinned.min() == thinned.max():
            # too little data to keep testing; accept the current thinning
            break
        if _markov_bic(thinned) <= 0:
            break
        thin += 1
    thinned = binary[::thin]

    from_zero = thinned[:-1] == 0
    from_one = ~from_zero
    n0 = int(from_zero.sum())
    n1 = int(from_one.sum())
    a = float((thinned[1:][from_zero] == 1).sum() / n0) if n0 else 0.0
    b = float((thinned[1:][from_one] == 0).sum() / n1) if n1 else 0.0
    if a <= 0 or b <= 0 or a >= 1 or b >= 1:
        return RafteryResult(n_required=n_min, burn_in=0, thin=thin, n_min=n_min)

    eps = 0.001
    lam = 1.0 - a - b
    if lam == 0.0:
        m = 1
    else:
        m = int(math.ceil(math.log(eps * (a + b) / max(a, b)) / math.log(abs(lam))))
        m = max(m, 1)
    z = ndtri(0.5 * (1.0 + s))
    n_post = int(math.ceil(a * b * (2.0 - a - b) / (a + b) ** 3 * (z / r) ** 2))
    return RafteryResult(n_required=n_post * thin, burn_in=m * thin, thin=thin, n_min=n_min)


def gibbs_sweep(dataset: Dataset, state: _kernels.ClusterState, config: GibbsConfig,
                rng: np.random.Generator, backend: str | None = None,
                lgam: np.ndarray | None = None) -> int:
    """One in-place sweep over all observations; returns transient empty-cluster count."""
    n = dataset.n
    if lgam is None:
        lgam = _kernels.lgamma_table(config.prior.a0, n)
    order = np.arange(n)
    u = rng.random(n)
    steps = np.empty(n, dtype=np.int64)
    state.K, empties = _kernels.gibbs_sweep_arrays(
        dataset.X, state.z, state.S, state.V, state.Nk, state.K, order, u,
        config.prior.m0, config.prior.c0, config.prior.b0, config.prior.a0,
        math.log(config.alpha), lgam, steps, backend=backend)
    return empties


def run_gibbs(dataset: Dataset, config: GibbsConfig, backend: str | None = None) -> GibbsTrace:
    """Sample until the Raftery-Lewis requirement is met (when configured) or
    max_iters; returns the stored post-burn-in samples and the full NLL chain."""
    if config.prior.dim != dataset.dim:
        raise InputError("prior and dataset dimensions differ")
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)
    init = Partition(z=np.ones(dataset.n, dtype=np.int64), K=1,
                     counts=np.array([dataset.n], dtype=np.int64))
    state = _kernels.ClusterState.from_partition(dataset.X, init)
    lgam = _kernels.lgamma_table(config.prior.a0, dataset.n)

    nll_chain = []
    zs = []
    empties_total = 0
    raftery_result = None
    it = 0
    while it < config.max_iters:
        empties_total += gibbs_sweep(dataset, state, config, rng, backend=backend, lgam=lgam)
        it += 1
        if config.stats_refresh and it % config.stats_refresh == 0:
            state.refresh()
        ev = _kernels.evidence_total(state.S, state.V, state.Nk, state.K,
                                     config.prior.m0, config.prior.c0, config.prior.b0,
                                     config.prior.a0, lgam, backend=backend)
        partition = state.to_partition()
        nll_chain.append(float(-ev - crp_log_joint(partition, config.alpha)))
        zs.append(state.z.copy())
        if config.raftery is not None and it % config.check_interval == 0:
            try:
                raftery_result = raftery_lewis(np.array(nll_chain), config.raftery.q,
                                               config.raftery.r, config.raftery.s)
            except InsufficientChain:
                continue
            burn_now = max(config.burn_in, raftery_result.burn_in)
            enough_samples = (it - burn_now) >= config.min_samples
            if enough_samples and it >= max(raftery_result.total,
                                            config.burn_in + raftery_result.n_min):
                break

    burn = config.burn_in
    if raftery_result is not None:
        burn = max(burn, raftery_result.burn_in)
    burn = min(burn, it - 1)
    samples = [Partition.from_labels(z) for z in zs[burn::config.thin]]
    return GibbsTrace(samples=samples,
                      nll_chain=np.array(nll_chain),
                      iterations_run=it,
                      empty_cluster_events=empties_total,
                      burn_in_used=burn,
                      raftery_result=raftery_result,
                      wall_time=time.perf_counter() - t0)


@dataclass
class TraceSummary:
    n_samples: int
    nmi_sum_mean: float = math.nan
    nmi_sum_2sd: float = math.nan
    nmi_max_mean: float = math.nan
    nmi_max_2sd: float = math.nan
    ami_mean: float = math.nan
    ami_2sd: float = math.nan
    delta_k_mean: float = math.nan
    k_mean: float = math.nan
    empty_cluster_events: int = 0
    per_sample: dict = field(default_factory=dict)


def summarize_trace(trace: GibbsTrace, truth=None) -> TraceSummary:
    """Mean and 2 SD of per-sample NMI/AMI against the truth (when given),
    mean cluster-count offset, and the transient empty-cluster total."""
    if not trace.samples:
        raise InputError("trace has no stored samples")
    ks = np.array([p.K for p in trace.samples], dtype=np.float64)
    out = TraceSummary(n_samples=len(trace.samples),
                       empty_cluster_events=trace.empty_cluster_events,
                       k_mean=float(ks.mean()))
    if truth is not None:
        truth = np.asarray(truth)
        k_true = np.unique(truth).shape[0]
        nmi_sum = np.array([nmi(truth, p.z, variant="sum") for p in trace.samples])
        nmi_max = np.array([nmi(truth, p.z, variant="max") for p in trace.samples])
        amis = np.array([ami(truth, p.z) for p in trace.samples])
        out.nmi_sum_mean = float(nmi_sum.mean())
        out.nmi_sum_2sd = float(2.0 * nmi_sum.std())
        out.nmi_max_mean = float(nmi_max.mean())
        out.nmi_max_2sd = float(2.0 * nmi_max.std())
        out.ami_mean = float(amis.mean())
        out.ami_2sd = float(2.0 * amis.std())
        out.delta_k_mean = float((ks - k_true).mean())
        out.per_sample = {"nmi_sum": nmi_sum, "nmi_max": nmi_max, "ami": amis, "k": ks}
    return out
