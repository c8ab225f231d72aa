"""DP-means: the small-variance limit baseline.

A point opens a new cluster (centered on itself) whenever its squared
distance to every existing center exceeds lam; otherwise it joins the
nearest center. Centers are recomputed as member means after each sweep
and the objective sum ||x - mu_z||^2 + lam * K is recorded.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import Dataset, FitResult, Partition
from .errors import InputError


@dataclass
class DpMeansConfig:
    lam: float
    max_iters: int = 500
    seed: int = 0
    stop_sweep_on_new_cluster: bool = False  # end a sweep at the first creation

    def __post_init__(self):
        self.lam = float(self.lam)
        if not (self.lam > 0):
            raise InputError("lam must be positive")
        self.max_iters = int(self.max_iters)
        if self.max_iters < 1:
            raise InputError("max_iters must be >= 1")


def dpmeans_objective(dataset: Dataset, partition: Partition, centers: np.ndarray,
                      lam: float) -> float:
    """sum of squared distances to assigned centers plus lam times the cluster count."""
    centers = np.asarray(centers, dtype=np.float64)
    if centers.shape != (partition.K, dataset.dim):
        raise InputError("centers must be a K x D array")
    d2 = ((dataset.X - centers[partition.z - 1]) ** 2).sum()
    return float(d2 + lam * partition.K)


def fit_dpmeans(dataset: Dataset, config: DpMeansConfig,
                backend: str | None = None) -> FitResult:
    """Run DP-means from a single cluster at the global mean until assignments
    stop changing or max_iters is hit. The nll_trace of the result holds the
    objective recorded after each sweep's center update."""
    t0 = time.perf_counter()
    X = dataset.X
    n, d = X.shape
    centers = np.zeros((n + 1, d))
    centers[0] = X.mean(axis=0)
    z = np.zeros(n, dtype=np.int64)
    K = 1

    objective_trace = []
    post_assignment = []
    converged = False
    sweeps = 0
    for _ in range(config.max_iters):
        K, n_changed, created, processed = _kernels.dpmeans_sweep(
            X, z, centers, K, config.lam, config.stop_sweep_on_new_cluster,
            backend=backend)
        sweeps += 1
        part = Partition.from_labels(z)
        post_assignment.append(dpmeans_objective(dataset, part, _gather(centers, z, part), config.lam))
        # center update: member means; emptied clusters vanish with the relabel
        K = part.K
        z = part.z - 1
        new_centers = np.zeros((n + 1, d))
        for k in range(K):
            new_centers[k] = X[z == k].mean(axis=0)
        centers = new_centers
        objective_trace.append(dpmeans_objective(dataset, part, centers[:K], config.lam))
        if n_changed == 0 and created == 0 and processed == n:
            converged = True
            break

    return FitResult(partition=Partition.from_labels(z),
                     nll_trace=np.array(objective_trace),
                     sweeps=sweeps,
                     converged=converged,
                     empty_cluster_events=0,
                     wall_time=time.perf_counter() - t0,
                     engine="dpmeans",
                     extras={"centers": centers[:K].copy(),
                             "objective_post_assignment": np.array(post_assignment),
                             "backend": backend or _kernels.backend_name()})


def _gather(centers: np.ndarray, z_raw: np.ndarray, part: Partition) -> np.ndarray:
    """Centers reordered to match the canonical relabeling of the raw labels."""
    # map canonical id -> raw id via the first occurrence of each canonical id
    raw_for_canon = np.empty(part.K, dtype=np.int64)
    for k in range(1, part.K + 1):
        raw_for_canon[k - 1] = z_raw[np.argmax(part.z == k)]
    return centers[raw_for_canon]


def lambda_scan(dataset: Dataset, lambdas, config: DpMeansConfig | None = None,
                backend: str | None = None):
    """Fit once per candidate lam and report the resulting cluster counts."""
    lambdas = np.asarray(lambdas, dtype=np.float64)
    if lambdas.size == 0 or np.any(lambdas <= 0):
        raise InputError("lambdas must be positive and non-empty")
    ks = []
    for lam in lambdas:
        cfg = DpMeansConfig(lam=float(lam),
                            max_iters=config.max_iters if config else 500,
                            seed=config.seed if config else 0)
        ks.append(fit_dpmeans(dataset, cfg, backend=backend).partition.K)
    return lambdas, np.array(ks, dtype=np.int64)
