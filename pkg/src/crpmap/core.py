"""Domain types and normal-Gamma conjugate updates.

Clusters are summarised by the running sums (S, V, Nk) of their members,
which make adding or removing a single observation an O(D) operation and
give the normal-Gamma posterior parameters in closed form.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyClusterError, InputError, NumericalIntegrityError

# Relative tolerance for the scatter term V - S^2/Nk, which is non-negative
# analytically but can go slightly negative in floating point.
SCATTER_CLAMP_REL = 1e-9


def _as_vector(x, name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim != 1:
        raise InputError(f"{name} must be a 1-D vector, got shape {arr.shape}")
    return arr


@dataclass
class Dataset:
    """An N x D matrix of observations with optional ground-truth labels."""

    X: np.ndarray
    labels: Optional[np.ndarray] = None
    feature_names: Optional[Sequence[str]] = None

    def __post_init__(self):
        self.X = np.ascontiguousarray(np.asarray(self.X, dtype=np.float64))
        if self.X.ndim != 2:
            raise InputError(f"X must be 2-D (N x D), got shape {self.X.shape}")
        n, d = self.X.shape
        if n < 1 or d < 1:
            raise InputError(f"X must have N >= 1 and D >= 1, got {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise InputError("X contains non-finite entries")
        if self.labels is not None:
            self.labels = np.asarray(self.labels, dtype=np.int64)
            if self.labels.shape != (n,):
                raise InputError(f"labels must have length N={n}, got {self.labels.shape}")
        if self.feature_names is not None:
            self.feature_names = list(self.feature_names)
            if len(self.feature_names) != d:
                raise InputError(f"feature_names must have length D={d}")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


@dataclass
class NGPrior:
    """Normal-Gamma hyperparameters (m0, c0, b0, a0), one Gamma rate per dimension."""

    m0: np.ndarray
    c0: float
    b0: np.ndarray
    a0: float

    def __post_init__(self):
        self.m0 = _as_vector(self.m0, "m0")
        self.b0 = _as_vector(self.b0, "b0")
        self.c0 = float(self.c0)
        self.a0 = float(self.a0)
        if self.b0.shape != self.m0.shape:
            raise InputError("m0 and b0 must have the same length")
        if not np.all(np.isfinite(self.m0)):
            raise InputError("m0 must be finite")
        if not (self.c0 > 0 and np.isfinite(self.c0)):
            raise InputError(f"c0 must be positive and finite, got {self.c0}")
        if not (self.a0 > 0 and np.isfinite(self.a0)):
            raise InputError(f"a0 must be positive and finite, got {self.a0}")
        if not np.all(self.b0 > 0) or not np.all(np.isfinite(self.b0)):
            raise InputError("every b0_d must be positive and finite")

    @property
    def dim(self) -> int:
        return self.m0.shape[0]

    @classmethod
    def empirical(cls, X: np.ndarray, a0: float = 1.0, c0: Optional[float] = None,
                  b0_mode: str = "variance") -> "NGPrior":
        """Data-driven prior: m0 = column means, c0 = 10/N, b0 from column variances.

        b0_mode selects whether b0_d is the per-dimension sample variance
        ("variance") or its reciprocal ("precision").
        """
        X = np.asarray(X, dtype=np.float64)
        n, _ = X.shape
        if n < 2:
            raise InputError("empirical prior needs at least 2 observations")
        m0 = X.mean(axis=0)
        var = X.var(axis=0, ddof=1)
        if np.any(var <= 0):
            bad = int(np.argmax(var <= 0))
            raise InputError(f"column {bad} has zero sample variance; empirical prior undefined")
        if b0_mode == "variance":
            b0 = var
        elif b0_mode == "precision":
            b0 = 1.0 / var
        else:
            raise InputError(f"unknown b0_mode {b0_mode!r} (expected 'variance' or 'precision')")
        return cls(m0=m0, c0=(10.0 / n) if c0 is None else c0, b0=b0, a0=a0)


@dataclass
class SufficientStats:
    """Per-cluster running sums: S = sum(x), V = sum(x^2), Nk = member count."""

    S: np.ndarray
    V: np.ndarray
    Nk: int

    def __post_init__(self):
        self.S = _as_vector(self.S, "S").copy()
        self.V = _as_vector(self.V, "V").copy()
        self.Nk = int(self.Nk)
        if self.S.shape != self.V.shape:
            raise InputError("S and V must have the same length")
        if self.Nk < 0:
            raise InputError("Nk must be non-negative")
        if self.Nk == 0 and (np.any(self.S != 0) or np.any(self.V != 0)):
            raise InputError("empty stats must have S = V = 0")

    @classmethod
    def empty(cls, dim: int) -> "SufficientStats":
        return cls(S=np.zeros(dim), V=np.zeros(dim), Nk=0)

    @classmethod
    def from_points(cls, points: np.ndarray) -> "SufficientStats":
        points = np.atleast_2d(np.asarray(points, dtype=np.float64))
        return cls(S=points.sum(axis=0), V=(points ** 2).sum(axis=0), Nk=points.shape[0])

    def validate(self, rel_tol: float = SCATTER_CLAMP_REL) -> None:
        """Check the Cauchy-Schwarz bound V_d >= S_d^2 / Nk within tolerance."""
        if self.Nk > 0:
            lower = self.S ** 2 / self.Nk
            if np.any(self.V < lower - rel_tol * np.abs(self.V) - 1e-300):
                raise NumericalIntegrityError("V < S^2/Nk beyond tolerance")


@dataclass
class NGPosterior:
    """Normal-Gamma posterior parameters (m, c, b, a) for one cluster."""

    m: np.ndarray
    c: float
    b: np.ndarray
    a: float

    def __post_init__(self):
        self.m = _as_vector(self.m, "m")
        self.b = _as_vector(self.b, "b")
        self.c = float(self.c)
        self.a = float(self.a)

    @property
    def dim(self) -> int:
        return self.m.shape[0]


@dataclass
class Partition:
    """Cluster indicators z in {1..K} with per-cluster counts; no empty clusters."""

    z: np.ndarray
    K: int
    counts: np.ndarray

    def __post_init__(self):
        self.z = np.asarray(self.z, dtype=np.int64)
        self.counts = np.asarray(self.counts, dtype=np.int64)
        self.K = int(self.K)
        if self.z.ndim != 1 or self.z.shape[0] < 1:
            raise InputError("z must be a non-empty 1-D array")
        if self.K < 1 or self.counts.shape != (self.K,):
            raise InputError("counts must have length K >= 1")
        if self.z.min() < 1 or self.z.max() > self.K:
            raise InputError("cluster ids must lie in 1..K")
        if np.any(self.counts < 1):
            raise InputError("no empty clusters in a normalized Partition")
        if self.counts.sum() != self.z.shape[0]:
            raise InputError("counts must sum to N")
        if not np.array_equal(np.bincount(self.z - 1, minlength=self.K), self.counts):
            raise InputError("counts inconsistent with z")

    @property
    def n(self) -> int:
        return self.z.shape[0]

    @classmethod
    def from_labels(cls, labels) -> "Partition":
        """Build a canonical Partition, relabeling clusters by first appearance."""
        labels = np.asarray(labels)
        if labels.ndim != 1 or labels.shape[0] < 1:
            raise InputError("labels must be a non-empty 1-D array")
        _, first, inv = np.unique(labels, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty_like(order)
        rank[order] = np.arange(order.shape[0])
        z = rank[inv] + 1
        counts = np.bincount(z - 1)
        return cls(z=z, K=int(counts.shape[0]), counts=counts)

    def canonicalized(self) -> "Partition":
        return Partition.from_labels(self.z)


@dataclass
class FitResult:
    """Outcome of one clustering engine run."""

    partition: Partition
    nll_trace: np.ndarray
    sweeps: int
    converged: bool
    empty_cluster_events: int
    wall_time: float
    engine: str = ""
    extras: dict = field(default_factory=dict)

    def __post_init__(self):
        self.nll_trace = np.asarray(self.nll_trace, dtype=np.float64)


def stats_add(stats: SufficientStats, x) -> SufficientStats:
    """Return stats with one observation added: S += x, V += x^2, Nk += 1."""
    x = _as_vector(x, "x")
    if x.shape != stats.S.shape:
        raise InputError(f"x has dimension {x.shape[0]}, stats have {stats.S.shape[0]}")
    if not np.all(np.isfinite(x)):
        raise InputError("x must be finite")
    return SufficientStats(S=stats.S + x, V=stats.V + x * x, Nk=stats.Nk + 1)


def stats_remove(stats: SufficientStats, x) -> SufficientStats:
    """Return stats with one previously-added observation removed."""
    if stats.Nk == 0:
        raise EmptyClusterError("remove from empty cluster")
    x = _as_vector(x, "x")
    if x.shape != stats.S.shape:
        raise InputError(f"x has dimension {x.shape[0]}, stats have {stats.S.shape[0]}")
    nk = stats.Nk - 1
    S = stats.S - x
    V = stats.V - x * x
    if nk == 0:
        # exact zero by convention for an emptied cluster
        S = np.zeros_like(S)
        V = np.zeros_like(V)
    return SufficientStats(S=S, V=V, Nk=nk)


def ng_posterior(prior: NGPrior, stats: SufficientStats) -> NGPosterior:
    """Normal-Gamma posterior parameters for a cluster summarised by stats.

    With n = Nk members:
        m_d = (c0 m0_d + S_d) / (c0 + n)
        c   = c0 + n
        a   = a0 + n/2
        b_d = b0_d + (V_d - S_d^2/n)/2 + c0 n (S_d/n - m0_d)^2 / (2 (c0 + n))
    An empty cluster returns the prior parameters exactly.
    """
    if stats.S.shape != prior.m0.shape:
        raise InputError("stats dimension does not match prior dimension")
    n = stats.Nk
    if n == 0:
        return NGPosterior(m=prior.m0.copy(), c=prior.c0, b=prior.b0.copy(), a=prior.a0)
    c = prior.c0 + n
    a = prior.a0 + 0.5 * n
    m = (prior.c0 * prior.m0 + stats.S) / c
    xbar = stats.S / n
    scatter = stats.V - stats.S ** 2 / n
    neg = scatter < 0
    if np.any(neg):
        # analytically >= 0; clamp tiny negatives, refuse anything larger
        if np.any(scatter[neg] < -SCATTER_CLAMP_REL * np.abs(stats.V[neg]) - 1e-300):
            raise NumericalIntegrityError("scatter term V - S^2/Nk negative beyond tolerance")
        scatter = np.where(neg, 0.0, scatter)
    b = prior.b0 + 0.5 * scatter + prior.c0 * n * (xbar - prior.m0) ** 2 / (2.0 * c)
    if __debug__ and np.any(b <= 0):
        raise NumericalIntegrityError("posterior b_d <= 0")
    return NGPosterior(m=m, c=c, b=b, a=a)
