"""Hot inner loops for the sweep-based engines, in two interchangeable backends.

The default backend compiles the per-observation loops with numba's @njit;
setting the environment variable CRPMAP_NUMBA to 0/false/off selects a pure
numpy fallback that vectorizes over clusters within each observation step.
Both backends consume randomness identically (one pre-drawn uniform per
observation and sweep), so a given seed produces the same assignments either
way up to floating-point rounding of the scores.

benchmarks/bench_backends.py compares the two.
"""

from __future__ import annotations

import math
import os

import numpy as np
from scipy.special import gammaln

from .core import Partition, SufficientStats
from .errors import NumericalIntegrityError

LOG_2PI = math.log(2.0 * math.pi)
_SCATTER_REL = 1e-9

_flag = os.environ.get("CRPMAP_NUMBA", "auto").strip().lower()
if _flag in ("0", "false", "off", "no"):
    _WANT_NUMBA = False
else:
    _WANT_NUMBA = True

try:
    if not _WANT_NUMBA:
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):  # pragma: no cover - trivial shim
        def wrap(f):
            return f

        if args and callable(args[0]):
            return args[0]
        return wrap


def backend_name() -> str:
    return "numba" if HAVE_NUMBA else "numpy"


def lgamma_table(a0: float, n: int) -> np.ndarray:
    """lgamma(a0 + j/2) for j = 0..n+2; posterior shapes a = a0 + Nk/2 index it by Nk."""
    return gammaln(a0 + 0.5 * np.arange(n + 3))


# ---------------------------------------------------------------------------
# score computation: q_k = -log Nk - sum_d log St(x_d | posterior_k), and the
# new-cluster entry q_{K+1} = -log alpha - sum_d log St(x_d | prior).
# The Student-T parameters reduce so that only lgamma(a), lgamma(a+1/2),
# log(c/(c+1)) and per-dimension log b_d, log1p(...) remain.
# ---------------------------------------------------------------------------


def _q_scores_np(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam):
    """Vectorized scores for one observation against K clusters plus the prior slot."""
    q = np.empty(K + 1)
    if K > 0:
        n = Nk[:K].astype(np.float64)
        c = c0 + n
        m = (c0 * m0 + S[:K]) / c[:, None]
        xbar = S[:K] / n[:, None]
        scatter = V[:K] - S[:K] ** 2 / n[:, None]
        scatter[n == 1.0] = 0.0  # identically zero for singletons
        neg = scatter < 0
        if np.any(neg):
            if np.any(scatter[neg] < -_SCATTER_REL * np.abs(V[:K][neg]) - 1e-300):
                raise NumericalIntegrityError("scatter term negative beyond tolerance")
            scatter = np.where(neg, 0.0, scatter)
        b = b0 + 0.5 * scatter + (c0 * n)[:, None] * (xbar - m0) ** 2 / (2.0 * c[:, None])
        a = a0 + 0.5 * n
        D = x.shape[0]
        head = (lgam[Nk[:K] + 1] - lgam[Nk[:K]]
                + 0.5 * (np.log(c) - np.log1p(c)) - 0.5 * LOG_2PI)
        tail = -0.5 * np.log(b) - (a[:, None] + 0.5) * np.log1p(
            (c[:, None] * (x - m) ** 2) / (2.0 * b * (c[:, None] + 1.0)))
        q[:K] = -np.log(n) - (D * head + tail.sum(axis=1))
    # prior-predictive slot
    head0 = lgam[1] - lgam[0] + 0.5 * (math.log(c0) - math.log1p(c0)) - 0.5 * LOG_2PI
    tail0 = -0.5 * np.log(b0) - (a0 + 0.5) * np.log1p(
        (c0 * (x - m0) ** 2) / (2.0 * b0 * (c0 + 1.0)))
    q[K] = -log_alpha - (x.shape[0] * head0 + tail0.sum())
    return q


@njit(cache=True, nogil=True)
def _q_into_nb(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam, q):
    D = x.shape[0]
    for k in range(K):
        n = float(Nk[k])
        c = c0 + n
        a = a0 + 0.5 * n
        head = (lgam[Nk[k] + 1] - lgam[Nk[k]]
                + 0.5 * (math.log(c) - math.log1p(c)) - 0.5 * LOG_2PI)
        acc = 0.0
        for d in range(D):
            m_d = (c0 * m0[d] + S[k, d]) / c
            if n == 1.0:
                scatter = 0.0  # identically zero for singletons
            else:
                scatter = V[k, d] - S[k, d] * S[k, d] / n
                if scatter < 0.0:
                    if scatter < -_SCATTER_REL * abs(V[k, d]) - 1e-300:
                        return 1  # integrity violation; caller raises
                    scatter = 0.0
            xbar = S[k, d] / n
            b_d = b0[d] + 0.5 * scatter + c0 * n * (xbar - m0[d]) ** 2 / (2.0 * c)
            diff = x[d] - m_d
            acc += -0.5 * math.log(b_d) - (a + 0.5) * math.log1p(
                c * diff * diff / (2.0 * b_d * (c + 1.0)))
        q[k] = -math.log(n) - (D * head + acc)
    head0 = lgam[1] - lgam[0] + 0.5 * (math.log(c0) - math.log1p(c0)) - 0.5 * LOG_2PI
    acc0 = 0.0
    for d in range(D):
        diff = x[d] - m0[d]
        acc0 += -0.5 * math.log(b0[d]) - (a0 + 0.5) * math.log1p(
            c0 * diff * diff / (2.0 * b0[d] * (c0 + 1.0)))
    q[K] = -log_alpha - (D * head0 + acc0)
    return 0


def _q_scores_nb(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam):
    q = np.empty(K + 1)
    if _q_into_nb(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam, q) != 0:
        raise NumericalIntegrityError("scatter term negative beyond tolerance")
    return q


# ---------------------------------------------------------------------------
# sweeps. State arrays are preallocated with capacity N+1 rows (K <= N always);
# deleting an emptied cluster shifts later rows left so ids stay dense in
# creation order, which the tie-break (lowest id wins, new cluster loses ties)
# depends on.
# ---------------------------------------------------------------------------


def _delete_cluster_np(z, S, V, Nk, K, k):
    S[k:K - 1] = S[k + 1:K]
    V[k:K - 1] = V[k + 1:K]
    Nk[k:K - 1] = Nk[k + 1:K]
    Nk[K - 1] = 0
    S[K - 1] = 0.0
    V[K - 1] = 0.0
    z[z > k] -= 1
    return K - 1


def _map_sweep_np(X, z, S, V, Nk, K, order, m0, c0, b0, a0, log_alpha, lgam, steps):
    n_changed = 0
    empties = 0
    for t in range(order.shape[0]):
        i = order[t]
        zi = z[i]
        x = X[i]
        S[zi] -= x
        V[zi] -= x * x
        Nk[zi] -= 1
        deleted = Nk[zi] == 0
        if deleted:
            empties += 1
            K = _delete_cluster_np(z, S, V, Nk, K, zi)
        q = _q_scores_np(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam)
        best = int(np.argmin(q))  # ties: lowest id wins; argmin picks first
        if deleted:
            if best != K:
                n_changed += 1
        elif best != zi:
            n_changed += 1
        if best == K:
            S[K] = x
            V[K] = x * x
            Nk[K] = 1
            K += 1
        else:
            S[best] += x
            V[best] += x * x
            Nk[best] += 1
        z[i] = best
        steps[t] = best
    return K, n_changed, empties


@njit(cache=True, nogil=True)
def _map_sweep_nb(X, z, S, V, Nk, K, order, m0, c0, b0, a0, log_alpha, lgam, steps, q):
    N, D = X.shape
    n_changed = 0
    empties = 0
    for t in range(order.shape[0]):
        i = order[t]
        zi = z[i]
        for d in range(D):
            S[zi, d] -= X[i, d]
            V[zi, d] -= X[i, d] * X[i, d]
        Nk[zi] -= 1
        deleted = Nk[zi] == 0
        if deleted:
            empties += 1
            for k in range(zi, K - 1):
                Nk[k] = Nk[k + 1]
                for d in range(D):
                    S[k, d] = S[k + 1, d]
                    V[k, d] = V[k + 1, d]
            Nk[K - 1] = 0
            for d in range(D):
                S[K - 1, d] = 0.0
                V[K - 1, d] = 0.0
            for j in range(N):
                if z[j] > zi:
                    z[j] -= 1
            K -= 1
        if _q_into_nb(X[i], S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam, q) != 0:
            return K, -1, empties
        best = 0
        best_q = q[0]
        for k in range(1, K + 1):
            if q[k] < best_q:
                best = k
                best_q = q[k]
        if deleted:
            if best != K:
                n_changed += 1
        elif best != zi:
            n_changed += 1
        if best == K:
            for d in range(D):
                S[K, d] = X[i, d]
                V[K, d] = X[i, d] * X[i, d]
            Nk[K] = 1
            K += 1
        else:
            for d in range(D):
                S[best, d] += X[i, d]
                V[best, d] += X[i, d] * X[i, d]
            Nk[best] += 1
        z[i] = best
        steps[t] = best
    return K, n_changed, empties


def _gibbs_sweep_np(X, z, S, V, Nk, K, order, u, m0, c0, b0, a0, log_alpha, lgam, steps):
    empties = 0
    for t in range(order.shape[0]):
        i = order[t]
        zi = z[i]
        x = X[i]
        S[zi] -= x
        V[zi] -= x * x
        Nk[zi] -= 1
        if Nk[zi] == 0:
            empties += 1
            K = _delete_cluster_np(z, S, V, Nk, K, zi)
        q = _q_scores_np(x, S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam)
        p = np.exp(-(q - q.min()))
        target = u[t] * p.sum()
        acc = np.cumsum(p)
        best = int(np.searchsorted(acc, target, side="left"))
        if best > K:
            best = K
        if best == K:
            S[K] = x
            V[K] = x * x
            Nk[K] = 1
            K += 1
        else:
            S[best] += x
            V[best] += x * x
            Nk[best] += 1
        z[i] = best
        steps[t] = best
    return K, empties


@njit(cache=True, nogil=True)
def _gibbs_sweep_nb(X, z, S, V, Nk, K, order, u, m0, c0, b0, a0, log_alpha, lgam, steps, q):
    N, D = X.shape
    empties = 0
    for t in range(order.shape[0]):
        i = order[t]
        zi = z[i]
        for d in range(D):
            S[zi, d] -= X[i, d]
            V[zi, d] -= X[i, d] * X[i, d]
        Nk[zi] -= 1
        if Nk[zi] == 0:
            empties += 1
            for k in range(zi, K - 1):
                Nk[k] = Nk[k + 1]
                for d in range(D):
                    S[k, d] = S[k + 1, d]
                    V[k, d] = V[k + 1, d]
            Nk[K - 1] = 0
            for d in range(D):
                S[K - 1, d] = 0.0
                V[K - 1, d] = 0.0
            for j in range(N):
                if z[j] > zi:
                    z[j] -= 1
            K -= 1
        if _q_into_nb(X[i], S, V, Nk, K, m0, c0, b0, a0, log_alpha, lgam, q) != 0:
            return K, -1
        qmin = q[0]
        for k in range(1, K + 1):
            if q[k] < qmin:
                qmin = q[k]
        tot = 0.0
        for k in range(K + 1):
            q[k] = math.exp(-(q[k] - qmin))
            tot += q[k]
        target = u[t] * tot
        acc = 0.0
        best = K
        for k in range(K + 1):
            acc += q[k]
            if target <= acc:
                best = k
                break
        if best == K:
            for d in range(D):
                S[K, d] = X[i, d]
                V[K, d] = X[i, d] * X[i, d]
            Nk[K] = 1
            K += 1
        else:
            for d in range(D):
                S[best, d] += X[i, d]
                V[best, d] += X[i, d] * X[i, d]
            Nk[best] += 1
        z[i] = best
        steps[t] = best
    return K, empties


# ---------------------------------------------------------------------------
# pointwise term of the complete-data NLL: -sum_i log p(x_i | leave-one-out
# posterior of its own cluster). The CRP term is added by the caller.
# ---------------------------------------------------------------------------


def _nll_points_np(X, z, S, V, Nk, K, m0, c0, b0, a0, lgam):
    total = 0.0
    for k in range(K):
        idx = np.flatnonzero(z == k)
        Xk = X[idx]
        n = idx.shape[0] - 1.0
        Sk = S[k] - Xk
        Vk = V[k] - Xk ** 2
        if n == 0:
            diff = Xk - m0
            head = (lgam[1] - lgam[0]
                    + 0.5 * (math.log(c0) - math.log1p(c0)) - 0.5 * LOG_2PI)
            tail = -0.5 * np.log(b0) - (a0 + 0.5) * np.log1p(
                c0 * diff ** 2 / (2.0 * b0 * (c0 + 1.0)))
            total -= X.shape[1] * head + tail.sum()
            continue
        c = c0 + n
        a = a0 + 0.5 * n
        m = (c0 * m0 + Sk) / c
        if n == 1.0:
            scatter = np.zeros_like(Vk)
        else:
            scatter = Vk - Sk ** 2 / n
            neg = scatter < 0
            if np.any(neg):
                if np.any(scatter[neg] < -_SCATTER_REL * np.abs(Vk[neg]) - 1e-300):
                    raise NumericalIntegrityError("scatter term negative beyond tolerance")
                scatter = np.where(neg, 0.0, scatter)
        b = b0 + 0.5 * scatter + c0 * n * (Sk / n - m0) ** 2 / (2.0 * c)
        head = (lgam[int(n) + 1] - lgam[int(n)]
                + 0.5 * (math.log(c) - math.log1p(c)) - 0.5 * LOG_2PI)
        tail = -0.5 * np.log(b) - (a + 0.5) * np.log1p(
            c * (Xk - m) ** 2 / (2.0 * b * (c + 1.0)))
        total -= Xk.shape[0] * X.shape[1] * head + tail.sum()
    return total


@njit(cache=True, nogil=True)
def _nll_points_nb(X, z, S, V, Nk, K, m0, c0, b0, a0, lgam):
    N, D = X.shape
    total = 0.0
    for i in range(N):
        k = z[i]
        n = float(Nk[k] - 1)
        if n == 0.0:
            head = (lgam[1] - lgam[0]
                    + 0.5 * (math.log(c0) - math.log1p(c0)) - 0.5 * LOG_2PI)
            acc = 0.0
            for d in range(D):
                diff = X[i, d] - m0[d]
                acc += -0.5 * math.log(b0[d]) - (a0 + 0.5) * math.log1p(
                    c0 * diff * diff / (2.0 * b0[d] * (c0 + 1.0)))
            total -= D * head + acc
            continue
        c = c0 + n
        a = a0 + 0.5 * n
        head = (lgam[Nk[k]] - lgam[Nk[k] - 1]
                + 0.5 * (math.log(c) - math.log1p(c)) - 0.5 * LOG_2PI)
        acc = 0.0
        for d in range(D):
            s_d = S[k, d] - X[i, d]
            v_d = V[k, d] - X[i, d] * X[i, d]
            m_d = (c0 * m0[d] + s_d) / c
            if n == 1.0:
                scatter = 0.0
            else:
                scatter = v_d - s_d * s_d / n
                if scatter < 0.0:
                    scatter = 0.0
            b_d = b0[d] + 0.5 * scatter + c0 * n * (s_d / n - m0[d]) ** 2 / (2.0 * c)
            diff = X[i, d] - m_d
            acc += -0.5 * math.log(b_d) - (a + 0.5) * math.log1p(
                c * diff * diff / (2.0 * b_d * (c + 1.0)))
        total -= D * head + acc
    return total


# ---------------------------------------------------------------------------
# DP-means assignment sweep: nearest center by squared Euclidean distance,
# new cluster at x_i when the nearest squared distance exceeds lam.
# ---------------------------------------------------------------------------


def _dpmeans_sweep_np(X, z, centers, K, lam, stop_on_new):
    n_changed = 0
    created = 0
    processed = X.shape[0]
    for i in range(X.shape[0]):
        d2 = ((centers[:K] - X[i]) ** 2).sum(axis=1)
        best = int(np.argmin(d2))
        if d2[best] > lam:
            centers[K] = X[i]
            z[i] = K
            K += 1
            created += 1
            n_changed += 1
            if stop_on_new:
                processed = i + 1
                break
        else:
            if best != z[i]:
                n_changed += 1
            z[i] = best
    return K, n_changed, created, processed


@njit(cache=True, nogil=True)
def _dpmeans_sweep_nb(X, z, centers, K, lam, stop_on_new):
    N, D = X.shape
    n_changed = 0
    created = 0
    processed = N
    for i in range(N):
        best = 0
        best_d2 = 0.0
        for d in range(D):
            diff = X[i, d] - centers[0, d]
            best_d2 += diff * diff
        for k in range(1, K):
            d2 = 0.0
            for d in range(D):
                diff = X[i, d] - centers[k, d]
                d2 += diff * diff
            if d2 < best_d2:
                best = k
                best_d2 = d2
        if best_d2 > lam:
            for d in range(D):
                centers[K, d] = X[i, d]
            z[i] = K
            K += 1
            created += 1
            n_changed += 1
            if stop_on_new:
                processed = i + 1
                break
        else:
            if best != z[i]:
                n_changed += 1
            z[i] = best
    return K, n_changed, created, processed


# ---------------------------------------------------------------------------
# dispatch and engine-facing state
# ---------------------------------------------------------------------------

if HAVE_NUMBA:
    q_scores = _q_scores_nb
else:
    q_scores = _q_scores_np


def map_sweep(X, z, S, V, Nk, K, order, m0, c0, b0, a0, log_alpha, lgam, steps,
              backend: str | None = None):
    use = backend or backend_name()
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable/disabled")
        q = np.empty(X.shape[0] + 1)
        K, n_changed, empties = _map_sweep_nb(
            X, z, S, V, Nk, K, order, m0, c0, b0, a0, log_alpha, lgam, steps, q)
        if n_changed < 0:
            raise NumericalIntegrityError("scatter term negative beyond tolerance")
        return K, n_changed, empties
    return _map_sweep_np(X, z, S, V, Nk, K, order, m0, c0, b0, a0, log_alpha, lgam, steps)


def gibbs_sweep_arrays(X, z, S, V, Nk, K, order, u, m0, c0, b0, a0, log_alpha, lgam, steps,
                       backend: str | None = None):
    use = backend or backend_name()
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable/disabled")
        q = np.empty(X.shape[0] + 1)
        K, empties = _gibbs_sweep_nb(
            X, z, S, V, Nk, K, order, u, m0, c0, b0, a0, log_alpha, lgam, steps, q)
        if empties < 0:
            raise NumericalIntegrityError("scatter term negative beyond tolerance")
        return K, empties
    return _gibbs_sweep_np(X, z, S, V, Nk, K, order, u, m0, c0, b0, a0, log_alpha, lgam, steps)


def nll_points(X, z, S, V, Nk, K, m0, c0, b0, a0, lgam, backend: str | None = None):
    use = backend or backend_name()
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable/disabled")
        return _nll_points_nb(X, z, S, V, Nk, K, m0, c0, b0, a0, lgam)
    return _nll_points_np(X, z, S, V, Nk, K, m0, c0, b0, a0, lgam)


def dpmeans_sweep(X, z, centers, K, lam, stop_on_new, backend: str | None = None):
    use = backend or backend_name()
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable/disabled")
        return _dpmeans_sweep_nb(X, z, centers, K, lam, stop_on_new)
    return _dpmeans_sweep_np(X, z, centers, K, lam, stop_on_new)


# ---------------------------------------------------------------------------
# exact collapsed evidence: sum over clusters of log integral prod_j N(x_j)
# against the normal-Gamma prior, from the running sums. O(K D) per call.
# ---------------------------------------------------------------------------


def _evidence_np(S, V, Nk, K, m0, c0, b0, a0, lgam):
    n = Nk[:K].astype(np.float64)
    c = c0 + n
    a = a0 + 0.5 * n
    xbar = S[:K] / n[:, None]
    scatter = V[:K] - S[:K] ** 2 / n[:, None]
    scatter[n == 1.0] = 0.0
    neg = scatter < 0
    if np.any(neg):
        if np.any(scatter[neg] < -_SCATTER_REL * np.abs(V[:K][neg]) - 1e-300):
            raise NumericalIntegrityError("scatter term negative beyond tolerance")
        scatter = np.where(neg, 0.0, scatter)
    b = b0 + 0.5 * scatter + (c0 * n)[:, None] * (xbar - m0) ** 2 / (2.0 * c[:, None])
    D = S.shape[1]
    head = (-0.5 * n * D * LOG_2PI
            + D * (lgam[Nk[:K]] - lgam[0] + 0.5 * (math.log(c0) - np.log(c))))
    tails = (a0 * np.log(b0) - a[:, None] * np.log(b)).sum(axis=1)
    return float((head + tails).sum())


@njit(cache=True, nogil=True)
def _evidence_nb(S, V, Nk, K, m0, c0, b0, a0, lgam):
    D = S.shape[1]
    total = 0.0
    for k in range(K):
        n = float(Nk[k])
        c = c0 + n
        a = a0 + 0.5 * n
        total += -0.5 * n * D * LOG_2PI
        total += D * (lgam[Nk[k]] - lgam[0] + 0.5 * (math.log(c0) - math.log(c)))
        for d in range(D):
            if n == 1.0:
                scatter = 0.0
            else:
                scatter = V[k, d] - S[k, d] * S[k, d] / n
                if scatter < 0.0:
                    if scatter < -_SCATTER_REL * abs(V[k, d]) - 1e-300:
                        return math.nan  # integrity violation; caller raises
                    scatter = 0.0
            xbar = S[k, d] / n
            b_d = b0[d] + 0.5 * scatter + c0 * n * (xbar - m0[d]) ** 2 / (2.0 * c)
            total += a0 * math.log(b0[d]) - a * math.log(b_d)
    return total


def evidence_total(S, V, Nk, K, m0, c0, b0, a0, lgam, backend: str | None = None):
    use = backend or backend_name()
    if use == "numba":
        if not HAVE_NUMBA:
            raise RuntimeError("numba backend requested but numba is unavailable/disabled")
        out = _evidence_nb(S, V, Nk, K, m0, c0, b0, a0, lgam)
        if math.isnan(out):
            raise NumericalIntegrityError("scatter term negative beyond tolerance")
        return out
    return _evidence_np(S, V, Nk, K, m0, c0, b0, a0, lgam)


class ClusterState:
    """Flat-array sufficient statistics for all clusters of one fit.

    Rows 0..K-1 of S, V, Nk are live clusters in creation order; capacity is
    N+1 rows since K can never exceed N.
    """

    def __init__(self, X: np.ndarray, z0: np.ndarray):
        X = np.ascontiguousarray(X, dtype=np.float64)
        n, d = X.shape
        z0 = np.asarray(z0, dtype=np.int64)
        if z0.shape != (n,):
            raise ValueError("z0 must have one label per row of X")
        K = int(z0.max()) + 1
        self.X = X
        self.z = z0.copy()
        self.S = np.zeros((n + 1, d))
        self.V = np.zeros((n + 1, d))
        self.Nk = np.zeros(n + 1, dtype=np.int64)
        np.add.at(self.S, z0, X)
        np.add.at(self.V, z0, X ** 2)
        np.add.at(self.Nk, z0, 1)
        if np.any(self.Nk[:K] == 0):
            raise ValueError("initial labels must be dense 0..K-1")
        self.K = K

    @classmethod
    def from_partition(cls, X: np.ndarray, partition: Partition) -> "ClusterState":
        return cls(X, partition.z - 1)

    def to_partition(self) -> Partition:
        return Partition.from_labels(self.z)

    def refresh(self) -> None:
        """Recompute S and V from the current labels, shedding accumulated
        rounding residue from long add/remove sequences."""
        self.S[:self.K] = 0.0
        self.V[:self.K] = 0.0
        np.add.at(self.S, self.z, self.X)
        np.add.at(self.V, self.z, self.X ** 2)

    def stats_list(self):
        return [SufficientStats(S=self.S[k].copy(), V=self.V[k].copy(), Nk=int(self.Nk[k]))
                for k in range(self.K)]
