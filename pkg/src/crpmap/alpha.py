"""Learning the concentration parameter: grid search on the converged NLL,
cross-validation on the out-of-sample predictive, and a Newton MAP estimate
from the (N, K) likelihood alpha^K Gamma(alpha)/Gamma(alpha+N) under an
inverse-Gamma(1/2, 1/2) or Gamma(a, b) prior.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import gammaln, polygamma, psi

from .core import Dataset, NGPrior
from .errors import InputError
from .evaluation import CollapsedModel, predict_marginal
from .mapdp import MapDpConfig, fit_mapdp

log = logging.getLogger(__name__)


@dataclass
class AlphaGrid:
    values: np.ndarray
    scores: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        self.scores = np.asarray(self.scores, dtype=np.float64)
        if self.values.ndim != 1 or self.values.shape != self.scores.shape:
            raise InputError("values and scores must be 1-D and the same length")
        if np.any(np.diff(self.values) <= 0):
            raise InputError("values must be strictly increasing")


def _check_candidates(candidates) -> np.ndarray:
    candidates = np.asarray(candidates, dtype=np.float64)
    if candidates.size == 0:
        raise InputError("candidate list is empty")
    if np.any(candidates <= 0):
        raise InputError("candidates must be positive")
    return np.sort(candidates)


def select_alpha_by_nll(dataset: Dataset, prior: NGPrior, candidates,
                        fit_config: MapDpConfig):
    """Fit MAP-DPM per candidate and return (argmin of converged NLL, AlphaGrid)."""
    candidates = _check_candidates(candidates)
    scores = np.empty_like(candidates)
    for j, alpha in enumerate(candidates):
        cfg = replace(fit_config, alpha=float(alpha), prior=prior)
        scores[j] = fit_mapdp(dataset, cfg).nll_trace[-1]
    grid = AlphaGrid(values=candidates, scores=scores)
    return float(candidates[int(np.argmin(scores))]), grid


def _fold_indices(n: int, folds: int, rng: np.random.Generator):
    perm = rng.permutation(n)
    return np.array_split(perm, folds)


def select_alpha_by_cv(dataset: Dataset, prior: NGPrior, candidates, folds: int,
                       fit_config: MapDpConfig):
    """k-fold cross-validation: fit on the training part, score held-out points
    by -log of the marginal predictive, return (argmin of the mean, AlphaGrid)."""
    candidates = _check_candidates(candidates)
    folds = int(folds)
    if folds < 2:
        raise InputError("folds must be >= 2")
    if folds > dataset.n:
        raise InputError("folds cannot exceed N")
    rng = np.random.default_rng(fit_config.seed)
    parts = _fold_indices(dataset.n, folds, rng)
    if any(dataset.n - p.shape[0] < 1 for p in parts):
        raise InputError("a fold would leave an empty training set")
    fold_scores = np.zeros((candidates.shape[0], folds))
    for f, test_idx in enumerate(parts):
        mask = np.ones(dataset.n, dtype=bool)
        mask[test_idx] = False
        train = Dataset(X=dataset.X[mask])
        for j, alpha in enumerate(candidates):
            cfg = replace(fit_config, alpha=float(alpha), prior=prior)
            fit = fit_mapdp(train, cfg)
            model = CollapsedModel.from_partition(train, fit.partition, prior, float(alpha))
            held = dataset.X[test_idx]
            fold_scores[j, f] = -np.mean([predict_marginal(x, model) for x in held])
    scores = fold_scores.mean(axis=1)
    grid = AlphaGrid(values=candidates, scores=scores)
    chosen = float(candidates[int(np.argmin(scores))])
    return chosen, grid, fold_scores


def neg_log_alpha_posterior(alpha: float, N: int, K: int, prior_choice="ig",
                            a_alpha: float = 1.0, b_alpha: float = 1.0) -> float:
    """-log p(alpha | N, K) up to a constant.

    prior_choice "ig": p propto Gamma(a)/Gamma(a+N) a^(K-3/2) exp(-1/(2a));
    prior_choice "gamma": p propto Gamma(a)/Gamma(a+N) a^(K+a_alpha-1) exp(-b_alpha a).
    """
    if alpha <= 0:
        return math.inf
    base = gammaln(alpha) - gammaln(alpha + N)
    if prior_choice == "ig":
        return -(base + (K - 1.5) * math.log(alpha) - 0.5 / alpha)
    if prior_choice == "gamma":
        return -(base + (K + a_alpha - 1.0) * math.log(alpha) - b_alpha * alpha)
    raise InputError(f"unknown prior_choice {prior_choice!r}")


def _derivs_phi(phi: float, N: int, K: int, prior_choice, a_alpha, b_alpha):
    """First and second derivatives of the negative log posterior wrt phi = log alpha."""
    alpha = math.exp(phi)
    dig = psi(alpha) - psi(alpha + N)
    trig = polygamma(1, alpha) - polygamma(1, alpha + N)
    if prior_choice == "ig":
        df_da = -(dig + (K - 1.5) / alpha + 0.5 / alpha ** 2)
        d2f_da2 = -(trig - (K - 1.5) / alpha ** 2 - 1.0 / alpha ** 3)
    else:
        df_da = -(dig + (K + a_alpha - 1.0) / alpha - b_alpha)
        d2f_da2 = -(trig - (K + a_alpha - 1.0) / alpha ** 2)
    return alpha * df_da, alpha * alpha * d2f_da2 + alpha * df_da


def _golden_section(f, lo: float, hi: float, tol: float = 1e-12, iters: int = 200):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(iters):
        if b - a < tol:
            break
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


def alpha_map_newton(N: int, K: int, prior_choice: str = "ig",
                     a_alpha: float = 1.0, b_alpha: float = 1.0,
                     tol: float = 1e-10, max_iters: int = 100) -> float:
    """MAP estimate of alpha by safeguarded Newton iteration on log alpha.

    Falls back to a golden-section search on log alpha in [1e-8, 1e8] if
    Newton has not converged after max_iters (logged as a warning).
    """
    N = int(N)
    K = int(K)
    if N < 1 or not (1 <= K <= N):
        raise InputError("need N >= 1 and 1 <= K <= N")
    if prior_choice not in ("ig", "gamma"):
        raise InputError(f"unknown prior_choice {prior_choice!r}")

    def f_phi(phi):
        return neg_log_alpha_posterior(math.exp(phi), N, K, prior_choice, a_alpha, b_alpha)

    phi = math.log(max(K, 2) / math.log(max(N, 2)))  # crude K ~ alpha log N start
    fval = f_phi(phi)
    for _ in range(max_iters):
        g, h = _derivs_phi(phi, N, K, prior_choice, a_alpha, b_alpha)
        if h <= 0:
            step = -g  # gradient step if curvature is unusable
        else:
            step = -g / h
        # step halving keeps the objective from increasing
        t = 1.0
        for _ in range(60):
            cand = phi + t * step
            fc = f_phi(cand)
            if fc <= fval:
                break
            t *= 0.5
        else:
            cand, fc = phi, fval
        if abs(cand - phi) < tol:
            return math.exp(cand)
        phi, fval = cand, fc
    log.warning("alpha_map_newton: no convergence after %d iterations; "
                "falling back to golden-section", max_iters)
    phi = _golden_section(f_phi, math.log(1e-8), math.log(1e8))
    return math.exp(phi)
