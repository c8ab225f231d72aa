"""Replicated synthetic-CRP experiment: generate, fit by MAP-DPM and collapsed
Gibbs, evaluate train/test clustering agreement, and aggregate the usual
summary table (mean and two standard deviations per metric, iteration counts,
empty-cluster events, cluster-size distributions with 5th/95th quantiles).
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import NGPrior
from .crp import CrpConfig, GeneratorConfig, continue_crp_mixture, generate_dataset
from .errors import InputError
from .evaluation import CollapsedModel, loo_nll, metric_report, modal_labels, nmi
from .gibbs import GibbsConfig, RafteryConfig, run_gibbs, summarize_trace
from .mapdp import MapDpConfig, fit_mapdp


def default_generator_prior() -> NGPrior:
    return NGPrior(m0=np.array([1.0, 1.0]), c0=0.1, b0=np.array([10.0, 10.0]), a0=1.0)


@dataclass
class CrpExperimentConfig:
    replicates: int = 20
    n: int = 600
    dim: int = 2
    alpha: float = 3.0
    prior: Optional[NGPrior] = None
    seed: int = 0
    n_test: int = 600
    jobs: int = 1
    engines: tuple = ("mapdp", "gibbs")
    mapdp_max_sweeps: int = 200
    mapdp_restarts: int = 10
    gibbs_max_iters: int = 4000
    gibbs_burn_in: int = 200
    gibbs_min_samples: int = 1000  # sample budget for the across-sample summaries
    raftery: Optional[RafteryConfig] = field(default_factory=RafteryConfig)
    gibbs_test_samples: int = 20  # thinned samples used for test-set scoring

    def __post_init__(self):
        if self.replicates < 1:
            raise InputError("replicates must be >= 1")
        if self.prior is None:
            if self.dim == 2:
                self.prior = default_generator_prior()
            else:
                self.prior = NGPrior(m0=np.ones(self.dim), c0=0.1,
                                     b0=10.0 * np.ones(self.dim), a0=1.0)
        if self.prior.dim != self.dim:
            raise InputError("prior dimension must match dim")


@dataclass
class ReplicateResult:
    index: int
    k_true: int
    rows: dict            # engine -> metric dict
    cluster_sizes: dict   # engine/"truth" -> descending N_k/N array


@dataclass
class ExperimentResult:
    config: CrpExperimentConfig
    replicates: list
    summary: dict         # engine -> {metric: (mean, 2sd)}
    size_quantiles: dict  # engine/"truth" -> {"q05": ..., "q50": ..., "q95": ...}

    def iteration_ratio(self) -> float:
        g = self.summary.get("gibbs", {}).get("iterations")
        m = self.summary.get("mapdp", {}).get("iterations")
        if not g or not m:
            raise InputError("ratio needs both engines")
        return g[0] / m[0]


def _size_profile(labels: np.ndarray) -> np.ndarray:
    counts = np.bincount(labels)
    counts = np.sort(counts[counts > 0])[::-1]
    return counts / counts.sum()


def _run_replicate(index: int, seed, cfg: CrpExperimentConfig) -> ReplicateResult:
    rng = np.random.default_rng(seed)
    gen_cfg = GeneratorConfig(crp=CrpConfig(alpha=cfg.alpha, N=cfg.n),
                              prior=cfg.prior, D=cfg.dim, seed=0)
    train, truth, params = generate_dataset(gen_cfg, rng)
    test = None
    if cfg.n_test > 0:
        test = continue_crp_mixture(truth, params, cfg.prior, cfg.alpha, cfg.n_test, rng)

    rows = {}
    sizes = {"truth": _size_profile(truth.z - 1)}
    fit_seed = int(np.random.default_rng(seed).integers(2 ** 62))

    if "mapdp" in cfg.engines:
        fit = fit_mapdp(train, MapDpConfig(alpha=cfg.alpha, prior=cfg.prior,
                                           max_sweeps=cfg.mapdp_max_sweeps,
                                           restarts=cfg.mapdp_restarts, seed=fit_seed))
        rep = metric_report(truth.z, fit.partition.z)
        model = CollapsedModel.from_partition(train, fit.partition, cfg.prior, cfg.alpha)
        row = {"nmi_sum": rep.nmi_sum, "nmi_max": rep.nmi_max, "ami": rep.ami,
               "iterations": float(fit.sweeps), "cpu_time_s": fit.wall_time,
               "delta_k": float(rep.delta_k),
               "empty_clusters": float(fit.empty_cluster_events),
               "loo_nll": loo_nll(train, fit.partition, cfg.prior, cfg.alpha)}
        if test is not None:
            row["test_nmi"] = nmi(test.labels, modal_labels(test.X, model), "sum")
        rows["mapdp"] = row
        sizes["mapdp"] = _size_profile(fit.partition.z - 1)

    if "gibbs" in cfg.engines:
        trace = run_gibbs(train, GibbsConfig(alpha=cfg.alpha, prior=cfg.prior,
                                             max_iters=cfg.gibbs_max_iters,
                                             burn_in=cfg.gibbs_burn_in,
                                             min_samples=cfg.gibbs_min_samples,
                                             raftery=cfg.raftery, seed=fit_seed))
        summary = summarize_trace(trace, truth.z)
        row = {"nmi_sum": summary.nmi_sum_mean, "nmi_max": summary.nmi_max_mean,
               "ami": summary.ami_mean, "iterations": float(trace.iterations_run),
               "cpu_time_s": trace.wall_time, "delta_k": summary.delta_k_mean,
               "empty_clusters": float(trace.empty_cluster_events)}
        if test is not None:
            step = max(1, len(trace.samples) // cfg.gibbs_test_samples)
            picks = trace.samples[::step][:cfg.gibbs_test_samples]
            scores = []
            for p in picks:
                model = CollapsedModel.from_partition(train, p, cfg.prior, cfg.alpha)
                scores.append(nmi(test.labels, modal_labels(test.X, model), "sum"))
            row["test_nmi"] = float(np.mean(scores))
        rows["gibbs"] = row
        # median-iteration sample stands in for the trace's size profile
        mid = trace.samples[len(trace.samples) // 2]
        sizes["gibbs"] = _size_profile(mid.z - 1)

    return ReplicateResult(index=index, k_true=truth.K, rows=rows, cluster_sizes=sizes)


def _aggregate(rep_rows: list) -> dict:
    keys = sorted({k for row in rep_rows for k in row})
    out = {}
    for k in keys:
        vals = np.array([row[k] for row in rep_rows if k in row], dtype=np.float64)
        out[k] = (float(vals.mean()), float(2.0 * vals.std()))
    return out


def _quantile_table(profiles: list) -> dict:
    width = max(p.shape[0] for p in profiles)
    padded = np.zeros((len(profiles), width))
    for i, p in enumerate(profiles):
        padded[i, :p.shape[0]] = p
    return {"q05": np.quantile(padded, 0.05, axis=0),
            "q50": np.quantile(padded, 0.50, axis=0),
            "q95": np.quantile(padded, 0.95, axis=0)}


def run_crp_experiment(cfg: CrpExperimentConfig) -> ExperimentResult:
    """Run all replicates (optionally across worker threads; results do not
    depend on scheduling because every replicate owns a spawned rng stream)."""
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.replicates)
    if cfg.jobs > 1:
        with ThreadPoolExecutor(max_workers=cfg.jobs) as pool:
            reps = list(pool.map(lambda t: _run_replicate(t[0], t[1], cfg),
                                 enumerate(seeds)))
    else:
        reps = [_run_replicate(i, s, cfg) for i, s in enumerate(seeds)]

    summary = {}
    for engine in cfg.engines:
        summary[engine] = _aggregate([r.rows[engine] for r in reps if engine in r.rows])
    quantiles = {}
    for key in ["truth", *cfg.engines]:
        profiles = [r.cluster_sizes[key] for r in reps if key in r.cluster_sizes]
        if profiles:
            quantiles[key] = _quantile_table(profiles)
    return ExperimentResult(config=cfg, replicates=reps, summary=summary,
                            size_quantiles=quantiles)
