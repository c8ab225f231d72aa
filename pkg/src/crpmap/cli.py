"""Batch command-line interface.

Subcommands: generate, fit, evaluate, alpha, predict, experiment-crp.
Every command writes a manifest.json (command, config snapshot, seed,
versions, timings) into its output directory; numeric output files are
byte-identical across runs with the same --seed.

Exit codes: 0 success, 2 input error, 3 numerical-integrity error,
4 non-convergence where --require-convergence was given.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, _kernels
from .alpha import alpha_map_newton, select_alpha_by_cv, select_alpha_by_nll
from .core import Dataset, FitResult, NGPrior, Partition, SufficientStats
from .crp import CrpConfig, GeneratorConfig, generate_dataset
from .dpmeans import DpMeansConfig, fit_dpmeans
from .errors import ConvergenceError, CrpmapError, InputError, NumericalIntegrityError
from .evaluation import (CollapsedModel, loo_nll, metric_report, nmi,
                         predict_marginal, predict_modal)
from .experiment import CrpExperimentConfig, run_crp_experiment
from .gibbs import GibbsConfig, RafteryConfig, run_gibbs
from .mapdp import MapDpConfig, fit_mapdp


@dataclass
class RunManifest:
    command: str
    config: dict
    seed: int
    versions: dict = field(default_factory=lambda: {
        "crpmap": __version__, "numpy": np.__version__,
        "backend": _kernels.backend_name()})
    timings: dict = field(default_factory=dict)


def _snapshot(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips the float (>= 17 significant digits
    where needed)."""
    return repr(float(x))


def _write_manifest(out_dir: Path, manifest: RunManifest) -> None:
    with open(out_dir / "manifest.json", "w") as f:
        json.dump(asdict(manifest), f, indent=2)
        f.write("\n")


def _ensure_dir(path: str) -> Path:
    p = Path(path)
    try:
        p.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise InputError(f"cannot create output directory {path}: {e}") from e
    return p


def _write_csv(path: Path, header, rows) -> None:
    try:
        with open(path, "w", newline="") as f:
            w = csv.writer(f)
            w.writerow(header)
            w.writerows(rows)
    except OSError as e:
        raise InputError(f"cannot write {path}: {e}") from e


def load_matrix_csv(path: str, header: bool = False, label_column: str | None = None):
    """Read a numeric CSV; returns (X, labels-or-None, feature_names-or-None).

    Malformed rows and non-numeric features are reported with their line
    number and column name.
    """
    rows = []
    labels = []
    names = None
    label_idx = None
    try:
        f = open(path, newline="")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    with f:
        reader = csv.reader(f)
        first_line = 1
        if header:
            try:
                names = next(reader)
            except StopIteration:
                raise InputError(f"{path}: empty file") from None
            first_line = 2
        if label_column is not None:
            if header and label_column in names:
                label_idx = names.index(label_column)
            else:
                try:
                    label_idx = int(label_column)
                except ValueError:
                    raise InputError(
                        f"{path}: label column {label_column!r} not found") from None
        width = None
        for lineno, row in enumerate(reader, start=first_line):
            if not row:
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise InputError(f"{path}: line {lineno}: expected {width} fields, "
                                 f"got {len(row)}")
            vals = []
            for j, cell in enumerate(row):
                if j == label_idx:
                    labels.append(cell)
                    continue
                try:
                    vals.append(float(cell))
                except ValueError:
                    col = names[j] if names else f"column {j}"
                    raise InputError(f"{path}: line {lineno}: non-numeric value "
                                     f"{cell!r} in {col}") from None
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no data rows")
    X = np.array(rows, dtype=np.float64)
    lab = None
    if label_idx is not None:
        try:
            lab = np.array([int(float(v)) for v in labels], dtype=np.int64)
        except ValueError:
            raise InputError(f"{path}: labels must be integers") from None
        names = ([nm for j, nm in enumerate(names) if j != label_idx]
                 if names else None)
    return X, lab, names


def load_labels_csv(path: str) -> np.ndarray:
    """Read a (row, cluster) CSV with header; rows must be 0..N-1 in order."""
    try:
        f = open(path, newline="")
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}") from e
    with f:
        reader = csv.reader(f)
        head = next(reader, None)
        if head is None:
            raise InputError(f"{path}: empty file")
        out = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                out.append(int(row[1]))
            except (IndexError, ValueError):
                raise InputError(f"{path}: line {lineno}: expected 'row,cluster'") from None
    if not out:
        raise InputError(f"{path}: no data rows")
    return np.array(out, dtype=np.int64)


def write_data_csv(path: Path, X: np.ndarray, names=None) -> None:
    names = names or [f"x{d}" for d in range(X.shape[1])]
    _write_csv(path, names, ([_fmt(v) for v in row] for row in X))


def write_labels_csv(path: Path, labels: np.ndarray) -> None:
    _write_csv(path, ["row", "cluster"], ((i, int(c)) for i, c in enumerate(labels)))


def model_to_dict(model: CollapsedModel) -> dict:
    return {"prior": {"m0": [_hexfree(v) for v in model.prior.m0],
                      "c0": _hexfree(model.prior.c0),
                      "b0": [_hexfree(v) for v in model.prior.b0],
                      "a0": _hexfree(model.prior.a0)},
            "alpha": _hexfree(model.alpha),
            "clusters": [{"S": [_hexfree(v) for v in s.S],
                          "V": [_hexfree(v) for v in s.V],
                          "Nk": int(s.Nk)} for s in model.stats]}


def _hexfree(v: float) -> float:
    return float(v)


def model_from_dict(doc: dict) -> CollapsedModel:
    try:
        prior = NGPrior(m0=np.array(doc["prior"]["m0"], dtype=np.float64),
                        c0=doc["prior"]["c0"],
                        b0=np.array(doc["prior"]["b0"], dtype=np.float64),
                        a0=doc["prior"]["a0"])
        stats = [SufficientStats(S=np.array(c["S"], dtype=np.float64),
                                 V=np.array(c["V"], dtype=np.float64),
                                 Nk=int(c["Nk"])) for c in doc["clusters"]]
        return CollapsedModel(prior=prior, alpha=doc["alpha"], stats=stats)
    except (KeyError, TypeError) as e:
        raise InputError(f"malformed model document: {e}") from e


def load_model(path: str) -> CollapsedModel:
    try:
        with open(path) as f:
            return model_from_dict(json.load(f))
    except OSError as e:
        raise InputError(f"cannot read model {path}: {e}") from e
    except json.JSONDecodeError as e:
        raise InputError(f"model {path} is not valid JSON: {e}") from e


def _prior_from_args(args, X: np.ndarray) -> NGPrior:
    if args.prior == "empirical":
        return NGPrior.empirical(X, b0_mode=args.b0_mode)
    if args.prior is not None:
        try:
            with open(args.prior) as f:
                doc = json.load(f)
        except OSError as e:
            raise InputError(f"cannot read prior file {args.prior}: {e}") from e
        except json.JSONDecodeError as e:
            raise InputError(f"prior file {args.prior} is not valid JSON: {e}") from e
        doc = doc.get("prior", doc)
        return NGPrior(m0=np.array(doc["m0"], dtype=np.float64), c0=doc["c0"],
                       b0=np.array(doc["b0"], dtype=np.float64), a0=doc["a0"])
    d = X.shape[1]
    if args.m0 is not None:
        m0 = np.array([float(v) for v in args.m0.split(",")])
    else:
        m0 = np.zeros(d)
    if args.b0 is not None:
        b0 = np.array([float(v) for v in args.b0.split(",")])
    else:
        b0 = np.ones(d)
    if m0.shape[0] == 1:
        m0 = np.full(d, m0[0])
    if b0.shape[0] == 1:
        b0 = np.full(d, b0[0])
    return NGPrior(m0=m0, c0=args.c0, b0=b0, a0=args.a0)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_generate(args) -> int:
    t0 = time.perf_counter()
    prior = NGPrior(m0=np.array([float(v) for v in args.m0.split(",")]),
                    c0=args.c0,
                    b0=np.array([float(v) for v in args.b0.split(",")]),
                    a0=args.a0)
    if prior.dim == 1 and args.dim > 1:
        prior = NGPrior(m0=np.full(args.dim, prior.m0[0]), c0=prior.c0,
                        b0=np.full(args.dim, prior.b0[0]), a0=prior.a0)
    cfg = GeneratorConfig(crp=CrpConfig(alpha=args.alpha, N=args.n),
                          prior=prior, D=args.dim, seed=args.seed)
    out = _ensure_dir(args.out)
    seeds = np.random.SeedSequence(args.seed).spawn(args.replicates)

    def one(j, seed):
        rng = np.random.default_rng(seed)
        dataset, partition, params = generate_dataset(cfg, rng)
        rep_dir = out if args.replicates == 1 else _ensure_dir(out / f"rep{j:03d}")
        write_data_csv(rep_dir / "data.csv", dataset.X)
        write_labels_csv(rep_dir / "labels.csv", partition.z)
        with open(rep_dir / "params.json", "w") as f:
            json.dump({"alpha": args.alpha, "n": args.n, "dim": args.dim,
                       "prior": {"m0": list(map(float, prior.m0)), "c0": prior.c0,
                                 "b0": list(map(float, prior.b0)), "a0": prior.a0},
                       "K": partition.K,
                       "counts": [int(c) for c in partition.counts],
                       "mu": [[_hexfree(v) for v in row] for row in params.mu],
                       "tau": [[_hexfree(v) for v in row] for row in params.tau],
                       "manifest_file": "../manifest.json" if args.replicates > 1
                                        else "manifest.json"},
                      f, indent=2)
            f.write("\n")

    jobs = max(1, args.jobs)
    if jobs > 1 and args.replicates > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            list(pool.map(lambda t: one(*t), enumerate(seeds)))
    else:
        for j, s in enumerate(seeds):
            one(j, s)
    manifest = RunManifest(command="generate", config=_snapshot(args), seed=args.seed)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


def _fit_engine(args, dataset: Dataset, prior: NGPrior):
    if args.engine == "mapdp":
        cfg = MapDpConfig(alpha=args.alpha, prior=prior, epsilon=args.epsilon,
                          max_sweeps=args.max_iters, restarts=args.restarts,
                          seed=args.seed)
        fit = fit_mapdp(dataset, cfg)
        model = CollapsedModel.from_partition(dataset, fit.partition, prior, args.alpha)
        return fit, model, {}
    if args.engine == "gibbs":
        raftery = None
        if args.raftery is not None:
            raftery = RafteryConfig(*args.raftery)
        cfg = GibbsConfig(alpha=args.alpha, prior=prior, max_iters=args.max_iters,
                          burn_in=args.burn_in, raftery=raftery, seed=args.seed)
        trace = run_gibbs(dataset, cfg)
        part = trace.final_partition()
        fit = FitResult(partition=part, nll_trace=trace.nll_chain,
                        sweeps=trace.iterations_run,
                        converged=trace.raftery_result is not None
                        and trace.iterations_run >= trace.raftery_result.total,
                        empty_cluster_events=trace.empty_cluster_events,
                        wall_time=trace.wall_time, engine="gibbs")
        model = CollapsedModel.from_partition(dataset, part, prior, args.alpha)
        extra = {}
        if trace.raftery_result is not None:
            rr = trace.raftery_result
            extra["raftery"] = {"n_required": rr.n_required, "burn_in": rr.burn_in,
                                "thin": rr.thin, "n_min": rr.n_min}
        return fit, model, extra
    if args.engine == "dpmeans":
        if args.lam is None:
            raise InputError("dpmeans requires --lambda")
        cfg = DpMeansConfig(lam=args.lam, max_iters=args.max_iters, seed=args.seed)
        fit = fit_dpmeans(dataset, cfg)
        return fit, None, {"centers": [[float(v) for v in row]
                                       for row in fit.extras["centers"]]}
    raise InputError(f"unknown engine {args.engine!r}")


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    X, labels, names = load_matrix_csv(args.data, header=args.header,
                                       label_column=args.label_column)
    dataset = Dataset(X=X, labels=labels, feature_names=names)
    prior = None
    if args.engine != "dpmeans":
        prior = _prior_from_args(args, X)
    out = _ensure_dir(args.out)
    fit, model, extra = _fit_engine(args, dataset, prior)

    write_labels_csv(out / "assignments.csv", fit.partition.z)
    _write_csv(out / "nll_trace.csv", ["sweep", "nll"],
               ((i + 1, _fmt(v)) for i, v in enumerate(fit.nll_trace)))
    summary = {"engine": args.engine, "K": fit.partition.K,
               "final_nll": float(fit.nll_trace[-1]),
               "iterations": fit.sweeps, "converged": bool(fit.converged),
               "empty_cluster_events": fit.empty_cluster_events,
               "wall_time_s": fit.wall_time, "n": dataset.n, "dim": dataset.dim,
               "manifest_file": "manifest.json"}
    summary.update(extra)
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    if model is not None:
        doc = model_to_dict(model)
        doc["manifest_file"] = "manifest.json"
        with open(out / "model.json", "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
    manifest = RunManifest(command="fit", config=_snapshot(args), seed=args.seed)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    if args.require_convergence and not fit.converged:
        raise ConvergenceError(f"{args.engine} did not converge in {fit.sweeps} iterations")
    return 0


def _size_rows(labels: np.ndarray, method: str):
    counts = np.bincount(labels)
    counts = np.sort(counts[counts > 0])[::-1]
    frac = counts / counts.sum()
    return [(rank + 1, _fmt(v), method) for rank, v in enumerate(frac)]


def cmd_evaluate(args) -> int:
    t0 = time.perf_counter()
    out = _ensure_dir(args.out)
    if args.replicates_root is not None:
        return _evaluate_replicates(args, out, t0)
    est = load_labels_csv(args.assignments)
    truth = load_labels_csv(args.truth)
    if est.shape != truth.shape:
        raise InputError(f"assignments have {est.shape[0]} rows but truth has "
                         f"{truth.shape[0]}")
    rep = metric_report(truth, est)
    metrics = {"nmi_sum": rep.nmi_sum, "nmi_max": rep.nmi_max, "ami": rep.ami,
               "delta_k": rep.delta_k, "n_clusters_est": rep.n_clusters_est,
               "manifest_file": "manifest.json"}
    if args.model is not None:
        if args.data is None:
            raise InputError("--model requires --data for the LOO score")
        model = load_model(args.model)
        X, _, _ = load_matrix_csv(args.data, header=args.header)
        part = Partition.from_labels(est)
        metrics["loo_nll"] = loo_nll(Dataset(X=X), part, model.prior, model.alpha)
    with open(out / "metrics.json", "w") as f:
        json.dump(metrics, f, indent=2)
        f.write("\n")
    rows = _size_rows(est, args.method) + _size_rows(truth, "truth")
    _write_csv(out / "cluster_sizes.csv", ["rank", "nk_over_n", "method"], rows)
    manifest = RunManifest(command="evaluate", config=_snapshot(args), seed=0)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


def _evaluate_replicates(args, out: Path, t0: float) -> int:
    root = Path(args.replicates_root)
    rep_dirs = sorted(p for p in root.glob("rep*") if p.is_dir())
    if not rep_dirs:
        raise InputError(f"no rep*/ directories under {root}")
    per_rep = []
    profiles = []
    for rd in rep_dirs:
        est = load_labels_csv(rd / args.assignments)
        truth = load_labels_csv(rd / args.truth)
        if est.shape != truth.shape:
            raise InputError(f"{rd}: assignments/truth length mismatch")
        rep = metric_report(truth, est)
        per_rep.append({"replicate": rd.name, "nmi_sum": rep.nmi_sum,
                        "nmi_max": rep.nmi_max, "ami": rep.ami,
                        "delta_k": rep.delta_k})
        counts = np.bincount(est)
        counts = np.sort(counts[counts > 0])[::-1]
        profiles.append(counts / counts.sum())
    agg = {}
    for key in ("nmi_sum", "nmi_max", "ami", "delta_k"):
        vals = np.array([r[key] for r in per_rep], dtype=np.float64)
        agg[key] = {"mean": float(vals.mean()), "two_sd": float(2 * vals.std())}
    with open(out / "metrics.json", "w") as f:
        json.dump({"replicates": per_rep, "aggregate": agg,
                   "manifest_file": "manifest.json"}, f, indent=2)
        f.write("\n")
    width = max(p.shape[0] for p in profiles)
    padded = np.zeros((len(profiles), width))
    for i, p in enumerate(profiles):
        padded[i, :p.shape[0]] = p
    rows = []
    for rank in range(width):
        rows.append((rank + 1,
                     _fmt(np.quantile(padded[:, rank], 0.05)),
                     _fmt(np.quantile(padded[:, rank], 0.50)),
                     _fmt(np.quantile(padded[:, rank], 0.95)),
                     args.method))
    _write_csv(out / "cluster_size_quantiles.csv",
               ["rank", "q05", "q50", "q95", "method"], rows)
    manifest = RunManifest(command="evaluate", config=_snapshot(args), seed=0)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


def cmd_alpha(args) -> int:
    t0 = time.perf_counter()
    out = _ensure_dir(args.out)
    result = {"method": args.method, "manifest_file": "manifest.json"}
    grid = None
    if args.method == "newton":
        if args.n is None or args.k is None:
            raise InputError("newton needs --N and --K")
        chosen = alpha_map_newton(args.n, args.k, prior_choice=args.alpha_prior,
                                  a_alpha=args.a_alpha, b_alpha=args.b_alpha)
        result["alpha"] = chosen
    else:
        if args.data is None:
            raise InputError(f"method {args.method} needs --data")
        if not args.candidates:
            raise InputError("empty candidate grid")
        X, _, _ = load_matrix_csv(args.data, header=args.header)
        dataset = Dataset(X=X)
        prior = _prior_from_args(args, X)
        candidates = [float(v) for v in args.candidates.split(",") if v]
        if not candidates:
            raise InputError("empty candidate grid")
        fit_cfg = MapDpConfig(alpha=candidates[0], prior=prior, seed=args.seed,
                              restarts=args.restarts, max_sweeps=args.max_iters)
        if args.method == "grid":
            chosen, grid = select_alpha_by_nll(dataset, prior, candidates, fit_cfg)
        else:
            chosen, grid, folds = select_alpha_by_cv(dataset, prior, candidates,
                                                     args.folds, fit_cfg)
            _write_csv(out / "cv_fold_scores.csv",
                       ["alpha"] + [f"fold{j}" for j in range(args.folds)],
                       ((_fmt(a), *[_fmt(v) for v in row])
                        for a, row in zip(grid.values, folds)))
        result["alpha"] = chosen
    if grid is not None:
        _write_csv(out / "alpha_grid.csv", ["alpha", "score"],
                   ((_fmt(a), _fmt(s)) for a, s in zip(grid.values, grid.scores)))
    with open(out / "alpha.json", "w") as f:
        json.dump(result, f, indent=2)
        f.write("\n")
    manifest = RunManifest(command="alpha", config=_snapshot(args), seed=args.seed)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


def cmd_predict(args) -> int:
    t0 = time.perf_counter()
    out = _ensure_dir(args.out)
    model = load_model(args.model)
    X, truth, _ = load_matrix_csv(args.data, header=args.header,
                                  label_column=args.label_column)
    if X.shape[1] != model.prior.dim:
        raise InputError(f"data has {X.shape[1]} dimensions, model has "
                         f"{model.prior.dim}")
    rows = []
    modal = np.empty(X.shape[0], dtype=np.int64)
    for i, x in enumerate(X):
        lm = predict_marginal(x, model)
        k, dens = predict_modal(x, model)
        modal[i] = k
        rows.append((i, _fmt(lm), k, _fmt(dens)))
    _write_csv(out / "predictions.csv",
               ["row", "log_marginal", "modal_cluster", "modal_log_density"], rows)
    summary = {"n": int(X.shape[0]), "mean_log_marginal":
               float(np.mean([float(r[1]) for r in rows])),
               "manifest_file": "manifest.json"}
    if truth is not None:
        summary["test_set_nmi"] = nmi(truth, modal, "sum")
    with open(out / "predict_summary.json", "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")
    manifest = RunManifest(command="predict", config=_snapshot(args), seed=0)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


def cmd_experiment_crp(args) -> int:
    t0 = time.perf_counter()
    out = _ensure_dir(args.out)
    prior = None
    if args.m0 is not None:
        m0 = np.array([float(v) for v in args.m0.split(",")])
        b0 = np.array([float(v) for v in args.b0.split(",")])
        prior = NGPrior(m0=m0, c0=args.c0, b0=b0, a0=args.a0)
    raftery = RafteryConfig(*args.raftery) if args.raftery else RafteryConfig()
    cfg = CrpExperimentConfig(replicates=args.replicates, n=args.n, dim=args.dim,
                              alpha=args.alpha, prior=prior, seed=args.seed,
                              n_test=args.n_test, jobs=args.jobs,
                              gibbs_max_iters=args.gibbs_max_iters,
                              raftery=raftery)
    result = run_crp_experiment(cfg)

    summary = {eng: {k: {"mean": v[0], "two_sd": v[1]} for k, v in table.items()}
               for eng, table in result.summary.items()}
    if "mapdp" in result.summary and "gibbs" in result.summary:
        summary["gibbs_to_mapdp_iteration_ratio"] = result.iteration_ratio()
    summary["manifest_file"] = "manifest.json"
    with open(out / "summary.json", "w") as f:
        json.dump(summary, f, indent=2)
        f.write("\n")

    keys = sorted({k for r in result.replicates for row in r.rows.values() for k in row})
    rows = []
    for r in result.replicates:
        for eng, row in r.rows.items():
            rows.append([r.index, eng, r.k_true] +
                        [_fmt(row[k]) if k in row else "" for k in keys])
    _write_csv(out / "replicates.csv", ["replicate", "engine", "k_true"] + keys, rows)

    size_rows = []
    for method, prof in result.size_quantiles.items():
        for rank in range(prof["q50"].shape[0]):
            size_rows.append((rank + 1, _fmt(prof["q05"][rank]), _fmt(prof["q50"][rank]),
                              _fmt(prof["q95"][rank]), method))
    _write_csv(out / "cluster_size_quantiles.csv",
               ["rank", "q05", "q50", "q95", "method"], size_rows)
    manifest = RunManifest(command="experiment-crp", config=_snapshot(args), seed=args.seed)
    manifest.timings["wall_s"] = time.perf_counter() - t0
    _write_manifest(out, manifest)
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _default_jobs() -> int:
    env = os.environ.get("CRPMAP_JOBS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            return 1
    return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="crpmap",
                                description="Collapsed Dirichlet-process mixture "
                                            "clustering toolkit")
    p.add_argument("--version", action="version", version=f"crpmap {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="sample synthetic CRP-mixture datasets")
    g.add_argument("--alpha", type=float, default=3.0)
    g.add_argument("--n", type=int, default=600)
    g.add_argument("--dim", type=int, default=2)
    g.add_argument("--m0", default="1,1")
    g.add_argument("--c0", type=float, default=0.1)
    g.add_argument("--b0", default="10,10")
    g.add_argument("--a0", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--replicates", type=int, default=1)
    g.add_argument("--jobs", type=int, default=_default_jobs())
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    f = sub.add_parser("fit", help="fit one engine to a CSV dataset")
    f.add_argument("--engine", choices=["mapdp", "gibbs", "dpmeans"], required=True)
    f.add_argument("--data", required=True)
    f.add_argument("--header", action="store_true", help="input CSV has a header row")
    f.add_argument("--label-column", default=None,
                   help="name or index of a ground-truth label column to ignore")
    f.add_argument("--alpha", type=float, default=1.0)
    f.add_argument("--prior", default=None,
                   help="'empirical' or a JSON file with m0/c0/b0/a0")
    f.add_argument("--b0-mode", choices=["variance", "precision"], default="variance")
    f.add_argument("--m0", default=None)
    f.add_argument("--c0", type=float, default=1.0)
    f.add_argument("--b0", default=None)
    f.add_argument("--a0", type=float, default=1.0)
    f.add_argument("--epsilon", type=float, default=None)
    f.add_argument("--max-iters", type=int, default=500)
    f.add_argument("--restarts", type=int, default=0)
    f.add_argument("--burn-in", type=int, default=0)
    f.add_argument("--raftery", nargs=3, type=float, default=None,
                   metavar=("Q", "R", "S"))
    f.add_argument("--lambda", dest="lam", type=float, default=None)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--require-convergence", action="store_true")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("evaluate", help="clustering metrics against ground truth")
    e.add_argument("--assignments", default="assignments.csv")
    e.add_argument("--truth", default="labels.csv")
    e.add_argument("--model", default=None, help="model.json for the LOO score")
    e.add_argument("--data", default=None)
    e.add_argument("--header", action="store_true")
    e.add_argument("--method", default="fit", help="method tag for the size CSV")
    e.add_argument("--replicates-root", default=None,
                   help="directory of rep*/ subdirs to aggregate")
    e.add_argument("--out", required=True)
    e.set_defaults(func=cmd_evaluate)

    a = sub.add_parser("alpha", help="concentration-parameter selection")
    a.add_argument("--method", choices=["grid", "cv", "newton"], required=True)
    a.add_argument("--data", default=None)
    a.add_argument("--header", action="store_true")
    a.add_argument("--candidates", default="",
                   help="comma-separated alpha grid for grid/cv")
    a.add_argument("--folds", type=int, default=5)
    a.add_argument("--N", dest="n", type=int, default=None)
    a.add_argument("--K", dest="k", type=int, default=None)
    a.add_argument("--alpha-prior", choices=["ig", "gamma"], default="ig")
    a.add_argument("--a-alpha", type=float, default=1.0)
    a.add_argument("--b-alpha", type=float, default=1.0)
    a.add_argument("--prior", default=None)
    a.add_argument("--b0-mode", choices=["variance", "precision"], default="variance")
    a.add_argument("--m0", default=None)
    a.add_argument("--c0", type=float, default=1.0)
    a.add_argument("--b0", default=None)
    a.add_argument("--a0", type=float, default=1.0)
    a.add_argument("--restarts", type=int, default=0)
    a.add_argument("--max-iters", type=int, default=200)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--out", required=True)
    a.set_defaults(func=cmd_alpha)

    pr = sub.add_parser("predict", help="score new points under a fitted model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--data", required=True)
    pr.add_argument("--header", action="store_true")
    pr.add_argument("--label-column", default=None)
    pr.add_argument("--out", required=True)
    pr.set_defaults(func=cmd_predict)

    x = sub.add_parser("experiment-crp",
                       help="generate/fit/evaluate over replicates (summary table)")
    x.add_argument("--replicates", type=int, default=20)
    x.add_argument("--n", type=int, default=600)
    x.add_argument("--n-test", type=int, default=600)
    x.add_argument("--dim", type=int, default=2)
    x.add_argument("--alpha", type=float, default=3.0)
    x.add_argument("--m0", default=None)
    x.add_argument("--c0", type=float, default=0.1)
    x.add_argument("--b0", default=None)
    x.add_argument("--a0", type=float, default=1.0)
    x.add_argument("--gibbs-max-iters", type=int, default=4000)
    x.add_argument("--raftery", nargs=3, type=float, default=None,
                   metavar=("Q", "R", "S"))
    x.add_argument("--seed", type=int, default=0)
    x.add_argument("--jobs", type=int, default=_default_jobs())
    x.add_argument("--out", required=True)
    x.set_defaults(func=cmd_experiment_crp)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except NumericalIntegrityError as e:
        print(f"numerical integrity error: {e}", file=sys.stderr)
        return 3
    except ConvergenceError as e:
        print(f"non-convergence: {e}", file=sys.stderr)
        return 4
    except CrpmapError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
