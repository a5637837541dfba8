"""Experiment orchestration behind the command-line interface."""
from __future__ import annotations

import logging
import math
import warnings
from concurrent.futures import ProcessPoolExecutor
from itertools import product
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    ExperimentConfig,
    build_params,
    family_from_dict,
    family_to_dict,
    params_to_dict,
    solver_values,
)
from .fileio import (
    FormatError,
    ResultsTable,
    config_hash,
    read_laplacian,
    write_edge_list,
    write_json,
    write_matrix,
    write_table,
)
from .graph_core import apply_L, num_edges
from .metrics import f_score
from .solver import SolverParams, solve
from .synthetic import (
    ErdosRenyi,
    GraphSpec,
    Grid,
    Modular,
    generate_weights,
    gmrf_covariance,
    sample_covariance,
    sample_gmrf,
)

log = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "family", "n", "m_over_n", "trial", "seed", "lambda1", "lambda2", "gamma_inv",
    "iterations", "converged", "RE", "FS", "nnz", "wall_time", "error",
]
EVAL_COLUMNS = [
    "estimate", "truth", "n", "support_tol", "RE", "FS",
    "tp", "fp", "fn", "tn", "nnz_estimate", "nnz_truth",
]
AGGREGATE_COLUMNS = [
    "family", "n", "m_over_n", "lambda1", "lambda2", "gamma_inv", "runs", "failed",
    "RE_median", "RE_q1", "RE_q3", "FS_median", "FS_q1", "FS_q3", "nnz_median",
]
BENCH_RUN_COLUMNS = ["n", "trial", "seed", "m", "iterations", "converged", "wall_time"]
BENCH_COLUMNS = ["n", "trials", "m_over_n", "mean_wall_time", "mean_iterations", "converged_runs"]


def family_name(family) -> str:
    return {Grid: "grid", Modular: "modular", ErdosRenyi: "er"}[type(family)]


def data_seed(graph_seed: int, ratio_index: int) -> int:
    """Seed for the samples of one (graph, m/n) pair, derived from the graph seed."""
    ss = np.random.SeedSequence([graph_seed, ratio_index])
    return int(ss.generate_state(1, np.uint64)[0])


def sample_count(ratio: float, n: int) -> int:
    return max(1, int(round(ratio * n)))


def ratio_tag(ratio: float) -> str:
    return f"{ratio:g}"


def manifest(command: str, cfg: ExperimentConfig, **extra) -> dict:
    body = cfg.to_dict()
    return {"command": command, "code_version": __version__, "config": body,
            "config_hash": config_hash(body), **extra}


def ensure_dir(path) -> Path:
    path = Path(path)
    path.mkdir(parents=True, exist_ok=True)
    return path


# --- synth -----------------------------------------------------------------

def run_synth(cfg: ExperimentConfig, out) -> dict:
    """Write ground truth, samples and covariances for every trial."""
    out = ensure_dir(out)
    family = cfg.family
    n = family.n
    runs = []
    for trial in range(cfg.trials):
        seed = cfg.base_seed + trial
        w = generate_weights(cfg.graph_spec(seed))
        truth = f"truth_t{trial:03d}.edges"
        write_edge_list(out / truth, w, n)
        entry = {"trial": trial, "graph_seed": seed, "truth": truth, "data": []}
        for j, ratio in enumerate(cfg.m_over_n):
            m = sample_count(ratio, n)
            dseed = data_seed(seed, j)
            tag = f"t{trial:03d}_r{ratio_tag(ratio)}"
            if cfg.write_data:
                X = sample_gmrf(apply_L(w), m, dseed)
                write_matrix(out / f"data_{tag}.csv", X)
                S = sample_covariance(X, center=cfg.center)
            else:
                S = gmrf_covariance(apply_L(w), m, dseed)
            write_matrix(out / f"cov_{tag}.csv", S)
            entry["data"].append({
                "m_over_n": ratio, "m": m, "data_seed": dseed,
                "data": f"data_{tag}.csv" if cfg.write_data else None,
                "covariance": f"cov_{tag}.csv"})
        runs.append(entry)
    doc = manifest("synth", cfg, family=family_to_dict(family), runs=runs)
    write_json(out / "manifest.json", doc)
    return doc


# --- learn -----------------------------------------------------------------

def run_learn(S, params: SolverParams, out, *, preset: str | None = None,
              init_seed: int | None = None, threshold: float = 1e-8) -> dict:
    out = ensure_dir(out)
    n = S.shape[0]
    init = None
    if init_seed is not None:
        rng = np.random.default_rng(init_seed)
        init = (rng.uniform(0.0, 2.0 / n, num_edges(n)), np.zeros((n, n)))
    report = solve(S, params, init)
    w = report.weights(threshold)
    write_edge_list(out / "learned.edges", w, n)
    write_table(out / "trace.csv", ["iteration", "objective", "rel_change"],
                ({"iteration": k, "objective": obj, "rel_change": rc}
                 for k, (obj, rc) in enumerate(
                     zip(report.objective_trace, report.rel_change_trace), 1)))
    summary = {
        "n": n, "preset": preset, "params": params_to_dict(params),
        "init_seed": init_seed, "verdict": report.verdict.status.value,
        "violations": list(report.verdict.violations),
        "iterations": report.iterations, "converged": report.converged,
        "rel_change": report.state.rel_change, "objective": report.state.objective,
        "nnz": int(np.count_nonzero(w)), "export_threshold": threshold,
        "wall_time": report.wall_time, "code_version": __version__,
    }
    write_json(out / "report.json", summary)
    return summary


# --- eval ------------------------------------------------------------------

def run_eval(estimate, truth, support_tol: float, table=None) -> dict:
    theta_hat = read_laplacian(estimate)
    theta_star = read_laplacian(truth)
    if theta_hat.shape != theta_star.shape:
        raise FormatError(
            f"node counts differ: {theta_hat.shape[0]} vs {theta_star.shape[0]}")
    res = f_score(theta_hat, theta_star, support_tol)
    row = {"estimate": str(estimate), "truth": str(truth), "n": theta_star.shape[0],
           "support_tol": support_tol, "RE": res.relative_error, "FS": res.f_score,
           "tp": res.tp, "fp": res.fp, "fn": res.fn, "tn": res.tn,
           "nnz_estimate": res.nnz_estimate, "nnz_truth": res.nnz_truth}
    if table is not None:
        ResultsTable(table, EVAL_COLUMNS).append(row)
    return row


# --- sweep -----------------------------------------------------------------

def sweep_points(cfg: ExperimentConfig) -> list[dict]:
    """Parameter dicts for the cross product of the ``sweep`` grid."""
    base = solver_values(cfg.solver)
    grid = {k: list(v) for k, v in cfg.sweep.items()
            if k in ("lambda1", "lambda2", "gamma_inv")}
    tie = bool(cfg.sweep.get("tie_lambda2", False))
    keys = sorted(grid)
    points = []
    for combo in product(*(grid[k] for k in keys)):
        values = dict(base)
        values.update({k: float(v) for k, v in zip(keys, combo)})
        if tie:
            values["lambda2"] = values["gamma_inv"] * values["lambda1"]
        points.append(values)
    return points


def run_job(job: dict) -> dict:
    """One (trial, m/n, parameter point) run; failures are reported in-row."""
    fam = job["family"]
    n = fam.n
    row = {"family": family_name(fam), "n": n, "m_over_n": job["ratio"],
           "trial": job["trial"], "seed": job["seed"],
           "lambda1": job["values"]["lambda1"], "lambda2": job["values"]["lambda2"],
           "gamma_inv": job["values"]["gamma_inv"], "error": ""}
    try:
        params = build_params(job["values"], n)
        w_true = generate_weights(GraphSpec(fam, job["weight_range"], job["seed"]))
        theta = apply_L(w_true)
        S = gmrf_covariance(theta, sample_count(job["ratio"], n), job["data_seed"])
        report = solve(S, params, record_objective=False)
        res = f_score(report.laplacian(job["support_tol"]), theta, job["support_tol"])
        row.update(iterations=report.iterations, converged=report.converged,
                   RE=res.relative_error, FS=res.f_score, nnz=res.nnz_estimate,
                   wall_time=round(report.wall_time, 6))
    except Exception as exc:  # recorded in the row, the sweep carries on
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def make_jobs(cfg: ExperimentConfig, points: list[dict], family=None) -> list[dict]:
    family = family or cfg.family
    ratios = [float(r) for r in cfg.sweep.get("m_over_n", cfg.m_over_n)]
    jobs = []
    for trial in range(cfg.trials):
        seed = cfg.base_seed + trial
        for j, ratio in enumerate(ratios):
            for values in points:
                jobs.append({"family": family, "weight_range": cfg.weight_range,
                             "trial": trial, "seed": seed, "ratio": ratio,
                             "data_seed": data_seed(seed, j), "values": values,
                             "support_tol": cfg.support_tol})
    return jobs


def map_jobs(fn, jobs, workers: int):
    if workers <= 1:
        return [fn(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, jobs))


def _quartiles(values):
    if not values:
        return math.nan, math.nan, math.nan
    q1, med, q3 = np.percentile(values, [25, 50, 75])
    return float(q1), float(med), float(q3)


def aggregate(rows: list[dict]) -> list[dict]:
    """Median and quartiles of RE, FS and nnz per curve point."""
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = (row["family"], row["n"], row["m_over_n"], row["lambda1"],
               row["lambda2"], row["gamma_inv"])
        groups.setdefault(key, []).append(row)
    out = []
    for key, members in groups.items():
        ok = [r for r in members if not r["error"]]
        re_q = _quartiles([r["RE"] for r in ok])
        fs_q = _quartiles([r["FS"] for r in ok])
        nnz = _quartiles([r["nnz"] for r in ok])[1]
        out.append(dict(zip(AGGREGATE_COLUMNS[:6], key), runs=len(members),
                        failed=len(members) - len(ok),
                        RE_median=re_q[1], RE_q1=re_q[0], RE_q3=re_q[2],
                        FS_median=fs_q[1], FS_q1=fs_q[0], FS_q3=fs_q[2],
                        nnz_median=nnz))
    return out


def run_sweep(cfg: ExperimentConfig, out, workers: int = 1) -> list[dict]:
    out = ensure_dir(out)
    points = sweep_points(cfg)
    jobs = make_jobs(cfg, points)
    rows = map_jobs(run_job, jobs, workers)
    results = ResultsTable(out / "results.csv", RESULT_COLUMNS)
    results.extend(rows)
    write_table(out / "aggregate.csv", AGGREGATE_COLUMNS, aggregate(rows))
    write_json(out / "manifest.json", manifest(
        "sweep", cfg, points=points, workers=workers,
        seeds=[{"trial": j["trial"], "seed": j["seed"], "m_over_n": j["ratio"],
                "data_seed": j["data_seed"]} for j in jobs if j["values"] is points[0]]))
    failed = sum(1 for r in rows if r["error"])
    if failed:
        log.warning("%d of %d runs failed; see the error column", failed, len(rows))
    return rows


# --- ingest ----------------------------------------------------------------

def load_binary_matrix(path) -> np.ndarray:
    text = Path(path).read_text()
    delimiter = "," if "," in text.splitlines()[0] else None
    try:
        X = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    if not np.all((X == 0) | (X == 1)):
        raise FormatError(f"{path}: entries must be 0 or 1")
    return X


def categorical_covariance(X, center: bool = True, normalize: bool = False) -> np.ndarray:
    """Node covariance from a binary ``questions x items`` matrix.

    Items are nodes and questions are samples. With ``center`` each
    question's answers are centred across items. Questions with the same
    answer for every item are dropped with a warning.
    """
    X = np.asarray(X, dtype=float)
    constant = np.all(X == X[:, :1], axis=1)
    if np.any(constant):
        warnings.warn(f"dropping {int(constant.sum())} constant rows", stacklevel=2)
        X = X[~constant]
    if X.shape[0] == 0:
        raise FormatError("no informative rows left after dropping constant rows")
    if center:
        X = X - X.mean(axis=1, keepdims=True)
    S = sample_covariance(X)
    if normalize:
        d = np.sqrt(np.diag(S))
        d[d == 0] = 1.0
        S = S / np.outer(d, d)
    return S


# --- bench -----------------------------------------------------------------

def run_bench(cfg: ExperimentConfig, out) -> list[dict]:
    """Wall time per node count on modular graphs (15 repetitions by default)."""
    out = ensure_dir(out)
    bench = dict(cfg.bench)
    sizes = [int(v) for v in bench.get("n", [160, 240, 320, 400])]
    ratio = float(bench.get("m_over_n", 5000))
    graph = dict(cfg.graph or {"family": "modular"})
    section = cfg.solver or {"preset": "convex-default", "auto_sigma": True}
    values = solver_values(section)
    runs_table = out / "bench_runs.csv"
    if runs_table.exists():
        runs_table.unlink()
    runs = ResultsTable(runs_table, BENCH_RUN_COLUMNS)
    summary = []
    for n in sizes:
        fam_dict = {**graph, "n": n}
        fam_dict.setdefault("family", "modular")
        family = family_from_dict(fam_dict)
        params = build_params(values, n)
        times, iters, conv = [], [], 0
        for trial in range(cfg.trials):
            seed = cfg.base_seed + trial
            theta = apply_L(generate_weights(GraphSpec(family, cfg.weight_range, seed)))
            m = sample_count(ratio, n)
            S = gmrf_covariance(theta, m, data_seed(seed, 0))
            report = solve(S, params, record_objective=False)
            runs.append({"n": n, "trial": trial, "seed": seed, "m": m,
                         "iterations": report.iterations, "converged": report.converged,
                         "wall_time": report.wall_time})
            times.append(report.wall_time)
            iters.append(report.iterations)
            conv += report.converged
        summary.append({"n": n, "trials": cfg.trials, "m_over_n": ratio,
                        "mean_wall_time": float(np.mean(times)),
                        "mean_iterations": float(np.mean(iters)), "converged_runs": conv})
    write_table(out / "bench.csv", BENCH_COLUMNS, summary)
    write_json(out / "manifest.json", manifest("bench", cfg, sizes=sizes, m_over_n=ratio,
                                               solver=values))
    return summary

