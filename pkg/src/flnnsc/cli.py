"""Batch experiment runner: single runs, repeats, grid sweeps, affinity
export, and fit-time benchmarks.

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 IO failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .data import (
    CsvFormatError,
    Dataset,
    SyntheticSpec,
    generate_synthetic,
    load_csv,
    pca_reduce,
    scale_to_unit,
)
from .graph import WEIGHT_KINDS, knn_similarity
from .linalg import NumericalError
from .metrics import ari, clustering_accuracy, nmi, pairwise_f1
from .models import CcscConfig, FlnnscConfig, fit_ccsc, fit_flnnsc, fit_linear_smr, fit_lsr
from .spectral import AFFINITY_KINDS, affinity_from_z, spectral_cluster

__all__ = [
    "RunConfig",
    "RunReport",
    "StageError",
    "run_single",
    "run_repeated",
    "grid_sweep",
    "export_affinity",
    "bench_time",
    "write_pgm",
    "read_pgm",
    "load_report",
    "load_table",
    "main",
    "entry_point",
]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_NUMERIC = 2
EXIT_IO = 3

METHODS = ("flnnsc", "ccsc", "lsr", "smr_linear")


class StageError(RuntimeError):
    """Wraps a pipeline failure with the name of the stage that raised."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


@dataclass(frozen=True)
class RunConfig:
    """Everything one pipeline execution needs."""

    method: str = "flnnsc"
    data_path: str | None = None
    synthetic: SyntheticSpec | None = None
    has_labels: bool = True
    header: bool = False
    alpha: float = 1.0
    beta: float = 0.1
    lam: float | None = None
    mu: float = 1e-2
    mu_decay: float = 0.85
    inner_epochs: int = 1
    knn: int = 4
    weights: str = "binary"
    sigma: float | None = None
    affinity: str = "grouping"
    gamma: float = 2.0
    n_clusters: int = 3
    pca_dim: int | None = None
    seed: int = 0
    tol: float = 1e-6
    max_iters: int = 100
    out_dir: str | None = None

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}, expected one of {METHODS}")
        if self.lam is not None and self.method != "ccsc":
            raise ValueError("--lambda is only accepted for method 'ccsc'")
        if self.n_clusters < 2:
            raise ValueError(f"n_clusters must be >= 2, got {self.n_clusters}")
        if (self.data_path is None) == (self.synthetic is None):
            raise ValueError("exactly one of a dataset path or a synthetic spec is required")
        if self.weights not in WEIGHT_KINDS:
            raise ValueError(f"unknown weights {self.weights!r}")
        if self.affinity not in AFFINITY_KINDS:
            raise ValueError(f"unknown affinity {self.affinity!r}")


@dataclass
class RunReport:
    """Metrics, convergence trace, and echo of one pipeline run."""

    method: str
    config: dict
    metrics: dict | None
    trace: dict
    labels_pred: list
    labels_true: list | None
    n_samples: int
    n_features_raw: int
    n_features_used: int
    pca_variance: float | None
    fit_seconds: float
    total_seconds: float
    timing_note: str = "fit_seconds covers the representation fit only (no IO, graph, or metrics)"

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _stage(name):
    class _Ctx:
        def __enter__(self):
            return self

        def __exit__(self, exc_type, exc, tb):
            if exc is not None and not isinstance(exc, StageError):
                raise StageError(name, exc) from exc
            return False

    return _Ctx()


def _load_stage(cfg: RunConfig) -> Dataset:
    if cfg.data_path is not None:
        return load_csv(cfg.data_path, has_labels=cfg.has_labels, skip_header=cfg.header)
    return generate_synthetic(cfg.synthetic)


def _prepare_stage(cfg: RunConfig, dataset: Dataset):
    x = scale_to_unit(dataset.x)
    pca_variance = None
    if cfg.pca_dim is not None:
        x, pca_variance = pca_reduce(x, cfg.pca_dim)
        # PCA output is unbounded; the expansion needs [-1, 1] again.
        x = scale_to_unit(x)
    return x, pca_variance


def _fit_stage(cfg: RunConfig, x, graph):
    base = FlnnscConfig(
        alpha=cfg.alpha,
        beta=cfg.beta,
        mu=cfg.mu,
        max_outer_iters=cfg.max_iters,
        inner_epochs=cfg.inner_epochs,
        tol=cfg.tol,
        seed=cfg.seed,
        mu_decay=cfg.mu_decay,
    )
    if cfg.method == "flnnsc":
        rep, _, trace = fit_flnnsc(x, graph, base)
    elif cfg.method == "ccsc":
        lam = 0.5 if cfg.lam is None else cfg.lam
        rep, _, trace = fit_ccsc(x, graph, CcscConfig(base=base, lam=lam))
    elif cfg.method == "lsr":
        rep, trace = fit_lsr(x, cfg.alpha), None
    else:
        rep, trace = fit_linear_smr(x, graph, cfg.alpha), None
    return rep, trace


def _trace_dict(trace) -> dict:
    if trace is None:
        return {"objective": [], "z_delta": [], "seconds": [], "z_residual": []}
    return {
        "objective": list(trace.objective),
        "z_delta": list(trace.z_delta),
        "seconds": list(trace.seconds),
        "z_residual": list(trace.z_residual),
        "zstep_obj_before": list(trace.zstep_obj_before),
        "zstep_obj_after": list(trace.zstep_obj_after),
    }


def compute_metrics(truth, pred) -> dict:
    return {
        "ca": clustering_accuracy(truth, pred),
        "nmi": nmi(truth, pred),
        "ari": ari(truth, pred),
        "f1": pairwise_f1(truth, pred),
    }


def _config_echo(cfg: RunConfig) -> dict:
    echo = dataclasses.asdict(cfg)
    if cfg.synthetic is not None:
        echo["synthetic"] = dataclasses.asdict(cfg.synthetic)
    return echo


def run_single(cfg: RunConfig, _artifacts: dict | None = None) -> RunReport:
    """Execute load -> scale -> (pca) -> graph -> fit -> affinity ->
    spectral clustering -> metrics, then write report.json and trace.csv
    when an output directory is configured."""
    t_start = time.perf_counter()
    with _stage("load"):
        dataset = _load_stage(cfg)
    with _stage("preprocess"):
        x, pca_variance = _prepare_stage(cfg, dataset)
    with _stage("graph"):
        graph = knn_similarity(x, cfg.knn, cfg.weights, cfg.sigma)
    with _stage("fit"):
        t_fit = time.perf_counter()
        rep, trace = _fit_stage(cfg, x, graph)
        fit_seconds = time.perf_counter() - t_fit
    with _stage("affinity"):
        affinity = affinity_from_z(rep.z, cfg.affinity, cfg.gamma)
    with _stage("cluster"):
        pred = spectral_cluster(affinity, cfg.n_clusters, cfg.seed)
    with _stage("metrics"):
        metrics = None
        if dataset.labels is not None:
            metrics = compute_metrics(dataset.labels, pred)

    report = RunReport(
        method=cfg.method,
        config=_config_echo(cfg),
        metrics=metrics,
        trace=_trace_dict(trace),
        labels_pred=[int(v) for v in pred],
        labels_true=None if dataset.labels is None else [int(v) for v in dataset.labels],
        n_samples=dataset.n_samples,
        n_features_raw=dataset.n_features,
        n_features_used=x.shape[0],
        pca_variance=pca_variance,
        fit_seconds=fit_seconds,
        total_seconds=time.perf_counter() - t_start,
    )
    if _artifacts is not None:
        _artifacts.update(
            dataset=dataset, x=x, graph=graph, representation=rep, affinity=affinity, pred=pred
        )
    if cfg.out_dir is not None:
        with _stage("write"):
            _write_report(cfg.out_dir, report)
    return report


def _atomic_write(path: str, payload: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def _write_report(out_dir: str, report: RunReport) -> None:
    os.makedirs(out_dir, exist_ok=True)
    _atomic_write(os.path.join(out_dir, "report.json"), json.dumps(report.to_dict(), indent=2))
    tr = report.trace
    lines = ["iteration,objective,z_delta,seconds,z_residual"]
    for i in range(len(tr["z_delta"])):
        lines.append(
            f"{i + 1},{tr['objective'][i]:.17g},{tr['z_delta'][i]:.17g},"
            f"{tr['seconds'][i]:.17g},{tr['z_residual'][i]:.17g}"
        )
    _atomic_write(os.path.join(out_dir, "trace.csv"), "\n".join(lines) + "\n")


def run_repeated(cfg: RunConfig, times: int) -> dict:
    """Run the pipeline ``times`` times with seeds ``cfg.seed + i`` and
    aggregate mean/std per metric."""
    if times < 1:
        raise ValueError(f"times must be >= 1, got {times}")
    reports = []
    for i in range(times):
        sub = replace(
            cfg,
            seed=cfg.seed + i,
            out_dir=None if cfg.out_dir is None else os.path.join(cfg.out_dir, f"run_{i:03d}"),
        )
        reports.append(run_single(sub))

    aggregate = {
        "method": cfg.method,
        "times": times,
        "base_seed": cfg.seed,
        "runs": [r.to_dict() for r in reports],
        "mean_fit_seconds": float(np.mean([r.fit_seconds for r in reports])),
    }
    if all(r.metrics is not None for r in reports):
        summary = {}
        for key in ("ca", "nmi", "ari", "f1"):
            vals = np.array([r.metrics[key] for r in reports])
            summary[key] = {"mean": float(vals.mean()), "std": float(vals.std())}
        aggregate["metrics"] = summary
    else:
        aggregate["metrics"] = None
    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        _atomic_write(os.path.join(cfg.out_dir, "aggregate.json"), json.dumps(aggregate, indent=2))
    return aggregate


def _sweep_point(args):
    cfg, a, b, lam, times = args
    point = replace(cfg, alpha=a, beta=b, lam=lam)
    row = {"alpha": a, "beta": b, "lambda": lam, "error": ""}
    try:
        agg = run_repeated(point, times)
        if agg["metrics"] is None:
            raise ValueError("dataset has no ground-truth labels; sweep needs metrics")
        for key in ("ca", "nmi", "ari", "f1"):
            row[key] = agg["metrics"][key]["mean"]
        row["seconds"] = agg["mean_fit_seconds"]
    except Exception as exc:  # failures become rows, the sweep continues
        row.update(ca=None, nmi=None, ari=None, f1=None, seconds=None)
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _job_limit(requested: int) -> int:
    cap = os.environ.get("FLNNSC_THREADS")
    if cap:
        try:
            requested = min(requested, max(1, int(cap)))
        except ValueError:
            warnings.warn(f"ignoring non-integer FLNNSC_THREADS={cap!r}")
    return max(1, requested)


def grid_sweep(
    cfg: RunConfig,
    alpha_grid,
    beta_grid,
    lambda_grid=None,
    times: int = 20,
    jobs: int = 1,
) -> list[dict]:
    """One ``run_repeated`` per grid point; returns rows and writes
    ``sweep.csv`` (column ``best`` marks the highest mean accuracy)."""
    alpha_grid = list(alpha_grid)
    beta_grid = list(beta_grid)
    if not alpha_grid or not beta_grid:
        raise ValueError("grids must be non-empty")
    if cfg.method == "ccsc":
        lambdas = list(lambda_grid) if lambda_grid else [0.5 if cfg.lam is None else cfg.lam]
    else:
        if lambda_grid:
            raise ValueError("a lambda grid is only accepted for method 'ccsc'")
        lambdas = [None]

    tasks = []
    for a in alpha_grid:
        for b in beta_grid:
            for lam in lambdas:
                sub = cfg
                if cfg.out_dir is not None:
                    tag = f"a{a:g}_b{b:g}" + ("" if lam is None else f"_l{lam:g}")
                    sub = replace(cfg, out_dir=os.path.join(cfg.out_dir, f"point_{tag}"))
                tasks.append((sub, a, b, lam, times))

    jobs = _job_limit(jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_point, tasks))
    else:
        rows = [_sweep_point(t) for t in tasks]

    scored = [r for r in rows if r["ca"] is not None]
    best_idx = rows.index(max(scored, key=lambda r: r["ca"])) if scored else -1
    for i, row in enumerate(rows):
        row["best"] = 1 if i == best_idx else 0

    if cfg.out_dir is not None:
        os.makedirs(cfg.out_dir, exist_ok=True)
        header = "alpha,beta,lambda,ca,nmi,ari,f1,seconds,best,error"
        lines = [header]
        for r in rows:
            lines.append(
                ",".join(
                    [
                        f"{r['alpha']:.17g}",
                        f"{r['beta']:.17g}",
                        "" if r["lambda"] is None else f"{r['lambda']:.17g}",
                        *(
                            "" if r[k] is None else f"{r[k]:.17g}"
                            for k in ("ca", "nmi", "ari", "f1", "seconds")
                        ),
                        str(r["best"]),
                        '"' + r["error"].replace('"', "'") + '"' if r["error"] else "",
                    ]
                )
            )
        _atomic_write(os.path.join(cfg.out_dir, "sweep.csv"), "\n".join(lines) + "\n")
    return rows


def write_pgm(path: str, image: np.ndarray) -> None:
    """8-bit binary PGM."""
    img = np.asarray(image, dtype=np.uint8)
    if img.ndim != 2:
        raise ValueError(f"image must be 2-D, got shape {img.shape}")
    header = f"P5\n{img.shape[1]} {img.shape[0]}\n255\n".encode("ascii")
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(header + img.tobytes())
    os.replace(tmp, path)


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        blob = fh.read()
    parts = blob.split(b"\n", 3)
    if len(parts) < 4 or parts[0] != b"P5":
        raise ValueError(f"{path}: not a binary 8-bit PGM")
    width, height = (int(v) for v in parts[1].split())
    maxval = int(parts[2])
    if maxval != 255:
        raise ValueError(f"{path}: unsupported max value {maxval}")
    data = np.frombuffer(parts[3][: width * height], dtype=np.uint8)
    return data.reshape((height, width))


def export_affinity(cfg: RunConfig) -> dict:
    """Run the pipeline and export the affinity matrix as CSV plus a
    min-max normalized PGM heat map.

    When ground-truth labels exist, samples are reordered by label so
    block structure is visible, and the off-block mass fraction is
    reported.
    """
    if cfg.out_dir is None:
        raise ValueError("export_affinity needs an output directory")
    artifacts: dict = {}
    report = run_single(replace(cfg, out_dir=None), _artifacts=artifacts)
    affinity = artifacts["affinity"]
    truth = artifacts["dataset"].labels

    order = np.arange(affinity.shape[0])
    if truth is not None:
        order = np.argsort(truth, kind="stable")
    ordered = affinity[np.ix_(order, order)]

    os.makedirs(cfg.out_dir, exist_ok=True)
    csv_path = os.path.join(cfg.out_dir, "affinity.csv")
    _atomic_write(
        csv_path,
        "\n".join(",".join(f"{v:.17g}" for v in row) for row in ordered) + "\n",
    )

    peak = ordered.max()
    if peak <= 0:
        warnings.warn("affinity matrix is identically zero; PGM will be uniform")
        image = np.zeros_like(ordered, dtype=np.uint8)
    else:
        lo = ordered.min()
        image = np.round(255.0 * (ordered - lo) / (peak - lo)).astype(np.uint8)
    pgm_path = os.path.join(cfg.out_dir, "affinity.pgm")
    write_pgm(pgm_path, image)

    off_block = None
    if truth is not None and ordered.sum() > 0:
        sorted_truth = np.asarray(truth)[order]
        same = sorted_truth[:, None] == sorted_truth[None, :]
        off_block = float(ordered[~same].sum() / ordered.sum())

    meta = {
        "report": report.to_dict(),
        "ordered_by_labels": truth is not None,
        "off_block_mass": off_block,
        "csv": csv_path,
        "pgm": pgm_path,
    }
    _atomic_write(os.path.join(cfg.out_dir, "affinity.json"), json.dumps(meta, indent=2))
    return meta


def bench_time(cfgs: list[RunConfig], runs: int = 3) -> list[dict]:
    """Median-of-``runs`` wall-clock of the representation fit alone
    (data loading, graph construction, and clustering excluded)."""
    if not cfgs:
        raise ValueError("bench_time needs at least one config")
    rows = []
    for cfg in cfgs:
        with _stage("load"):
            dataset = _load_stage(cfg)
        with _stage("preprocess"):
            x, _ = _prepare_stage(cfg, dataset)
        with _stage("graph"):
            graph = knn_similarity(x, cfg.knn, cfg.weights, cfg.sigma)
        times = []
        for _ in range(runs):
            t0 = time.perf_counter()
            with _stage("fit"):
                _fit_stage(cfg, x, graph)
            times.append(time.perf_counter() - t0)
        rows.append(
            {
                "method": cfg.method,
                "n_samples": dataset.n_samples,
                "n_clusters": cfg.n_clusters,
                "seconds_median": float(np.median(times)),
                "seconds_runs": times,
                "timed_region": "fit only",
            }
        )
    out_dir = next((c.out_dir for c in cfgs if c.out_dir), None)
    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        lines = ["method,n_samples,n_clusters,seconds_median," + ",".join(
            f"seconds_run{i + 1}" for i in range(runs)
        )]
        for r in rows:
            lines.append(
                f"{r['method']},{r['n_samples']},{r['n_clusters']},{r['seconds_median']:.17g},"
                + ",".join(f"{t:.17g}" for t in r["seconds_runs"])
            )
        _atomic_write(os.path.join(out_dir, "bench.csv"), "\n".join(lines) + "\n")
    return rows


def load_report(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def load_table(path: str) -> list[dict]:
    """Parse a header CSV written by this module back into dict rows."""
    import csv as _csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        return [dict(row) for row in _csv.DictReader(fh)]


# ---------------------------------------------------------------------------
# argument parsing


class _UsageError(ValueError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit code 1 instead of argparse's 2
        raise _UsageError(message)


def _parse_grid(text: str) -> list[float]:
    if text.startswith("logspace:"):
        try:
            _, lo, hi, steps = text.split(":")
            return [float(v) for v in np.logspace(float(lo), float(hi), int(steps))]
        except ValueError:
            raise _UsageError(f"bad logspace grid {text!r}, expected logspace:lo:hi:steps") from None
    try:
        return [float(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise _UsageError(f"bad grid {text!r}, expected a comma list or logspace:lo:hi:steps") from None


_SYNTH_KEYS = {
    "clusters": ("clusters", int),
    "per": ("points_per_cluster", int),
    "dim": ("ambient_dim", int),
    "sub": ("subspace_dim", int),
    "warp": ("warp_strength", float),
    "noise": ("noise_sigma", float),
    "seed": ("seed", int),
}


def _parse_synthetic(text: str) -> SyntheticSpec:
    kwargs = {}
    for item in text.split(","):
        if not item:
            continue
        if "=" not in item:
            raise _UsageError(f"bad synthetic field {item!r}, expected key=value")
        key, value = item.split("=", 1)
        if key not in _SYNTH_KEYS:
            raise _UsageError(
                f"unknown synthetic key {key!r}, expected one of {sorted(_SYNTH_KEYS)}"
            )
        name, cast = _SYNTH_KEYS[key]
        try:
            kwargs[name] = cast(value)
        except ValueError:
            raise _UsageError(f"bad value for synthetic key {key!r}: {value!r}") from None
    if kwargs.get("warp_strength", SyntheticSpec.warp_strength) == 0.0:
        kwargs["nonlinearity"] = "none"
    try:
        return SyntheticSpec(**kwargs)
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--method", default="flnnsc", choices=METHODS)
    p.add_argument("--data", help="CSV file, one sample per row")
    p.add_argument("--synthetic", help="key=value list, e.g. clusters=3,per=50,dim=10,sub=2,warp=0.5,noise=0.01,seed=0")
    p.add_argument("--no-labels", action="store_true", help="CSV has no trailing label column")
    p.add_argument("--header", action="store_true", help="skip one CSV header line")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.1)
    p.add_argument("--lambda", dest="lam", type=float, default=None)
    p.add_argument("--mu", type=float, default=1e-2)
    p.add_argument("--mu-decay", type=float, default=0.85)
    p.add_argument("--epochs", type=int, default=1, help="weight-update passes per outer iteration")
    p.add_argument("--knn", type=int, default=4)
    p.add_argument("--weights", default="binary", choices=WEIGHT_KINDS)
    p.add_argument("--sigma", type=float, default=None, help="heat-kernel bandwidth")
    p.add_argument("--affinity", default="grouping", choices=AFFINITY_KINDS)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--clusters", type=int, default=3)
    p.add_argument("--pca-dim", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--out", default="runs", help="output directory")


def _config_from_args(args) -> RunConfig:
    synthetic = _parse_synthetic(args.synthetic) if args.synthetic else None
    try:
        return RunConfig(
            method=args.method,
            data_path=args.data,
            synthetic=synthetic,
            has_labels=not args.no_labels,
            header=args.header,
            alpha=args.alpha,
            beta=args.beta,
            lam=args.lam,
            mu=args.mu,
            mu_decay=args.mu_decay,
            inner_epochs=args.epochs,
            knn=args.knn,
            weights=args.weights,
            sigma=args.sigma,
            affinity=args.affinity,
            gamma=args.gamma,
            n_clusters=args.clusters,
            pca_dim=args.pca_dim,
            seed=args.seed,
            tol=args.tol,
            max_iters=args.max_iters,
            out_dir=args.out,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="flnnsc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single run or seeded repeats")
    _add_common(run)
    run.add_argument("--repeats", type=int, default=1)

    sweep = sub.add_parser("sweep", help="grid sweep over alpha/beta (and lambda for ccsc)")
    _add_common(sweep)
    sweep.add_argument("--alpha-grid", required=True, help="comma list or logspace:lo:hi:steps")
    sweep.add_argument("--beta-grid", required=True)
    sweep.add_argument("--lambda-grid", default=None)
    sweep.add_argument("--repeats", type=int, default=20)
    sweep.add_argument("--jobs", type=int, default=1)

    aff = sub.add_parser("affinity", help="export the affinity matrix as CSV + PGM")
    _add_common(aff)

    bench = sub.add_parser("bench", help="fit-time benchmark over synthetic sizes")
    _add_common(bench)
    bench.add_argument("--sizes", default="100,200,400", help="total sample counts")
    bench.add_argument("--methods", default="flnnsc,lsr", help="comma list of methods to time")
    bench.add_argument("--bench-runs", type=int, default=3)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command == "run":
            cfg = _config_from_args(args)
            if args.repeats == 1:
                report = run_single(cfg)
                if report.metrics:
                    line = " ".join(f"{k}={v:.4f}" for k, v in report.metrics.items())
                else:
                    line = "no ground-truth labels; metrics skipped"
                print(f"{cfg.method}: {line} ({report.fit_seconds:.3f}s fit)")
            else:
                agg = run_repeated(cfg, args.repeats)
                if agg["metrics"]:
                    line = " ".join(
                        f"{k}={v['mean']:.4f}+-{v['std']:.4f}" for k, v in agg["metrics"].items()
                    )
                else:
                    line = "no ground-truth labels; metrics skipped"
                print(f"{cfg.method} x{args.repeats}: {line}")
        elif args.command == "sweep":
            cfg = _config_from_args(args)
            rows = grid_sweep(
                cfg,
                _parse_grid(args.alpha_grid),
                _parse_grid(args.beta_grid),
                _parse_grid(args.lambda_grid) if args.lambda_grid else None,
                times=args.repeats,
                jobs=args.jobs,
            )
            best = next((r for r in rows if r["best"]), None)
            done = sum(1 for r in rows if not r["error"])
            print(f"sweep: {done}/{len(rows)} points finished")
            if best is not None:
                print(
                    f"best ca={best['ca']:.4f} at alpha={best['alpha']:g} "
                    f"beta={best['beta']:g}"
                    + ("" if best["lambda"] is None else f" lambda={best['lambda']:g}")
                )
        elif args.command == "affinity":
            cfg = _config_from_args(args)
            meta = export_affinity(cfg)
            mass = meta["off_block_mass"]
            print(
                f"affinity written to {meta['pgm']}"
                + ("" if mass is None else f" (off-block mass {mass:.4f})")
            )
        elif args.command == "bench":
            if args.data is None and args.synthetic is None:
                args.synthetic = "clusters=3"  # sizes fill in the rest
            base = _config_from_args(args)
            sizes = [int(v) for v in _parse_grid(args.sizes)]
            methods = [m.strip() for m in args.methods.split(",") if m.strip()]
            cfgs = []
            for m in methods:
                if m not in METHODS:
                    raise _UsageError(f"unknown method {m!r} in --methods")
                for n in sizes:
                    spec = base.synthetic or SyntheticSpec()
                    per = max(1, n // base.n_clusters)
                    spec = dataclasses.replace(spec, clusters=base.n_clusters, points_per_cluster=per)
                    cfgs.append(replace(base, method=m, lam=None, synthetic=spec, data_path=None))
            rows = bench_time(cfgs, runs=args.bench_runs)
            for r in rows:
                print(
                    f"{r['method']} n={r['n_samples']} k={r['n_clusters']}: "
                    f"median {r['seconds_median']:.4f}s"
                )
        return EXIT_OK
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        cause = exc.cause
        if isinstance(cause, (OSError, CsvFormatError)):
            return EXIT_IO
        if isinstance(cause, NumericalError):
            return EXIT_NUMERIC
        if isinstance(cause, ValueError):
            return EXIT_CONFIG
        return EXIT_NUMERIC
    except (CsvFormatError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


def entry_point() -> None:
    sys.exit(main())
