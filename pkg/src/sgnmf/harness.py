"""Multi-seed experiments, alpha/lambda grid search, reports and synthetic graphs."""

from __future__ import annotations

import configparser
import csv
import dataclasses
import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .factorization import DEFAULT_ALPHA, DEFAULT_LAMBDA, NumericalError, SolverConfig, Variant, solve
from .graph import GroundTruth, SparseAdjacency, load_edge_list, load_ground_truth
from .metrics import aggregate, assign_communities, modularity, nmi

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1

ALPHA_GRID = (0.0, 2.0**-10, 2.0**-8, 2.0**-6, 2.0**-4, 2.0**-2, 1.0, 2.0)
LAMBDA_GRID = (0.0, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0)


@dataclass
class ExperimentSpec:
    dataset: str | None = None
    ground_truth: str | None = None
    largest_component: bool = False
    variant: str = "sgnmf"
    k: int = 2
    alpha: float = DEFAULT_ALPHA
    lam: float = DEFAULT_LAMBDA
    max_iters: int = 200
    tol: float = 0.1
    init_scale: float = 0.05
    eps: float = 1e-12
    relative_tol: bool = False
    seed: int = 0
    repeats: int = 10
    seeds: list | None = None
    grid_alpha: list | None = None
    grid_lambda: list | None = None

    def __post_init__(self):
        self.variant = Variant(self.variant).value
        if self.seeds is not None:
            self.seeds = [int(s) for s in self.seeds]
            if not self.seeds:
                raise ValueError("seed list must be nonempty")
        elif self.repeats < 1:
            raise ValueError(f"repeats must be >= 1, got {self.repeats}")
        for name in ("grid_alpha", "grid_lambda"):
            grid = getattr(self, name)
            if grid is not None:
                if not grid:
                    raise ValueError(f"{name} must be nonempty when given")
                setattr(self, name, [float(v) for v in grid])

    @property
    def seed_list(self) -> list:
        """Explicit seeds, else ``seed, seed+1, ..., seed+repeats-1``."""
        if self.seeds is not None:
            return list(self.seeds)
        return [self.seed + i for i in range(self.repeats)]

    def cells(self) -> list:
        alphas = self.grid_alpha if self.grid_alpha is not None else [self.alpha]
        lams = self.grid_lambda if self.grid_lambda is not None else [self.lam]
        return [(a, l) for a in alphas for l in lams]

    def solver_config(self, alpha: float, lam: float, seed: int) -> SolverConfig:
        return SolverConfig(variant=Variant(self.variant), k=self.k, alpha=alpha, lam=lam, seed=seed,
                            max_iters=self.max_iters, tol=self.tol, init_scale=self.init_scale,
                            eps=self.eps, relative_tol=self.relative_tol)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["resolved_seeds"] = self.seed_list
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        names = {f.name for f in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in d.items() if k in names})


@dataclass
class ExperimentReport:
    config: dict
    records: list
    aggregates: list
    best: dict | None = None
    toolkit_version: str = __version__
    schema_version: int = SCHEMA_VERSION
    created: str = field(default_factory=lambda: time.strftime("%Y-%m-%dT%H:%M:%S%z"))

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        return cls(**d)

    @property
    def n_failed(self) -> int:
        return sum(r["status"] != "ok" for r in self.records)

    def cell(self, alpha: float, lam: float) -> dict:
        for agg in self.aggregates:
            if agg["alpha"] == alpha and agg["lambda"] == lam:
                return agg
        raise KeyError((alpha, lam))


def _run_one(job):
    adj, truth, config = job
    rec = {"seed": config.seed, "alpha": config.alpha, "lambda": config.lam}
    try:
        factors, trace = solve(adj, config)
    except NumericalError as exc:
        rec.update(status="failed", reason=str(exc), iterations=exc.iteration)
        return rec
    labels = assign_communities(factors.Y)
    rec.update(
        status="ok",
        reason=None,
        iterations=trace.iters_run,
        terminated_by=trace.terminated_by,
        final_objective=trace.objective[-1],
        kkt_residual=trace.kkt_residual,
        nmi=nmi(labels, truth.labels) if truth is not None else None,
        modularity=modularity(adj, labels),
        n_detected=int(len(np.unique(labels))),
        objective=list(trace.objective),
    )
    return rec


def _summarize(records: list, alpha: float, lam: float) -> dict:
    ok = [r for r in records if r["status"] == "ok"]
    out = {"alpha": alpha, "lambda": lam, "n_runs": len(records), "n_ok": len(ok),
           "n_failed": len(records) - len(ok), "modularity": None, "nmi": None, "final_objective": None}
    if ok:
        out["modularity"] = aggregate(r["modularity"] for r in ok).as_dict()
        out["final_objective"] = aggregate(r["final_objective"] for r in ok).as_dict()
        if ok[0]["nmi"] is not None:
            out["nmi"] = aggregate(r["nmi"] for r in ok).as_dict()
    return out


def load_inputs(spec: ExperimentSpec):
    if spec.dataset is None:
        raise ValueError("no dataset given")
    adj, nodes = load_edge_list(spec.dataset, largest_component=spec.largest_component)
    truth = load_ground_truth(spec.ground_truth, nodes) if spec.ground_truth else None
    return adj, truth


def run_experiment(spec: ExperimentSpec, graph: SparseAdjacency | None = None,
                   truth: GroundTruth | None = None, jobs: int = 1) -> ExperimentReport:
    """Run every (cell, seed) pair and aggregate per cell.

    ``graph``/``truth`` bypass file loading. Results are ordered by cell,
    then seed, independent of ``jobs``.
    """
    if graph is None:
        graph, truth = load_inputs(spec)
    cells = spec.cells()
    seeds = spec.seed_list
    work = [(graph, truth, spec.solver_config(a, l, s)) for a, l in cells for s in seeds]
    log.info("running %d solves (%d cells x %d seeds) with %d job(s)", len(work), len(cells), len(seeds), jobs)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_one, work))
    else:
        records = [_run_one(w) for w in work]
    for r in records:
        if r["status"] != "ok":
            log.warning("run seed=%s alpha=%s lambda=%s failed: %s", r["seed"], r["alpha"], r["lambda"], r["reason"])

    aggregates = []
    for c, (a, l) in enumerate(cells):
        aggregates.append(_summarize(records[c * len(seeds):(c + 1) * len(seeds)], a, l))
    return ExperimentReport(config=spec.to_dict(), records=records, aggregates=aggregates)


def select_best(aggregates: list) -> dict | None:
    """Cell with the highest mean modularity; ties go to smaller alpha, then smaller lambda."""
    scored = [a for a in aggregates if a["modularity"] is not None]
    if not scored:
        return None
    best = min(scored, key=lambda a: (-a["modularity"]["mean"], a["alpha"], a["lambda"]))
    return {"alpha": best["alpha"], "lambda": best["lambda"], "modularity": best["modularity"]["mean"],
            "nmi": best["nmi"]["mean"] if best["nmi"] else None}


def grid_search(spec: ExperimentSpec, graph=None, truth=None, jobs: int = 1) -> ExperimentReport:
    if spec.grid_alpha is None:
        spec = dataclasses.replace(spec, grid_alpha=list(ALPHA_GRID))
    if spec.grid_lambda is None:
        spec = dataclasses.replace(spec, grid_lambda=list(LAMBDA_GRID))
    report = run_experiment(spec, graph, truth, jobs)
    report.best = select_best(report.aggregates)
    return report


RUN_COLUMNS = ("run", "seed", "alpha", "lambda", "status", "iterations", "terminated_by",
               "final_objective", "kkt_residual", "nmi", "modularity", "n_detected", "reason")
AGG_COLUMNS = ("alpha", "lambda", "n_runs", "n_ok", "n_failed", "nmi_mean", "nmi_std",
               "modularity_mean", "modularity_std", "objective_mean", "objective_std")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def emit_report(report: ExperimentReport, out, fmt: str = "json") -> list:
    """Write the report under directory ``out``; returns the written paths.

    ``json`` writes ``report.json``. ``csv`` writes ``runs.csv``,
    ``aggregates.csv`` and one ``trajectories/run_NNN.csv`` per successful run.
    """
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    if fmt == "json":
        path = out / "report.json"
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=1)
        return [path]
    if fmt != "csv":
        raise ValueError(f"unknown report format {fmt!r}")

    path = out / "runs.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(RUN_COLUMNS)
        for i, r in enumerate(report.records):
            w.writerow([_fmt(i)] + [_fmt(r.get(c)) for c in RUN_COLUMNS[1:]])
    written.append(path)

    path = out / "aggregates.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(AGG_COLUMNS)
        for a in report.aggregates:
            row = [a["alpha"], a["lambda"], a["n_runs"], a["n_ok"], a["n_failed"]]
            for key in ("nmi", "modularity", "final_objective"):
                row += [a[key]["mean"], a[key]["std"]] if a[key] else [None, None]
            w.writerow([_fmt(v) for v in row])
    written.append(path)

    tdir = out / "trajectories"
    tdir.mkdir(exist_ok=True)
    for i, r in enumerate(report.records):
        if r["status"] != "ok":
            continue
        path = tdir / f"run_{i:03d}.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(("iteration", "objective"))
            for t, v in enumerate(r["objective"]):
                w.writerow((t, repr(float(v))))
        written.append(path)
    return written


def load_report(path) -> ExperimentReport:
    with open(path, encoding="utf-8") as fh:
        return ExperimentReport.from_dict(json.load(fh))


def make_planted_partition(n: int, k: int, p_in: float, p_out: float, seed: int = 0):
    """Planted-partition graph with ``k`` contiguous blocks.

    Block sizes differ by at most one (the first ``n % k`` blocks get the
    extra node). Each pair ``i < j`` is an edge with probability ``p_in``
    inside a block and ``p_out`` across blocks.
    """
    if not 0 <= p_out < p_in <= 1:
        raise ValueError(f"need 0 <= p_out < p_in <= 1, got p_in={p_in}, p_out={p_out}")
    if not 1 <= k <= n:
        raise ValueError(f"need 1 <= k <= n, got k={k}, n={n}")
    sizes = [n // k + (b < n % k) for b in range(k)]
    labels = np.repeat(np.arange(k), sizes)
    rng = np.random.Generator(np.random.PCG64(seed))
    rows, cols = [], []
    for i in range(n - 1):
        rest = labels[i + 1:]
        prob = np.where(rest == labels[i], p_in, p_out)
        js = i + 1 + np.flatnonzero(rng.random(len(rest)) < prob)
        rows.append(np.full(len(js), i))
        cols.append(js)
    rows = np.concatenate(rows) if rows else np.empty(0, np.int64)
    cols = np.concatenate(cols) if cols else np.empty(0, np.int64)
    return SparseAdjacency.from_edges(n, rows, cols), GroundTruth(labels)


def parse_number(text: str) -> float:
    """Float parser that also accepts powers written as ``2^-8``."""
    text = text.strip()
    if "^" in text:
        base, exp = text.split("^", 1)
        return float(base) ** float(exp)
    return float(text)


def parse_number_list(text: str) -> list:
    return [parse_number(t) for t in text.replace(",", " ").split()]


_SECTION_KEYS = {
    "data": {"dataset": str, "ground_truth": str, "largest_component": "bool"},
    "solver": {"variant": str, "k": int, "alpha": parse_number, "lambda": parse_number,
               "max_iters": int, "tol": parse_number, "init_scale": parse_number, "eps": parse_number,
               "relative_tol": "bool"},
    "experiment": {"seed": int, "repeats": int, "seeds": "ints"},
    "grid": {"alpha": "floats", "lambda": "floats"},
}


def read_config(path) -> dict:
    """Read an INI-style experiment config into ExperimentSpec keyword arguments.

    Sections: ``[data]``, ``[solver]``, ``[experiment]``, ``[grid]``. Paths
    are resolved relative to the config file.
    """
    parser = configparser.ConfigParser()
    with open(path, encoding="utf-8") as fh:
        parser.read_file(fh)
    out = {}
    for section in parser.sections():
        if section not in _SECTION_KEYS:
            raise ValueError(f"{path}: unknown section [{section}]")
        keys = _SECTION_KEYS[section]
        for key in parser[section]:
            if key not in keys:
                raise ValueError(f"{path}: unknown key {key!r} in [{section}]")
            conv = keys[key]
            if conv == "bool":
                value = parser[section].getboolean(key)
            elif conv == "ints":
                value = [int(v) for v in parser[section][key].replace(",", " ").split()]
            elif conv == "floats":
                value = parse_number_list(parser[section][key])
            else:
                value = conv(parser[section][key])
            name = {"lambda": "lam"}.get(key, key)
            if section == "grid":
                name = "grid_" + key
            if section == "data" and conv is str:
                value = str((Path(path).parent / value))
            out[name] = value
    return out
