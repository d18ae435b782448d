"""Experiment drivers producing plot-ready tables.

Every random choice is seeded from ``ExperimentConfig.master_seed`` through
:func:`fuzzanon.seeds.derive_seed`:

* graph replicate: ``derive_seed(master, "graph", model, n, m, rep)``
* algorithm run: ``derive_seed(master, "run", model, m, rep, algo, phi, run)``
  (``"real"`` and the dataset key replace model and m for real networks)
* utility evaluation: ``derive_seed(master, "utility", dataset, algo, phi)``

All derived seeds are echoed into the metadata sidecar.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

from . import datasets
from .anonymity import (as_phi, format_phi, report_from_signatures, signatures,
                        uniqueness_reduction)
from .anonymization import TIMEOUT, BudgetPolicy, anonymize, apply_trace
from .generators import ModelSpec, generate
from .graph import Graph, read_edge_list
from .seeds import derive_seed
from .utility import UtilityConfig, utility_report

KINDS = ("model_anonymity_sweep", "model_anonymization", "real_anonymity",
         "real_anonymization", "utility_eval")

M_GRID_ANONYMITY = list(range(1, 11)) + list(range(15, 61, 5))
M_GRID_ANONYMIZATION = [1, 2, 4, 8, 16, 32]
PHIS_MODEL_SWEEP = ["0", "1%", "2%", "5%", "10%", "15%", "20%"]
PHIS_DEFAULT = ["0", "1%", "5%", "10%"]


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    models: list[str] = field(default_factory=lambda: ["ER", "BA", "WS"])
    n: int = 500
    m_grid: list[int] | None = None
    rewire_p: float = 0.05
    phis: list[str] | None = None
    ks: list[int] | None = None
    replicates: int | None = None
    runs: int = 5
    algorithms: list[str] = field(default_factory=lambda: ["es", "ua", "greedy"])
    budget_fraction: float = 0.05
    master_seed: int = 0
    out_dir: str = "results"
    datasets: list[str] = field(default_factory=list)
    data_dir: str | None = None
    timeout_secs: float | None = None
    threads: int = 1
    utility_runs: int = 20
    top_n: int = 100

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown experiment kind {self.kind!r}")
        sweep = self.kind == "model_anonymity_sweep"
        if self.m_grid is None:
            self.m_grid = list(M_GRID_ANONYMITY if sweep else M_GRID_ANONYMIZATION)
        if self.phis is None:
            self.phis = list(PHIS_MODEL_SWEEP if sweep else PHIS_DEFAULT)
        if self.ks is None:
            self.ks = [2, 8] if sweep else [2]
        if self.replicates is None:
            self.replicates = 10 if sweep else 5
        self.phis = [format_phi(as_phi(p)) for p in self.phis]
        self.models = [m.upper() for m in self.models]
        self.algorithms = [a.lower() for a in self.algorithms]
        if self.replicates < 1 or self.runs < 1:
            raise ConfigError("replicate counts must be >= 1")
        if any(k < 2 for k in self.ks):
            raise ConfigError("k values must be >= 2")
        if not self.m_grid or any(m < 1 for m in self.m_grid):
            raise ConfigError("invalid m grid")
        for a in self.algorithms:
            if a not in ("es", "ua", "greedy"):
                raise ConfigError(f"unknown algorithm {a!r}")
        for model in self.models:
            for m in self.m_grid:
                ModelSpec(model, self.n, m, self.rewire_p)  # raises on bad combos
        BudgetPolicy(self.budget_fraction)

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentConfig:
        known = {f for f in cls.__dataclass_fields__}
        extra = set(d) - known
        if extra:
            raise ConfigError(f"unknown config keys: {sorted(extra)}")
        return cls(**d)

    @classmethod
    def from_json(cls, path) -> ExperimentConfig:
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Table:
    name: str
    columns: list[tuple[str, type]]
    rows: list[dict] = field(default_factory=list)

    @property
    def column_names(self) -> list[str]:
        return [c for c, _ in self.columns]

    def validate(self) -> None:
        names = self.column_names
        for i, row in enumerate(self.rows):
            if list(row) != names:
                raise ConfigError(f"{self.name} row {i}: columns {list(row)} != {names}")
            for c, typ in self.columns:
                val = row[c]
                ok = isinstance(val, typ) and not (typ is int and isinstance(val, bool))
                if typ is float and isinstance(val, int) and not isinstance(val, bool):
                    ok = True
                if not ok:
                    raise ConfigError(f"{self.name} row {i}: {c}={val!r} is not {typ.__name__}")


@dataclass
class Result:
    kind: str
    tables: list[Table]
    meta: dict

    def table(self, name: str) -> Table:
        for t in self.tables:
            if t.name == name:
                return t
        raise KeyError(name)


def _pmap(fn: Callable, jobs: Sequence, threads: int) -> list:
    if threads <= 1 or len(jobs) <= 1:
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, jobs))


def _mean_std(xs: Sequence[float]) -> tuple[float, float]:
    if len(xs) == 1:
        return float(xs[0]), 0.0
    return statistics.fmean(xs), statistics.stdev(xs)


def _deadline(timeout: float | None) -> float | None:
    return None if timeout is None else time.perf_counter() + timeout


def _meta(cfg: ExperimentConfig, seeds: list[dict]) -> dict:
    return {"kind": cfg.kind, "config": cfg.to_dict(), "master_seed": cfg.master_seed,
            "seeds": seeds, "seed_derivation": "SeedSequence([master, *tags]) word 0; "
                                               "string tags hashed with CRC32"}


# ---------------------------------------------------------------------------
# anonymity in graph models

def _sweep_job(job):
    model, n, m, rewire, rep, seed, phis, ks = job
    sigs = signatures(generate(ModelSpec(model, n, m, rewire, seed)))
    return [(phi, k, report_from_signatures(sigs, phi, k).fraction_anonymous)
            for phi in phis for k in ks]


SWEEP_COLUMNS = [("model", str), ("n", int), ("m", int), ("phi", str), ("k", int),
                 ("mean_fraction_anonymous", float), ("stddev", float), ("replicates", int)]


def run_model_anonymity_sweep(cfg: ExperimentConfig) -> Result:
    jobs, seeds = [], []
    for model in cfg.models:
        for m in cfg.m_grid:
            for rep in range(cfg.replicates):
                s = derive_seed(cfg.master_seed, "graph", model, cfg.n, m, rep)
                seeds.append({"model": model, "n": cfg.n, "m": m, "rep": rep, "seed": s})
                jobs.append((model, cfg.n, m, cfg.rewire_p, rep, s, cfg.phis, cfg.ks))
    out = _pmap(_sweep_job, jobs, cfg.threads)
    cells: dict[tuple, list[float]] = {}
    for job, res in zip(jobs, out):
        for phi, k, frac in res:
            cells.setdefault((job[0], job[2], phi, k), []).append(frac)
    table = Table("model_anonymity", SWEEP_COLUMNS)
    for model in cfg.models:
        for m in cfg.m_grid:
            for phi in cfg.phis:
                for k in cfg.ks:
                    vals = cells[(model, m, phi, k)]
                    mu, sd = _mean_std(vals)
                    table.rows.append({"model": model, "n": cfg.n, "m": m, "phi": phi, "k": k,
                                       "mean_fraction_anonymous": mu, "stddev": sd,
                                       "replicates": len(vals)})
    return Result(cfg.kind, [table], _meta(cfg, seeds))


# ---------------------------------------------------------------------------
# anonymization in graph models

def _anon_job(job):
    g, algo, phi, k, frac, seed, timeout = job
    t = anonymize(g, algo, phi, k, BudgetPolicy(frac), seed=seed, deadline=_deadline(timeout))
    return {"initial": t.fractions[0], "final": t.final_fraction, "deleted": len(t.deleted),
            "status": t.status, "elapsed": t.elapsed}


ANON_COLUMNS = [("model", str), ("n", int), ("m", int), ("algo", str), ("phi", str), ("k", int),
                ("mean_initial_fraction", float), ("mean_fraction_anonymous", float),
                ("stddev", float), ("graphs", int), ("runs", int), ("timeouts", int)]


def _runs_for(algo: str, runs: int) -> int:
    # greedy has no randomness; one run per graph stands for all repeats
    return 1 if algo == "greedy" else runs


def run_model_anonymization(cfg: ExperimentConfig) -> Result:
    jobs, keys, seeds = [], [], []
    for model in cfg.models:
        for m in cfg.m_grid:
            for rep in range(cfg.replicates):
                gs = derive_seed(cfg.master_seed, "graph", model, cfg.n, m, rep)
                seeds.append({"model": model, "n": cfg.n, "m": m, "rep": rep, "seed": gs})
                g = generate(ModelSpec(model, cfg.n, m, cfg.rewire_p, gs))
                for phi in cfg.phis:
                    for k in cfg.ks:
                        for algo in cfg.algorithms:
                            for run in range(_runs_for(algo, cfg.runs)):
                                rs = derive_seed(cfg.master_seed, "run", model, m, rep, algo,
                                                 phi, k, run)
                                seeds.append({"model": model, "m": m, "rep": rep, "algo": algo,
                                              "phi": phi, "k": k, "run": run, "seed": rs})
                                jobs.append((g, algo, phi, k, cfg.budget_fraction, rs,
                                             cfg.timeout_secs))
                                keys.append((model, m, algo, phi, k, rep))
    out = _pmap(_anon_job, jobs, cfg.threads)
    cells: dict[tuple, list[dict]] = {}
    for key, res in zip(keys, out):
        cells.setdefault(key[:5], []).append(res)
    table = Table("model_anonymization", ANON_COLUMNS)
    for model in cfg.models:
        for m in cfg.m_grid:
            for algo in cfg.algorithms:
                for phi in cfg.phis:
                    for k in cfg.ks:
                        res = cells[(model, m, algo, phi, k)]
                        finals = [r["final"] for r in res]
                        mu, sd = _mean_std(finals)
                        table.rows.append({
                            "model": model, "n": cfg.n, "m": m, "algo": algo, "phi": phi, "k": k,
                            "mean_initial_fraction": statistics.fmean(r["initial"] for r in res),
                            "mean_fraction_anonymous": mu, "stddev": sd,
                            "graphs": cfg.replicates, "runs": _runs_for(algo, cfg.runs),
                            "timeouts": sum(r["status"] == TIMEOUT for r in res)})
    return Result(cfg.kind, [table], _meta(cfg, seeds))


# ---------------------------------------------------------------------------
# real-world networks

def _load_network(ref: str, data_dir: str | None) -> tuple[str, Graph]:
    """``ref`` is a manifest key or a path to an edge-list file."""
    if ref in datasets.manifest():
        return ref, datasets.load(ref, data_dir)
    path = Path(ref)
    if not path.is_file():
        raise datasets.DatasetError(f"dataset {ref!r} not found (not a manifest key or file)")
    return path.stem, read_edge_list(path, extra_columns=True)


REAL_ANONYMITY_COLUMNS = [("network", str), ("nodes", int), ("edges", int), ("phi", str),
                          ("k", int), ("fraction_anonymous", float), ("unique_count", int),
                          ("uniqueness_reduction", float)]
REAL_SUMMARY_COLUMNS = [("phi", str), ("k", int), ("networks", int),
                        ("mean_fraction_over_networks", float),
                        ("pooled_fraction_over_nodes", float),
                        ("mean_uniqueness_reduction_over_networks", float),
                        ("pooled_uniqueness_reduction_over_nodes", float)]
REAL_ANON_COLUMNS = [("network", str), ("algo", str), ("phi", str), ("k", int), ("run", int),
                     ("seed", int), ("budget", int), ("deleted", int),
                     ("initial_fraction", float), ("final_fraction", float), ("status", str),
                     ("elapsed_secs", float)]


def _real_anonymity(name: str, g: Graph, cfg: ExperimentConfig, table: Table,
                    pooled: dict) -> None:
    sigs = signatures(g)
    for k in cfg.ks:
        base = report_from_signatures(sigs, 0, k)
        for phi in cfg.phis:
            rep = base if as_phi(phi) == 0 else report_from_signatures(sigs, phi, k)
            red = uniqueness_reduction(base, rep)
            table.rows.append({"network": name, "nodes": g.node_count, "edges": g.edge_count,
                               "phi": phi, "k": k, "fraction_anonymous": rep.fraction_anonymous,
                               "unique_count": rep.unique_count, "uniqueness_reduction": red})
            acc = pooled.setdefault((phi, k), [0, 0, 0, 0])
            acc[0] += g.node_count - rep.unique_count
            acc[1] += g.node_count
            acc[2] += sum(1 for v in base.unique_nodes if rep.anonymous_flags[v])
            acc[3] += base.unique_count


def _real_summary(cfg: ExperimentConfig, table: Table, pooled: dict) -> Table:
    out = Table("real_anonymity_summary", REAL_SUMMARY_COLUMNS)
    for k in cfg.ks:
        for phi in cfg.phis:
            rows = [r for r in table.rows if r["phi"] == phi and r["k"] == k]
            if not rows:
                continue
            acc = pooled[(phi, k)]
            out.rows.append({
                "phi": phi, "k": k, "networks": len(rows),
                "mean_fraction_over_networks": statistics.fmean(r["fraction_anonymous"] for r in rows),
                "pooled_fraction_over_nodes": acc[0] / acc[1],
                "mean_uniqueness_reduction_over_networks":
                    statistics.fmean(r["uniqueness_reduction"] for r in rows),
                "pooled_uniqueness_reduction_over_nodes": acc[2] / acc[3] if acc[3] else 0.0})
    return out


def run_real_experiments(cfg: ExperimentConfig) -> Result:
    """Anonymity (and, for ``real_anonymization``, algorithm results) per network."""
    if not cfg.datasets:
        raise ConfigError("no datasets given")
    networks = [_load_network(ref, cfg.data_dir) for ref in cfg.datasets]
    anon_table = Table("real_anonymity", REAL_ANONYMITY_COLUMNS)
    pooled: dict = {}
    for name, g in networks:
        _real_anonymity(name, g, cfg, anon_table, pooled)
    tables = [anon_table, _real_summary(cfg, anon_table, pooled)]
    seeds: list[dict] = []
    if cfg.kind == "real_anonymization":
        jobs, keys = [], []
        for name, g in networks:
            for phi in cfg.phis:
                for k in cfg.ks:
                    for algo in cfg.algorithms:
                        for run in range(_runs_for(algo, cfg.runs)):
                            rs = derive_seed(cfg.master_seed, "run", "real", name, algo, phi, k, run)
                            seeds.append({"network": name, "algo": algo, "phi": phi, "k": k,
                                          "run": run, "seed": rs})
                            jobs.append((g, algo, phi, k, cfg.budget_fraction, rs, cfg.timeout_secs))
                            keys.append((name, algo, phi, k, run, rs, g.edge_count))
        out = _pmap(_anon_job, jobs, cfg.threads)
        t = Table("real_anonymization", REAL_ANON_COLUMNS)
        for (name, algo, phi, k, run, rs, m), r in zip(keys, out):
            t.rows.append({"network": name, "algo": algo, "phi": phi, "k": k, "run": run,
                           "seed": rs, "budget": BudgetPolicy(cfg.budget_fraction).budget(m),
                           "deleted": r["deleted"], "initial_fraction": r["initial"],
                           "final_fraction": r["final"], "status": r["status"],
                           "elapsed_secs": r["elapsed"]})
        tables.append(t)
    return Result(cfg.kind, tables, _meta(cfg, seeds))


UTILITY_COLUMNS = [("network", str), ("algo", str), ("phi", str), ("k", int), ("seed", int),
                   ("status", str), ("frac_edges_deleted", float), ("delta_clustering", float),
                   ("delta_path_length", float), ("delta_lcc", float), ("nmi_utility", float),
                   ("centrality_top_changed", float), ("nmi_stability", float),
                   ("nmi_anon", float)]
UTILITY_MEDIAN_COLUMNS = [("algo", str), ("phi", str), ("networks", int),
                          ("frac_edges_deleted", float), ("delta_clustering", float),
                          ("delta_path_length", float), ("delta_lcc", float),
                          ("nmi_utility", float), ("centrality_top_changed", float)]
_METRICS = ("frac_edges_deleted", "delta_clustering", "delta_path_length", "delta_lcc",
            "nmi_utility", "centrality_top_changed")


def _utility_job(job):
    name, g, algo, phi, k, frac, seed, timeout, runs, top_n = job
    t = anonymize(g, algo, phi, k, BudgetPolicy(frac), seed=seed, deadline=_deadline(timeout))
    rep = utility_report(g, apply_trace(g, t), UtilityConfig(runs=runs, top_n=top_n, seed=seed))
    return t.status, rep


def run_utility_eval(cfg: ExperimentConfig) -> Result:
    if not cfg.datasets:
        raise ConfigError("no datasets given")
    networks = [_load_network(ref, cfg.data_dir) for ref in cfg.datasets]
    jobs, seeds = [], []
    k = cfg.ks[0]
    for name, g in networks:
        for algo in cfg.algorithms:
            for phi in cfg.phis:
                s = derive_seed(cfg.master_seed, "utility", name, algo, phi)
                seeds.append({"network": name, "algo": algo, "phi": phi, "seed": s})
                jobs.append((name, g, algo, phi, k, cfg.budget_fraction, s, cfg.timeout_secs,
                             cfg.utility_runs, cfg.top_n))
    out = _pmap(_utility_job, jobs, cfg.threads)
    table = Table("utility", UTILITY_COLUMNS)
    for job, (status, rep) in zip(jobs, out):
        row = {"network": job[0], "algo": job[2], "phi": job[3], "k": k, "seed": job[6],
               "status": status}
        row.update({m: getattr(rep, m) for m in _METRICS})
        row["nmi_stability"] = rep.nmi_stability
        row["nmi_anon"] = rep.nmi_anon
        table.rows.append(row)
    med = Table("utility_median", UTILITY_MEDIAN_COLUMNS)
    for algo in cfg.algorithms:
        for phi in cfg.phis:
            rows = [r for r in table.rows if r["algo"] == algo and r["phi"] == phi]
            entry = {"algo": algo, "phi": phi, "networks": len(rows)}
            entry.update({m: statistics.median(r[m] for r in rows) for m in _METRICS})
            med.rows.append(entry)
    return Result(cfg.kind, [table, med], _meta(cfg, seeds))


def run(cfg: ExperimentConfig) -> Result:
    if cfg.kind == "model_anonymity_sweep":
        return run_model_anonymity_sweep(cfg)
    if cfg.kind == "model_anonymization":
        return run_model_anonymization(cfg)
    if cfg.kind in ("real_anonymity", "real_anonymization"):
        return run_real_experiments(cfg)
    return run_utility_eval(cfg)


# ---------------------------------------------------------------------------
# output

def _cell(v) -> str:
    if isinstance(v, float):
        return "nan" if math.isnan(v) else repr(v)
    return str(v)


def write_csv(table: Table, path: Path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.column_names)
        for row in table.rows:
            w.writerow([_cell(row[c]) for c in table.column_names])


def read_csv(path, table_columns: Iterable[tuple[str, type]]) -> list[dict]:
    types = dict(table_columns)
    with open(path, encoding="utf-8", newline="") as fh:
        return [{c: types[c](v) for c, v in row.items()} for row in csv.DictReader(fh)]


def emit_outputs(result: Result, out_dir, formats: Sequence[str] = ("csv", "json")) -> list[Path]:
    """Validate and write every table plus a ``<kind>.meta.json`` sidecar."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for table in result.tables:
        table.validate()
        if "csv" in formats:
            p = out / f"{table.name}.csv"
            write_csv(table, p)
            written.append(p)
        if "json" in formats:
            p = out / f"{table.name}.json"
            with open(p, "w", encoding="utf-8") as fh:
                json.dump({"table": table.name, "columns": table.column_names,
                           "rows": table.rows}, fh, indent=1)
                fh.write("\n")
            written.append(p)
    p = out / f"{result.kind}.meta.json"
    with open(p, "w", encoding="utf-8") as fh:
        json.dump(result.meta, fh, indent=1)
        fh.write("\n")
    written.append(p)
    return written
