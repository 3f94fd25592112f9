"""Seeded batch experiments: config parsing, trials, summaries, CSV/JSON output.

A config is a flat ``key=value`` file (``#`` comments allowed) plus overrides.
Trial i runs with seed ``seed + i``; the graph and the algorithm both derive
their randomness from that seed, so (config, seed) fixes the record exactly.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from statistics import median
from typing import Iterable, Optional

from . import checks
from .generators import (complete_graph, cycle_graph, gen_gnm, gen_gnp, gen_gnp_avg,
                         gen_structured, path_graph, perfect_matching_graph, petersen_graph,
                         star_graph)
from .graph import Graph, read_edge_list
from .hard.control import reduce_mis_control
from .hard.instances import ClusterGraph, gen_hard
from .hard.reference import (half_levels, reduce_mm_reference, reduce_mis_reference,
                             unmatched_fraction_after)
from .oracles import verify_maximal_matching, verify_mis
from .sim.ledger import DEFAULT_CL
from .solvers import (mis_by_avg_degree, mis_by_independence, mis_by_neighborhood_independence,
                      mm_pipeline)

GENERATORS = ("empty", "gnp", "gnp-avg", "gnm", "gnm-lazy", "line-gnp", "interval",
              "cluster-cliques", "hard-mis", "hard-mm", "complete", "path", "cycle", "star",
              "matching", "petersen", "file")
ALGORITHMS = ("mis-avg", "mis-independence", "mis-neighborhood", "mm-avg", "mm-independence",
              "mm-neighborhood", "reduce-mis-ref", "reduce-mm-ref", "reduce-mis-control")
CHECKS = ("sampled-edges", "mis-residual-degree", "mm-residual-degree", "repeated-reduction",
          "beta-sparsification", "budget", "coverage")
CSV_COLUMNS = ("config_hash", "seed", "algorithm", "n", "m", "d_avg", "iterations", "rounds",
               "max_residual_degree_final", "checks_failed")

# keys that change where or how results are written but not what they are
_UNHASHED = ("out", "format", "workers")

_DEFAULTS = {
    "generator": "gnp-avg",
    "algorithm": "mis-avg",
    "seed": "0",
    "reps": "1",
    "checks": "",
    "budget_cl": str(DEFAULT_CL),
    "format": "csv",
    "workers": "1",
}


class ConfigError(ValueError):
    pass


def _num(v: str):
    try:
        return int(v)
    except ValueError:
        return float(v)


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat string-valued settings; typed accessors below."""

    values: tuple  # sorted (key, value) pairs

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        merged = dict(_DEFAULTS)
        merged.update({str(k): str(v) for k, v in d.items() if v is not None})
        cfg = cls(tuple(sorted(merged.items())))
        cfg.validate()
        return cfg

    @classmethod
    def parse(cls, text: str, overrides: Optional[dict] = None) -> "ExperimentConfig":
        d = {}
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"line {ln}: expected key=value, got {raw!r}")
            k, v = line.split("=", 1)
            d[k.strip()] = v.strip()
        d.update(overrides or {})
        return cls.from_dict(d)

    @classmethod
    def load(cls, path: str, overrides: Optional[dict] = None) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.parse(fh.read(), overrides)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.values)

    def get(self, key: str, default=None):
        return dict(self.values).get(key, default)

    def num(self, key: str, default=None):
        v = self.get(key)
        return default if v is None else _num(v)

    def with_values(self, **kw) -> "ExperimentConfig":
        d = dict(self.values)
        d.update({k: str(v) for k, v in kw.items()})
        return ExperimentConfig.from_dict(d)

    @property
    def generator(self) -> str:
        return self.get("generator")

    @property
    def algorithm(self) -> str:
        return self.get("algorithm")

    @property
    def seeds(self) -> list:
        if self.get("seeds"):
            return [int(s) for s in self.get("seeds").split(",")]
        start = int(self.get("seed"))
        return list(range(start, start + int(self.get("reps"))))

    @property
    def checks(self) -> list:
        return [c for c in self.get("checks", "").split(",") if c]

    @property
    def budget_cl(self) -> int:
        return int(self.get("budget_cl"))

    @property
    def config_hash(self) -> str:
        body = "".join(f"{k}={v}\n" for k, v in self.values if k not in _UNHASHED)
        return hashlib.sha256(body.encode()).hexdigest()[:16]

    def validate(self):
        if self.generator not in GENERATORS:
            raise ConfigError(f"unknown generator {self.generator!r}; expected one of {GENERATORS}")
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; expected one of {ALGORITHMS}")
        try:
            reps = int(self.get("reps"))
            seeds = self.seeds
            int(self.get("budget_cl"))
            int(self.get("workers"))
        except ValueError as e:
            raise ConfigError(f"non-integer setting: {e}") from None
        if reps < 1:
            raise ConfigError("reps must be >= 1")
        if len(set(seeds)) != len(seeds):
            raise ConfigError("seeds must be distinct")
        if self.budget_cl < 1:
            raise ConfigError("budget_cl must be >= 1")
        bad = [c for c in self.checks if c not in CHECKS]
        if bad:
            raise ConfigError(f"unknown checks {bad}; expected a subset of {CHECKS}")
        if self.get("format") not in ("csv", "json"):
            raise ConfigError("format must be csv or json")
        if self.algorithm in ("mis-independence", "mm-independence") and self.get("mu") is None:
            raise ConfigError(f"{self.algorithm} needs mu")
        lazy = self.generator == "gnm-lazy"
        if lazy != (self.algorithm == "reduce-mis-control"):
            raise ConfigError("gnm-lazy pairs only with reduce-mis-control")


@dataclass
class TrialRecord:
    config_hash: str
    seed: int
    algorithm: str
    generator: str
    n: int
    m: int
    d_avg: float
    iterations: int
    rounds: int
    solution_size: int
    valid: bool
    budget_violations: int
    max_residual_degree_final: int
    residual: list = field(default_factory=list)  # per iteration {kind, n, m, max_degree}
    checks_passed: list = field(default_factory=list)
    checks_failed: list = field(default_factory=list)
    measures: dict = field(default_factory=dict)
    wall_time: float = field(default=0.0, compare=False)

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrialRecord":
        return cls(**d)

    def csv_row(self) -> list:
        return [self.config_hash, self.seed, self.algorithm, self.n, self.m, repr(self.d_avg),
                self.iterations, self.rounds, self.max_residual_degree_final,
                ";".join(self.checks_failed)]


# graph construction -----------------------------------------------------------


def build_graph(cfg: ExperimentConfig, seed: int):
    """Graph (or ClusterGraph / lazy (n, m) pair) for one trial, plus level labels."""
    gname = cfg.generator
    n = cfg.num("n")
    need = {"gnp": ("n", "p"), "gnp-avg": ("n", "d"), "gnm": ("n", "m"), "gnm-lazy": ("n", "m"),
            "line-gnp": ("n", "d"), "interval": ("n",), "hard-mis": ("k", "levels"),
            "hard-mm": ("k", "levels"), "complete": ("n",), "path": ("n",), "cycle": ("n",),
            "star": ("n",), "matching": ("n",), "empty": ("n",), "file": ("path",),
            "cluster-cliques": ("sizes",)}
    missing = [k for k in need.get(gname, ()) if cfg.get(k) is None]
    if missing:
        raise ConfigError(f"generator {gname} needs {missing}")
    if gname == "empty":
        return Graph.empty(int(n)), None
    if gname == "gnp":
        return gen_gnp(int(n), float(cfg.get("p")), seed), None
    if gname == "gnp-avg":
        return gen_gnp_avg(int(n), float(cfg.get("d")), seed), None
    if gname == "gnm":
        return gen_gnm(int(n), int(cfg.get("m")), seed), None
    if gname == "gnm-lazy":
        return (int(n), int(cfg.get("m"))), None
    if gname == "line-gnp":
        return gen_structured("line-graph-of-gnp", {"n": n, "d": cfg.num("d")}, seed), None
    if gname == "interval":
        return gen_structured("interval", {"n": n, "d": cfg.num("d", 4.0)}, seed), None
    if gname == "cluster-cliques":
        sizes = [int(s) for s in cfg.get("sizes").split(",")]
        return gen_structured("cluster-cliques", {"sizes": sizes, "q": cfg.num("q", 0.0)},
                              seed), None
    if gname in ("hard-mis", "hard-mm"):
        variant = "MIS" if gname == "hard-mis" else "MM"
        g, layout = gen_hard(int(cfg.get("k")), int(cfg.get("levels")), int(cfg.num("b", 4)),
                           variant, seed)
        return g, layout.level_of
    if gname == "complete":
        return complete_graph(int(n)), None
    if gname == "path":
        return path_graph(int(n)), None
    if gname == "cycle":
        return cycle_graph(int(n)), None
    if gname == "star":
        return star_graph(int(n) - 1), None
    if gname == "matching":
        return perfect_matching_graph(int(n) // 2), None
    if gname == "petersen":
        return petersen_graph(), None
    if gname == "file":
        return read_edge_list(cfg.get("path")), None
    raise ConfigError(f"unknown generator {gname!r}")


# one trial ---------------------------------------------------------------------


def _apply_check(name: str, result, failed: list, passed: list, measures: dict):
    ok, measured, bound = result
    measures[name] = {"measured": float(measured), "bound": float(bound)}
    (passed if ok else failed).append(name)


def _pipeline_checks(cfg: ExperimentConfig, g: Graph, res, passed, failed, measures):
    reps = res.reports
    n = g.root_n
    for name in cfg.checks:
        if name == "budget":
            ok = res.violations == 0
            (passed if ok else failed).append(name)
            measures[name] = {"measured": float(res.violations), "bound": 0.0}
        elif name == "sampled-edges":
            first = next((r for r in reps if r.kind == "mis-avg-degree"), None)
            if first is not None:
                _apply_check(name, checks.sampled_edges_bound(first.sampled_edges_in_F, n),
                             failed, passed, measures)
        elif name == "mis-residual-degree":
            first = next((r for r in reps if r.kind == "mis-avg-degree"), None)
            if first is not None:
                _apply_check(name, checks.mis_residual_degree_bound(
                    first.residual_max_degree, first.input_edge_count * 2 / max(first.input_vertex_count, 1), n),
                    failed, passed, measures)
        elif name == "mm-residual-degree":
            first = next((r for r in reps if r.kind == "mm-avg-degree"), None)
            if first is not None:
                _apply_check(name, checks.mm_residual_degree_bound(
                    first.residual_max_degree, first.input_edge_count * 2 / max(first.input_vertex_count, 1), n),
                    failed, passed, measures)
        elif name == "repeated-reduction":
            r = res.notes.get("r")
            if r and reps:
                last = [x for x in reps if x.extra.get("iteration") == f"s{r - 1}"]
                if last:
                    _apply_check(name, checks.repeated_reduction_bound(
                        last[-1].residual_max_degree, g.avg_degree, r, n),
                        failed, passed, measures)
        elif name == "beta-sparsification":
            after = res.notes.get("after_nonuniform")
            if after is not None:
                beta = int(cfg.num("beta", 2))
                _apply_check(name, checks.beta_sparsification_bound(after["m"], beta, g.n),
                             failed, passed, measures)


def run_trial(cfg: ExperimentConfig, seed: int) -> TrialRecord:
    t0 = time.perf_counter()
    g, level_of = build_graph(cfg, seed)
    algo = cfg.algorithm
    c_l = cfg.budget_cl
    passed, failed, measures = [], [], {}
    residual, rounds, violations = [], 0, 0
    if algo == "reduce-mis-control":
        n, m = g
        res = reduce_mis_control(n, m, seed)
        d_avg = 2.0 * m / n if n else 0.0
        rec = TrialRecord(cfg.config_hash, seed, algo, cfg.generator, n, m, d_avg,
                          res.iterations, 0, res.solution_size, True, 0, 0)
        rec.measures["survival"] = [list(r[1:4]) for r in res.trace.rows]
        rec.wall_time = time.perf_counter() - t0
        return rec
    if isinstance(g, ClusterGraph) and algo not in ("reduce-mis-ref", "reduce-mm-ref"):
        g = g.to_graph()
    n, m = g.n, g.m
    d_avg = 2.0 * m / n if n else 0.0
    if algo == "reduce-mis-ref":
        res = reduce_mis_reference(g, cfg.get("prob_rule", "uniform-avg"), seed,
                                   level_of=level_of)
        cg = g if isinstance(g, ClusterGraph) else ClusterGraph.from_graph(g)
        valid = cg.is_maximal_independent(res.solution)
        iterations, size = res.iterations, len(res.solution)
        measures["survival"] = [list(r[1:4]) for r in res.trace.rows]
        if "coverage" in cfg.checks:
            miss = int(sum(res.coverage_misses))
            (passed if miss == 0 else failed).append("coverage")
            measures["coverage"] = {"measured": float(miss), "bound": 0.0}
        max_final = 0
    elif algo == "reduce-mm-ref":
        res = reduce_mm_reference(g, seed, level_of=level_of)
        host = g.to_graph() if isinstance(g, ClusterGraph) else g
        valid = verify_maximal_matching(host, res.solution)
        iterations, size = res.iterations, len(res.solution)
        measures["survival"] = [list(r[1:4]) for r in res.trace.rows]
        levels = int(cfg.num("levels", 2))
        measures["unmatched_fraction_half"] = unmatched_fraction_after(
            res, half_levels(levels), n)
        max_final = 0
    else:
        res = _run_pipeline(cfg, g, seed, c_l)
        valid = bool(res.valid)
        iterations, size = res.iterations, len(res.solution)
        rounds, violations = res.rounds, res.violations
        residual = res.residual_stats()
        max_final = residual[-1]["max_degree"] if residual else 0
        _pipeline_checks(cfg, g, res, passed, failed, measures)
    rec = TrialRecord(cfg.config_hash, seed, algo, cfg.generator, n, m, d_avg, iterations,
                      rounds, size, valid, violations, int(max_final), residual, passed, failed,
                      measures)
    rec.wall_time = time.perf_counter() - t0
    return rec


def _run_pipeline(cfg: ExperimentConfig, g: Graph, seed: int, c_l: int):
    algo = cfg.algorithm
    mu = cfg.num("mu")
    if algo == "mis-avg":
        return mis_by_avg_degree(g, seed, c_l=c_l)
    if algo == "mis-independence":
        return mis_by_independence(g, float(mu), seed, c_l=c_l)
    if algo == "mis-neighborhood":
        return mis_by_neighborhood_independence(g, seed, c_l=c_l)
    if algo == "mm-avg":
        return mm_pipeline(g, "avg-degree", seed, c_l=c_l)
    if algo == "mm-independence":
        return mm_pipeline(g, "independence", seed, mu=float(mu), c_l=c_l)
    if algo == "mm-neighborhood":
        return mm_pipeline(g, "neighborhood-independence", seed, c_l=c_l)
    raise ConfigError(f"unknown algorithm {algo!r}")


# batches -----------------------------------------------------------------------


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    records: list
    summary: dict

    @property
    def exit_status(self) -> int:
        return 0 if all(r.valid for r in self.records) else 1


def _trial_star(args):
    return run_trial(*args)


def summarize(cfg: ExperimentConfig, records: list) -> dict:
    its = [r.iterations for r in records]
    rounds = [r.rounds for r in records]
    out = {
        "config_hash": cfg.config_hash,
        "trials": len(records),
        "valid_fraction": sum(r.valid for r in records) / len(records),
        "median_iterations": median(its),
        "median_rounds": median(rounds),
        "max_budget_violations": max(r.budget_violations for r in records),
        "checks": {},
    }
    for name in cfg.checks:
        ran = [r for r in records if name in r.checks_passed or name in r.checks_failed]
        frac = (sum(name in r.checks_passed for r in ran) / len(ran)) if ran else None
        need = cfg.num(f"threshold.{name}")
        entry = {"trials": len(ran), "success_fraction": frac}
        if need is not None:
            entry["threshold"] = float(need)
            entry["pass"] = frac is not None and frac >= float(need)
        out["checks"][name] = entry
    return out


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """All trials of the config, ordered by seed regardless of scheduling."""
    jobs = [(cfg, s) for s in cfg.seeds]
    workers = int(cfg.get("workers"))
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            records = list(ex.map(_trial_star, jobs))
    else:
        records = [run_trial(c, s) for c, s in jobs]
    records.sort(key=lambda r: r.seed)
    return ExperimentResult(cfg, records, summarize(cfg, records))


# output --------------------------------------------------------------------------


def emit(records: Iterable[TrialRecord], fmt: str, path: str) -> str:
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    if fmt not in ("csv", "json"):
        raise ValueError(f"unknown format {fmt!r}")
    d = os.path.dirname(os.path.abspath(path))
    if not os.path.isdir(d):
        raise OSError(f"output directory {d} does not exist")
    with open(path, "w", newline="") as fh:
        if fmt == "csv":
            w = csv.writer(fh)
            w.writerow(CSV_COLUMNS)
            for r in records:
                w.writerow(r.csv_row())
        else:
            json.dump([r.to_dict() for r in records], fh, indent=1)
    return path


def _csv_value(col: str, v: str):
    if col in ("seed", "n", "m", "iterations", "rounds", "max_residual_degree_final"):
        return int(v)
    if col == "d_avg":
        return float(v)
    if col == "checks_failed":
        return [c for c in v.split(";") if c]
    return v


def load_records(path: str):
    """CSV -> list of column dicts; JSON -> list of TrialRecord."""
    with open(path, newline="") as fh:
        if path.endswith(".json"):
            return [TrialRecord.from_dict(d) for d in json.load(fh)]
        rows = list(csv.DictReader(fh))
    if rows and tuple(rows[0].keys()) != CSV_COLUMNS:
        raise ValueError(f"unexpected CSV columns {tuple(rows[0].keys())}")
    return [{c: _csv_value(c, row[c]) for c in CSV_COLUMNS} for row in rows]


def csv_view(r: TrialRecord) -> dict:
    """The CSV columns of a record, typed as ``load_records`` returns them."""
    return {c: _csv_value(c, str(v)) for c, v in zip(CSV_COLUMNS, r.csv_row())}
