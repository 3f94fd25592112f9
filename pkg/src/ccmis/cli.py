"""Command line entry point: gen, solve, bench, check, oracle."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .checks import oracle_law_suite
from .graph import Graph, Matching, VertexSet, read_edge_list, write_edge_list
from .hard.instances import ClusterGraph
from .harness import (ConfigError, ExperimentConfig, build_graph, emit, run_experiment,
                      run_trial)
from .oracles import (ALPHA_MAX_N, BETA_MAX_DEGREE, SizeLimitError, brute_alpha, brute_beta,
                      verify_maximal_matching, verify_mis)


def _pairs(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise ConfigError(f"expected KEY=VALUE, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _config(args, extra: dict | None = None) -> ExperimentConfig:
    over = _pairs(args.set)
    for key, attr in (("seed", "seed"), ("reps", "reps"), ("out", "out"), ("format", "format"),
                      ("budget_cl", "budget_cl"), ("workers", "workers")):
        v = getattr(args, attr, None)
        if v is not None:
            over[key] = v
    over.update(extra or {})
    if args.config:
        return ExperimentConfig.load(args.config, over)
    return ExperimentConfig.from_dict(over)


def cmd_gen(args) -> int:
    cfg = _config(args)
    g, _ = build_graph(cfg, int(cfg.get("seed")))
    if isinstance(g, ClusterGraph):
        g = g.to_graph()
    if not isinstance(g, Graph):
        raise ConfigError(f"generator {cfg.generator} has no explicit graph")
    out = args.out or "-"
    if out == "-":
        write_edge_list(g, sys.stdout)
    else:
        write_edge_list(g, out)
        print(f"wrote n={g.n} m={g.m} to {out}", file=sys.stderr)
    return 0


def cmd_solve(args) -> int:
    cfg = _config(args)
    rec = run_trial(cfg, int(cfg.get("seed")))
    text = json.dumps(rec.to_dict(), indent=1)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if rec.valid else 1


def cmd_bench(args) -> int:
    cfg = _config(args)
    res = run_experiment(cfg)
    out = cfg.get("out")
    if out:
        emit(res.records, cfg.get("format"), out)
    print(json.dumps(res.summary, indent=1))
    return res.exit_status


def cmd_check(args) -> int:
    status = 0
    if args.laws:
        laws = oracle_law_suite(args.laws, seed=args.seed or 0)
        print(json.dumps(laws, indent=1))
        if any(laws["failures"].values()):
            status = 1
    if args.config or args.set:
        cfg = _config(args)
        if not cfg.checks:
            cfg = cfg.with_values(checks="budget")
        res = run_experiment(cfg)
        if cfg.get("out"):
            emit(res.records, cfg.get("format"), cfg.get("out"))
        print(json.dumps(res.summary, indent=1))
        failed = [k for k, v in res.summary["checks"].items() if v.get("pass") is False]
        if res.exit_status or failed:
            status = 1
    return status


def _parse_ids(text: str) -> list:
    return [int(x) for x in text.replace(",", " ").split()]


def cmd_oracle(args) -> int:
    g = read_edge_list(args.graph)
    out = {"n": g.n, "m": g.m}
    try:
        out["alpha"] = brute_alpha(g)
    except SizeLimitError:
        out["alpha"] = None
        out["alpha_skipped"] = f"n > {ALPHA_MAX_N}"
    try:
        out["beta"] = brute_beta(g)
    except SizeLimitError:
        out["beta"] = None
        out["beta_skipped"] = f"max degree > {BETA_MAX_DEGREE}"
    status = 0
    if args.mis is not None:
        out["mis_valid"] = verify_mis(g, VertexSet(np.array(_parse_ids(args.mis)), g.n))
        status |= not out["mis_valid"]
    if args.matching is not None:
        ids = _parse_ids(args.matching)
        if len(ids) % 2:
            raise ConfigError("matching needs an even number of ids")
        m = Matching(np.array(ids, dtype=np.int64).reshape(-1, 2), g.n)
        out["matching_maximal"] = verify_maximal_matching(g, m)
        status |= not out["matching_maximal"]
    print(json.dumps(out, indent=1))
    return int(status)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ccmis", description=__doc__)
    sub = ap.add_subparsers(dest="verb", required=True)

    def common(p, batch=False):
        p.add_argument("config", nargs="?", help="key=value config file")
        p.add_argument("-s", "--set", action="append", metavar="KEY=VALUE",
                       help="override a config key (repeatable)")
        p.add_argument("--seed", type=int)
        p.add_argument("--out")
        p.add_argument("--budget-cl", dest="budget_cl", type=int)
        if batch:
            p.add_argument("--reps", type=int)
            p.add_argument("--format", choices=("csv", "json"))
            p.add_argument("--workers", type=int)

    p = sub.add_parser("gen", help="write a generated graph as an edge list")
    common(p)
    p.set_defaults(fn=cmd_gen)
    p = sub.add_parser("solve", help="run one trial and print its record")
    common(p)
    p.set_defaults(fn=cmd_solve)
    p = sub.add_parser("bench", help="run a seeded batch and emit records")
    common(p, batch=True)
    p.set_defaults(fn=cmd_bench)
    p = sub.add_parser("check", help="oracle laws and configured bound checks")
    common(p, batch=True)
    p.add_argument("--laws", type=int, default=0, help="random small graphs for the oracle laws")
    p.set_defaults(fn=cmd_check)
    p = sub.add_parser("oracle", help="exact alpha/beta and verification on a graph file")
    p.add_argument("graph")
    p.add_argument("--mis", help="vertex ids to verify as a maximal independent set")
    p.add_argument("--matching", help="flat list u1 v1 u2 v2 ... to verify as maximal matching")
    p.set_defaults(fn=cmd_oracle)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ConfigError, OSError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
