"""``fuzzanon`` command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error, 3 timeout.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
import time
from pathlib import Path

from . import __version__
from .anonymity import as_phi, format_phi, report_from_signatures, signatures
from .anonymization import TIMEOUT, BudgetPolicy, anonymize, apply_trace
from .generators import ModelSpec, generate
from .graph import GraphError, read_edge_list, write_edge_list
from .harness import KINDS, ConfigError, ExperimentConfig, emit_outputs, run
from .utility import UtilityConfig, utility_report

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_TIMEOUT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _csv_list(text: str) -> list[str]:
    return [x for x in text.split(",") if x.strip()]


def _common(p: argparse.ArgumentParser, suppress: bool) -> None:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p.add_argument("--seed", type=int, default=d(0), help="master seed")
    p.add_argument("--threads", type=int, default=d(1))
    p.add_argument("--timeout-secs", type=float, default=d(None))
    p.add_argument("--out-dir", default=d(None))
    p.add_argument("--config", default=d(None), help="JSON file with option values")
    p.add_argument("-v", "--verbose", action="store_true", default=d(False))


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fuzzanon", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    _common(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("generate", help="write a seeded ER/BA/WS graph")
    _common(p, suppress=True)
    p.add_argument("--model", required=True, type=str.upper, choices=["ER", "BA", "WS"])
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--rewire", type=float, default=0.05)
    p.add_argument("--out", required=True)

    p = sub.add_parser("measure", help="phi-k-anonymity of an edge list")
    _common(p, suppress=True)
    p.add_argument("--input", required=True)
    p.add_argument("--phi", type=_csv_list, default=["0"], help="comma list, e.g. 0,1%%,5%%")
    p.add_argument("--k", type=_csv_list, default=["2"])
    p.add_argument("--per-node", help="CSV of node,deg,tri,anonymous (single phi/k only)")
    p.add_argument("--extra-columns", action="store_true",
                   help="accept lines with more than two tokens")

    p = sub.add_parser("anonymize", help="budgeted edge-deletion anonymization")
    _common(p, suppress=True)
    p.add_argument("--input", required=True)
    p.add_argument("--algo", required=True, choices=["es", "ua", "greedy"])
    p.add_argument("--phi", default="0")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--budget-frac", type=float, default=0.05)
    p.add_argument("--out-graph")
    p.add_argument("--out-trace")
    p.add_argument("--audit", action="store_true", help="verify state every R deletions")
    p.add_argument("--extra-columns", action="store_true")

    p = sub.add_parser("utility", help="utility metrics of an anonymized graph")
    _common(p, suppress=True)
    p.add_argument("--original", required=True)
    p.add_argument("--anonymized", required=True)
    p.add_argument("--runs", type=int, default=20)
    p.add_argument("--top-n", type=int, default=100)
    p.add_argument("--path-mode", choices=["auto", "exact", "sampled"], default="auto")
    p.add_argument("--out")
    p.add_argument("--extra-columns", action="store_true")

    p = sub.add_parser("sweep", help="run one of the experiment drivers")
    _common(p, suppress=True)
    p.add_argument("--kind", choices=KINDS)
    p.add_argument("--models", type=_csv_list)
    p.add_argument("--n", type=int)
    p.add_argument("--m-grid", type=_csv_list)
    p.add_argument("--phis", type=_csv_list)
    p.add_argument("--ks", type=_csv_list)
    p.add_argument("--replicates", type=int)
    p.add_argument("--runs", type=int)
    p.add_argument("--algos", type=_csv_list)
    p.add_argument("--budget-frac", type=float)
    p.add_argument("--datasets", type=_csv_list, help="manifest keys or edge-list paths")
    p.add_argument("--data-dir")
    p.add_argument("--format", type=_csv_list, default=["csv", "json"])
    return parser


def _ints(xs) -> list[int]:
    try:
        return [int(x) for x in xs]
    except ValueError as e:
        raise UsageError(str(e)) from None


def _out_path(args, name: str | None, default: str) -> Path | None:
    if name is not None:
        return Path(name)
    if args.out_dir is not None:
        return Path(args.out_dir) / default
    return None


def _emit_json(obj, path: Path | None) -> None:
    text = json.dumps(obj, indent=1)
    if path is None:
        print(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text + "\n", encoding="utf-8")


def cmd_generate(args) -> int:
    g = generate(ModelSpec(args.model, args.n, args.m, args.rewire, args.seed))
    write_edge_list(g, args.out)
    _emit_json({"model": args.model, "n": args.n, "m": args.m, "rewire": args.rewire,
                "seed": args.seed, "nodes": g.node_count, "edges": g.edge_count}, None)
    return EXIT_OK


def cmd_measure(args) -> int:
    phis = [as_phi(p) for p in args.phi]
    ks = _ints(args.k)
    if any(k < 2 for k in ks):
        raise UsageError("k must be >= 2")
    if args.per_node and (len(phis) != 1 or len(ks) != 1):
        raise UsageError("--per-node needs exactly one phi and one k")
    g, summary = read_edge_list(args.input, extra_columns=args.extra_columns, return_summary=True)
    sigs = signatures(g)
    rows, last = [], None
    for phi in phis:
        for k in ks:
            last = report_from_signatures(sigs, phi, k)
            rows.append(last.as_row())
    _emit_json({"input": str(args.input), "load": summary.as_dict(), "rows": rows},
               _out_path(args, None, "measure.json"))
    if args.per_node:
        with open(args.per_node, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["node", "deg", "tri", "anonymous"])
            for v, s in enumerate(sigs):
                w.writerow([g.labels[v], s.deg, s.tri, int(last.anonymous_flags[v])])
    return EXIT_OK


def cmd_anonymize(args) -> int:
    g = read_edge_list(args.input, extra_columns=args.extra_columns)
    deadline = None if args.timeout_secs is None else time.perf_counter() + args.timeout_secs
    trace = anonymize(g, args.algo, as_phi(args.phi), args.k, BudgetPolicy(args.budget_frac),
                      seed=args.seed, audit=args.audit, deadline=deadline)
    trace_path = _out_path(args, args.out_trace, "trace.json")
    if trace_path is not None:
        trace_path.parent.mkdir(parents=True, exist_ok=True)
        trace.dump(trace_path)
    graph_path = _out_path(args, args.out_graph, "anonymized.txt")
    if graph_path is not None:
        graph_path.parent.mkdir(parents=True, exist_ok=True)
        write_edge_list(apply_trace(g, trace), graph_path)
    _emit_json({"algo": trace.algo, "phi": format_phi(trace.phi), "k": trace.k,
                "budget": trace.budget, "deleted": len(trace.deleted),
                "initial_fraction": trace.fractions[0], "final_fraction": trace.final_fraction,
                "status": trace.status}, None)
    return EXIT_TIMEOUT if trace.status == TIMEOUT else EXIT_OK


def cmd_utility(args) -> int:
    g = read_edge_list(args.original, extra_columns=args.extra_columns)
    h = read_edge_list(args.anonymized, extra_columns=args.extra_columns,
                       labels=g.labels, strict_labels=True)
    rep = utility_report(g, h, UtilityConfig(runs=args.runs, top_n=args.top_n, seed=args.seed,
                                             path_mode=args.path_mode))
    _emit_json(rep.to_dict(), _out_path(args, args.out, "utility.json"))
    return EXIT_OK


_SWEEP_KEYS = {"models": "models", "n": "n", "replicates": "replicates", "runs": "runs",
               "algos": "algorithms", "datasets": "datasets", "data_dir": "data_dir",
               "phis": "phis", "budget_frac": "budget_fraction"}


def cmd_sweep(args, file_cfg: dict) -> int:
    d = dict(file_cfg)
    if args.kind:
        d["kind"] = args.kind
    if "kind" not in d:
        raise UsageError("sweep needs --kind or a config file with 'kind'")
    for flag, key in _SWEEP_KEYS.items():
        val = getattr(args, flag)
        if val is not None:
            d[key] = val
    if args.m_grid is not None:
        d["m_grid"] = _ints(args.m_grid)
    if args.ks is not None:
        d["ks"] = _ints(args.ks)
    d["master_seed"] = args.seed if args.seed is not None else d.get("master_seed", 0)
    d["threads"] = args.threads
    if args.timeout_secs is not None:
        d["timeout_secs"] = args.timeout_secs
    out_dir = args.out_dir or d.get("out_dir", "results")
    d["out_dir"] = out_dir
    cfg = ExperimentConfig.from_dict(d)
    result = run(cfg)
    paths = emit_outputs(result, out_dir, args.format)
    _emit_json({"kind": cfg.kind, "written": [str(p) for p in paths]}, None)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    file_cfg: dict = {}
    try:
        if args.config:
            with open(args.config, encoding="utf-8") as fh:
                file_cfg = json.load(fh)
            # file values fill in global flags left at their defaults
            if args.seed == 0 and "master_seed" in file_cfg:
                args.seed = file_cfg["master_seed"]
            if args.threads == 1 and "threads" in file_cfg:
                args.threads = file_cfg["threads"]
            if args.timeout_secs is None and "timeout_secs" in file_cfg:
                args.timeout_secs = file_cfg["timeout_secs"]
        if args.command == "sweep":
            return cmd_sweep(args, file_cfg)
        return {"generate": cmd_generate, "measure": cmd_measure, "anonymize": cmd_anonymize,
                "utility": cmd_utility}[args.command](args)
    except (GraphError, OSError, json.JSONDecodeError) as e:
        print(f"fuzzanon: data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (UsageError, ConfigError, ValueError) as e:
        print(f"fuzzanon: error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
