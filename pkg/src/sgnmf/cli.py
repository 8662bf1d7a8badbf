"""Command-line entry point: ``sgnmf {run,grid,gen,inspect}``.

Settings are resolved as built-in defaults < ``--config`` file < flags.

Exit codes: 0 success, 1 usage error, 2 data error, 3 every run failed numerically.
"""

from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys

from .graph import GraphFormatError, NodeIndex, load_edge_list, save_edge_list, save_ground_truth
from .harness import (
    ExperimentSpec,
    emit_report,
    grid_search,
    make_planted_partition,
    parse_number,
    parse_number_list,
    read_config,
    run_experiment,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _experiment_flags(p):
    p.add_argument("--config", help="INI experiment config; flags override its keys")
    p.add_argument("--dataset", help="edge-list file")
    p.add_argument("--ground-truth", help="node/community file (enables NMI)")
    p.add_argument("--largest-component", action="store_true", default=None,
                   help="restrict to the largest connected component")
    p.add_argument("--variant", choices=["nmf", "snmf", "snmf-adj", "sgnmf"])
    p.add_argument("--k", type=int)
    p.add_argument("--alpha", type=parse_number)
    p.add_argument("--lambda", dest="lam", type=parse_number)
    p.add_argument("--seed", type=int, help="base seed; run i uses seed+i")
    p.add_argument("--seeds", type=lambda s: [int(t) for t in s.replace(",", " ").split()],
                   help="explicit comma-separated seed list (overrides --seed/--repeats)")
    p.add_argument("--repeats", type=int)
    p.add_argument("--max-iters", type=int)
    p.add_argument("--tol", type=parse_number)
    p.add_argument("--relative-tol", action="store_true", default=None)
    p.add_argument("--grid-alpha", type=parse_number_list, help="e.g. '0,2^-8,2^-4'")
    p.add_argument("--grid-lambda", type=parse_number_list)
    p.add_argument("--out", default="results", help="output directory")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgnmf", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    _experiment_flags(sub.add_parser("run", help="multi-seed run of one configuration"))
    _experiment_flags(sub.add_parser("grid", help="alpha/lambda sweep scored by modularity"))

    gen = sub.add_parser("gen", help="write a planted-partition graph")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, required=True)
    gen.add_argument("--p-in", type=float, required=True)
    gen.add_argument("--p-out", type=float, required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True, help="edge-list path; labels go to <out>.labels")

    ins = sub.add_parser("inspect", help="dataset statistics")
    ins.add_argument("--dataset", required=True)
    ins.add_argument("--largest-component", action="store_true")
    return parser


_SPEC_FLAGS = ("dataset", "ground_truth", "largest_component", "variant", "k", "alpha", "lam", "seed",
               "seeds", "repeats", "max_iters", "tol", "relative_tol", "grid_alpha", "grid_lambda")


def resolve_spec(args) -> ExperimentSpec:
    values = {}
    if args.config:
        try:
            values = read_config(args.config)
        except (ValueError, configparser.Error) as exc:
            raise UsageError(f"bad config {args.config}: {exc}") from None
    for name in _SPEC_FLAGS:
        v = getattr(args, name)
        if v is not None:
            values[name] = v
    if not values.get("dataset"):
        raise UsageError("a dataset is required (--dataset or [data] dataset=)")
    try:
        return ExperimentSpec(**values)
    except (TypeError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _print_summary(report):
    for agg in report.aggregates:
        parts = [f"alpha={agg['alpha']:g}", f"lambda={agg['lambda']:g}", f"ok={agg['n_ok']}/{agg['n_runs']}"]
        if agg["nmi"]:
            parts.append(f"NMI={agg['nmi']['mean']:.4f}+-{agg['nmi']['std']:.4f}")
        if agg["modularity"]:
            parts.append(f"Q={agg['modularity']['mean']:.4f}+-{agg['modularity']['std']:.4f}")
        print("  ".join(parts))
    if report.best:
        print(f"best: alpha={report.best['alpha']:g} lambda={report.best['lambda']:g}")


def _cmd_experiment(args) -> int:
    spec = resolve_spec(args)
    runner = grid_search if args.command == "grid" else run_experiment
    report = runner(spec, jobs=args.jobs)
    paths = emit_report(report, args.out, args.format)
    _print_summary(report)
    print(f"wrote {len(paths)} file(s) to {args.out}")
    if report.n_failed == len(report.records):
        return EXIT_NUMERIC
    return EXIT_OK


def _cmd_gen(args) -> int:
    try:
        adj, truth = make_planted_partition(args.n, args.k, args.p_in, args.p_out, args.seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    nodes = NodeIndex.identity(adj.n)
    save_edge_list(args.out, adj, nodes)
    save_ground_truth(args.out + ".labels", truth, nodes)
    print(f"n={adj.n} m={adj.n_edges} -> {args.out}, {args.out}.labels")
    return EXIT_OK


def _cmd_inspect(args) -> int:
    from .graph import degree_histogram

    adj, _ = load_edge_list(args.dataset, largest_component=args.largest_component)
    stats = {"n": adj.n, "m": adj.n_edges, "components": adj.n_components(),
             "degree_histogram": degree_histogram(adj)}
    print(json.dumps(stats, indent=1))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    handler = {"run": _cmd_experiment, "grid": _cmd_experiment, "gen": _cmd_gen, "inspect": _cmd_inspect}
    try:
        return handler[args.command](args)
    except UsageError as exc:
        print(f"sgnmf: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, OSError) as exc:
        print(f"sgnmf: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
