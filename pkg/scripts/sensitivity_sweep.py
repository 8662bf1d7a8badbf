"""Modularity / NMI over the 8 x 8 alpha-lambda grid, written as CSV for heatmaps.

    python scripts/sensitivity_sweep.py --dataset data/dolphins.txt --k 2 --out results/sweep
    python scripts/sensitivity_sweep.py --planted 200 4 0.2 0.04 --out results/sweep_planted
"""

import argparse

from sgnmf.harness import ExperimentSpec, emit_report, grid_search, make_planted_partition


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    src = ap.add_mutually_exclusive_group(required=True)
    src.add_argument("--dataset")
    src.add_argument("--planted", nargs=4, metavar=("N", "K", "P_IN", "P_OUT"))
    ap.add_argument("--ground-truth")
    ap.add_argument("--k", type=int)
    ap.add_argument("--repeats", type=int, default=5)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out", required=True)
    args = ap.parse_args()

    graph = truth = None
    if args.planted:
        n, k, p_in, p_out = int(args.planted[0]), int(args.planted[1]), float(args.planted[2]), float(args.planted[3])
        graph, truth = make_planted_partition(n, k, p_in, p_out, seed=0)
        spec = ExperimentSpec(k=k, repeats=args.repeats)
    else:
        spec = ExperimentSpec(dataset=args.dataset, ground_truth=args.ground_truth, k=args.k, repeats=args.repeats)

    report = grid_search(spec, graph, truth, jobs=args.jobs)
    emit_report(report, args.out, "csv")
    emit_report(report, args.out, "json")
    print(f"best cell: {report.best}")


if __name__ == "__main__":
    main()
