"""Regularizer ablation: graph term only, symmetry term only, and both.

    python scripts/ablation.py --dataset data/dolphins.txt --ground-truth data/dolphins.labels --k 2
"""

import argparse

from sgnmf.harness import ExperimentSpec, run_experiment

SETTINGS = [("graph only (alpha=0, lambda=100)", 0.0, 100.0),
            ("symmetry only (alpha=2^-8, lambda=0)", 2.0**-8, 0.0),
            ("both (alpha=2^-8, lambda=100)", 2.0**-8, 100.0)]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dataset", required=True)
    ap.add_argument("--ground-truth", required=True)
    ap.add_argument("--k", type=int, required=True)
    ap.add_argument("--repeats", type=int, default=10)
    args = ap.parse_args()

    for label, alpha, lam in SETTINGS:
        spec = ExperimentSpec(dataset=args.dataset, ground_truth=args.ground_truth, k=args.k,
                              alpha=alpha, lam=lam, repeats=args.repeats)
        agg = run_experiment(spec).aggregates[0]
        print(f"{label:40s} NMI {agg['nmi']['mean']:.4f} +- {agg['nmi']['std']:.4f}")


if __name__ == "__main__":
    main()
