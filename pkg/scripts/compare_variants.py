"""NMI (mean +- std over seeds) of the NMF-family variants on the datasets in data/.

    python scripts/compare_variants.py --repeats 10 --out results/variants.json

Datasets missing from the data directory are reported and skipped.
"""

import argparse
import json
import os
from pathlib import Path

from sgnmf.harness import ExperimentSpec, run_experiment

DATASETS = {"dolphins": 2, "cornell": 5, "polblogs": 2}

# (label, variant, alpha, lambda)
MODELS = [
    ("NMF", "nmf", 0.0, 0.0),
    ("GNMF", "sgnmf", 0.0, 100.0),
    ("SNMF", "snmf", 0.0, 0.0),
    ("SNMF-adj", "snmf-adj", 0.0, 0.0),
    ("SGNMF", "sgnmf", 2.0**-8, 100.0),
]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--data", default=os.environ.get("SGNMF_DATA", "data"))
    ap.add_argument("--repeats", type=int, default=10)
    ap.add_argument("--largest-component", action="store_true")
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--out")
    args = ap.parse_args()

    table = {}
    for name, k in DATASETS.items():
        edges, labels = Path(args.data) / f"{name}.txt", Path(args.data) / f"{name}.labels"
        if not (edges.exists() and labels.exists()):
            print(f"{name:10s} missing ({edges})")
            continue
        row = {}
        for label, variant, alpha, lam in MODELS:
            spec = ExperimentSpec(dataset=str(edges), ground_truth=str(labels), largest_component=args.largest_component,
                                  variant=variant, k=k, alpha=alpha, lam=lam, repeats=args.repeats)
            agg = run_experiment(spec, jobs=args.jobs).aggregates[0]
            row[label] = agg["nmi"]
        table[name] = row
        cells = "  ".join(f"{m}={row[m]['mean']*100:6.2f}+-{row[m]['std']*100:5.2f}" for m in row)
        print(f"{name:10s} {cells}")

    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(json.dumps(table, indent=1))


if __name__ == "__main__":
    main()
