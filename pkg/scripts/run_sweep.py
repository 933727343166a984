#!/usr/bin/env python3
"""Run seeded Dirichlet sweeps over a grid of outcome counts.

One JSON summary per line, so the output pipes straight into jq or a
notebook.  Example:

    python3 scripts/run_sweep.py --n 3 4 5 --samples 2000 --seed 0
"""

import argparse
import json

from inacc.cli import sweep


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[3, 4, 5])
    ap.add_argument("--samples", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--alpha", type=float, default=1.0)
    args = ap.parse_args()
    for n in args.n:
        summary = sweep(
            n=n, samples=args.samples, seed=args.seed, dirichlet_alpha=args.alpha
        )
        print(json.dumps(summary.to_json_dict(), sort_keys=True))


if __name__ == "__main__":
    main()
