"""Recovery rate versus matrix size and planted-block fraction.

Writes results/size_grid.{csv,pgm,json}. Rows are matrix sizes, columns are
block fractions; each cell is the Monte Carlo recovery rate over --trials
independent planted instances at gamma = 0.85, rho = 0.25.
"""

import argparse
import os

from qcr.experiments import GridSpec, export_grid, run_size_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    spec = GridSpec(
        axis1_name="n",
        axis1_values=(25, 50, 75, 100),
        axis2_name="fraction",
        axis2_values=tuple(round(0.1 * k, 1) for k in range(1, 11)),
        fixed={"gamma": 0.85, "rho": 0.25},
        trials=args.trials,
        base_seed=args.base_seed,
    )
    grid = run_size_grid(spec, threads=args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, "size_grid")
    export_grid(grid, base)

    print(f"rates (rows n={spec.axis1_values}, cols fraction={spec.axis2_values}):")
    print(grid.success_rate)
    print(f"wrote {base}.csv, {base}.pgm, {base}.json")


if __name__ == "__main__":
    main()
