"""Recovery phase transition over block density gamma and noise density rho.

Writes results/phase_grid.{csv,pgm,json}. Rows are gamma values, columns are
rho values; each cell is the Monte Carlo recovery rate over --trials planted
instances at n = 100, n_c = 85.
"""

import argparse
import os

from qcr.experiments import GridSpec, export_grid, run_phase_grid


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--trials", type=int, default=10)
    ap.add_argument("--base-seed", type=int, default=0)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--out-dir", default="results")
    args = ap.parse_args()

    spec = GridSpec(
        axis1_name="gamma",
        axis1_values=tuple(round(0.5 + 0.1 * k, 1) for k in range(6)),
        axis2_name="rho",
        axis2_values=tuple(round(0.1 * k, 1) for k in range(8)),
        fixed={"n": 100, "n_c": 85},
        trials=args.trials,
        base_seed=args.base_seed,
    )
    grid = run_phase_grid(spec, threads=args.threads)
    os.makedirs(args.out_dir, exist_ok=True)
    base = os.path.join(args.out_dir, "phase_grid")
    export_grid(grid, base)

    print(f"rates (rows gamma={spec.axis1_values}, cols rho={spec.axis2_values}):")
    print(grid.success_rate)
    print(f"wrote {base}.csv, {base}.pgm, {base}.json")


if __name__ == "__main__":
    main()
