"""Truth-value and sensor-count sweeps for all three schemes, printed as a table.

Covers the experiments that have no checked-in config: expected samples as the
true parameter moves through the alternative set, and as sensors are added.
"""

import argparse
import math

from ltsgsprt.batch import SchemeConfig
from ltsgsprt.calibrate import calibrate_local_thresholds
from ltsgsprt.experiment import ExperimentSpec, compare_schemes, run_sweep
from ltsgsprt.model import make_problem
from ltsgsprt.uniform import minimax_lambda

GRIDS = {
    ("mean_shift", "truth"): (0.4, 0.8, 1.2, 1.6, 2.0),
    ("variance", "truth"): (2.0, 3.0, 4.0, 5.0),
    ("mean_shift", "L"): (1, 2, 4, 8),
    ("variance", "L"): (1, 2, 4, 8),
}


def parse_args(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--model", choices=("mean_shift", "variance"), default="mean_shift")
    p.add_argument("--axis", choices=("truth", "L"), default="truth")
    p.add_argument("--L", type=int, default=2)
    p.add_argument("--alpha", type=float, default=1e-3)
    p.add_argument("--beta", type=float, default=1e-3)
    p.add_argument("--T0", type=int, default=1)
    p.add_argument("--period", type=float, default=10.0, help="LTS target mean local period")
    p.add_argument("--reps", type=int, default=5000)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--threads", type=int, default=1)
    return p.parse_args(argv)


def main(argv=None):
    args = parse_args(argv)
    problem = make_problem(args.model)
    lam, _ = minimax_lambda(problem, args.T0)
    cal = calibrate_local_thresholds(problem, args.period, seed=args.seed)
    schemes = [SchemeConfig("centralized"),
               SchemeConfig("uniform", T0=args.T0, lam=lam),
               SchemeConfig("lts", a=cal.a, b=cal.b)]
    grid = GRIDS[(args.model, args.axis)]
    specs = [ExperimentSpec(problem=problem, scheme=s, L=args.L, truth=problem.alt_probe(),
                            target_alpha=args.alpha, target_beta=args.beta,
                            sweep_axis=args.axis, grid=grid, replications=args.reps,
                            seed=args.seed, error_probes=False, threads=args.threads)
             for s in schemes]
    results = [run_sweep(s) for s in specs]
    rows = compare_schemes(specs, results)
    print(f"# lambda = {lam:.4f}, a = b = {cal.a:.4f} (mean period {cal.mean_period:.2f}), "
          f"A = {-math.log(args.alpha):.3f}")
    print(f"{args.axis}\tcentral_T\tuniform_T\tlts_T\tlts_tau\tlts/central\tuniform/central")
    for value, row, lts in zip(grid, rows, results[2]):
        print(f"{value:g}\t{row['centralized.mean_T']:.2f}\t{row['uniform.mean_T']:.2f}\t"
              f"{row['lts.mean_T']:.2f}\t{lts.mean_inter_comm_period:.2f}\t"
              f"{row['lts.T_ratio']:.3f}\t{row['uniform.T_ratio']:.3f}")


if __name__ == "__main__":
    main()
