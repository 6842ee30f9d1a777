"""Monte Carlo check of Cramer-Rao efficiency for the population-measurement estimator.

Prints var(beta_hat) * M * F for a range of shot counts at a fixed working point.
"""
import argparse
import math
import sys

from qthermo import ModelParams
from qthermo.estimation import ExperimentSpec, run_experiment


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--theta", type=float, default=math.pi)
    ap.add_argument("--tau", type=float, default=math.pi / 2)
    ap.add_argument("--shots", type=int, nargs="+", default=[10 ** 3, 10 ** 4, 10 ** 5])
    ap.add_argument("--reps", type=int, default=300)
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args(argv)

    truth = ModelParams(beta=args.beta, theta=args.theta, tau=args.tau)
    print(f"{'shots':>8} {'mean':>10} {'std err':>10} {'var*M*F':>9} {'censored':>9}")
    for m in args.shots:
        rep = run_experiment(ExperimentSpec(truth, shots=m, reps=args.reps, seed=args.seed),
                             workers=args.workers)
        print(f"{m:8d} {rep.mean:10.5f} {rep.standard_error:10.2e} {rep.cr_ratio:9.4f} "
              f"{rep.boundary_hits:9d}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
