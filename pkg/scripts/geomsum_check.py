"""The geometric sum Y against n/7 + n/f and against its exact mean.

    python scripts/geomsum_check.py --samples 10000
"""

import argparse

from robotcrawler.experiments import ExperimentConfig, run


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=10_000)
    ap.add_argument("--seed", type=int, default=4)
    ap.add_argument("--eps", type=float, default=0.1)
    args = ap.parse_args()

    print(f"{'n':>8} {'f':>5} {'Y mean':>10} {'exact':>10} {'n/7+n/f':>10} {'rel':>7} "
          f"{'out(c)':>7} {'out(E)':>7}")
    for n in (7000, 70_000, 700_000):
        for f in (30, 60, 120):
            s = run(ExperimentConfig("geom-sum", samples=args.samples, master_seed=args.seed,
                                     n=n, f=f, eps=args.eps)).summary
            print(f"{n:>8} {f:>5} {s['Y_mean']:>10.2f} {s['exact_mean']:>10.2f} "
                  f"{s['center']:>10.2f} {s['Y_rel_err_center']:>7.4f} "
                  f"{s['frac_outside_eps_center']:>7.4f} {s['frac_outside_eps_exact_mean']:>7.4f}")


if __name__ == "__main__":
    main()
