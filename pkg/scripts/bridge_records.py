"""Bridge records: sampled and exact means against sqrt(pi n / 8), and the
subcritical tail bound.

    python scripts/bridge_records.py --samples 50000
"""

import argparse
import math
from fractions import Fraction

from robotcrawler.experiments import ExperimentConfig, run
from robotcrawler.theory import bridge_record_tail, record_tail_h


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=50_000)
    ap.add_argument("--seed", type=int, default=3)
    args = ap.parse_args()

    print("balanced bridges, n1 = n/2")
    print(f"{'n':>7} {'MC mean':>9} {'+-95%':>7} {'exact':>9} {'sqrt law':>9}")
    for n in (100, 400, 1600, 6400):
        s = run(ExperimentConfig("bridge", samples=args.samples, master_seed=args.seed, n=n,
                                 n1=n // 2)).summary
        print(f"{n:>7} {s['m_mean']:>9.3f} {s['m_ci_halfwidth']:>7.3f} {s['exact_mean']:>9.3f} "
              f"{s['sqrt_pi_n_over_8']:>9.3f}")

    print("\nexact tail vs 2 (c/(1-c))^j, n = 200")
    n = 200
    for n1 in (20, 50, 80):
        c = Fraction(n1, n)
        worst = max(float(bridge_record_tail(n, n1, j) / (2 * record_tail_h(c, j)))
                    for j in range(1, 30))
        print(f"  c = {float(c):.2f}: max tail / bound over j < 30 = {worst:.4f}")
    print(f"\n(sqrt(pi n / 8) at n = 10^4: {math.sqrt(math.pi * 1e4 / 8):.3f})")


if __name__ == "__main__":
    main()
