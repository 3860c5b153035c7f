"""Crawl-length ratio T / (n + n/f) on sparse G(n, p), p = f ln(n) / n.

Sweeps n at fixed f and f at fixed n; one CSV report per point when --out is set.

    python scripts/er_sweep.py --samples 20 --ns 2000 5000 10000 --fs 30 60 90 120
"""

import argparse
from pathlib import Path

from robotcrawler.experiments import ExperimentConfig, run
from robotcrawler.report import emit_report


def point(n, f, args):
    rec = run(ExperimentConfig("er-ratio", samples=args.samples, master_seed=args.seed, n=n,
                               f=f, workers=args.workers))
    if args.out:
        emit_report(rec, "csv", args.out / f"er_n{n}_f{f:g}.csv")
    s = rec.summary
    print(f"{n:>7} {f:>6g} {s['ratio_mean']:>8.4f} {s['ratio_min']:>8.4f} {s['ratio_max']:>8.4f} "
          f"{s['ratio_mean_abs_dev']:>9.4f} {s['max_jump_max']:>6} {s['violations_bonato']:>4}",
          flush=True)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--samples", type=int, default=20)
    ap.add_argument("--seed", type=int, default=2)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--ns", type=int, nargs="+", default=[2000, 5000, 10_000])
    ap.add_argument("--fs", type=float, nargs="+", default=[30, 45, 60, 90, 120])
    ap.add_argument("--f", type=float, default=30, help="f used for the n sweep")
    ap.add_argument("--n", type=int, default=5000, help="n used for the f sweep")
    ap.add_argument("--out", type=Path, default=None)
    args = ap.parse_args()
    if args.out:
        args.out.mkdir(parents=True, exist_ok=True)

    print(f"{'n':>7} {'f':>6} {'mean':>8} {'min':>8} {'max':>8} {'|r-1|':>9} {'maxJ':>6} {'bad':>4}")
    for n in args.ns:
        point(n, args.f, args)
    for f in args.fs:
        if f != args.f or args.n not in args.ns:
            point(args.n, f, args)


if __name__ == "__main__":
    main()
