"""Command line entry point: ``robotcrawler <subcommand> ...``.

Exit status is 0 only when every violation counter of the run is zero;
2 signals a failed run (a partial report flagged invalid is still written).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .crawler import (CrawlError, Weighting, audit_trace, bonato_bound, crawl, crawl_kpartite, jump_numbers,
                      surplus)
from .exact import DEFAULT_LIMIT, exact_stats, exact_stats_kpartite
from .experiments import ExperimentConfig, ExperimentError, default_workers, run
from .graph import PartiteSpec, build_kpartite, diagnostics, load_edge_list
from .report import emit_report
from .theory import predict_RC, predict_rc, predict_rcbar


def _graph_args(p):
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--kpartite", type=PartiteSpec.parse, metavar="A,B,C",
                   help="class sizes of a complete k-partite graph")
    g.add_argument("--edges", type=Path, metavar="FILE", help="edge-list file ('u v' per line)")


def _run_args(p, fmt="json"):
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0, help="master seed (64-bit)")
    p.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $ROBOTCRAWLER_WORKERS or 1)")
    p.add_argument("--out", type=Path, default=None, help="report file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=fmt)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robotcrawler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("crawl", help="run one crawl and print its trace as JSON")
    _graph_args(p)
    w = p.add_mutually_exclusive_group()
    w.add_argument("--weights", type=Path, metavar="FILE", help="one rank per line, vertex order")
    w.add_argument("--seed", type=int, default=0, help="seed for a uniform random weighting")
    p.add_argument("--step-cap", type=int, default=None)

    p = sub.add_parser("exact", help="rc, RC and exact mean by enumerating all weightings")
    _graph_args(p)
    p.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
    p.add_argument("--allow-large", action="store_true", help="ignore the size limit")
    p.add_argument("--workers", type=int, default=None)

    p = sub.add_parser("mc", help="Monte Carlo over uniform weightings of a k-partite graph")
    p.add_argument("--kpartite", type=PartiteSpec.parse, required=True, metavar="A,B,C")
    _run_args(p)

    p = sub.add_parser("er", help="crawl ratio on sparse G(n, p), p = f ln(n)/n")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", type=float, default=30.0)
    p.add_argument("--eps", type=float, default=0.05)
    _run_args(p)

    p = sub.add_parser("bridge", help="records of uniform random walk bridges")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--n1", type=int, required=True)
    _run_args(p, fmt="csv")

    p = sub.add_parser("geomsum", help="draws of the geometric sum Y")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--f", type=float, default=30.0)
    p.add_argument("--eps", type=float, default=0.1)
    _run_args(p)

    p = sub.add_parser("predict", help="closed-form rc, RC and mean prediction")
    p.add_argument("--kpartite", type=PartiteSpec.parse, required=True, metavar="A,B,C")
    return parser


def _cmd_crawl(args) -> int:
    if args.kpartite is not None:
        spec = args.kpartite
        g = build_kpartite(spec)
    else:
        spec = None
        g = load_edge_list(args.edges.read_bytes())
    if args.weights is not None:
        w0 = Weighting.loads(args.weights.read_text())
    else:
        w0 = Weighting.random(g.n, args.seed)
    trace = crawl(g, w0, step_cap=args.step_cap)
    out = json.loads(trace.to_json(spec))
    problems = audit_trace(g, w0, trace)
    out["audit_violations"] = len(problems)
    out["jump_numbers"] = jump_numbers(g, w0, trace).tolist()
    diag = diagnostics(g)
    if diag.diameter_exact:
        out["bonato_bound"] = bonato_bound(diag, g.n)
    bad = len(problems)
    if spec is not None:
        if not np.array_equal(crawl_kpartite(spec, w0).visits, trace.visits):
            bad += 1
        bad += 0 if surplus(trace, spec).identity_holds else 1
    print(json.dumps(out))
    return 0 if bad == 0 else 1


def _cmd_exact(args) -> int:
    workers = args.workers or default_workers()
    if args.kpartite is not None:
        spec = args.kpartite
        g = build_kpartite(spec)
        if g.n <= args.limit or not args.allow_large:
            stats = exact_stats(g, limit=args.limit, workers=workers)
        else:
            stats = exact_stats_kpartite(spec, limit=g.n)
    else:
        spec = None
        stats = exact_stats(load_edge_list(args.edges.read_bytes()), limit=args.limit,
                            allow_large=args.allow_large, workers=workers)
    out = stats.to_dict()
    bad = 0
    if spec is not None and spec.k >= 3:
        out["predict_rc"] = predict_rc(spec)
        out["predict_RC"] = predict_RC(spec)
        bad = int(out["rc"] != out["predict_rc"]) + int(out["RC"] != out["predict_RC"])
    print(json.dumps(out))
    return 0 if bad == 0 else 1


def _cmd_predict(args) -> int:
    spec = args.kpartite
    print(json.dumps({
        "sizes": list(spec.sizes),
        "rc": predict_rc(spec),
        "RC": predict_RC(spec),
        "rcbar": asdict(predict_rcbar(spec)),
    }))
    return 0


def _experiment(args) -> ExperimentConfig:
    common = dict(samples=args.samples, master_seed=args.seed,
                  workers=args.workers or default_workers())
    if args.command == "mc":
        return ExperimentConfig("kpartite-mc", sizes=args.kpartite.sizes, **common)
    if args.command == "er":
        return ExperimentConfig("er-ratio", n=args.n, f=args.f, eps=args.eps, **common)
    if args.command == "bridge":
        return ExperimentConfig("bridge", n=args.n, n1=args.n1, **common)
    return ExperimentConfig("geom-sum", n=args.n, f=args.f, eps=args.eps, **common)


def _cmd_experiment(args) -> int:
    cfg = _experiment(args)
    try:
        rec = run(cfg)
    except ExperimentError as exc:
        text = emit_report(exc.partial, args.format, args.out)
        if args.out is None:
            sys.stdout.write(text)
        print(f"error: {exc}", file=sys.stderr)
        return 2
    text = emit_report(rec, args.format, args.out)
    if args.out is None:
        sys.stdout.write(text)
    return 0 if rec.violations == 0 else 1


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"crawl": _cmd_crawl, "exact": _cmd_exact, "predict": _cmd_predict}
    try:
        return handlers.get(args.command, _cmd_experiment)(args)
    except (ValueError, OSError, CrawlError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
