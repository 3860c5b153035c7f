"""Seeded Monte Carlo experiments with per-sample seed streams.

Every sample ``i`` gets its own 64-bit seed derived from the master seed,
and samples are processed in fixed-size chunks, so a run is fully
determined by ``(config, master_seed)`` whatever the worker count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from numba import njit

from .crawler import Weighting, _crawl_kpartite, bonato_bound, crawl, jump_numbers
from .exact import exact_stats, exact_stats_kpartite
from .graph import PartiteSpec, build_kpartite, diagnostics, kpartite_diagnostics, sample_gnp
from .theory import (bridge_record_mean, bridge_record_tail, er_edge_probability,
                     geom_sum_center, geom_sum_moments, predict_er_steps, predict_RC,
                     predict_rc, predict_rcbar, sample_geom_sum_Y)

SCHEMA_VERSION = 1
KINDS = ("kpartite-mc", "kpartite-exact", "er-ratio", "bridge", "geom-sum")
WORKERS_ENV = "ROBOTCRAWLER_WORKERS"
Z95 = 1.959963984540054
CHUNK = 1024
PMF_MAX_N = 64

_MASK64 = (1 << 64) - 1


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


def split_seed(master_seed: int, index) -> np.ndarray:
    """SplitMix64 of ``master + (i + 1) * golden``: a bijection in ``i``, hence collision-free."""
    idx = np.atleast_1d(np.asarray(index, dtype=np.uint64))
    with np.errstate(over="ignore"):
        z = np.uint64(master_seed & _MASK64) + (idx + np.uint64(1)) * np.uint64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        z = z ^ (z >> np.uint64(31))
    return z


@dataclass
class ExperimentConfig:
    kind: str
    samples: int = 1000
    master_seed: int = 0
    sizes: tuple[int, ...] | None = None
    n: int | None = None
    f: float | None = None
    n1: int | None = None
    eps: float = 0.05
    workers: int = field(default_factory=default_workers)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.samples < 1 and self.kind != "kpartite-exact":
            raise ValueError("samples must be >= 1")
        self.master_seed &= _MASK64
        if self.sizes is not None:
            self.sizes = PartiteSpec(tuple(self.sizes)).sizes

    def public(self) -> dict:
        """Fields that determine the results (worker count excluded)."""
        d = asdict(self)
        d.pop("workers")
        if d["sizes"] is not None:
            d["sizes"] = list(d["sizes"])
        return d


@dataclass
class ResultRecord:
    kind: str
    config: dict
    columns: list[str]
    rows: list[list]
    summary: dict
    valid: bool = True

    @property
    def violations(self) -> int:
        return sum(v for k, v in self.summary.items() if k.startswith("violations_"))


def moment_summary(prefix: str, total: int, total_sq: int, count: int) -> dict:
    """Mean, sample std and normal-approximation 95% CI from exact integer sums."""
    mean = Fraction(total, count)
    out = {f"{prefix}_mean": float(mean)}
    if count > 1:
        var = (Fraction(total_sq) - Fraction(total * total, count)) / (count - 1)
        std = math.sqrt(max(float(var), 0.0))
    else:
        std = 0.0
    half = Z95 * std / math.sqrt(count)
    out[f"{prefix}_std"] = std
    out[f"{prefix}_ci_low"] = float(mean) - half
    out[f"{prefix}_ci_high"] = float(mean) + half
    out[f"{prefix}_ci_halfwidth"] = half
    return out


def int_summary(prefix: str, values: np.ndarray) -> dict:
    vals = [int(v) for v in values]
    out = moment_summary(prefix, sum(vals), sum(v * v for v in vals), len(vals))
    out[f"{prefix}_min"] = min(vals)
    out[f"{prefix}_max"] = max(vals)
    return out


class ExperimentError(RuntimeError):
    """A worker failed; ``partial`` holds the rows finished before it, flagged invalid."""

    def __init__(self, message: str, partial: ResultRecord):
        super().__init__(message)
        self.partial = partial


def _map_chunks(fn, cfg: ExperimentConfig, chunk: int, columns: list[str]) -> list[list]:
    tasks = [(cfg, lo, min(lo + chunk, cfg.samples)) for lo in range(0, cfg.samples, chunk)]
    rows: list[list] = []
    try:
        if cfg.workers > 1 and len(tasks) > 1:
            with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
                for part in pool.map(fn, tasks):
                    rows.extend(part)
        else:
            for task in tasks:
                rows.extend(fn(task))
    except Exception as exc:
        partial = ResultRecord(cfg.kind, cfg.public(), columns, rows,
                               {"error": repr(exc), "completed_samples": len(rows)}, valid=False)
        raise ExperimentError(f"{cfg.kind} run failed: {exc!r}", partial) from exc
    return rows


def _column(rows: list[list], j: int) -> np.ndarray:
    return np.array([r[j] for r in rows])


# -- complete k-partite Monte Carlo ------------------------------------------

@njit(cache=True)
def _mc_kpartite_batch(orders, offsets):
    # orders[s] lists vertices dirtiest first for sample s
    samples, n = orders.shape
    k = offsets.size - 1
    labels = np.empty(n, dtype=np.int64)
    for c in range(k):
        labels[offsets[c]:offsets[c + 1]] = c
    Ts = np.empty(samples, dtype=np.int64)
    S = np.zeros((samples, k), dtype=np.int64)
    M = np.zeros((samples, k), dtype=np.int64)
    rank = np.empty(n, dtype=np.int64)
    x = np.zeros(k, dtype=np.int64)
    for s in range(samples):
        for j in range(n):
            rank[orders[s, j]] = j - n
        _, T, fct = _crawl_kpartite(rank, offsets)
        Ts[s] = T
        for i in range(k):
            last_outside = 0
            for v in range(n):
                if (v < offsets[i] or v >= offsets[i + 1]) and fct[v] > last_outside:
                    last_outside = fct[v]
            for v in range(offsets[i], offsets[i + 1]):
                if fct[v] > last_outside:
                    S[s, i] += 1
        # class bridges walk from the cleanest vertex to the dirtiest
        x[:] = 0
        for t in range(n):
            c = labels[orders[s, n - 1 - t]]
            for i in range(k):
                x[i] += 1 if i == c else -1
                if x[i] > M[s, i]:
                    M[s, i] = x[i]
    return Ts, S, M


def _mc_chunk(task):
    cfg, lo, hi = task
    spec = PartiteSpec(cfg.sizes)
    n = spec.n
    seeds = split_seed(cfg.master_seed, np.arange(lo, hi))
    orders = np.empty((hi - lo, n), dtype=np.int64)
    for r, s in enumerate(seeds):
        orders[r] = np.random.default_rng(int(s)).permutation(n)
    Ts, S, M = _mc_kpartite_batch(orders, np.asarray(spec.offsets, dtype=np.int64))
    lead = predict_rcbar(spec).leading_term if spec.k >= 3 else None
    return [[lo + r, int(seeds[r]), int(Ts[r])] + S[r].tolist() + M[r].tolist()
            + [float(Ts[r]) / lead if lead else None] for r in range(hi - lo)]


def run_mc_kpartite(cfg: ExperimentConfig) -> ResultRecord:
    """Uniform random weightings on a complete k-partite graph: step counts,
    surplus and class-bridge records, with theory columns when k >= 3."""
    spec = PartiteSpec(cfg.sizes)
    n, k = spec.n, spec.k
    columns = (["sample", "seed", "T"] + [f"S{i + 1}" for i in range(k)]
               + [f"m{i + 1}" for i in range(k)] + ["ratio"])
    rows = _map_chunks(_mc_chunk, cfg, CHUNK, columns)
    Ts = _column(rows, 2).astype(np.int64)
    S = np.array([r[3:3 + k] for r in rows], dtype=np.int64)
    M = np.array([r[3 + k:3 + 2 * k] for r in rows], dtype=np.int64)
    theory = k >= 3
    pred = predict_rcbar(spec) if theory else None
    Stot = S.sum(axis=1)
    bound = bonato_bound(kpartite_diagnostics(spec), n)

    summary: dict = {"n": n, "k": k, "samples": cfg.samples,
                     "sum_T": sum(int(t) for t in Ts), "sum_T2": sum(int(t) ** 2 for t in Ts)}
    summary.update(int_summary("T", Ts))
    summary.update(int_summary("S", Stot))
    for i in range(k):
        summary.update(int_summary(f"m{i + 1}", M[:, i]))
        summary[f"S{i + 1}_mean"] = float(S[:, i].mean())
    if theory:
        summary.update({
            "rc": predict_rc(spec), "RC": predict_RC(spec), "regime": pred.regime,
            "leading_term": pred.leading_term, "correction": pred.correction,
            "correction_kind": pred.correction_kind,
            "T_mean_minus_leading": summary["T_mean"] - pred.leading_term,
        })
    summary["violations_identity"] = int(np.sum(Ts != n + Stot - 1))
    summary["violations_surplus_record"] = int(np.sum(np.any(S > M, axis=1)))
    summary["violations_bonato"] = int(np.sum(Ts > bound))
    summary["violations_surplus_support"] = int(np.sum((S > 0).sum(axis=1) > 1))
    return ResultRecord(cfg.kind, cfg.public(), columns, rows, summary)


def run_exact_kpartite(cfg: ExperimentConfig) -> ResultRecord:
    spec = PartiteSpec(cfg.sizes)
    stats = (exact_stats(build_kpartite(spec)) if spec.n <= 9
             else exact_stats_kpartite(spec))
    summary = {"n": spec.n, "k": spec.k, **stats.to_dict()}
    witnesses = summary.pop("witnesses")
    summary["argmin_weighting"] = " ".join(map(str, witnesses["argmin"]))
    summary["argmax_weighting"] = " ".join(map(str, witnesses["argmax"]))
    if spec.k >= 3:
        summary["predict_rc"] = predict_rc(spec)
        summary["predict_RC"] = predict_RC(spec)
        summary["violations_theory"] = int(stats.rc != predict_rc(spec)) + int(stats.RC != predict_RC(spec))
    return ResultRecord(cfg.kind, cfg.public(), [], [], summary)


# -- sparse Erdos-Renyi ------------------------------------------------------

ER_COLUMNS = ["sample", "seed", "T", "ratio", "edges", "resamples", "max_degree", "diameter",
              "diameter_exact", "bonato_ok", "max_jump", "phase1_steps", "phase2_steps",
              "phase3_steps"]


def er_sample(n: int, f: float, seed: int) -> list:
    rng = np.random.default_rng(seed)
    p = er_edge_probability(n, f)
    g, resamples = sample_gnp(n, p, rng)
    w0 = Weighting.random(n, rng)
    trace = crawl(g, w0)
    T = trace.T
    diag = diagnostics(g)
    bonato_ok = T <= bonato_bound(diag, n) if diag.diameter_exact else None
    jumps = jump_numbers(g, w0, trace)
    # phase boundaries by cleaned-vertex count: 4n/7 cleaned, then n/7 left
    times = np.sort(trace.first_clean_time)
    end1 = int(times[math.ceil(4 * n / 7) - 1])
    end2 = int(times[n - n // 7 - 1])
    return [T, T / predict_er_steps(n, f), g.edge_count, resamples, diag.max_degree,
            diag.diameter, diag.diameter_exact, bonato_ok, int(jumps.max()), end1,
            end2 - end1, T - end2]


def _er_chunk(task):
    cfg, lo, hi = task
    seeds = split_seed(cfg.master_seed, np.arange(lo, hi))
    return [[lo + r, int(s)] + er_sample(cfg.n, cfg.f, int(s)) for r, s in enumerate(seeds)]


def run_er_experiment(cfg: ExperimentConfig) -> ResultRecord:
    """Fresh G(n, p) and fresh weighting per sample, p = f ln(n) / n."""
    predicted = predict_er_steps(cfg.n, cfg.f)
    rows = _map_chunks(_er_chunk, cfg, 1, ER_COLUMNS)
    Ts = np.array([r[2] for r in rows], dtype=np.int64)
    ratios = np.array([r[3] for r in rows])
    checked = [r for r in rows if r[9] is not None]
    summary: dict = {"n": cfg.n, "f": cfg.f, "p": er_edge_probability(cfg.n, cfg.f),
                     "samples": cfg.samples, "predicted_T": predicted, "eps": cfg.eps}
    summary.update(int_summary("T", Ts))
    summary.update({
        "ratio_mean": float(ratios.mean()),
        "ratio_std": float(ratios.std(ddof=1)) if ratios.size > 1 else 0.0,
        "ratio_min": float(ratios.min()),
        "ratio_max": float(ratios.max()),
        "ratio_mean_abs_dev": float(np.abs(ratios - 1).mean()),
        "ratio_frac_within_eps": float(np.mean(np.abs(ratios - 1) <= cfg.eps)),
        "max_jump_max": max(r[10] for r in rows),
        "resamples_total": sum(r[5] for r in rows),
        "bonato_checked": len(checked),
        "violations_bonato": sum(1 for r in checked if not r[9]),
    })
    return ResultRecord(cfg.kind, cfg.public(), ER_COLUMNS, rows, summary)


# -- bridges and the geometric sum ---------------------------------------------

@njit(cache=True)
def _bridge_records(perms, n1):
    samples, n = perms.shape
    out = np.empty(samples, dtype=np.int64)
    for s in range(samples):
        x = 0
        best = 0
        for t in range(n):
            x += 1 if perms[s, t] < n1 else -1
            if x > best:
                best = x
        out[s] = best
    return out


def _bridge_chunk(task):
    cfg, lo, hi = task
    seeds = split_seed(cfg.master_seed, np.arange(lo, hi))
    perms = np.empty((hi - lo, cfg.n), dtype=np.int64)
    for r, s in enumerate(seeds):
        perms[r] = np.random.default_rng(int(s)).permutation(cfg.n)
    ms = _bridge_records(perms, cfg.n1)
    return [[lo + r, int(seeds[r]), int(ms[r])] for r in range(hi - lo)]


def exact_record_pmf(n: int, n1: int) -> dict[int, Fraction]:
    tails = [bridge_record_tail(n, n1, j) for j in range(n1 + 2)]
    return {j: tails[j] - tails[j + 1] for j in range(n1 + 1) if tails[j] != tails[j + 1]}


def run_bridge(cfg: ExperimentConfig) -> ResultRecord:
    """Records of uniform bridges with ``n1`` up-steps out of ``n``."""
    if not 0 <= cfg.n1 <= cfg.n:
        raise ValueError("need 0 <= n1 <= n")
    rows = _map_chunks(_bridge_chunk, cfg, CHUNK, ["sample", "seed", "m"])
    ms = _column(rows, 2).astype(np.int64)
    summary: dict = {"n": cfg.n, "n1": cfg.n1, "samples": cfg.samples,
                     "sqrt_pi_n_over_8": math.sqrt(math.pi * cfg.n / 8)}
    summary.update(int_summary("m", ms))
    summary["exact_mean"] = float(bridge_record_mean(cfg.n, cfg.n1))
    if cfg.n <= PMF_MAX_N:
        exact = exact_record_pmf(cfg.n, cfg.n1)
        counts = np.bincount(ms, minlength=cfg.n1 + 1)
        tv = 0.5 * sum(abs(counts[j] / cfg.samples - float(exact.get(j, 0)))
                       for j in range(cfg.n1 + 1))
        summary["tv_distance"] = float(tv)
        for j in range(cfg.n1 + 1):
            summary[f"pmf_{j}"] = float(counts[j] / cfg.samples)
    return ResultRecord(cfg.kind, cfg.public(), ["sample", "seed", "m"], rows, summary)


def _geom_chunk(task):
    cfg, lo, hi = task
    p = er_edge_probability(cfg.n, cfg.f)
    seeds = split_seed(cfg.master_seed, np.arange(lo, hi))
    return [[lo + r, int(s), sample_geom_sum_Y(cfg.n, p, int(s))] for r, s in enumerate(seeds)]


def run_geomsum(cfg: ExperimentConfig) -> ResultRecord:
    """Draws of the geometric sum Y at p = f ln(n) / n."""
    rows = _map_chunks(_geom_chunk, cfg, CHUNK, ["sample", "seed", "Y"])
    ys = _column(rows, 2).astype(np.int64)
    p = er_edge_probability(cfg.n, cfg.f)
    center = geom_sum_center(cfg.n, cfg.f)
    mean, var = geom_sum_moments(cfg.n, p)
    summary: dict = {"n": cfg.n, "f": cfg.f, "p": p, "samples": cfg.samples, "eps": cfg.eps,
                     "center": center, "exact_mean": mean, "exact_std": math.sqrt(var)}
    summary.update(int_summary("Y", ys))
    summary["Y_rel_err_center"] = summary["Y_mean"] / center - 1
    summary["frac_outside_eps_center"] = float(np.mean(np.abs(ys - center) > cfg.eps * center))
    summary["frac_outside_eps_exact_mean"] = float(np.mean(np.abs(ys - mean) > cfg.eps * mean))
    return ResultRecord(cfg.kind, cfg.public(), ["sample", "seed", "Y"], rows, summary)


RUNNERS = {
    "kpartite-mc": run_mc_kpartite,
    "kpartite-exact": run_exact_kpartite,
    "er-ratio": run_er_experiment,
    "bridge": run_bridge,
    "geom-sum": run_geomsum,
}


def run(cfg: ExperimentConfig) -> ResultRecord:
    return RUNNERS[cfg.kind](cfg)
