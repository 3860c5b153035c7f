"""Exhaustive rc / RC / mean over all n! weightings, plus the extremal
weightings for complete k-partite graphs."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from numba import njit

from .crawler import Weighting, _crawl_csr, _crawl_kpartite
from .graph import Graph, PartiteSpec, build_kpartite
from .theory import predict_RC, predict_rc

DEFAULT_LIMIT = 9


@dataclass(frozen=True)
class ExactStats:
    rc: int
    RC: int
    rcbar: Fraction
    argmin_weighting: Weighting
    argmax_weighting: Weighting
    weightings: int

    def to_dict(self) -> dict:
        return {
            "rc": self.rc,
            "RC": self.RC,
            "rcbar_num": self.rcbar.numerator,
            "rcbar_den": self.rcbar.denominator,
            "rcbar": float(self.rcbar),
            "weightings": self.weightings,
            "witnesses": {
                "argmin": self.argmin_weighting.rank.tolist(),
                "argmax": self.argmax_weighting.rank.tolist(),
            },
        }


@njit(cache=True)
def _next_permutation(a, lo):
    # lexicographic successor of a[lo:], in place; False once exhausted
    n = a.size
    i = n - 2
    while i >= lo and a[i] >= a[i + 1]:
        i -= 1
    if i < lo:
        return False
    j = n - 1
    while a[j] <= a[i]:
        j -= 1
    a[i], a[j] = a[j], a[i]
    a[i + 1:] = a[i + 1:][::-1].copy()
    return True


@njit(cache=True)
def _enumerate_block(indptr, indices, first):
    # all weightings whose dirtiest vertex is `first`
    n = indptr.size - 1
    order = np.empty(n, dtype=np.int64)
    order[0] = first
    j = 1
    for v in range(n):
        if v != first:
            order[j] = v
            j += 1
    rank = np.empty(n, dtype=np.int64)
    total = 0
    lo_T = np.iinfo(np.int64).max
    hi_T = -1
    lo_order = order.copy()
    hi_order = order.copy()
    while True:
        for i in range(n):
            rank[order[i]] = i - n
        _, T, _ = _crawl_csr(indptr, indices, rank, 0)
        total += T
        if T < lo_T:
            lo_T = T
            lo_order[:] = order
        if T > hi_T:
            hi_T = T
            hi_order[:] = order
        if not _next_permutation(order, 1):
            break
    return total, lo_T, hi_T, lo_order, hi_order


@njit(cache=True)
def _enumerate_classes(offsets, mult):
    # distinct class-label sequences (dirtiest first); each stands for
    # `mult` weightings that differ only by relabelling inside classes
    k = offsets.size - 1
    n = offsets[k]
    labels = np.empty(n, dtype=np.int64)
    for c in range(k):
        labels[offsets[c]:offsets[c + 1]] = c
    rank = np.empty(n, dtype=np.int64)
    nxt = np.empty(k, dtype=np.int64)
    total = 0
    count = 0
    lo_T = np.iinfo(np.int64).max
    hi_T = -1
    lo_rank = rank.copy()
    hi_rank = rank.copy()
    while True:
        for c in range(k):
            nxt[c] = offsets[c]
        for i in range(n):
            c = labels[i]
            rank[nxt[c]] = i - n
            nxt[c] += 1
        _, T, _ = _crawl_kpartite(rank, offsets)
        total += T * mult
        count += mult
        if T < lo_T:
            lo_T = T
            lo_rank[:] = rank
        if T > hi_T:
            hi_T = T
            hi_rank[:] = rank
        if not _next_permutation(labels, 0):
            break
    return total, count, lo_T, hi_T, lo_rank, hi_rank


def _block(args):
    indptr, indices, first = args
    return _enumerate_block(indptr, indices, first)


def exact_stats(g: Graph, limit: int = DEFAULT_LIMIT, allow_large: bool = False,
                workers: int = 1) -> ExactStats:
    """rc, RC and exact mean of RC(G, w0) over every weighting of ``g``.

    The permutation space is split into n blocks by dirtiest vertex; sums
    are exact integers, so the block order does not matter.
    """
    n = g.n
    if n > limit and not allow_large:
        raise ValueError(f"n = {n} exceeds the enumeration limit {limit}")
    tasks = [(g.indptr, g.indices, first) for first in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_block, tasks))
    else:
        results = [_block(t) for t in tasks]
    total = sum(int(r[0]) for r in results)
    lo = min(results, key=lambda r: r[1])
    hi = max(results, key=lambda r: r[2])
    return ExactStats(
        rc=int(lo[1]),
        RC=int(hi[2]),
        rcbar=Fraction(total, math.factorial(n)),
        argmin_weighting=Weighting.from_order(lo[3]),
        argmax_weighting=Weighting.from_order(hi[4]),
        weightings=math.factorial(n),
    )


def exact_stats_kpartite(spec: PartiteSpec, limit: int = 16) -> ExactStats:
    """Same quantities for ``build_kpartite(spec)`` via the class-symmetry quotient."""
    n = spec.n
    if n > limit:
        raise ValueError(f"n = {n} exceeds the enumeration limit {limit}")
    mult = math.prod(math.factorial(s) for s in spec.sizes)
    offsets = np.asarray(spec.offsets, dtype=np.int64)
    total, count, lo_T, hi_T, lo_rank, hi_rank = _enumerate_classes(offsets, mult)
    assert count == math.factorial(n)
    return ExactStats(int(lo_T), int(hi_T), Fraction(int(total), math.factorial(n)),
                      Weighting(lo_rank), Weighting(hi_rank), math.factorial(n))


def _alternating_labels(counts: dict[int, int]) -> list[int]:
    """Class labels with no two neighbours equal, or ValueError if impossible."""
    remaining = dict(counts)
    out: list[int] = []
    last = None
    for _ in range(sum(counts.values())):
        choices = [c for c, r in remaining.items() if r > 0 and c != last]
        if not choices:
            raise ValueError("no class-alternating arrangement exists")
        c = max(choices, key=lambda c: (remaining[c], -c))
        out.append(c)
        remaining[c] -= 1
        last = c
    return out


def weighting_from_labels(spec: PartiteSpec, labels_dirtiest_first) -> Weighting:
    """Assign ranks so the t-th dirtiest vertex belongs to ``labels[t]``;
    inside a class, lower ids are dirtier."""
    offs = spec.offsets
    nxt = list(offs[:-1])
    order = []
    for c in labels_dirtiest_first:
        order.append(nxt[c])
        nxt[c] += 1
    return Weighting.from_order(order)


def _need_three(spec: PartiteSpec):
    if spec.k < 3:
        raise ValueError("constructive weightings need k >= 3")


def optimal_weighting_kpartite(spec: PartiteSpec) -> Weighting:
    """A weighting that attains rc: a Hamiltonian path when the largest class
    is at most half, otherwise the largest class takes the dirtiest ranks."""
    _need_three(spec)
    n, n1 = spec.n, spec.sizes[0]
    if 2 * n1 <= n:
        labels = _alternating_labels({c: s for c, s in enumerate(spec.sizes)})
    else:
        labels = [0] * n1 + [c for c in range(1, spec.k) for _ in range(spec.sizes[c])]
    return weighting_from_labels(spec, labels)


def worst_weighting_kpartite(spec: PartiteSpec) -> Weighting:
    """A weighting that attains RC."""
    _need_three(spec)
    n, n1, n2 = spec.n, spec.sizes[0], spec.sizes[1]
    if 2 * n2 <= n - n1:
        # rest cleaned along a Hamiltonian path first, then all of V1 is surplus
        try:
            rest = _alternating_labels({c: spec.sizes[c] for c in range(1, spec.k)})
        except ValueError:
            raise RuntimeError("engine check: residual classes cannot alternate") from None
        labels = rest + [0] * n1
    else:
        middle = [c for c in range(2, spec.k) for _ in range(spec.sizes[c])]
        labels = [1] * n2 + middle + [0] * n1
    return weighting_from_labels(spec, labels)


def check_against_theory(spec: PartiteSpec) -> dict:
    """Exhaustive rc/RC next to the closed forms (small specs)."""
    stats = exact_stats(build_kpartite(spec))
    return {"spec": str(spec), "rc": stats.rc, "RC": stats.RC,
            "predict_rc": predict_rc(spec), "predict_RC": predict_RC(spec)}
