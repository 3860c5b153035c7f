"""The robot crawler: greedy walk to the dirtiest neighbour.

Weights follow the usual convention: every vertex starts with a distinct
negative rank in ``{-n, ..., -1}`` (lower is dirtier) and is stamped with
the current time ``t >= 1`` when visited. All weights stay distinct, so
the argmin at every step is unique and no tie-breaking exists.
"""

from __future__ import annotations

import io
import json
from dataclasses import dataclass

import numpy as np
from numba import njit

from .graph import Graph, GraphDiagnostics, PartiteSpec

BOUND_MAX = 2**63 - 1


class CrawlError(RuntimeError):
    pass


@dataclass(frozen=True)
class Weighting:
    """Initial dirt ranking: ``rank[v]`` in ``{-n, ..., -1}``, a bijection."""

    rank: np.ndarray

    def __post_init__(self):
        rank = np.asarray(self.rank, dtype=np.int64)
        n = rank.size
        if n == 0 or not np.array_equal(np.sort(rank), np.arange(-n, 0)):
            raise ValueError("weighting must be a bijection onto {-n, ..., -1}")
        rank.flags.writeable = False
        object.__setattr__(self, "rank", rank)

    @property
    def n(self) -> int:
        return int(self.rank.size)

    @classmethod
    def from_order(cls, order) -> "Weighting":
        """``order[0]`` is the dirtiest vertex, ``order[-1]`` the cleanest."""
        order = np.asarray(order, dtype=np.int64)
        rank = np.empty(order.size, dtype=np.int64)
        rank[order] = np.arange(-order.size, 0)
        return cls(rank)

    @classmethod
    def random(cls, n: int, rng) -> "Weighting":
        rng = np.random.default_rng(rng)
        return cls.from_order(rng.permutation(n))

    def order(self) -> np.ndarray:
        """Vertices from dirtiest to cleanest."""
        return np.argsort(self.rank, kind="stable")

    def dumps(self) -> str:
        return "".join(f"{r}\n" for r in self.rank.tolist())

    @classmethod
    def loads(cls, text) -> "Weighting":
        if isinstance(text, bytes):
            text = text.decode()
        vals = []
        for lineno, line in enumerate(io.StringIO(text), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            try:
                vals.append(int(line))
            except ValueError:
                raise ValueError(f"line {lineno}: expected an integer rank") from None
        return cls(np.array(vals, dtype=np.int64))


@dataclass(frozen=True)
class CrawlTrace:
    """``visits[t-1]`` is the vertex visited at time ``t``; ``T`` = RC(G, w0)."""

    visits: np.ndarray
    first_clean_time: np.ndarray

    @property
    def T(self) -> int:
        return int(self.visits.size)

    @property
    def n(self) -> int:
        return int(self.first_clean_time.size)

    def to_json(self, spec: PartiteSpec | None = None) -> str:
        out = {"T": self.T, "n": self.n, "visits": self.visits.tolist()}
        if spec is not None:
            rep = surplus(self, spec)
            out["surplus"] = list(rep.per_class)
            out["S"] = rep.total
            out["identity_holds"] = rep.identity_holds
        return json.dumps(out)


@dataclass(frozen=True)
class SurplusReport:
    per_class: tuple[int, ...]
    total: int
    identity_holds: bool


@njit(cache=True)
def _crawl_csr(indptr, indices, rank, step_cap):
    n = rank.size
    w = rank.copy()
    fct = np.zeros(n, dtype=np.int64)
    cap = max(4 * n, 16)
    visits = np.empty(cap, dtype=np.int64)
    v = np.argmin(rank)
    t = 0
    dirty = n
    while True:
        t += 1
        if step_cap > 0 and t > step_cap:
            return visits[:t - 1], -1, fct
        if t > cap:
            grown = np.empty(2 * cap, dtype=np.int64)
            grown[:cap] = visits
            visits = grown
            cap *= 2
        visits[t - 1] = v
        if w[v] < 0:
            dirty -= 1
            fct[v] = t
        w[v] = t
        if dirty == 0:
            break
        best = -1
        bw = np.iinfo(np.int64).max
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if w[u] < bw:
                bw = w[u]
                best = u
        v = best
    return visits[:t], t, fct


@njit(cache=True)
def _crawl_kpartite(rank, offsets):
    # In a complete k-partite graph the neighbours of v are every vertex
    # outside its class, and a visited vertex becomes the cleanest of its
    # class, so each class behaves as a ring ordered by current weight.
    n = rank.size
    k = offsets.size - 1
    ring = np.empty(n, dtype=np.int64)
    head = np.zeros(k, dtype=np.int64)
    for c in range(k):
        lo, hi = offsets[c], offsets[c + 1]
        seg = np.argsort(rank[lo:hi])
        for j in range(hi - lo):
            ring[lo + j] = lo + seg[j]
    w = rank.copy()
    fct = np.zeros(n, dtype=np.int64)
    visits = np.empty(2 * n, dtype=np.int64)
    start = np.argmin(rank)
    c = 0
    while start >= offsets[c + 1]:
        c += 1
    t = 0
    dirty = n
    while True:
        lo = offsets[c]
        size = offsets[c + 1] - lo
        v = ring[lo + head[c]]
        head[c] = (head[c] + 1) % size
        t += 1
        visits[t - 1] = v
        if w[v] < 0:
            dirty -= 1
            fct[v] = t
        w[v] = t
        if dirty == 0:
            break
        nc = -1
        bw = np.iinfo(np.int64).max
        for j in range(k):
            if j == c:
                continue
            u = ring[offsets[j] + head[j]]
            if w[u] < bw:
                bw = w[u]
                nc = j
        c = nc
    return visits[:t], t, fct


def crawl(g: Graph, w0: Weighting, step_cap: int | None = None) -> CrawlTrace:
    """Run the crawler on ``g`` from ``w0`` and return the full trace."""
    if w0.n != g.n:
        raise ValueError(f"weighting has {w0.n} entries, graph has {g.n} vertices")
    visits, T, fct = _crawl_csr(g.indptr, g.indices, w0.rank, step_cap or 0)
    if T < 0:
        raise CrawlError(f"step cap {step_cap} exceeded")
    return CrawlTrace(visits.copy(), fct)


def crawl_kpartite(spec: PartiteSpec, w0: Weighting) -> CrawlTrace:
    """Same process as :func:`crawl` on ``build_kpartite(spec)``, in O(k) per step."""
    if w0.n != spec.n:
        raise ValueError("weighting size does not match the class sizes")
    visits, _, fct = _crawl_kpartite(w0.rank, np.asarray(spec.offsets, dtype=np.int64))
    return CrawlTrace(visits.copy(), fct)


def kpartite_steps(rank: np.ndarray, offsets: np.ndarray) -> tuple[int, np.ndarray]:
    """Step count and first-clean times only; the Monte Carlo hot path."""
    _, T, fct = _crawl_kpartite(rank, offsets)
    return int(T), fct


@njit(cache=True)
def _surplus(fct, offsets):
    k = offsets.size - 1
    out = np.zeros(k, dtype=np.int64)
    for i in range(k):
        last_outside = 0
        for v in range(fct.size):
            if (v < offsets[i] or v >= offsets[i + 1]) and fct[v] > last_outside:
                last_outside = fct[v]
        for v in range(offsets[i], offsets[i + 1]):
            if fct[v] > last_outside:
                out[i] += 1
    return out


def surplus_counts(fct: np.ndarray, offsets: np.ndarray) -> np.ndarray:
    return _surplus(fct, offsets)


def surplus(trace: CrawlTrace, spec: PartiteSpec) -> SurplusReport:
    """Per-class surplus: vertices of class i still dirty once every other class is clean."""
    if trace.n != spec.n:
        raise ValueError(f"trace has {trace.n} vertices, spec has {spec.n}")
    labels = spec.labels()
    same = labels[trace.visits[1:]] == labels[trace.visits[:-1]]
    if np.any(same):
        raise ValueError("trace moves inside a class: not a crawl on this k-partite layout")
    per = _surplus(trace.first_clean_time, np.asarray(spec.offsets, dtype=np.int64))
    total = int(per.sum())
    return SurplusReport(tuple(int(x) for x in per), total,
                         trace.T == spec.n + total - 1)


@njit(cache=True)
def _jump_numbers(visits, fct, rank):
    # J[v] = moves, before v is first cleaned, onto a vertex cleaner than v at
    # that moment: either a revisit, or a first visit to an initially cleaner
    # vertex. Fenwick tree over ranks counts the latter.
    n = fct.size
    T = visits.size
    tree = np.zeros(n + 1, dtype=np.int64)
    jumps = np.zeros(n, dtype=np.int64)
    seen = np.zeros(n, dtype=np.bool_)
    revisits = 0
    firsts = 0
    for t in range(T):
        v = visits[t]
        if not seen[v]:
            # pos in 1..n, larger means initially cleaner
            pos = rank[v] + n + 1
            below = 0
            i = pos
            while i > 0:
                below += tree[i]
                i -= i & (-i)
            jumps[v] = revisits + (firsts - below)
            i = pos
            while i <= n:
                tree[i] += 1
                i += i & (-i)
            firsts += 1
            seen[v] = True
        else:
            revisits += 1
    return jumps


def jump_numbers(g: Graph, w0: Weighting, trace: CrawlTrace) -> np.ndarray:
    """Jump number of every vertex.

    Each counted move lands on a vertex that was cleaner than ``v`` at the
    time, which shows the crawler's position had no edge to ``v``.
    """
    if not (g.n == w0.n == trace.n):
        raise ValueError("graph, weighting and trace sizes differ")
    return _jump_numbers(trace.visits, trace.first_clean_time, w0.rank)


def bonato_bound(diag: GraphDiagnostics, n: int) -> int:
    """n (max_degree + 1) ** diameter, saturating at BOUND_MAX."""
    if not diag.diameter_exact:
        raise ValueError("bound needs an exact diameter")
    base = diag.max_degree + 1
    value = n
    for _ in range(diag.diameter):
        value *= base
        if value >= BOUND_MAX:
            return BOUND_MAX
    return value


def audit_trace(g: Graph, w0: Weighting, trace: CrawlTrace) -> list[str]:
    """Replay ``trace`` in pure Python and report every rule violation."""
    problems = []
    n = g.n
    w = w0.rank.tolist()
    visits = trace.visits.tolist()
    if not visits:
        return ["empty trace"]
    if visits[0] != int(np.argmin(w0.rank)):
        problems.append("first visit is not the dirtiest vertex")
    fct = [0] * n
    for t, v in enumerate(visits, start=1):
        if t > 1:
            prev = visits[t - 2]
            nb = g.neighbors(prev).tolist()
            if v not in nb:
                problems.append(f"t={t}: {v} is not a neighbour of {prev}")
            else:
                weights = [w[u] for u in nb]
                lowest = min(weights)
                if weights.count(lowest) != 1:
                    problems.append(f"t={t}: argmin not unique")
                if w[v] != lowest:
                    problems.append(f"t={t}: moved to {v}, dirtiest neighbour has weight {lowest}")
        if w[v] < 0:
            fct[v] = t
        w[v] = t
        all_clean = min(w) > 0
        if all_clean and t != len(visits):
            problems.append(f"t={t}: all clean but trace continues")
    if min(w) <= 0:
        problems.append("trace ends with dirty vertices")
    if fct != trace.first_clean_time.tolist():
        problems.append("first_clean_time does not match the replay")
    return problems
