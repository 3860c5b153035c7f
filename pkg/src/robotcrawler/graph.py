"""Graphs the crawler runs on: complete k-partite graphs, sparse G(n, p)
samples and edge-list files.

Graphs are stored in CSR form (``indptr``/``indices``) with each
neighbour list sorted ascending, which is what the numba kernels consume.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, TextIO

import numpy as np
from numba import njit

EXACT_DIAMETER_LIMIT = 10_000
DEFAULT_RESAMPLE_CAP = 100


class GraphError(ValueError):
    """Invalid graph input (parse failure, self-loop, duplicate edge, disconnected)."""


class DisconnectedGraphError(GraphError):
    pass


@dataclass(frozen=True)
class Graph:
    n: int
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    def __post_init__(self):
        self.indptr.flags.writeable = False
        self.indices.flags.writeable = False

    @property
    def edge_count(self) -> int:
        return int(self.indices.size // 2)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    @property
    def adjacency(self) -> list[list[int]]:
        return [self.neighbors(v).tolist() for v in range(self.n)]

    def edges(self) -> Iterable[tuple[int, int]]:
        for u in range(self.n):
            for v in self.neighbors(u):
                if u < v:
                    yield u, int(v)

    @classmethod
    def from_edges(cls, n: int, edges, check_connected: bool = True) -> "Graph":
        """Build a canonical graph from an iterable or (m, 2) array of pairs.

        Raises GraphError on self-loops, duplicates or out-of-range ids and
        DisconnectedGraphError when ``check_connected`` is set.
        """
        arr = np.asarray(list(edges) if not isinstance(edges, np.ndarray) else edges,
                         dtype=np.int64).reshape(-1, 2)
        if n < 1:
            raise GraphError("graph needs at least one vertex")
        if arr.size and (arr.min() < 0 or arr.max() >= n):
            raise GraphError(f"vertex id out of range [0, {n})")
        if np.any(arr[:, 0] == arr[:, 1]):
            bad = arr[arr[:, 0] == arr[:, 1]][0]
            raise GraphError(f"self-loop at vertex {bad[0]}")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        key = lo * n + hi
        uniq, counts = np.unique(key, return_counts=True)
        if np.any(counts > 1):
            dup = uniq[counts > 1][0]
            raise GraphError(f"duplicate edge ({dup // n}, {dup % n})")
        g = _csr_from_pairs(n, lo, hi)
        if check_connected and not is_connected(g):
            raise DisconnectedGraphError("graph is not connected")
        return g


def _csr_from_pairs(n: int, lo: np.ndarray, hi: np.ndarray) -> Graph:
    src = np.concatenate([lo, hi])
    dst = np.concatenate([hi, lo])
    order = np.lexsort((dst, src))
    src, dst = src[order], dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return Graph(n, indptr, dst.astype(np.int64))


@dataclass(frozen=True)
class PartiteSpec:
    """Class sizes of a complete k-partite graph, stored non-increasing.

    Class ``i`` (0-based) occupies the vertex ids ``offsets[i]:offsets[i+1]``.
    """

    sizes: tuple[int, ...]

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        if len(sizes) < 2:
            raise ValueError("a k-partite spec needs k >= 2 classes")
        if any(s < 1 for s in sizes):
            raise ValueError("class sizes must be positive")
        object.__setattr__(self, "sizes", tuple(sorted(sizes, reverse=True)))

    @classmethod
    def parse(cls, text: str) -> "PartiteSpec":
        return cls(tuple(int(x) for x in text.replace(" ", "").split(",") if x))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def k(self) -> int:
        return len(self.sizes)

    @property
    def fractions(self) -> tuple[Fraction, ...]:
        n = self.n
        return tuple(Fraction(s, n) for s in self.sizes)

    @property
    def offsets(self) -> tuple[int, ...]:
        out = [0]
        for s in self.sizes:
            out.append(out[-1] + s)
        return tuple(out)

    def labels(self) -> np.ndarray:
        """Class index of every vertex under the contiguous layout."""
        return np.repeat(np.arange(self.k, dtype=np.int64), self.sizes)

    def class_of(self, v: int) -> int:
        offs = self.offsets
        for i in range(self.k):
            if v < offs[i + 1]:
                return i
        raise IndexError(v)

    def __str__(self):
        return ",".join(map(str, self.sizes))


@dataclass(frozen=True)
class GraphDiagnostics:
    max_degree: int
    diameter: int
    connected: bool
    diameter_exact: bool = True


def kpartite_diagnostics(spec: PartiteSpec) -> GraphDiagnostics:
    """Closed-form diagnostics of the complete k-partite graph (no construction)."""
    n = spec.n
    diameter = 1 if spec.sizes[0] == 1 else 2
    return GraphDiagnostics(n - spec.sizes[-1], diameter, True, True)


def build_kpartite(spec: PartiteSpec) -> Graph:
    labels = spec.labels()
    n = spec.n
    u, v = np.triu_indices(n, k=1)
    keep = labels[u] != labels[v]
    return _csr_from_pairs(n, u[keep], v[keep])


def _pair_index_to_uv(idx: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # row i starts at i*(2n - i - 1)/2 in the lexicographic stream of pairs i < j
    b = 2 * n - 1
    i = np.floor((b - np.sqrt(b * b - 8.0 * idx)) / 2).astype(np.int64)
    start = i * (2 * n - i - 1) // 2
    # float rounding can land one row off either way
    too_far = start > idx
    i[too_far] -= 1
    start = i * (2 * n - i - 1) // 2
    nxt = (i + 1) * (2 * n - i - 2) // 2
    behind = idx >= nxt
    i[behind] += 1
    start = i * (2 * n - i - 1) // 2
    j = idx - start + i + 1
    return i, j


def _gnp_pairs(n: int, p: float, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    total = n * (n - 1) // 2
    expected = total * p
    batch = int(expected + 6 * math.sqrt(expected + 1) + 16)
    chunks = []
    pos = -1
    while True:
        gaps = rng.geometric(p, size=batch)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= total:
            chunks.append(idx[idx < total])
            break
        chunks.append(idx)
        pos = int(idx[-1])
    idx = np.concatenate(chunks)
    return _pair_index_to_uv(idx, n)


def sample_gnp(n: int, p: float, seed=None, policy: str = "resample",
               resample_cap: int = DEFAULT_RESAMPLE_CAP) -> tuple[Graph, int]:
    """Sample a connected G(n, p) graph by geometric skipping over vertex pairs.

    Returns ``(graph, resample_count)``. With ``policy="fail"`` a
    disconnected draw raises DisconnectedGraphError; with ``"resample"``
    fresh draws continue from the same seeded stream, up to ``resample_cap``.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if n < 2:
        raise ValueError("n must be at least 2")
    if policy not in ("resample", "fail"):
        raise ValueError(f"unknown connectivity policy {policy!r}")
    rng = np.random.default_rng(seed)
    resamples = 0
    while True:
        u, v = _gnp_pairs(n, p, rng)
        g = _csr_from_pairs(n, u, v)
        if is_connected(g):
            return g, resamples
        if policy == "fail":
            raise DisconnectedGraphError(f"G({n}, {p}) sample is disconnected")
        resamples += 1
        if resamples > resample_cap:
            raise DisconnectedGraphError(
                f"no connected sample after {resample_cap} resamples")


def load_edge_list(source) -> Graph:
    """Parse ``u v`` lines (0-based ids; blanks and ``#`` comments skipped).

    ``source`` may be bytes, str or a text stream. The vertex count is one
    more than the largest id seen.
    """
    if isinstance(source, bytes):
        source = source.decode()
    stream: TextIO = io.StringIO(source) if isinstance(source, str) else source
    pairs = []
    seen = set()
    for lineno, raw in enumerate(stream, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphError(f"line {lineno}: expected 'u v', got {raw.strip()!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise GraphError(f"line {lineno}: non-integer vertex id in {raw.strip()!r}") from None
        if u < 0 or v < 0:
            raise GraphError(f"line {lineno}: negative vertex id")
        if u == v:
            raise GraphError(f"line {lineno}: self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"line {lineno}: duplicate edge {key}")
        seen.add(key)
        pairs.append(key)
    if not pairs:
        raise GraphError("edge list is empty")
    n = max(max(p) for p in pairs) + 1
    return Graph.from_edges(n, pairs)


def dump_edge_list(g: Graph) -> str:
    return "".join(f"{u} {v}\n" for u, v in g.edges())


@njit(cache=True)
def _bfs(indptr, indices, src, dist):
    n = dist.size
    for i in range(n):
        dist[i] = -1
    queue = np.empty(n, dtype=np.int64)
    queue[0] = src
    dist[src] = 0
    head, tail = 0, 1
    while head < tail:
        v = queue[head]
        head += 1
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if dist[u] < 0:
                dist[u] = dist[v] + 1
                queue[tail] = u
                tail += 1
    return tail


def bfs_distances(g: Graph, src: int) -> np.ndarray:
    dist = np.empty(g.n, dtype=np.int64)
    _bfs(g.indptr, g.indices, src, dist)
    return dist


def is_connected(g: Graph) -> bool:
    dist = np.empty(g.n, dtype=np.int64)
    return _bfs(g.indptr, g.indices, 0, dist) == g.n


@njit(cache=True)
def _diameter_all_bfs(indptr, indices, n):
    dist = np.empty(n, dtype=np.int64)
    best = 0
    for s in range(n):
        _bfs(indptr, indices, s, dist)
        for i in range(n):
            if dist[i] > best:
                best = dist[i]
    return best


@njit(cache=True)
def _diameter_bitset(indptr, indices, n):
    # all-source BFS run in parallel: row v holds the ball of radius r around v
    words = (n + 63) // 64
    ball = np.zeros((n, words), dtype=np.uint64)
    nxt = np.zeros((n, words), dtype=np.uint64)
    full = np.zeros(words, dtype=np.uint64)
    for i in range(n):
        full[i >> 6] |= np.uint64(1) << np.uint64(i & 63)
    for v in range(n):
        ball[v, v >> 6] |= np.uint64(1) << np.uint64(v & 63)
    active = np.arange(n)
    n_active = n
    r = 0
    while True:
        m = 0
        for a in range(n_active):
            v = active[a]
            done = True
            for w in range(words):
                if ball[v, w] != full[w]:
                    done = False
                    break
            if not done:
                active[m] = v
                m += 1
        n_active = m
        if n_active == 0:
            return r
        for a in range(n_active):
            v = active[a]
            for w in range(words):
                nxt[v, w] = ball[v, w]
            for k in range(indptr[v], indptr[v + 1]):
                u = indices[k]
                for w in range(words):
                    nxt[v, w] |= ball[u, w]
        for a in range(n_active):
            v = active[a]
            for w in range(words):
                ball[v, w] = nxt[v, w]
        r += 1


def _double_sweep(g: Graph, start: int = 0) -> int:
    dist = bfs_distances(g, start)
    far = int(np.argmax(dist))
    dist = bfs_distances(g, far)
    return int(dist.max())


def diagnostics(g: Graph, exact_limit: int = EXACT_DIAMETER_LIMIT) -> GraphDiagnostics:
    """Maximum degree and diameter.

    The diameter is exact for ``n <= exact_limit``; above that a double
    BFS sweep gives a lower bound and ``diameter_exact`` is False.
    """
    degs = np.diff(g.indptr)
    max_deg = int(degs.max()) if g.n else 0
    if not is_connected(g):
        return GraphDiagnostics(max_deg, -1, False, False)
    if g.n == 1:
        return GraphDiagnostics(0, 0, True, True)
    lower = _double_sweep(g)
    if g.n > exact_limit:
        return GraphDiagnostics(max_deg, lower, True, False)
    # bitset sweeps cost ~diameter * m * n/64; plain BFS costs n * m
    if lower <= 32:
        d = int(_diameter_bitset(g.indptr, g.indices, g.n))
    else:
        d = int(_diameter_all_bfs(g.indptr, g.indices, g.n))
    return GraphDiagnostics(max_deg, d, True, True)


def canonical_audit(g: Graph) -> list[str]:
    """Return a list of canonical-form violations (empty when the graph is sound)."""
    problems = []
    if g.indptr.size != g.n + 1 or g.indptr[0] != 0 or g.indptr[-1] != g.indices.size:
        return ["malformed indptr"]
    adj = [set() for _ in range(g.n)]
    for v in range(g.n):
        nb = g.neighbors(v)
        if np.any(np.diff(nb) <= 0):
            problems.append(f"vertex {v}: neighbours not strictly ascending")
        if np.any(nb == v):
            problems.append(f"vertex {v}: self-loop")
        adj[v] = set(nb.tolist())
    for v in range(g.n):
        for u in adj[v]:
            if v not in adj[u]:
                problems.append(f"edge ({v}, {u}) not symmetric")
    if not is_connected(g):
        problems.append("not connected")
    return problems
