"""Closed-form predictors and the random objects behind them.

Case boundaries are decided on integer class sizes in rational
arithmetic, never on floats.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Union

import numpy as np

from .crawler import Weighting
from .graph import PartiteSpec

Rational = Union[Fraction, int]

ENUMERATION_CAP = 10**7
SUBCRITICAL, CRITICAL, SUPERCRITICAL = "subcritical", "critical", "supercritical"


@dataclass(frozen=True)
class BridgePath:
    """A +-1 lattice path; ``X[t]`` is the position after ``t`` steps."""

    steps: np.ndarray

    def __post_init__(self):
        steps = np.asarray(self.steps, dtype=np.int64)
        if np.any((steps != 1) & (steps != -1)):
            raise ValueError("bridge increments must be +1 or -1")
        object.__setattr__(self, "steps", steps)

    @property
    def n(self) -> int:
        return int(self.steps.size)

    @property
    def X(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.steps)])

    @property
    def endpoint(self) -> int:
        return int(self.steps.sum())

    @property
    def ups(self) -> int:
        return int((self.steps == 1).sum())

    def reversed(self) -> "BridgePath":
        """Time reversal, re-based at zero: X^(t) = X(n - t) - X(n)."""
        return BridgePath(-self.steps[::-1])

    @classmethod
    def from_string(cls, s: str) -> "BridgePath":
        return cls(np.array([1 if ch in "Uu+" else -1 for ch in s], dtype=np.int64))


@dataclass(frozen=True)
class RecordStats:
    m: int
    class_id: int | None = None


@dataclass(frozen=True)
class RecordBound:
    value: float
    kind: str  # "bound" or "asymptotic"


@dataclass(frozen=True)
class TheoryPrediction:
    regime: str
    leading_term: int
    correction: float
    correction_kind: str


def bridge_from_weighting(w0: Weighting, spec: PartiteSpec, i: int) -> BridgePath:
    """Step t is +1 when the t-th cleanest vertex lies in class ``i``."""
    if w0.n != spec.n:
        raise ValueError("weighting size does not match the class sizes")
    cleanest_first = np.argsort(-w0.rank, kind="stable")
    in_class = spec.labels()[cleanest_first] == i
    return BridgePath(np.where(in_class, 1, -1))


def record(path: BridgePath, class_id: int | None = None) -> RecordStats:
    return RecordStats(int(path.X.max()), class_id)


def records_from_order(cleanest_first_labels: np.ndarray, k: int) -> np.ndarray:
    """Records of all k class bridges at once, from class labels in cleanest-first order."""
    out = np.empty(k, dtype=np.int64)
    for i in range(k):
        steps = np.where(cleanest_first_labels == i, 1, -1)
        out[i] = max(0, int(np.cumsum(steps).max()))
    return out


def sample_bridge(n: int, n1: int, seed=None) -> BridgePath:
    """Uniform arrangement of ``n1`` up-steps among ``n``."""
    if not 0 <= n1 <= n:
        raise ValueError("need 0 <= n1 <= n")
    rng = np.random.default_rng(seed)
    steps = np.full(n, -1, dtype=np.int64)
    steps[:n1] = 1
    return BridgePath(rng.permutation(steps))


def enumerate_bridge_record_dist(n: int, n1: int) -> dict[int, Fraction]:
    """Exact pmf of the record by listing every placement of the up-steps."""
    if not 0 <= n1 <= n:
        raise ValueError("need 0 <= n1 <= n")
    total = math.comb(n, n1)
    if total > ENUMERATION_CAP:
        raise ValueError(f"C({n}, {n1}) = {total} exceeds the enumeration cap")
    counts: dict[int, int] = {}
    for ups in itertools.combinations(range(n), n1):
        up = set(ups)
        x = best = 0
        for t in range(n):
            x += 1 if t in up else -1
            if x > best:
                best = x
        counts[best] = counts.get(best, 0) + 1
    return {m: Fraction(c, total) for m, c in sorted(counts.items())}


def bridge_record_tail(n: int, n1: int, j: int) -> Fraction:
    """P(record >= j) for a uniform bridge, by the reflection principle."""
    end = 2 * n1 - n
    if j <= max(0, end):
        return Fraction(1)
    # paths touching j reflect onto paths ending at 2j - end
    return Fraction(math.comb(n, n - n1 + j), math.comb(n, n1))


def bridge_record_mean(n: int, n1: int) -> Fraction:
    """Exact E(record): the reflection tails summed over j = 1..n1."""
    base = max(0, 2 * n1 - n)
    total = math.comb(n, n1) * base
    # tails beyond the endpoint: C(n, n - n1 + j), stepped by the ratio recurrence
    j = base + 1
    c = math.comb(n, n - n1 + j) if j <= n1 else 0
    while j <= n1:
        total += c
        top = n - n1 + j
        c = c * (n - top) // (top + 1)
        j += 1
    return Fraction(total, math.comb(n, n1))


def record_tail_h(c: Rational, j: int) -> Fraction:
    """Probability that a walk with up-probability c < 1/2 ever reaches level j."""
    c = Fraction(c)
    if not 0 < c < Fraction(1, 2):
        raise ValueError("needs 0 < c < 1/2")
    if j < 0:
        raise ValueError("j must be non-negative")
    return (c / (1 - c)) ** j


def expected_record_bound(c: Rational, n: int) -> RecordBound:
    c = Fraction(c)
    if not 0 < c < 1:
        raise ValueError("needs 0 < c < 1")
    half = Fraction(1, 2)
    if c < half:
        return RecordBound(float(2 * c / (1 - 2 * c)), "bound")
    if c > half:
        return RecordBound(float(2 * c * n - n + 2 * (1 - c) / (2 * c - 1)), "bound")
    return RecordBound(math.sqrt(math.pi * n / 8), "asymptotic")


def _theory_spec(spec: PartiteSpec) -> PartiteSpec:
    if spec.k < 3:
        raise ValueError("the k-partite predictors need k >= 3")
    return spec


def regime(spec: PartiteSpec) -> str:
    c1 = spec.fractions[0]
    if c1 < Fraction(1, 2):
        return SUBCRITICAL
    if c1 == Fraction(1, 2):
        return CRITICAL
    return SUPERCRITICAL


def predict_rc(spec: PartiteSpec) -> int:
    _theory_spec(spec)
    n, n1 = spec.n, spec.sizes[0]
    return n if Fraction(n1, n) <= Fraction(1, 2) else 2 * n1 - 1


def predict_RC(spec: PartiteSpec) -> int:
    _theory_spec(spec)
    n, n1, n2 = spec.n, spec.sizes[0], spec.sizes[1]
    c1, c2 = Fraction(n1, n), Fraction(n2, n)
    if c2 <= (1 - c1) / 2:
        return n + n1 - 1
    return 2 * (n - n2)


def predict_rcbar(spec: PartiteSpec) -> TheoryPrediction:
    _theory_spec(spec)
    n, n1 = spec.n, spec.sizes[0]
    reg = regime(spec)
    if reg == SUBCRITICAL:
        bound = sum(2 * c / (1 - 2 * c) for c in spec.fractions)
        return TheoryPrediction(reg, n, float(bound), "upper bound")
    if reg == CRITICAL:
        return TheoryPrediction(reg, n, math.sqrt(math.pi * n / 8), "asymptotic")
    c1 = spec.fractions[0]
    return TheoryPrediction(reg, 2 * n1, float(2 * (1 - c1) / (2 * c1 - 1)), "upper bound")


def _geom_success(n: int, p: float) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, n // 7 + 1, dtype=np.float64)
    log_fail = i * math.log1p(-p)  # log of (1 - p)^i
    return i, log_fail


def sample_geom_sum_Y(n: int, p: float, seed=None, size: int | None = None):
    """Sum over i <= n/7 of independent Geom(1 - (1 - p)^i) on {1, 2, ...}.

    Inverse transform: ceil(log U / log(1 - q)). Returns an int, or an
    array of ``size`` independent draws.
    """
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    _, log_fail = _geom_success(n, p)
    shape = (log_fail.size,) if size is None else (size, log_fail.size)
    u = 1.0 - rng.random(shape)  # in (0, 1]
    x = np.maximum(np.ceil(np.log(u) / log_fail), 1.0)
    y = x.sum(axis=-1).astype(np.int64)
    return int(y) if size is None else y


def geom_sum_moments(n: int, p: float) -> tuple[float, float]:
    """Exact mean and variance of Y."""
    _, log_fail = _geom_success(n, p)
    q = -np.expm1(log_fail)
    return float(np.sum(1.0 / q)), float(np.sum((1.0 - q) / q**2))


def geom_sum_center(n: int, f: float) -> float:
    return n / 7 + n / f


def er_edge_probability(n: int, f: float) -> float:
    return f * math.log(n) / n


def predict_er_steps(n: int, f: float) -> float:
    if f <= 28:
        warnings.warn(f"f = {f} is outside the sparse regime f > 28", stacklevel=2)
    if math.isinf(f):
        return float(n)
    return n + n / f
