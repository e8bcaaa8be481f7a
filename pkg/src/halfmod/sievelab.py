"""Counting primes p with u*p = a + m^2, per shift a and aggregated over a set A.

Per-a counts default to m >= 1 and aggregate counts to m >= 0; both take an
``m_min`` argument so that the two can be compared under one convention.
Counts are of distinct primes, not of representations.
"""

from __future__ import annotations

import csv
import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .arith import euler_product, is_prime, prime_table, primes_up_to

__all__ = [
    "RepReport",
    "AggregateReport",
    "count_prime_reps",
    "rep_primes",
    "represented_primes",
    "represented_prime_set",
    "theorem2_rhs",
    "random_subset",
    "theorem2_experiment",
    "reports_to_csv",
    "MEMORY_LIMIT",
]

# largest X for which represented_primes allocates its marking table
MEMORY_LIMIT = 2 * 10**8


@dataclass(frozen=True)
class RepReport:
    a: int
    u: int
    X: int
    count: int
    euler: float
    bound: float
    ratio: float


@dataclass(frozen=True)
class AggregateReport:
    A_size: int
    u: int
    X: int
    represented: int
    theorem_rhs: float
    ratio: float
    m_min: int = 0
    per_a_total: int | None = None
    meta: dict = field(default_factory=dict)


def _lemma_bound(X: int, euler: float) -> float:
    return math.sqrt(X) / math.log(X) * euler


def rep_primes(a: int, u: int, X: int, m_min: int = 1, table: np.ndarray | None = None) -> np.ndarray:
    """Sorted distinct primes p with ``u*p = a + m^2 <= X`` for some ``m >= m_min``."""
    if a < 1 or u < 1:
        raise ValueError("need a >= 1 and u >= 1")
    if a > X:
        return np.zeros(0, dtype=np.int64)
    m = np.arange(m_min, math.isqrt(X - a) + 1, dtype=np.int64)
    v = a + m * m
    v = v[v % u == 0] // u
    v = np.unique(v)
    if table is not None and len(table) > (X // u):
        return v[table[v]]
    return np.array([x for x in v.tolist() if is_prime(x)], dtype=np.int64)


def count_prime_reps(
    a: int, u: int, X: int, m_min: int = 1, table: np.ndarray | None = None, primes: np.ndarray | None = None
) -> RepReport:
    """Count distinct primes p with u*p <= X and u*p = a + m^2, and the sieve bound for a."""
    if a > X:
        raise ValueError("need a <= X")
    count = len(rep_primes(a, u, X, m_min, table))
    euler = euler_product(-4 * a, X**0.25, primes)
    bound = _lemma_bound(X, euler)
    return RepReport(a, u, X, count, euler, bound, count / bound)


def represented_prime_set(A: Sequence[int], u: int, X: int, m_min: int = 0, limit: int = MEMORY_LIMIT) -> np.ndarray:
    """Primes p with u*p <= X and u*p in A + {m^2 : m >= m_min}, via a marking table."""
    if X > limit:
        raise MemoryError(f"X = {X} exceeds the marking-table limit {limit}")
    A = np.asarray(sorted(set(int(a) for a in A)), dtype=np.int64)
    if len(A) and (A[0] < 1 or A[-1] > X):
        raise ValueError("A must lie in [1, X]")
    marked = np.zeros(X + 1, dtype=bool)
    squares = np.arange(m_min, math.isqrt(X) + 1, dtype=np.int64) ** 2
    for a in A.tolist():
        s = squares[squares <= X - a]
        marked[a + s] = True
    # marked[::u][p] is the mark on u*p
    hits = marked[::u][: X // u + 1]
    return np.flatnonzero(hits & prime_table(X // u))


def theorem2_rhs(A_size: int, X: int) -> float:
    """|A| sqrt(X) loglog X / log X + |A|^{1/2} X^{3/4} / log X."""
    lx = math.log(X)
    return A_size * math.sqrt(X) * math.log(lx) / lx + math.sqrt(A_size) * X**0.75 / lx


def represented_primes(A: Sequence[int], u: int, X: int, m_min: int = 0, limit: int = MEMORY_LIMIT) -> AggregateReport:
    A = sorted(set(int(a) for a in A))
    rep = len(represented_prime_set(A, u, X, m_min, limit))
    rhs = theorem2_rhs(len(A), X)
    # empty A: rhs is 0 and nothing is represented
    return AggregateReport(len(A), u, X, rep, rhs, rep / rhs if rhs else 0.0, m_min)


def random_subset(K: int, X: int, seed: int) -> list[int]:
    """A sorted K-subset of [1, X] drawn from numpy's PCG64 with the given seed."""
    if not 0 <= K <= X:
        raise ValueError("need 0 <= K <= X")
    rng = np.random.default_rng(seed)
    return sorted((rng.choice(X, size=K, replace=False) + 1).tolist())


def theorem2_experiment(
    A_spec: dict, u: int, X: int, seed: int = 0, m_min: int = 0, threads: int = 1
) -> tuple[AggregateReport, list[RepReport]]:
    """Run the aggregate count and the per-a table for a generated set A.

    ``A_spec`` is one of ``{"list": [...]}``, ``{"random": K}`` or
    ``{"construction": {"Z": .., "d_count": ..}}``.  Per-a counts use the
    same ``m_min`` as the aggregate so that ``represented <= per_a_total``
    holds exactly.
    """
    if "list" in A_spec:
        A = sorted(set(int(a) for a in A_spec["list"]))
        source = "list"
    elif "random" in A_spec:
        A = random_subset(int(A_spec["random"]), X, seed)
        source = "random"
    elif "construction" in A_spec:
        from .optimality import build_A, choose_D

        c = A_spec["construction"]
        D = [d for d, _ in choose_D(int(c["Z"]), int(c["d_count"]))]
        A = build_A(D, X, int(c["Z"]))
        source = "construction"
    else:
        raise ValueError(f"invalid A spec {A_spec!r}")

    table = prime_table(X // u)
    small = primes_up_to(int(X**0.25) + 1)

    def one(a: int) -> RepReport:
        return count_prime_reps(a, u, X, m_min, table, small)

    if threads > 1:
        with ThreadPoolExecutor(threads) as ex:
            per_a = list(ex.map(one, A))
    else:
        per_a = [one(a) for a in A]
    agg = represented_primes(A, u, X, m_min)
    total = sum(r.count for r in per_a)
    agg = AggregateReport(
        agg.A_size, u, X, agg.represented, agg.theorem_rhs, agg.ratio, m_min, total,
        {"source": source, "seed": seed},
    )
    return agg, per_a


def reports_to_csv(reports: Sequence[RepReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["a", "u", "X", "count", "euler", "bound", "ratio"])
    for r in reports:
        w.writerow([r.a, r.u, r.X, r.count, f"{r.euler:.12g}", f"{r.bound:.12g}", f"{r.ratio:.12g}"])
    return buf.getvalue()


def report_dict(r) -> dict:
    return asdict(r)
