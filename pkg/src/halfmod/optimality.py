"""A set A = {d k^2} built from discriminants with small L(1, chi_{-4d}).

The construction picks odd squarefree d in [Z, 2Z] with the smallest
L(1, chi_{-4d}), forms A, then counts representations p = a + b^2 (b >= 1)
for primes p <= X/2 and checks the Cauchy-Schwarz lower bound
#{p : r(p) > 0} >= (sum r)^2 / sum r^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .arith import (
    factorize,
    fundamental_decomposition,
    is_squarefree,
    kronecker,
    l_one,
    prime_count,
    primes_up_to,
)

__all__ = [
    "ConstructionParams",
    "MomentReport",
    "ConstructionReport",
    "default_Z",
    "l_one_discriminant",
    "choose_D",
    "build_A",
    "build_A_with_witness",
    "rep_counts",
    "rep_counts_transposed",
    "moments",
    "run_construction",
]


def default_Z(X: float) -> int:
    """exp((log X)^{1/10}), rounded down; tiny at any desk-scale X."""
    return int(math.exp(math.log(X) ** 0.1))


@dataclass(frozen=True)
class ConstructionParams:
    X: int
    Z: int | None = None
    d_count: int = 5

    def resolved_Z(self) -> int:
        Z = default_Z(self.X) if self.Z is None else int(self.Z)
        if Z < 10:
            warnings.warn(f"Z = {Z} is degenerate at this scale; pass Z explicitly", stacklevel=2)
        if 2 * Z > self.X:
            raise ValueError("need 2Z <= X")
        if self.d_count < 1:
            raise ValueError("d_count must be >= 1")
        return Z


@dataclass(frozen=True)
class MomentReport:
    sum_r: int
    sum_r2: int
    represented: int
    cs_bound: int


def l_one_discriminant(D: int) -> float:
    """L(1, chi_D) for any negative discriminant D, via its fundamental part.

    If ``D = fund * f^2`` then L(1, chi_D) = L(1, chi_fund) prod_{p | f} (1 - chi_fund(p)/p).
    """
    if D >= 0 or D % 4 not in (0, 1):
        raise ValueError(f"{D} is not a negative discriminant")
    if D % 4 == 0:
        dec = fundamental_decomposition(-D // 4)
        fund, f = dec.fund, dec.sq
    else:
        # D = 1 mod 4: -D = 3 mod 4, so -D = s t^2 with s = 3 mod 4 and D = (-s) t^2
        dec = fundamental_decomposition(-D)  # -4(-D) = fund * sq^2, sq = 2t
        fund, f = dec.fund, dec.sq // 2
    val = l_one(fund)
    for p in sorted(factorize(f)):
        val *= 1 - kronecker(fund, p) / p
    return val


def choose_D(Z: int, d_count: int) -> list[tuple[int, float]]:
    """The d_count odd squarefree d in [Z, 2Z] with the smallest L(1, chi_{-4d}), ascending."""
    if Z < 3:
        raise ValueError("Z must be >= 3")
    cands = []
    for d in range(Z | 1, 2 * Z + 1, 2):
        if is_squarefree(d):
            cands.append((l_one_discriminant(-4 * d), d))
    if len(cands) < d_count:
        raise ValueError(f"only {len(cands)} odd squarefree d in [{Z}, {2 * Z}], need {d_count}")
    cands.sort()
    return [(d, L) for L, d in cands[:d_count]]


def build_A_with_witness(D: list[int], X: int, Z: int) -> dict[int, tuple[int, int]]:
    """Map each a = d k^2 (k <= sqrt(X/2Z)) to the first (d, k) producing it."""
    if not D:
        raise ValueError("D must be nonempty")
    if X < 2 * Z:
        raise ValueError("need X >= 2Z")
    K = math.isqrt(X // (2 * Z))
    out: dict[int, tuple[int, int]] = {}
    for d in D:
        for k in range(1, K + 1):
            out.setdefault(d * k * k, (d, k))
    return out


def build_A(D: list[int], X: int, Z: int) -> list[int]:
    return sorted(build_A_with_witness(D, X, Z))


def rep_counts(A: list[int], X: int) -> dict[int, int]:
    """r(p) = #{(a, b) : a in A, b >= 1, a + b^2 = p} for every prime p <= X/2."""
    half = X // 2
    counts = np.zeros(half + 1, dtype=np.int64)
    squares = np.arange(1, math.isqrt(half) + 1, dtype=np.int64) ** 2
    for a in A:
        if not 1 <= a <= X:
            raise ValueError("A must lie in [1, X]")
        v = a + squares
        np.add.at(counts, v[v <= half], 1)
    primes = primes_up_to(half)
    return dict(zip(primes.tolist(), counts[primes].tolist()))


def rep_counts_transposed(A: list[int], X: int) -> dict[int, int]:
    """Same as :func:`rep_counts`, looping over (p, b) and testing p - b^2 in A."""
    half = X // 2
    member = np.zeros(X + 1, dtype=bool)
    member[np.asarray(list(A), dtype=np.int64)] = True
    primes = primes_up_to(half)
    r = np.zeros(len(primes), dtype=np.int64)
    for b in range(1, math.isqrt(half) + 1):
        rest = primes - b * b
        ok = rest >= 1
        r[ok] += member[rest[ok]]
    return dict(zip(primes.tolist(), r.tolist()))


def moments(r: dict[int, int]) -> MomentReport:
    vals = [int(v) for v in r.values()]
    s1 = sum(vals)
    s2 = sum(v * v for v in vals)
    rep = sum(1 for v in vals if v > 0)
    cs = -(-s1 * s1 // s2) if s2 else 0
    if rep < cs:
        raise AssertionError(f"Cauchy-Schwarz violated: represented {rep} < {cs}")
    return MomentReport(s1, s2, rep, cs)


@dataclass
class ConstructionReport:
    X: int
    Z: int
    d_count: int
    chosen: list[tuple[int, float]]
    A_size: int
    normalized_size: float
    represented_fraction: float
    moments: MomentReport
    sum_r_normalized: float
    sum_r2_normalized: float


def run_construction(params: ConstructionParams) -> ConstructionReport:
    X = params.X
    Z = params.resolved_Z()
    chosen = choose_D(Z, params.d_count)
    A = build_A([d for d, _ in chosen], X, Z)
    r = rep_counts(A, X)
    mom = moments(r)
    lx = math.log(X)
    return ConstructionReport(
        X=X,
        Z=Z,
        d_count=params.d_count,
        chosen=chosen,
        A_size=len(A),
        normalized_size=len(A) * math.log(lx) / math.sqrt(X),
        represented_fraction=mom.represented / prime_count(X // 2),
        moments=mom,
        sum_r_normalized=mom.sum_r * lx / X,
        sum_r2_normalized=mom.sum_r2 * lx / X,
    )
