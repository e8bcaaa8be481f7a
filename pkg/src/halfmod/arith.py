"""Primes, Kronecker characters, discriminants, class numbers and L-values."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

__all__ = [
    "primes_up_to",
    "iter_prime_segments",
    "prime_count",
    "prime_table",
    "is_prime",
    "factorize",
    "squarefree_part",
    "is_squarefree",
    "kronecker",
    "kronecker_array",
    "KroneckerChar",
    "is_fundamental",
    "DiscDecomp",
    "fundamental_decomposition",
    "class_number",
    "unit_count",
    "l_one",
    "l_one_class_number_formula",
    "l_value",
    "l_value_with_tail",
    "euler_product",
    "AGoodReport",
    "agood_compare",
    "classify_discriminant",
]

_SEGMENT = 1 << 22


# ---------------------------------------------------------------------------
# primes

@lru_cache(maxsize=8)
def _small_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve)


def iter_prime_segments(Y: int, segment: int = _SEGMENT) -> Iterator[np.ndarray]:
    """Yield ascending arrays of the primes <= Y, one sieve segment at a time."""
    Y = int(Y)
    if Y < 2:
        return
    root = math.isqrt(Y)
    base = _small_primes(max(root, 2))
    if Y <= segment:
        yield _small_primes(Y) if Y <= 1 << 16 else _segment(0, Y + 1, base)
        return
    for lo in range(0, Y + 1, segment):
        hi = min(lo + segment, Y + 1)
        yield _segment(lo, hi, base)


def _segment(lo: int, hi: int, base: np.ndarray) -> np.ndarray:
    mark = np.ones(hi - lo, dtype=bool)
    for p in base.tolist():
        if p * p >= hi:
            break
        start = max(p * p, -(-lo // p) * p)
        mark[start - lo :: p] = False
    if lo <= 1:
        mark[: 2 - lo] = False
    return np.flatnonzero(mark) + lo


def primes_up_to(Y: int) -> np.ndarray:
    """All primes <= Y as an int64 array (segmented sieve)."""
    segs = list(iter_prime_segments(int(Y)))
    if not segs:
        return np.zeros(0, dtype=np.int64)
    return np.concatenate(segs).astype(np.int64)


def prime_count(Y: int) -> int:
    return sum(len(s) for s in iter_prime_segments(int(Y)))


def prime_table(Y: int) -> np.ndarray:
    """Boolean array ``t`` of length Y+1 with ``t[n]`` true iff n is prime."""
    t = np.zeros(max(int(Y), 0) + 1, dtype=bool)
    t[primes_up_to(Y)] = True
    return t


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact for n < 3.3e24)."""
    n = int(n)
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def factorize(n: int) -> dict[int, int]:
    """Prime factorization by trial division; fine for n up to ~1e12."""
    n = abs(int(n))
    out: dict[int, int] = {}
    if n < 2:
        return out
    for p in _small_primes(max(math.isqrt(n), 2)).tolist():
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def squarefree_part(n: int) -> tuple[int, int]:
    """Write ``n = s * t^2`` with s squarefree; returns ``(s, t)``."""
    s = t = 1
    for p, e in factorize(n).items():
        if e % 2:
            s *= p
        t *= p ** (e // 2)
    return s, t


def is_squarefree(n: int) -> bool:
    return all(e == 1 for e in factorize(n).values())


# ---------------------------------------------------------------------------
# Kronecker symbol

def _jacobi(a: int, n: int) -> int:
    # n odd positive
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def kronecker(D: int, n: int) -> int:
    """The Kronecker symbol (D | n) for arbitrary integers."""
    D, n = int(D), int(n)
    if n == 0:
        return 1 if abs(D) == 1 else 0
    t = 1
    if n < 0:
        n = -n
        if D < 0:
            t = -1
    v = (n & -n).bit_length() - 1
    n >>= v
    if v:
        if D % 2 == 0:
            return 0
        if v % 2 and D % 8 in (3, 5):
            t = -t
    return t * _jacobi(D, n)


def kronecker_array(D: int, n: np.ndarray) -> np.ndarray:
    """Vectorized ``kronecker(D, n)`` over an integer array (|D|, |n| < 2^62)."""
    D = int(D)
    n = np.asarray(n, dtype=np.int64)
    shape = n.shape
    n = n.ravel().copy()
    t = np.ones(n.shape, dtype=np.int64)
    zero = n == 0
    neg = n < 0
    if D < 0:
        t[neg] = -1
    n = np.abs(n)
    n[zero] = 1
    # power of two in n
    v = np.zeros(n.shape, dtype=np.int64)
    ev = (n & 1) == 0
    while ev.any():
        n[ev] >>= 1
        v[ev] += 1
        ev = (n & 1) == 0
    if D % 2 == 0:
        t[v > 0] = 0
    elif D % 8 in (3, 5):
        t[(v & 1) == 1] *= -1
    # Jacobi (D mod n | n), n odd
    a = np.mod(D, n)
    act = a != 0
    while act.any():
        ai, ni, ti = a[act], n[act], t[act]
        ev = (ai & 1) == 0
        while ev.any():
            ai[ev] >>= 1
            flip = ev & (((ni & 7) == 3) | ((ni & 7) == 5))
            ti[flip] *= -1
            ev = (ai & 1) == 0
        ai, ni = ni, ai
        ti[((ai & 3) == 3) & ((ni & 3) == 3)] *= -1
        ai = ai % ni
        a[act], n[act], t[act] = ai, ni, ti
        act = a != 0
    t[n != 1] = 0
    t[zero] = 1 if abs(D) == 1 else 0
    return t.reshape(shape)


@dataclass(frozen=True)
class KroneckerChar:
    """The real character ``n -> (D | n)`` attached to a discriminant D."""

    D: int

    def __post_init__(self):
        if self.D == 0 or self.D % 4 not in (0, 1):
            raise ValueError(f"{self.D} is not a discriminant (need D = 0 or 1 mod 4, D != 0)")

    def __call__(self, n: int) -> int:
        return kronecker(self.D, n)

    def values(self, n: np.ndarray) -> np.ndarray:
        return kronecker_array(self.D, n)

    @property
    def period(self) -> int:
        return 4 * abs(self.D)


# ---------------------------------------------------------------------------
# discriminants

def is_fundamental(D: int) -> bool:
    D = int(D)
    if D in (0, 1):
        return False
    if D % 4 == 1:
        return is_squarefree(D)
    if D % 4 == 0:
        k = D // 4
        return k % 4 in (2, 3) and is_squarefree(k)
    return False


@dataclass(frozen=True)
class DiscDecomp:
    """``-4a = fund * sq**2`` with ``fund`` a negative fundamental discriminant."""

    a: int
    fund: int
    sq: int


def fundamental_decomposition(a: int) -> DiscDecomp:
    if a < 1:
        raise ValueError("a must be positive")
    s, t = squarefree_part(a)
    if s % 4 == 3:
        return DiscDecomp(a, -s, 2 * t)
    return DiscDecomp(a, -4 * s, t)


def _require_negative_fundamental(D: int) -> None:
    if D >= 0 or not is_fundamental(D):
        raise ValueError(f"{D} is not a negative fundamental discriminant")


def class_number(D: int) -> int:
    """Count reduced primitive forms ``(a, b, c)`` of discriminant D < 0."""
    _require_negative_fundamental(D)
    if -D > 10**7:
        raise ValueError("|D| above the enumeration limit 1e7")
    h = 0
    amax = math.isqrt(-D // 3)
    for a in range(1, amax + 1):
        for b in range(-a + 1, a + 1):
            if (b - D) % 2:
                continue
            num = b * b - D
            if num % (4 * a):
                continue
            c = num // (4 * a)
            if c < a or (c == a and b < 0):
                continue
            if math.gcd(math.gcd(a, b), c) == 1:
                h += 1
    return h


def unit_count(D: int) -> int:
    return {-3: 6, -4: 4}.get(D, 2)


def l_one(D: int) -> float:
    """L(1, chi_D) from the finite sum ``-pi |D|^{-3/2} sum_r chi_D(r) r``."""
    _require_negative_fundamental(D)
    N = -D
    r = np.arange(1, N, dtype=np.int64)
    s = int(np.dot(kronecker_array(D, r), r))
    return -math.pi * s / N**1.5


def l_one_class_number_formula(D: int) -> float:
    return 2 * math.pi * class_number(D) / (unit_count(D) * math.sqrt(-D))


def l_value_with_tail(D: int, s: float, terms: int) -> tuple[float, float]:
    """Partial Dirichlet series and a rough ``terms^{-(s-1)}`` tail magnitude.

    The tail figure is an order-of-magnitude estimate, not a certified bound.
    """
    if s <= 1:
        raise ValueError("s must exceed 1")
    if terms < 1:
        raise ValueError("terms must be positive")
    total = []
    for lo in range(1, terms + 1, 1 << 20):
        n = np.arange(lo, min(lo + (1 << 20), terms + 1), dtype=np.int64)
        chi = kronecker_array(D, n)
        keep = chi != 0
        total.append(chi[keep] * np.power(n[keep].astype(np.float64), -s))
    value = math.fsum(np.concatenate(total).tolist())
    return value, float(terms) ** (-(s - 1))


def l_value(D: int, s: float, terms: int) -> float:
    return l_value_with_tail(D, s, terms)[0]


def euler_product(D: int, Y: float, primes: np.ndarray | None = None) -> float:
    """``prod_{p <= Y} (1 - chi_D(p)/p)``, accumulated as a compensated sum of logs."""
    if Y < 0:
        raise ValueError("Y must be nonnegative")
    if primes is None:
        primes = primes_up_to(int(math.floor(Y)))
    else:
        primes = primes[primes <= Y]
    if len(primes) == 0:
        return 1.0
    chi = kronecker_array(D, primes)
    keep = chi != 0
    terms = np.log1p(-chi[keep] / primes[keep].astype(np.float64))
    return math.exp(math.fsum(terms.tolist()))


# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AGoodReport:
    a: int
    X: float
    fund: int
    sq: int
    small_cutoff: float
    lhs: float
    l_shifted: float
    m1: float
    m2: float
    ratio_m1: float
    ratio_m2: float


def agood_compare(a: int, X: float, small_cutoff: float = 100.0, terms: int = 10**6) -> AGoodReport:
    """Compare the truncated Euler product for -4a with its two L-function proxies.

    ``m1`` is ``L(1 + 1/log X, chi_fund)^{-1}``; ``m2`` is the split product over
    primes below ``small_cutoff`` not dividing ``sq`` and primes in
    ``[small_cutoff, X^{1/4}]`` dividing ``sq`` (inverted factors).
    """
    if not 1 <= a <= X:
        raise ValueError("need 1 <= a <= X")
    if X <= math.e or small_cutoff < 0:
        raise ValueError("need X > e and small_cutoff >= 0")
    dec = fundamental_decomposition(a)
    y = X**0.25
    lhs = euler_product(-4 * a, y)
    lval = l_value(dec.fund, 1 + 1 / math.log(X), terms)
    m1 = 1 / lval

    ps = primes_up_to(int(max(small_cutoff, y)))
    chi = kronecker_array(dec.fund, ps).astype(np.float64)
    divides = (dec.sq % ps) == 0
    first = (ps <= small_cutoff) & ~divides
    second = (ps >= small_cutoff) & (ps <= y) & divides
    logs = np.log1p(-chi / ps)
    m2 = math.exp(math.fsum(logs[first].tolist()) - math.fsum(logs[second].tolist()))
    return AGoodReport(a, X, dec.fund, dec.sq, small_cutoff, lhs, lval, m1, m2, lhs / m1, lhs / m2)


def classify_discriminant(D: int, c0: float = 0.1) -> str:
    """Proxy for the zero-free-region split: ``'bad-proxy'`` iff L(1) < c0 / log|D|."""
    return "bad-proxy" if l_one(D) < c0 / math.log(-D) else "good-proxy"
