"""Named q-expansions mod l, Hecke operators, and the holomorphization pipeline.

Forms are returned as :class:`TaggedForm`, a series plus its weight/level.
Weights are stored doubled so half-integral weights stay integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import fpseries as fp
from .arith import factorize, is_prime, primes_up_to
from .fpseries import QSeries

__all__ = [
    "FormMeta",
    "TaggedForm",
    "FormError",
    "pentagonal_terms",
    "euler_series",
    "eta1",
    "eta1_product",
    "partition_numbers",
    "partition_series",
    "theta0",
    "delta",
    "j_mod2",
    "holomorphize",
    "multiply_theta0",
    "hecke_tp",
    "is_constant",
    "odd_ord_vanishing_check",
    "scan_up_nonzero",
    "pow2_square_search",
    "odd_order_prime",
    "pipeline_m",
    "FORMS",
]

ETA_LEVEL = 576
THETA_LEVEL = 4
# below this many terms the pentagonal recurrence is used for p(n) mod l
PENTAGONAL_AUTO_LIMIT = 20_000


class FormError(ValueError):
    pass


@dataclass(frozen=True)
class FormMeta:
    twice_weight: int
    level: int
    modulus: int

    def __post_init__(self):
        if self.level < 1:
            raise FormError("level must be >= 1")
        if not is_prime(self.modulus):
            raise FormError(f"modulus {self.modulus} is not prime")

    @property
    def weight(self) -> float:
        return self.twice_weight / 2

    @property
    def half_integral(self) -> bool:
        return self.twice_weight % 2 == 1


@dataclass(frozen=True)
class TaggedForm:
    series: QSeries
    meta: FormMeta

    def __post_init__(self):
        if self.series.modulus != self.meta.modulus:
            raise FormError("series modulus and meta modulus differ")


def _lcm(a: int, b: int) -> int:
    return a * b // math.gcd(a, b)


# ---------------------------------------------------------------------------
# expansions

def pentagonal_terms(limit: int) -> list[tuple[int, int]]:
    """``(exponent, sign)`` for prod(1 - q^n) = sum (-1)^k q^{k(3k-1)/2}, exponents < limit."""
    out = [(0, 1)]
    k = 1
    while k * (3 * k - 1) // 2 < limit:
        sign = -1 if k % 2 else 1
        for e in (k * (3 * k - 1) // 2, k * (3 * k + 1) // 2):
            if e < limit:
                out.append((e, sign))
        k += 1
    return sorted(out)


def euler_series(ell: int, prec: int) -> QSeries:
    """prod_{n>=1}(1 - q^n) mod l on ``[0, prec)``, from Euler's pentagonal theorem."""
    return QSeries.from_terms(ell, 0, prec, dict(pentagonal_terms(prec)))


def eta1(ell: int, prec: int) -> TaggedForm:
    """eta(24z) = sum_n (-1)^n q^{(6n+1)^2} on ``[1, prec)``."""
    if prec < 2:
        raise FormError("prec must be >= 2")
    terms = {}
    r = math.isqrt(prec - 1) // 6 + 2
    for n in range(-r, r + 1):
        e = (6 * n + 1) ** 2
        if e < prec:
            terms[e] = (-1) ** (n % 2)
    return TaggedForm(QSeries.from_terms(ell, 1, prec, terms), FormMeta(1, ETA_LEVEL, ell))


def eta1_product(ell: int, prec: int) -> TaggedForm:
    """Same series as :func:`eta1`, built as q * prod(1 - q^{24n}) factor by factor."""
    if prec < 2:
        raise FormError("prec must be >= 2")
    n = prec - 1  # window [1, prec) relative to q^1
    if ell == 2:
        bits, mask = 1, (1 << n) - 1
        for s in range(24, n, 24):
            bits = (bits ^ (bits << s)) & mask
        series = QSeries._from_bits(1, n, bits)
    else:
        c = np.zeros(n, dtype=np.int64)
        c[0] = 1
        for s in range(24, n, 24):
            c[s:] = (c[s:] - c[:-s]) % ell
        series = QSeries._from_reduced(ell, 1, c)
    return TaggedForm(series, FormMeta(1, ETA_LEVEL, ell))


def _partition_pentagonal(ell: int, n_max: int) -> np.ndarray:
    pent = [(e, s) for e, s in pentagonal_terms(n_max + 1) if e > 0]
    p = [0] * (n_max + 1)
    p[0] = 1 % ell
    for n in range(1, n_max + 1):
        acc = 0
        for e, s in pent:
            if e > n:
                break
            # p(n) = -sum_{e>0} sign(e) p(n-e)
            acc -= s * p[n - e]
        p[n] = acc % ell
    return np.array(p, dtype=np.int64)


def partition_numbers(ell: int, n_max: int, method: str = "auto") -> QSeries:
    """sum_{n <= n_max} p(n) q^n mod l, indexed by n (offset 0).

    ``method``: ``"pentagonal"`` (Euler's recurrence), ``"inv"`` (invert the
    pentagonal series) or ``"auto"``.
    """
    if n_max < 0:
        raise FormError("n_max must be nonnegative")
    if method == "auto":
        method = "pentagonal" if n_max <= PENTAGONAL_AUTO_LIMIT else "inv"
    if method == "pentagonal":
        return QSeries._from_reduced(ell, 0, _partition_pentagonal(ell, n_max))
    if method == "inv":
        return fp.inv(euler_series(ell, n_max + 1))
    raise ValueError(f"unknown method {method!r}")


def partition_series(ell: int, prec: int, method: str = "auto") -> TaggedForm:
    """eta1^{-1} = sum p(n) q^{24n-1} mod l on ``[-1, prec)``."""
    if prec < 1:
        raise FormError("prec must be >= 1")
    base = partition_numbers(ell, prec // 24, method)
    series = fp.truncate(fp.shift(fp.dilate(base, 24), -1), prec)
    return TaggedForm(series, FormMeta(-1, ETA_LEVEL, ell))


def theta0(ell: int, prec: int) -> TaggedForm:
    """sum_{n in Z} q^{n^2} = 1 + 2 sum_{n>=1} q^{n^2} on ``[0, prec)``."""
    if prec < 1:
        raise FormError("prec must be >= 1")
    terms = {0: 1}
    terms.update({n * n: 2 for n in range(1, math.isqrt(prec - 1) + 1)})
    return TaggedForm(QSeries.from_terms(ell, 0, prec, terms), FormMeta(1, THETA_LEVEL, ell))


def delta(ell: int, prec: int) -> TaggedForm:
    """Delta = q prod(1 - q^n)^24 on ``[1, prec)``."""
    if prec < 2:
        raise FormError("prec must be >= 2")
    series = fp.shift(fp.pow(euler_series(ell, prec - 1), 24), 1)
    return TaggedForm(series, FormMeta(24, 1, ell))


def j_mod2(prec: int) -> TaggedForm:
    """j = sum c(n) q^n mod 2 on ``[-1, prec)``, computed as 1/Delta (E4 = 1 mod 2)."""
    if prec < 1:
        raise FormError("prec must be >= 1")
    series = fp.inv(delta(2, prec + 2).series)
    return TaggedForm(series, FormMeta(0, 1, 2))


FORMS = {
    "eta1": eta1,
    "partition": partition_series,
    "theta0": theta0,
    "delta": delta,
    "j2": lambda ell, prec: _j2_checked(ell, prec),
}


def _j2_checked(ell: int, prec: int) -> TaggedForm:
    if ell != 2:
        raise FormError("j2 is only available mod 2")
    return j_mod2(prec)


# ---------------------------------------------------------------------------
# pipeline

def holomorphize(f: TaggedForm, m: int) -> TaggedForm:
    """h = f * eta1^{l^m}, with the eta power taken by exponent dilation.

    The eta factor is built long enough that h keeps f's window length.
    """
    ell = f.meta.modulus
    lead = fp.normalize(f.series)
    pole = max(0, -lead.offset) if lead.length else 0
    power = ell**m
    if power <= pole:
        raise FormError(f"l^m = {power} does not exceed the pole order {pole}")
    eta_prec = -(-f.series.length // power) + 1
    eta_pow = fp.frobenius_pow(eta1(ell, max(eta_prec, 2)).series, m)
    h = fp.mul(f.series, eta_pow)
    meta = FormMeta(f.meta.twice_weight + power, _lcm(f.meta.level, ETA_LEVEL), ell)
    return TaggedForm(h, meta)


def multiply_theta0(f: TaggedForm) -> TaggedForm:
    """f * theta0: raises the weight by 1/2; mod 2 the series is unchanged."""
    if f.meta.modulus != 2:
        raise FormError("multiply_theta0 is only defined here for l = 2")
    th = theta0(2, max(f.series.length, 1)).series
    series = fp.mul(f.series, th)
    return TaggedForm(series, FormMeta(f.meta.twice_weight + 1, _lcm(f.meta.level, THETA_LEVEL), 2))


def hecke_tp(h: TaggedForm, p: int) -> TaggedForm:
    """T_p on coefficients: a_m(T_p h) = a_{mp}(h) + p^{k-1} a_{m/p}(h), diamond = identity."""
    meta = h.meta
    if not is_prime(p):
        raise FormError(f"{p} is not prime")
    if meta.level % p == 0:
        raise FormError(f"p = {p} divides the level {meta.level}")
    if meta.twice_weight % 2:
        raise FormError("T_p needs integral weight")
    if meta.twice_weight < 0:
        raise FormError("T_p needs nonnegative weight")
    if h.series.offset < 0:
        raise FormError("T_p needs a holomorphic form (offset >= 0)")
    ell = meta.modulus
    k = meta.twice_weight // 2
    if k == 0 and p % ell == 0:
        raise FormError("p^{-1} is undefined mod l")
    c = pow(p, k - 1, ell)
    end = (h.series.end - 1) // p + 1
    a = fp.coefficient_array(h.series, 0, h.series.end)
    m = np.arange(end)
    out = a[m * p].copy()
    out[::p] += c * a[: len(out[::p])]
    out %= ell
    return TaggedForm(QSeries._from_reduced(ell, 0, out), meta)


def is_constant(f: QSeries) -> bool:
    """True when every coefficient at a positive exponent is zero."""
    sup = f.support()
    return not np.any(sup > 0)


def _ord_p(n: np.ndarray, p: int) -> np.ndarray:
    n = n.copy()
    k = np.zeros(n.shape, dtype=np.int64)
    div = (n % p == 0) & (n != 0)
    while div.any():
        n[div] //= p
        k[div] += 1
        div = (n % p == 0) & (n != 0)
    return k


def odd_ord_vanishing_check(h: TaggedForm, p: int, X: int) -> bool:
    """If T_p h is constant mod l, check a_n(h) = 0 for all 1 <= n <= X with ord_p(n) odd.

    Returns True vacuously when T_p h is not constant.
    """
    if X >= h.series.end:
        raise FormError(f"X = {X} beyond precision end {h.series.end}")
    t = hecke_tp(h, p)
    if not is_constant(t.series):
        return True
    n = np.arange(1, X + 1)
    odd = n[_ord_p(n, p) % 2 == 1]
    a = fp.coefficient_array(h.series, 0, X + 1)
    return not np.any(a[odd])


def scan_up_nonzero(h: TaggedForm, u_max: int, p_max: int) -> list[tuple[int, list[int]]]:
    """For each u <= u_max, the primes p <= p_max with a_{up}(h) != 0."""
    if u_max * p_max >= h.series.end:
        raise FormError(f"u_max * p_max = {u_max * p_max} beyond precision end {h.series.end}")
    primes = primes_up_to(p_max)
    a = fp.coefficient_array(h.series, min(0, h.series.offset), u_max * p_max + 1)
    base = min(0, h.series.offset)
    out = []
    for u in range(1, u_max + 1):
        hits = primes[a[u * primes - base] != 0]
        out.append((u, hits.tolist()))
    return out


# ---------------------------------------------------------------------------
# searches

def _squarefree_divisors(n: int) -> list[int]:
    divs = [1]
    for p in factorize(n):
        divs += [d * p for d in divs]
    return sorted(divs)


def pow2_square_search(n0: int, N: int, m_max: int) -> list[tuple[int, int, int]]:
    """All (m, u, y) with 1 <= m <= m_max, u a squarefree divisor of 2N, y >= 0, 2^m + n0 = u y^2.

    A bounded exhaustive search; it certifies nothing beyond ``m_max``.
    """
    if n0 == 0:
        raise ValueError("n0 must be nonzero")
    if N < 1 or m_max < 1:
        raise ValueError("need N >= 1 and m_max >= 1")
    us = _squarefree_divisors(2 * N)
    out = []
    for m in range(1, m_max + 1):
        v = (1 << m) + n0
        if v < 0:
            continue
        for u in us:
            if v % u:
                continue
            y = math.isqrt(v // u)
            if y * y * u == v:
                out.append((m, u, y))
    return out


def odd_order_prime(n: int, N: int) -> int | None:
    """Smallest prime p not dividing 2N with ord_p(n) odd, or None."""
    for p, e in sorted(factorize(n).items()):
        if e % 2 and (2 * N) % p:
            return p
    return None


def pipeline_m(f: TaggedForm, m_max: int = 40, even: bool = True) -> tuple[int, int | None]:
    """Choose m for h = f * eta1^{l^m}: the smallest admissible m (even by default).

    For l = 2 the leading exponent n of h must also have a prime p not dividing
    2N with ord_p(n) odd; that prime is returned alongside m (None for l > 2).
    """
    ell = f.meta.modulus
    lead = fp.normalize(f.series)
    if lead.length == 0:
        raise FormError("form is zero on its window")
    n0 = lead.offset
    if ell == 2 and n0 == 0:
        # use the first term of positive degree instead of the constant term
        pos = lead.support()
        pos = pos[pos > 0]
        if len(pos) == 0:
            raise FormError("form is constant mod 2 on its window")
        n0 = int(pos[0])
    pole = max(0, -lead.offset)
    start = 2 if even else 1
    for m in range(start if ell == 2 else 0, m_max + 1, 2 if even else 1):
        if ell**m <= pole:
            continue
        if ell != 2:
            return m, None
        p0 = odd_order_prime(2**m + n0, f.meta.level)
        if p0 is not None:
            return m, p0
    raise FormError(f"no admissible m <= {m_max}")
