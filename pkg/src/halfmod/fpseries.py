"""Truncated Laurent q-series over a prime field F_l.

A :class:`QSeries` stores the coefficients of ``q^v, ..., q^(v+length-1)``
reduced mod ``l``.  Everything outside that window is unknown, except that
coefficients below the offset are treated as zero when two series with
different offsets are added.

Storage is a numpy ``int64`` array for ``l > 2``; for ``l = 2`` the window is
bit-packed into a Python ``int`` (bit ``i`` is the coefficient of
``q^(v+i)``), so addition is XOR and multiplication is carry-less.
"""

from __future__ import annotations

import builtins
import csv
import io
import json
from typing import Iterable

import gmpy2
import numpy as np

__all__ = [
    "QSeries",
    "add",
    "sub",
    "mul",
    "mul_schoolbook",
    "inv",
    "pow",
    "frobenius_pow",
    "dilate",
    "shift",
    "truncate",
    "normalize",
    "nonzero_count",
    "common_window_equal",
    "coefficient_array",
    "restrict",
    "scale",
    "to_csv",
    "from_csv",
    "to_json",
    "from_json",
]

# operand density at which the shift-and-accumulate path loses to Kronecker substitution
_SPARSE_MUL_LIMIT = 48
_SPARSE_CLMUL_LIMIT = 4096
# length * density below which inv uses the plain linear recurrence
_RECURRENCE_LIMIT = 400_000


class SeriesError(ValueError):
    """Raised for modulus mismatches, empty operands and precision violations."""


def _is_prime(n: int) -> bool:
    return n >= 2 and bool(gmpy2.is_prime(n, 40))


# ---------------------------------------------------------------------------
# bit packing helpers for l = 2

def _bits_to_array(bits: int, length: int) -> np.ndarray:
    if length == 0:
        return np.zeros(0, dtype=np.int64)
    raw = bits.to_bytes((length + 7) // 8, "little")
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return arr[:length].astype(np.int64)


def _array_to_bits(arr: np.ndarray) -> int:
    if len(arr) == 0:
        return 0
    packed = np.packbits(np.asarray(arr, dtype=np.uint8) & 1, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def _set_bits(bits: int, length: int) -> np.ndarray:
    return np.flatnonzero(_bits_to_array(bits, length))


def _mask(length: int) -> int:
    return (1 << length) - 1


class QSeries:
    """Immutable truncated Laurent series over F_l.

    >>> f = QSeries(3, 0, [1, 1])
    >>> (f * f).coeffs.tolist()
    [1, 2]
    """

    __slots__ = ("modulus", "offset", "length", "_arr", "_bits")

    def __init__(self, modulus: int, offset: int, coeffs: Iterable[int] | np.ndarray):
        modulus = int(modulus)
        if not _is_prime(modulus) or modulus >= 2**31:
            raise SeriesError(f"modulus must be a prime below 2^31, got {modulus}")
        arr = np.asarray(list(coeffs) if not isinstance(coeffs, np.ndarray) else coeffs)
        if arr.ndim != 1:
            raise SeriesError("coefficients must be one-dimensional")
        if arr.dtype == object:
            arr = np.array([int(c) % modulus for c in arr], dtype=np.int64)
        else:
            arr = np.mod(arr.astype(np.int64, copy=False), modulus)
        object.__setattr__(self, "modulus", modulus)
        object.__setattr__(self, "offset", int(offset))
        object.__setattr__(self, "length", int(len(arr)))
        if modulus == 2:
            object.__setattr__(self, "_bits", _array_to_bits(arr))
            object.__setattr__(self, "_arr", None)
        else:
            arr.setflags(write=False)
            object.__setattr__(self, "_arr", arr)
            object.__setattr__(self, "_bits", None)

    @classmethod
    def _from_bits(cls, offset: int, length: int, bits: int) -> "QSeries":
        obj = object.__new__(cls)
        object.__setattr__(obj, "modulus", 2)
        object.__setattr__(obj, "offset", int(offset))
        object.__setattr__(obj, "length", int(length))
        object.__setattr__(obj, "_bits", bits & _mask(length))
        object.__setattr__(obj, "_arr", None)
        return obj

    @classmethod
    def _from_reduced(cls, modulus: int, offset: int, arr: np.ndarray) -> "QSeries":
        # arr is already int64 in [0, modulus); skips validation
        if modulus == 2:
            return cls._from_bits(offset, len(arr), _array_to_bits(arr))
        obj = object.__new__(cls)
        arr = np.ascontiguousarray(arr, dtype=np.int64)
        arr.setflags(write=False)
        object.__setattr__(obj, "modulus", modulus)
        object.__setattr__(obj, "offset", int(offset))
        object.__setattr__(obj, "length", int(len(arr)))
        object.__setattr__(obj, "_arr", arr)
        object.__setattr__(obj, "_bits", None)
        return obj

    @classmethod
    def one(cls, modulus: int, length: int, offset: int = 0) -> "QSeries":
        """The constant 1 on the window ``[0, length)`` (shifted by ``offset``)."""
        arr = np.zeros(length, dtype=np.int64)
        if length:
            arr[0] = 1
        return cls(modulus, offset, arr)

    @classmethod
    def zero(cls, modulus: int, offset: int, length: int) -> "QSeries":
        return cls(modulus, offset, np.zeros(length, dtype=np.int64))

    @classmethod
    def from_terms(cls, modulus: int, offset: int, end: int, terms: dict[int, int]) -> "QSeries":
        """Build a series on ``[offset, end)`` from an exponent -> coefficient map."""
        arr = np.zeros(max(end - offset, 0), dtype=np.int64)
        for e, c in terms.items():
            if offset <= e < end:
                arr[e - offset] = int(c) % modulus
        return cls._from_reduced(modulus, offset, arr)

    def __setattr__(self, name, value):
        raise AttributeError("QSeries is immutable")

    @property
    def end(self) -> int:
        return self.offset + self.length

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only int64 array of stored coefficients."""
        if self._arr is not None:
            return self._arr
        arr = _bits_to_array(self._bits, self.length)
        arr.setflags(write=False)
        return arr

    def coeff(self, n: int) -> int:
        if not self.offset <= n < self.end:
            raise SeriesError(f"exponent {n} outside precision window [{self.offset}, {self.end})")
        if self._bits is not None:
            return (self._bits >> (n - self.offset)) & 1
        return int(self._arr[n - self.offset])

    def __getitem__(self, n: int) -> int:
        return self.coeff(n)

    def support(self) -> np.ndarray:
        """Exponents carrying a nonzero coefficient, ascending."""
        if self._bits is not None:
            return _set_bits(self._bits, self.length) + self.offset
        return np.flatnonzero(self._arr) + self.offset

    def nnz(self) -> int:
        if self._bits is not None:
            return gmpy2.popcount(self._bits)
        return int(np.count_nonzero(self._arr))

    def __len__(self) -> int:
        return self.length

    def __eq__(self, other) -> bool:
        if not isinstance(other, QSeries):
            return NotImplemented
        if (self.modulus, self.offset, self.length) != (other.modulus, other.offset, other.length):
            return False
        if self._bits is not None:
            return self._bits == other._bits
        return bool(np.array_equal(self._arr, other._arr))

    def __hash__(self):
        return hash((self.modulus, self.offset, self.length, self.coeffs.tobytes()))

    def __repr__(self) -> str:
        terms = [f"{c}*q^{e}" for e, c in zip(self.support()[:6].tolist(), self._head_values())]
        more = " + ..." if self.nnz() > 6 else ""
        body = " + ".join(terms) if terms else "0"
        return f"QSeries(mod {self.modulus}, [{self.offset}, {self.end}): {body}{more})"

    def _head_values(self) -> list[int]:
        sup = self.support()[:6]
        return [self.coeff(int(e)) for e in sup]

    def __add__(self, other: "QSeries") -> "QSeries":
        return add(self, other)

    def __sub__(self, other: "QSeries") -> "QSeries":
        return sub(self, other)

    def __neg__(self) -> "QSeries":
        if self._bits is not None:
            return self
        return QSeries._from_reduced(self.modulus, self.offset, (-self._arr) % self.modulus)

    def __mul__(self, other):
        if isinstance(other, QSeries):
            return mul(self, other)
        if isinstance(other, (int, np.integer)):
            return scale(self, int(other))
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return scale(self, int(other))
        return NotImplemented

    def __pow__(self, e: int) -> "QSeries":
        return pow(self, e)


def _check_same_modulus(f: QSeries, g: QSeries) -> int:
    if f.modulus != g.modulus:
        raise SeriesError(f"modulus mismatch: {f.modulus} vs {g.modulus}")
    return f.modulus


def _check_nonempty(*fs: QSeries) -> None:
    for f in fs:
        if f.length == 0:
            raise SeriesError("operation on an empty series (unknown precision)")


def _window_coeffs(f: QSeries, lo: int, hi: int) -> np.ndarray:
    """Coefficients of f on [lo, hi), zero below f.offset; hi must be <= f.end."""
    out = np.zeros(hi - lo, dtype=np.int64)
    a = max(lo, f.offset)
    if a < hi:
        out[a - lo:] = f.coeffs[a - f.offset:hi - f.offset]
    return out


def coefficient_array(f: QSeries, lo: int, hi: int) -> np.ndarray:
    """Dense coefficients on ``[lo, hi)``; exponents below the offset read as zero."""
    if hi > f.end:
        raise SeriesError(f"[{lo}, {hi}) extends past precision end {f.end}")
    return _window_coeffs(f, lo, hi)


def _window_bits(f: QSeries, lo: int, hi: int) -> int:
    a = max(lo, f.offset)
    if a >= hi:
        return 0
    return ((f._bits >> (a - f.offset)) & _mask(hi - a)) << (a - lo)


def add(f: QSeries, g: QSeries) -> QSeries:
    """Sum on the window ``[min(v_f, v_g), min(end_f, end_g))``."""
    ell = _check_same_modulus(f, g)
    lo, hi = min(f.offset, g.offset), min(f.end, g.end)
    if hi <= lo:
        raise SeriesError(f"empty result window [{lo}, {hi})")
    if ell == 2:
        return QSeries._from_bits(lo, hi - lo, _window_bits(f, lo, hi) ^ _window_bits(g, lo, hi))
    return QSeries._from_reduced(ell, lo, (_window_coeffs(f, lo, hi) + _window_coeffs(g, lo, hi)) % ell)


def sub(f: QSeries, g: QSeries) -> QSeries:
    return add(f, -g)


def scale(f: QSeries, c: int) -> QSeries:
    c %= f.modulus
    if f.modulus == 2:
        return f if c else QSeries._from_bits(f.offset, f.length, 0)
    return QSeries._from_reduced(f.modulus, f.offset, (f.coeffs * c) % f.modulus)


def shift(f: QSeries, k: int) -> QSeries:
    """Multiply by ``q^k`` (moves the window)."""
    if f._bits is not None:
        return QSeries._from_bits(f.offset + k, f.length, f._bits)
    return QSeries._from_reduced(f.modulus, f.offset + k, f._arr)


def truncate(f: QSeries, end: int) -> QSeries:
    """Restrict the window to ``[offset, min(end, f.end))``."""
    end = max(min(end, f.end), f.offset)
    n = end - f.offset
    if f._bits is not None:
        return QSeries._from_bits(f.offset, n, f._bits)
    return QSeries._from_reduced(f.modulus, f.offset, f._arr[:n])


def restrict(f: QSeries, lo: int, hi: int) -> QSeries:
    """Restrict to ``[lo, hi)``, which must lie inside f's window."""
    if lo < f.offset or hi > f.end or hi < lo:
        raise SeriesError(f"[{lo}, {hi}) not inside [{f.offset}, {f.end})")
    if f._bits is not None:
        return QSeries._from_bits(lo, hi - lo, f._bits >> (lo - f.offset))
    return QSeries._from_reduced(f.modulus, lo, f._arr[lo - f.offset:hi - f.offset])


def normalize(f: QSeries) -> QSeries:
    """Strip leading zeros.  An all-zero window becomes the empty series at ``f.end``."""
    if f._bits is not None:
        if f._bits == 0:
            return QSeries._from_bits(f.end, 0, 0)
        lead = gmpy2.bit_scan1(f._bits)
        return QSeries._from_bits(f.offset + lead, f.length - lead, f._bits >> lead)
    nz = np.flatnonzero(f._arr)
    if len(nz) == 0:
        return QSeries._from_reduced(f.modulus, f.end, np.zeros(0, dtype=np.int64))
    lead = int(nz[0])
    return QSeries._from_reduced(f.modulus, f.offset + lead, f._arr[lead:])


def common_window_equal(f: QSeries, g: QSeries) -> bool:
    """Compare two series on the intersection of their windows (below an offset counts as 0)."""
    if f.modulus != g.modulus:
        return False
    lo, hi = min(f.offset, g.offset), min(f.end, g.end)
    if hi <= lo:
        return True
    if f.modulus == 2:
        return _window_bits(f, lo, hi) == _window_bits(g, lo, hi)
    return bool(np.array_equal(_window_coeffs(f, lo, hi), _window_coeffs(g, lo, hi)))


# ---------------------------------------------------------------------------
# multiplication kernels.  All take coefficient data on a common relative
# window of length n and return the first n coefficients of the product.

def _conv_schoolbook(a: np.ndarray, b: np.ndarray, n: int, ell: int) -> np.ndarray:
    if np.count_nonzero(a) > np.count_nonzero(b):
        a, b = b, a
    out = np.zeros(n, dtype=np.int64)
    # partial sums stay below 2^63: reduce every `batch` accumulated terms
    batch = max(1, (2**62 - ell) // max((ell - 1) ** 2, 1))
    pending = 0
    for i in np.flatnonzero(a[:n]).tolist():
        out[i:] += b[:n - i] * int(a[i])
        pending += 1
        if pending >= batch:
            out %= ell
            pending = 0
    return out % ell


def _kron_pack(x: np.ndarray, slot: int) -> gmpy2.mpz:
    words = x.astype("<u8").view(np.uint8).reshape(-1, 8)
    if slot <= 8:
        raw = np.ascontiguousarray(words[:, :slot])
    else:
        raw = np.zeros((len(x), slot), dtype=np.uint8)
        raw[:, :8] = words
    return gmpy2.mpz.from_bytes(raw.tobytes(), "little")


def _kron_unpack(z: gmpy2.mpz, n: int, slot: int, ell: int) -> np.ndarray:
    nbytes = max((z.bit_length() + 7) // 8, n * slot)
    raw = np.frombuffer(z.to_bytes(nbytes, "little"), dtype=np.uint8)[: n * slot].reshape(n, slot)
    if ell == 2:
        return (raw[:, 0] & 1).astype(np.int64)
    lo = np.zeros((n, 8), dtype=np.uint8)
    k = min(slot, 8)
    lo[:, :k] = raw[:, :k]
    low = lo.view("<u8").ravel()
    res = (low % np.uint64(ell)).astype(np.int64)
    if slot > 8:
        hi = np.zeros((n, 8), dtype=np.uint8)
        hi[:, : slot - 8] = raw[:, 8:]
        high = (hi.view("<u8").ravel() % np.uint64(ell)).astype(np.int64)
        r = builtins.pow(2, 64, ell)
        res = (res + high * r) % ell
    return res


def _conv_kronecker(a: np.ndarray, b: np.ndarray, n: int, ell: int) -> np.ndarray:
    """Exact truncated convolution by packing into one big integer (GMP multiply)."""
    a, b = a[:n], b[:n]
    bound = (ell - 1) ** 2 * n
    slot = max(1, (bound.bit_length() + 8) // 8)
    prod = _kron_pack(a, slot) * _kron_pack(b, slot)
    return _kron_unpack(prod, n, slot, ell)


def _clmul(x: int, y: int, n: int) -> int:
    """Carry-less product of bit-packed GF(2) polynomials, truncated to n bits."""
    x &= _mask(n)
    y &= _mask(n)
    px, py = gmpy2.popcount(x), gmpy2.popcount(y)
    if px > py:
        x, y, px, py = y, x, py, px
    if px <= _SPARSE_CLMUL_LIMIT:
        acc = 0
        for i in _set_bits(x, n).tolist():
            acc ^= y << i
        return acc & _mask(n)
    a = _bits_to_array(x, n)
    b = _bits_to_array(y, n)
    return _array_to_bits(_conv_kronecker(a, b, n, 2))


def _conv(a: np.ndarray, b: np.ndarray, n: int, ell: int) -> np.ndarray:
    if min(np.count_nonzero(a[:n]), np.count_nonzero(b[:n])) <= _SPARSE_MUL_LIMIT or n < 64:
        return _conv_schoolbook(a, b, n, ell)
    return _conv_kronecker(a, b, n, ell)


def mul(f: QSeries, g: QSeries) -> QSeries:
    """Product; offset ``v_f + v_g`` and end ``min(end_f + v_g, end_g + v_f)``."""
    ell = _check_same_modulus(f, g)
    _check_nonempty(f, g)
    n = min(f.length, g.length)
    off = f.offset + g.offset
    if ell == 2:
        return QSeries._from_bits(off, n, _clmul(f._bits, g._bits, n))
    return QSeries._from_reduced(ell, off, _conv(f._arr, g._arr, n, ell))


def mul_schoolbook(f: QSeries, g: QSeries) -> QSeries:
    """Reference product using only the schoolbook kernel (no fast paths)."""
    ell = _check_same_modulus(f, g)
    _check_nonempty(f, g)
    n = min(f.length, g.length)
    return QSeries._from_reduced(ell, f.offset + g.offset, _conv_schoolbook(f.coeffs, g.coeffs, n, ell))


# ---------------------------------------------------------------------------

def _inv_recurrence(c: np.ndarray, n: int, ell: int) -> np.ndarray:
    # g_k = -c0^{-1} * sum_{j>=1} c_j g_{k-j}
    c0inv = builtins.pow(int(c[0]), -1, ell)
    terms = [(j, int(c[j])) for j in (np.flatnonzero(c[1:n]) + 1).tolist()]
    g = [0] * n
    g[0] = c0inv
    for k in range(1, n):
        s = 0
        for j, cj in terms:
            if j > k:
                break
            s += cj * g[k - j]
        g[k] = (-s * c0inv) % ell
    return np.array(g, dtype=np.int64)


def _inv_newton(c: np.ndarray, n: int, ell: int) -> np.ndarray:
    g = np.array([builtins.pow(int(c[0]), -1, ell)], dtype=np.int64)
    k = 1
    while k < n:
        k = min(2 * k, n)
        gk = np.zeros(k, dtype=np.int64)
        gk[: len(g)] = g
        e = _conv(c[:k], gk, k, ell)          # f*g = 1 + O(q^{k/2})
        e = (-e) % ell
        e[0] = (e[0] + 2) % ell                # 2 - f*g
        g = _conv(gk, e, k, ell)
    return g


def _inv_newton_gf2(bits: int, n: int) -> int:
    # mod 2: g <- g(2 - f g) = f g^2, and squaring is bit dilation
    g, k = 1, 1
    while k < n:
        k = min(2 * k, n)
        sq = _dilate_bits(g, k, 2) & _mask(k)
        g = _clmul(bits, sq, k)
    return g


def inv(f: QSeries, method: str = "auto") -> QSeries:
    """Multiplicative inverse on a window of the same length.

    ``method`` is ``"recurrence"`` (sparse linear recurrence), ``"newton"`` or
    ``"auto"`` (recurrence when ``length * density`` is small).
    """
    _check_nonempty(f)
    ell, n = f.modulus, f.length
    if ell == 2:
        if not f._bits & 1:
            raise SeriesError("leading coefficient is zero; normalize first")
    elif f._arr[0] == 0:
        raise SeriesError("leading coefficient is zero; normalize first")
    if method == "auto":
        method = "recurrence" if n * f.nnz() <= _RECURRENCE_LIMIT else "newton"
    if method == "recurrence":
        out = _inv_recurrence(f.coeffs, n, ell)
        return QSeries._from_reduced(ell, -f.offset, out)
    if method != "newton":
        raise ValueError(f"unknown inversion method {method!r}")
    if ell == 2:
        return QSeries._from_bits(-f.offset, n, _inv_newton_gf2(f._bits, n))
    return QSeries._from_reduced(ell, -f.offset, _inv_newton(f._arr, n, ell))


def pow(f: QSeries, e: int) -> QSeries:  # noqa: A001 - mirrors the ring operation name
    """``f**e`` by repeated squaring; ``f**0`` is 1 on f's relative window."""
    _check_nonempty(f)
    if e < 0:
        raise SeriesError("negative exponent; use inv")
    result = QSeries.one(f.modulus, f.length)
    base = f
    while e:
        if e & 1:
            result = mul(result, base)
        e >>= 1
        if e:
            base = mul(base, base)
    return result


def _dilate_bits(bits: int, length: int, k: int) -> int:
    idx = _set_bits(bits, length)
    out = np.zeros(length * k, dtype=np.uint8)
    out[idx * k] = 1
    return _array_to_bits(out)


def dilate(f: QSeries, k: int) -> QSeries:
    """Substitute ``q -> q^k``: window becomes ``[k*v, k*end)`` exactly."""
    if k < 1:
        raise SeriesError("dilation factor must be positive")
    if k == 1:
        return f
    n = f.length * k
    if f._bits is not None:
        return QSeries._from_bits(f.offset * k, n, _dilate_bits(f._bits, f.length, k))
    out = np.zeros(n, dtype=np.int64)
    out[::k] = f._arr
    return QSeries._from_reduced(f.modulus, f.offset * k, out)


def frobenius_pow(f: QSeries, m: int) -> QSeries:
    """``f^(l^m)`` by exponent dilation, exact on ``[v*l^m, end*l^m)``."""
    _check_nonempty(f)
    if m < 0:
        raise SeriesError("m must be nonnegative")
    return dilate(f, f.modulus ** m)


def nonzero_count(f: QSeries, X: int) -> int:
    """Number of exponents ``v <= n <= X`` with a nonzero coefficient."""
    if X >= f.end:
        raise SeriesError(f"X={X} beyond precision window end {f.end}")
    if X < f.offset:
        return 0
    k = X - f.offset + 1
    if f._bits is not None:
        return gmpy2.popcount(f._bits & _mask(k))
    return int(np.count_nonzero(f._arr[:k]))


# ---------------------------------------------------------------------------
# serialization

def to_csv(f: QSeries, sparse: bool = False) -> str:
    """CSV ``exponent,coefficient``.  Dense output lists every exponent of the window."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["exponent", "coefficient"])
    exps = f.support() if sparse else np.arange(f.offset, f.end)
    vals = f.coeffs[exps - f.offset] if len(exps) else []
    for e, c in zip(np.asarray(exps).tolist(), np.asarray(vals).tolist()):
        w.writerow([e, c])
    return buf.getvalue()


def from_csv(text: str, modulus: int) -> QSeries:
    """Inverse of dense :func:`to_csv`; the window is the exponent range present."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or rows[0] != ["exponent", "coefficient"]:
        raise SeriesError("missing header 'exponent,coefficient'")
    body = [(int(e), int(c)) for e, c in rows[1:]]
    if not body:
        return QSeries(modulus, 0, [])
    exps = [e for e, _ in body]
    lo, hi = min(exps), max(exps) + 1
    return QSeries.from_terms(modulus, lo, hi, dict(body))


def to_json(f: QSeries) -> str:
    return json.dumps(
        {"modulus": f.modulus, "offset": f.offset, "length": f.length, "coeffs": f.coeffs.tolist()},
        separators=(",", ":"),
    )


def from_json(text: str) -> QSeries:
    d = json.loads(text)
    if len(d["coeffs"]) != d["length"]:
        raise SeriesError("length field does not match coefficient count")
    return QSeries(d["modulus"], d["offset"], np.array(d["coeffs"], dtype=np.int64))
