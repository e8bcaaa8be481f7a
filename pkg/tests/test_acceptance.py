"""Acceptance suite: twelve criteria, each exact or time-bounded as stated.

Run with ``pytest tests/test_acceptance.py`` (one PASS/FAIL line per criterion
is printed in the terminal summary) or directly with ``python tests/test_acceptance.py``.
"""

from __future__ import annotations

import io
import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from halfmod import arith, cli, optimality, qforms, sievelab  # noqa: E402
from halfmod import fpseries as fp  # noqa: E402

LINES: dict[int, str] = {}
CRITERIA = {}


def criterion(num: int, title: str, limit: float | None):
    def wrap(fn):
        CRITERIA[num] = (title, limit, fn)
        return fn
    return wrap


def evaluate(num: int) -> tuple[bool, str]:
    title, limit, fn = CRITERIA[num]
    t0 = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as e:  # a crash is a failure, reported with its message
        ok, detail = False, f"{type(e).__name__}: {e}"
    dt = time.perf_counter() - t0
    if limit is not None and dt >= limit:
        ok = False
        detail += f"; over time limit {limit:g} s"
    line = f"criterion {num:2d} {'PASS' if ok else 'FAIL'}  {title}: {detail} [{dt:.2f} s]"
    LINES[num] = line
    return ok, line


def _partition_oracle_pentagonal(ell: int, n_max: int) -> list[int]:
    # textbook generalized-pentagonal recurrence, plain Python
    p = [1] + [0] * n_max
    for n in range(1, n_max + 1):
        s, k = 0, 1
        while True:
            g1 = k * (3 * k - 1) // 2
            if g1 > n:
                break
            sign = 1 if k % 2 else -1
            s += sign * p[n - g1]
            g2 = k * (3 * k + 1) // 2
            if g2 <= n:
                s += sign * p[n - g2]
            k += 1
        p[n] = s % ell
    return p


@criterion(1, "eta1 theta form = eta1 product form to prec 1e5, l in {2,3,5}", 5.0)
def c1():
    bad = [ell for ell in (2, 3, 5) if qforms.eta1(ell, 10**5).series != qforms.eta1_product(ell, 10**5).series]
    return not bad, "exact equality" if not bad else f"mismatch for l={bad}"


@criterion(2, "eta1 * partition_series = 1 to prec 1e5, l in {2,3,5,7,11}", 10.0)
def c2():
    bad = []
    for ell in (2, 3, 5, 7, 11):
        r = fp.mul(qforms.eta1(ell, 10**5).series, qforms.partition_series(ell, 10**5).series)
        if r.offset != 0 or r.support().tolist() != [0] or r.coeff(0) != 1:
            bad.append(ell)
    return not bad, "exact" if not bad else f"not 1 for l={bad}"


@criterion(3, "Ramanujan congruences mod 5, 7, 11 for 24n-1 < 1e5", 10.0)
def c3():
    checked = 0
    for ell, r in ((5, 4), (7, 5), (11, 6)):
        f = qforms.partition_series(ell, 10**5).series
        n = 0
        while 24 * (ell * n + r) - 1 < 10**5:
            if f.coeff(24 * (ell * n + r) - 1) != 0:
                return False, f"p({ell * n + r}) != 0 mod {ell}"
            n += 1
            checked += 1
    return True, f"{checked} coefficients vanish"


@criterion(4, "N_l(X) >= sqrt(X)/loglog X, l in {2,3,5,7,13}, X in {1e4,1e5,1e6}", 120.0)
def c4():
    worst = math.inf
    parts = []
    for ell in (2, 3, 5, 7, 13):
        p = qforms.partition_numbers(ell, 10**6)
        # independent recurrence on a prefix guards the series used for counting
        if p.coeffs[:3001].tolist() != _partition_oracle_pentagonal(ell, 3000):
            return False, f"p(n) mod {ell} disagrees with the recurrence"
        for X in (10**4, 10**5, 10**6):
            N = fp.nonzero_count(p, X) - fp.nonzero_count(p, 0)
            bound = math.sqrt(X) / math.log(math.log(X))
            worst = min(worst, N / bound)
            if N < bound:
                return False, f"l={ell} X={X}: N={N} < {bound:.1f}"
        parts.append(f"l={ell}:N(1e6)={N}")
    return True, f"min N/bound = {worst:.1f}; " + " ".join(parts)


@criterion(5, "#{n <= 1e6 : c(n) odd} >= sqrt(X)/loglog X, j mod 2 checked to n = 200", 120.0)
def c5():
    c = oracles.j_coefficients(200)
    j = qforms.j_mod2(10**6 + 1).series
    if any(j.coeff(n) != c[n] % 2 for n in range(-1, 201)):
        return False, "j mod 2 disagrees with E4^3/Delta"
    X = 10**6
    N = fp.nonzero_count(j, X) - fp.nonzero_count(j, 0)
    bound = math.sqrt(X) / math.log(math.log(X))
    return N >= bound, f"N = {N}, bound = {bound:.1f}, oracle match for -1 <= n <= 200"


@criterion(6, "nonzero_count(eta1 mod 2) = 33 at 1e4 and matches enumeration at 10 random X", 1.0)
def c6():
    f = qforms.eta1(2, 10**6 + 1).series
    if fp.nonzero_count(f, 10**4) != 33:
        return False, f"count at 1e4 = {fp.nonzero_count(f, 10**4)}"
    rng = np.random.default_rng(cli.DEFAULT_SEED)
    for X in rng.integers(1, 10**6 + 1, size=10).tolist():
        if fp.nonzero_count(f, X) != len(oracles.eta1_exponents(X)):
            return False, f"mismatch at X={X}"
    return True, "33 at 1e4; 10 random X agree"


@criterion(7, "a_1(T_p Delta) = tau(p) mod l, p <= 50, l in {2,3,5}; odd-ord check at 1e4", 30.0)
def c7():
    tau = oracles.tau_table(50)
    primes = oracles.naive_primes(50)
    for ell in (2, 3, 5):
        d = qforms.delta(ell, 51 * 50)
        for p in primes:
            t = qforms.hecke_tp(d, p).series
            if t.coeff(1) != tau[p] % ell:
                return False, f"a_1(T_{p} Delta) mod {ell}"
            if not fp.common_window_equal(t, fp.scale(d.series, tau[p])):
                return False, f"T_{p} Delta != tau({p}) Delta mod {ell}"
    ok = qforms.odd_ord_vanishing_check(qforms.delta(2, 10**4 + 1), 3, 10**4)
    return ok is True, f"{len(primes) * 3} eigenvalue checks; odd-ord check = {ok}"


@criterion(8, "class numbers, L(1) values and class number formula for -1e4 < D < 0", 60.0)
def c8():
    hs = {D: arith.class_number(D) for D in (-4, -20, -23)}
    if hs != {-4: 1, -20: 2, -23: 3} or any(oracles.class_number_bruteforce(D) != h for D, h in hs.items()):
        return False, f"class numbers {hs}"
    e4 = abs(arith.l_one(-4) - math.pi / 4)
    e3 = abs(arith.l_one(-3) - math.pi / (3 * math.sqrt(3)))
    if e4 >= 1e-9 or e3 >= 1e-9:
        return False, f"l_one errors {e4:.2e}, {e3:.2e}"
    worst = 0.0
    n = 0
    for D in range(-10**4 + 1, 0):
        if arith.is_fundamental(D):
            a, b = arith.l_one(D), arith.l_one_class_number_formula(D)
            worst = max(worst, abs(a - b) / abs(b))
            n += 1
    return worst < 1e-9, f"{n} discriminants, max relative gap {worst:.2e}"


@criterion(9, "per-a sieve counts: spot values, naive oracle, ratio record", 30.0)
def c9():
    spots = [sievelab.count_prime_reps(*args).count for args in ((1, 1, 100), (2, 1, 50), (1, 2, 20))]
    if spots != [4, 2, 1]:
        return False, f"spot values {spots}"
    table = arith.prime_table(10**4)
    for u in (1, 2, 3):
        for a in range(1, 201):
            if sievelab.count_prime_reps(a, u, 10**4, table=table).count != len(oracles.naive_rep_primes(a, u, 10**4)):
                return False, f"oracle mismatch a={a} u={u}"
    rng = np.random.default_rng(cli.DEFAULT_SEED)
    big = arith.prime_table(10**6)
    small = arith.primes_up_to(32)
    ratios = [sievelab.count_prime_reps(a, 1, 10**6, table=big, primes=small).ratio
              for a in rng.integers(1, 10**4 + 1, size=100).tolist()]
    finite = all(math.isfinite(r) for r in ratios)
    return finite, f"oracle agrees on 600 (a,u); max count/bound over 100 a = {max(ratios):.4f}"


@criterion(10, "aggregate count <= sum of per-a counts for a seeded random 100-set", 120.0)
def c10():
    agg, per_a = sievelab.theorem2_experiment({"random": 100}, 1, 10**6, seed=cli.DEFAULT_SEED)
    ok = agg.represented <= agg.per_a_total == sum(r.count for r in per_a)
    argv = ["sieve-agg", "--random", "100", "--u", "1", "--x", str(10**6)]
    outs = []
    for _ in range(2):
        buf = io.StringIO()
        cli.dispatch(argv, buf, io.StringIO())
        outs.append(buf.getvalue().encode())
    same = outs[0] == outs[1]
    return ok and same, (f"represented = {agg.represented} <= {agg.per_a_total}; "
                         f"ratio to rhs = {agg.ratio:.4f}; reruns identical = {same}")


@criterion(11, "construction X=1e6, Z=100, 5 d: Cauchy-Schwarz and two-path r(p)", 120.0)
def c11():
    rep = optimality.run_construction(optimality.ConstructionParams(10**6, 100, 5))
    m = rep.moments
    cs = -(-m.sum_r**2 // m.sum_r2)
    A = optimality.build_A([d for d, _ in rep.chosen], 10**6, 100)
    same = optimality.rep_counts(A, 10**6) == optimality.rep_counts_transposed(A, 10**6)
    return m.represented >= cs and same, (f"|A| = {rep.A_size}, represented = {m.represented} >= {cs}; "
                                          f"paths equal = {same}")


@criterion(12, "pow2_square_search solution sets for n0 in {7,-1,1}", 1.0)
def c12():
    got = {n0: qforms.pow2_square_search(n0, 1, 40) for n0 in (7, -1, 1)}
    want = {7: [(1, 1, 3)], -1: [(1, 1, 1)], 1: [(3, 1, 3)]}
    return got == want, f"{got}"


@pytest.mark.parametrize("num", sorted(CRITERIA))
def test_criterion(num):
    ok, line = evaluate(num)
    print(line)
    assert ok, line


if __name__ == "__main__":
    results = [evaluate(n) for n in sorted(CRITERIA)]
    for _, line in results:
        print(line)
    sys.exit(0 if all(ok for ok, _ in results) else 1)
