"""Command-line front end: ``halfmod <command> [flags]``.

Every command produces one or more named tables.  CSV output prints each
table with its own header (tables separated by a blank line); JSON output is
a single object ``{command, config, results, timing}`` whose ``results`` maps
table names to lists of rows.  Timing is only filled in with ``--timing`` so
that repeated runs are byte-identical.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import functools
import io
import json
import math
import sys
import time
import warnings
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import arith, optimality, qforms, sievelab
from . import fpseries as fp

DEFAULT_SEED = 20170517
SERIES_CAP_GF2 = 10**8
SERIES_CAP = 10**7
SWEEP_CAP = 10**9

Table = list[dict[str, Any]]


class CapError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    flags: dict[str, Any] = field(default_factory=dict)
    output: str = "csv"
    seed: int = DEFAULT_SEED


# ---------------------------------------------------------------------------
# formatting

def _fmt_real(x: float) -> str:
    if isinstance(x, float) and not math.isfinite(x):
        return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")
    return format(x, ".12g")


def _csv_cell(v: Any) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return _fmt_real(float(v))
    if isinstance(v, (list, tuple)):
        return " ".join(_csv_cell(x) for x in v)
    return "" if v is None else str(v)


def _json_value(v: Any) -> Any:
    if isinstance(v, bool) or v is None or isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(_fmt_real(v)) if math.isfinite(v) else None
    if isinstance(v, (list, tuple)):
        return [_json_value(x) for x in v]
    if isinstance(v, dict):
        return {k: _json_value(x) for k, x in v.items()}
    return str(v)


def render_csv(tables: dict[str, Table]) -> str:
    chunks = []
    for rows in tables.values():
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = list(rows[0].keys()) if rows else []
        w.writerow(cols)
        for r in rows:
            w.writerow([_csv_cell(r[c]) for c in cols])
        chunks.append(buf.getvalue())
    return "\n".join(chunks)


def render_json(cfg: RunConfig, tables: dict[str, Table], elapsed: float | None) -> str:
    obj = {
        "command": cfg.command,
        "config": _json_value(asdict(cfg)),
        "results": {k: [_json_value(r) for r in rows] for k, rows in tables.items()},
        "timing": None if elapsed is None else {"seconds": elapsed},
    }
    return json.dumps(obj) + "\n"


# ---------------------------------------------------------------------------
# caps

def _check_series_cap(ell: int, length: int, unsafe: bool) -> None:
    cap = SERIES_CAP_GF2 if ell == 2 else SERIES_CAP
    if length > cap and not unsafe:
        raise CapError(f"series length {length} exceeds cap {cap} for l={ell}; pass --unsafe-caps to override")


def _check_sweep_cap(X: int, unsafe: bool) -> None:
    if X > SWEEP_CAP and not unsafe:
        raise CapError(f"X = {X} exceeds the prime-sweep cap {SWEEP_CAP}; pass --unsafe-caps to override")


def _build_form(name: str, ell: int, prec: int) -> qforms.TaggedForm:
    if name not in qforms.FORMS:
        raise ValueError(f"unknown form {name!r}; choose from {', '.join(qforms.FORMS)}")
    return qforms.FORMS[name](ell, prec)


# ---------------------------------------------------------------------------
# experiment drivers

def checkpoints(X: int) -> list[int]:
    """10^3, 10^4, ... below X, then X itself."""
    pts = []
    c = 1000
    while c < X:
        pts.append(c)
        c *= 10
    return pts + [X]


def count_nonzero_driver(form: str, ell: int, X: int, index_by: str = "n", unsafe: bool = False) -> Table:
    """Growth table of N(X_i) = #{n <= X_i : a_n != 0 mod l} at decade checkpoints.

    ``index_by="n"`` counts indices 1 <= n <= X_i (n of p(n) for the partition
    form, the q-exponent otherwise); ``"exponent"`` counts every exponent <= X_i
    of the window, poles and constant term included.
    """
    if index_by not in ("n", "exponent"):
        raise ValueError("index_by must be 'n' or 'exponent'")
    if X < 0:
        raise ValueError("X must be nonnegative")
    if form == "partition" and index_by == "n":
        _check_series_cap(ell, X + 1, unsafe)
        series = qforms.partition_numbers(ell, X)
    else:
        _check_series_cap(ell, X + 2, unsafe)
        series = _build_form(form, ell, X + 1).series
    base = fp.nonzero_count(series, 0) if index_by == "n" else 0
    rows = []
    for x in checkpoints(X):
        n = fp.nonzero_count(series, x) - base
        ll = math.log(math.log(x)) if x > math.e else float("nan")
        scale = math.sqrt(x) / ll if ll > 0 else float("nan")
        rows.append({"X": x, "count": n, "sqrt_over_loglog": scale, "ratio": n / scale if scale == scale else float("nan")})
    return rows


def _cmd_expand(a, cfg) -> dict[str, Table]:
    _check_series_cap(a.modulus, a.prec, a.unsafe_caps)
    f = _build_form(a.form, a.modulus, a.prec).series
    exps = np.arange(f.offset, f.end) if a.dense else f.support()
    vals = f.coeffs[exps - f.offset] if len(exps) else []
    return {"series": [{"exponent": int(e), "coefficient": int(c)} for e, c in zip(exps.tolist(), list(vals))]}


def _cmd_count_nonzero(a, cfg) -> dict[str, Table]:
    return {"growth": count_nonzero_driver(a.form, a.modulus, a.x, a.index_by, a.unsafe_caps)}


def _cmd_hecke(a, cfg) -> dict[str, Table]:
    _check_series_cap(a.modulus, a.prec, a.unsafe_caps)
    h = _build_form(a.form, a.modulus, a.prec)
    t = qforms.hecke_tp(h, a.p).series
    sup = t.support()
    return {
        "hecke": [{"exponent": int(e), "coefficient": t.coeff(int(e))} for e in sup.tolist()],
        "summary": [{"p": a.p, "window_end": t.end, "constant": qforms.is_constant(t)}],
    }


def _cmd_pipeline(a, cfg) -> dict[str, Table]:
    _check_series_cap(a.modulus, a.prec, a.unsafe_caps)
    f = _build_form(a.form, a.modulus, a.prec)
    steps = [a.form]
    if f.meta.modulus == 2 and f.meta.half_integral:
        f = qforms.multiply_theta0(f)
        steps.append("theta0")
    if a.m is None:
        m, p0 = qforms.pipeline_m(f)
    else:
        m, p0 = a.m, None
    h = qforms.holomorphize(f, m)
    steps.append(f"eta1^{a.modulus}^{m}")
    hn = fp.normalize(h.series)
    summary = {
        "steps": " * ".join(steps),
        "m": m,
        "odd_order_prime": p0,
        "twice_weight": h.meta.twice_weight,
        "level": h.meta.level,
        "leading_exponent": hn.offset if hn.length else None,
        "window_end": h.series.end,
    }
    tables: dict[str, Table] = {}
    if a.p is not None:
        x = min(a.x if a.x is not None else h.series.end - 1, h.series.end - 1)
        integral = h.meta.twice_weight % 2 == 0
        summary["hecke_p"] = a.p
        summary["hecke_constant"] = qforms.is_constant(qforms.hecke_tp(h, a.p).series) if integral else None
        summary["odd_ord_vanishing"] = qforms.odd_ord_vanishing_check(h, a.p, x) if integral else None
    tables["summary"] = [summary]
    if a.umax:
        scan = qforms.scan_up_nonzero(h, a.umax, a.pmax)
        tables["scan"] = [{"u": u, "primes": ps} for u, ps in scan]
    return tables


def _cmd_pow2_square(a, cfg) -> dict[str, Table]:
    sols = qforms.pow2_square_search(a.n0, a.level, a.mmax)
    return {"solutions": [{"m": m, "u": u, "y": y} for m, u, y in sols]}


def _cmd_discriminant(a, cfg) -> dict[str, Table]:
    dec = arith.fundamental_decomposition(a.a)
    l1 = arith.l_one(dec.fund)
    good = arith.classify_discriminant(dec.fund, a.c0) == "good-proxy"
    row = {"a": a.a, "fund": dec.fund, "sq": dec.sq, "h": arith.class_number(dec.fund), "l_one": l1, "good_proxy": good}
    return {"discriminant": [row]}


def _cmd_agood(a, cfg) -> dict[str, Table]:
    _check_sweep_cap(a.terms, a.unsafe_caps)
    r = arith.agood_compare(a.a, a.x, a.small_cutoff, a.terms)
    return {"agood": [asdict(r)]}


def _cmd_sieve_reps(a, cfg) -> dict[str, Table]:
    _check_sweep_cap(a.x, a.unsafe_caps)
    r = sievelab.count_prime_reps(a.a, a.u, a.x, a.m_min)
    return {"reps": [asdict(r)]}


def _cmd_sieve_agg(a, cfg) -> dict[str, Table]:
    _check_sweep_cap(a.x, a.unsafe_caps)
    limit = sievelab.MEMORY_LIMIT if not a.unsafe_caps else max(a.x, sievelab.MEMORY_LIMIT)
    if a.x > limit:
        raise CapError(f"X = {a.x} exceeds the marking-table limit {limit}")
    if a.a_file:
        with open(a.a_file) as fh:
            A = [int(tok) for tok in fh.read().replace(",", " ").split()]
        spec = {"list": A}
    elif a.random is not None:
        spec = {"random": a.random}
    else:
        spec = {"construction": {"Z": a.z, "d_count": a.dcount}}
    agg, per_a = sievelab.theorem2_experiment(spec, a.u, a.x, cfg.seed, a.m_min, a.threads)
    row = asdict(agg)
    row.pop("meta")
    row["source"] = agg.meta["source"]
    return {"per_a": [asdict(r) for r in per_a], "aggregate": [row]}


def _cmd_optimality(a, cfg) -> dict[str, Table]:
    _check_sweep_cap(a.x, a.unsafe_caps)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rep = optimality.run_construction(optimality.ConstructionParams(a.x, a.z, a.dcount))
    chosen = [{"d": d, "l_value": L} for d, L in rep.chosen]
    m = rep.moments
    summary = {
        "X": rep.X,
        "Z": rep.Z,
        "d_count": rep.d_count,
        "A_size": rep.A_size,
        "normalized_size": rep.normalized_size,
        "sum_r": m.sum_r,
        "sum_r2": m.sum_r2,
        "represented": m.represented,
        "cs_bound": m.cs_bound,
        "represented_fraction": rep.represented_fraction,
        "sum_r_normalized": rep.sum_r_normalized,
        "sum_r2_normalized": rep.sum_r2_normalized,
        "z_warning": rep.Z < 10,
    }
    return {"chosen": chosen, "summary": [summary]}


def _cmd_primes(a, cfg) -> dict[str, Table]:
    _check_sweep_cap(a.y, a.unsafe_caps)
    if a.count_only:
        return {"count": [{"Y": a.y, "count": arith.prime_count(a.y)}]}
    return {"primes": [{"p": p} for p in arith.primes_up_to(a.y).tolist()]}


# ---------------------------------------------------------------------------
# parser

_Formatter = functools.partial(argparse.HelpFormatter, width=88, max_help_position=32)


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    g = p.add_argument_group("common options")
    g.add_argument("--json", action="store_true", help="emit one JSON object instead of CSV")
    g.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"random seed (default {DEFAULT_SEED})")
    g.add_argument("--threads", type=int, default=1, help="worker threads for per-item loops (default 1)")
    g.add_argument("--unsafe-caps", action="store_true", help="lift the precision / memory caps")
    g.add_argument("--emit-config", action="store_true", help="print the resolved run configuration and exit")
    g.add_argument("--timing", action="store_true", help="record wall-clock time in JSON output")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(
        prog="halfmod",
        description="Experiments on nonzero coefficients of modular forms mod l and primes of the form a + m^2.",
        formatter_class=_Formatter,
        allow_abbrev=False,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)
    forms = sorted(qforms.FORMS)

    def add(name: str, fn: Callable, help: str) -> argparse.ArgumentParser:
        sp = sub.add_parser(name, help=help, description=help, parents=[common],
                            formatter_class=_Formatter, allow_abbrev=False)
        sp.set_defaults(func=fn)
        return sp

    sp = add("expand", _cmd_expand, "Expand a named form mod l as exponent,coefficient rows.")
    sp.add_argument("--form", required=True, choices=forms)
    sp.add_argument("--modulus", type=int, required=True, help="prime l")
    sp.add_argument("--prec", type=int, required=True, help="precision: exponents below PREC")
    sp.add_argument("--dense", action="store_true", help="list every exponent, zeros included")

    sp = add("count-nonzero", _cmd_count_nonzero, "Count nonzero coefficients up to X at decade checkpoints.")
    sp.add_argument("--form", required=True, choices=forms)
    sp.add_argument("--modulus", type=int, required=True, help="prime l")
    sp.add_argument("--x", type=int, required=True, help="largest index counted")
    sp.add_argument("--index-by", choices=("n", "exponent"), default="n",
                    help="count over the natural index or over q-exponents (default n)")

    sp = add("hecke", _cmd_hecke, "Apply T_p to an integral-weight form mod l.")
    sp.add_argument("--form", required=True, choices=forms)
    sp.add_argument("--modulus", type=int, required=True, help="prime l")
    sp.add_argument("--prec", type=int, required=True, help="precision of the input form")
    sp.add_argument("--p", type=int, required=True, help="prime p not dividing the level")

    sp = add("pipeline", _cmd_pipeline, "Holomorphize f * eta1^(l^m) and run the Hecke / a_{up} scans.")
    sp.add_argument("--form", required=True, choices=forms)
    sp.add_argument("--modulus", type=int, required=True, help="prime l")
    sp.add_argument("--prec", type=int, required=True, help="precision of f")
    sp.add_argument("--m", type=int, default=None, help="exponent m (default: smallest admissible even m)")
    sp.add_argument("--p", type=int, default=None, help="prime for the T_p constancy / odd-order check")
    sp.add_argument("--x", type=int, default=None, help="scan bound for the odd-order check")
    sp.add_argument("--umax", type=int, default=0, help="scan u <= UMAX for a_{up} != 0")
    sp.add_argument("--pmax", type=int, default=100, help="primes p <= PMAX in the scan (default 100)")

    sp = add("pow2-square", _cmd_pow2_square, "Search 2^m + n0 = u y^2 with u a squarefree divisor of 2N.")
    sp.add_argument("--n0", type=int, required=True)
    sp.add_argument("--level", type=int, default=1, help="N (default 1)")
    sp.add_argument("--mmax", type=int, default=40, help="largest m searched (default 40)")

    sp = add("discriminant", _cmd_discriminant, "Fundamental part, class number and L(1) for -4a.")
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--c0", type=float, default=0.1, help="small-L(1) proxy threshold (default 0.1)")

    sp = add("agood", _cmd_agood, "Compare the Euler product for -4a with its L-function proxies.")
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--small-cutoff", type=float, default=100.0, help="cutoff replacing (log|d|)^100 (default 100)")
    sp.add_argument("--terms", type=int, default=10**6, help="terms of the L-series (default 1e6)")

    sp = add("sieve-reps", _cmd_sieve_reps, "Count primes p with u p = a + m^2 <= X for one a.")
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--u", type=int, default=1)
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--m-min", type=int, default=1, help="smallest m allowed (default 1)")

    sp = add("sieve-agg", _cmd_sieve_agg, "Count primes p with u p in A + squares, with per-a table.")
    src = sp.add_mutually_exclusive_group(required=True)
    src.add_argument("--a-file", help="file of integers forming A")
    src.add_argument("--random", type=int, help="A = seeded random K-subset of [1, X]")
    src.add_argument("--construction", action="store_true", help="A from the small-L(1) construction")
    sp.add_argument("--u", type=int, default=1)
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--z", type=int, default=100, help="Z for --construction (default 100)")
    sp.add_argument("--dcount", type=int, default=5, help="|D| for --construction (default 5)")
    sp.add_argument("--m-min", type=int, default=0, help="smallest m allowed (default 0)")

    sp = add("optimality", _cmd_optimality, "Build A = {d k^2} and report representation moments.")
    sp.add_argument("--x", type=int, required=True)
    sp.add_argument("--z", type=int, default=None, help="Z (default exp((log X)^(1/10)))")
    sp.add_argument("--dcount", type=int, default=5)

    sp = add("primes", _cmd_primes, "List or count primes up to Y.")
    sp.add_argument("--y", type=int, required=True)
    sp.add_argument("--count-only", action="store_true")
    return parser


_NON_FLAGS = {"func", "command", "json", "seed", "emit_config", "timing"}


def dispatch(argv: list[str] | None = None, out=None, err=None) -> int:
    out = out if out is not None else sys.stdout
    err = err if err is not None else sys.stderr
    parser = build_parser()
    try:
        with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
            args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    flags = {k: v for k, v in sorted(vars(args).items()) if k not in _NON_FLAGS}
    cfg = RunConfig(args.command, flags, "json" if args.json else "csv", args.seed)
    if args.emit_config:
        out.write(json.dumps(asdict(cfg)) + "\n")
        return 0
    t0 = time.perf_counter()
    try:
        tables = args.func(args, cfg)
    except (ValueError, MemoryError) as e:
        err.write(f"halfmod {args.command}: error: {e}\n")
        return 2
    elapsed = time.perf_counter() - t0 if args.timing else None
    out.write(render_json(cfg, tables, elapsed) if args.json else render_csv(tables))
    return 0


def main() -> None:
    sys.exit(dispatch())


if __name__ == "__main__":
    main()
