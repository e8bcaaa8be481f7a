import csv
import io
import json
from pathlib import Path

import pytest

from halfmod import cli

GOLDEN = Path(__file__).parent / "golden"
COMMANDS = ["expand", "count-nonzero", "hecke", "pipeline", "pow2-square", "discriminant",
            "agood", "sieve-reps", "sieve-agg", "optimality", "primes"]


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = cli.dispatch(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def tables(text):
    return [list(csv.DictReader(io.StringIO(chunk))) for chunk in text.split("\n\n")]


def help_text(cmd):
    out = io.StringIO()
    parser = cli.build_parser()
    sub = parser._subparsers._group_actions[0].choices[cmd]
    sub.print_help(out)
    return out.getvalue()


class TestExamples:
    def test_expand_eta(self):
        code, out, _ = run("expand", "--form", "eta1", "--modulus", "2", "--prec", "60")
        assert code == 0
        assert out == "exponent,coefficient\n1,1\n25,1\n49,1\n"

    def test_partition_count(self):
        code, out, _ = run("count-nonzero", "--form", "partition", "--modulus", "2", "--x", "10", "--index-by", "n")
        assert code == 0
        (rows,) = tables(out)
        assert len(rows) == 1 and rows[0]["count"] == "6"

    def test_pow2(self):
        code, out, _ = run("pow2-square", "--n0", "7", "--level", "1", "--mmax", "40")
        assert out == "m,u,y\n1,1,3\n"

    def test_eta_exponent_count(self):
        code, out, _ = run("count-nonzero", "--form", "eta1", "--modulus", "2", "--x", "10000",
                           "--index-by", "exponent")
        (rows,) = tables(out)
        assert [r["X"] for r in rows] == ["1000", "10000"]
        assert rows[-1]["count"] == "33"

    def test_partition_mod5_growth(self):
        rows = cli.count_nonzero_driver("partition", 5, 10**4)
        assert rows[-1]["count"] >= rows[-1]["sqrt_over_loglog"]

    def test_discriminant(self):
        code, out, _ = run("discriminant", "--a", "5", "--json")
        row = json.loads(out)["results"]["discriminant"][0]
        assert {k: row[k] for k in ("a", "fund", "sq", "h", "good_proxy")} == \
            {"a": 5, "fund": -20, "sq": 1, "h": 2, "good_proxy": True}

    def test_primes(self):
        assert run("primes", "--y", "10")[1] == "p\n2\n3\n5\n7\n"
        assert run("primes", "--y", "1000000", "--count-only")[1] == "Y,count\n1000000,78498\n"


class TestErrors:
    def test_unknown_flag(self):
        code, out, err = run("expand", "--form", "eta1", "--modulus", "2", "--prec", "60", "--bogus")
        assert code == 2 and out == "" and "--bogus" in err

    def test_abbreviation_rejected(self):
        assert run("expand", "--form", "eta1", "--mod", "2", "--prec", "60")[0] == 2

    def test_unknown_command(self):
        assert run("plot")[0] == 2

    def test_cap(self):
        code, out, err = run("expand", "--form", "eta1", "--modulus", "3", "--prec", str(10**7 + 1))
        assert code == 2 and "cap" in err and out == ""

    def test_library_error(self):
        code, _, err = run("hecke", "--form", "delta", "--modulus", "3", "--prec", "100", "--p", "4")
        assert code == 2 and "not prime" in err


class TestReproducibility:
    ARGS = [
        ("sieve-agg", "--random", "20", "--u", "1", "--x", "100000", "--seed", "11"),
        ("optimality", "--x", "100000", "--z", "50", "--dcount", "3"),
        ("agood", "--a", "3", "--x", "100000", "--terms", "10000"),
        ("pipeline", "--form", "partition", "--modulus", "2", "--prec", "2000", "--p", "5", "--umax", "4", "--pmax", "20"),
        ("hecke", "--form", "delta", "--modulus", "5", "--prec", "300", "--p", "7"),
    ]

    @pytest.mark.parametrize("args", ARGS, ids=lambda a: a[0])
    def test_byte_identical(self, args):
        a, b = run(*args), run(*args)
        assert a == b and a[0] == 0
        assert run(*args, "--json") == run(*args, "--json")

    @pytest.mark.parametrize("args", ARGS, ids=lambda a: a[0])
    def test_json_matches_csv(self, args):
        _, text, _ = run(*args)
        _, js, _ = run(*args, "--json")
        obj = json.loads(js)
        assert set(obj) == {"command", "config", "results", "timing"} and obj["timing"] is None
        for rows, jrows in zip(tables(text), obj["results"].values()):
            assert len(rows) == len(jrows)
            for r, j in zip(rows, jrows):
                for k, v in r.items():
                    jv = j[k]
                    if isinstance(jv, bool):
                        assert v == ("true" if jv else "false")
                    elif isinstance(jv, float):
                        assert float(v) == jv
                    elif isinstance(jv, list):
                        assert v == " ".join(map(str, jv))
                    elif jv is None:
                        assert v == ""
                    else:
                        assert v == str(jv)

    def test_threads_do_not_change_output(self):
        base = ("sieve-agg", "--random", "25", "--u", "2", "--x", "100000")
        assert run(*base) == run(*base, "--threads", "4")

    def test_seed_changes_sample(self):
        base = ("sieve-agg", "--random", "5", "--u", "1", "--x", "100000")
        assert run(*base, "--seed", "1")[1] != run(*base, "--seed", "2")[1]

    def test_emit_config(self):
        code, out, _ = run("primes", "--y", "50", "--emit-config")
        cfg = json.loads(out)
        assert code == 0 and cfg["command"] == "primes" and cfg["seed"] == cli.DEFAULT_SEED
        assert cfg["flags"]["y"] == 50 and cfg["output"] == "csv"

    def test_timing_flag(self):
        obj = json.loads(run("primes", "--y", "50", "--json", "--timing")[1])
        assert obj["timing"]["seconds"] >= 0


class TestHelp:
    @pytest.mark.parametrize("cmd", COMMANDS)
    def test_golden(self, cmd):
        assert help_text(cmd) == (GOLDEN / f"help_{cmd}.txt").read_text()

    @pytest.mark.parametrize("cmd", COMMANDS)
    def test_all_flags_listed(self, cmd):
        parser = cli.build_parser()
        sub = parser._subparsers._group_actions[0].choices[cmd]
        text = help_text(cmd)
        for action in sub._actions:
            for opt in action.option_strings:
                assert opt in text
