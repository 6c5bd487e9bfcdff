import subprocess
import sys

import pytest
from hypothesis import given, settings, strategies as st

from rpscheme.cli import main
from rpscheme.dsl import Num, ParseError, Sym, parse, parse_rps, print_scheme
from conftest import SCHEMES, scheme_text


@pytest.mark.parametrize("name", sorted(p.name for p in SCHEMES.glob("*.rps")))
def test_print_parse_round_trip(name):
    ast = parse(scheme_text(name))
    assert parse(print_scheme(ast)) == ast


@pytest.mark.parametrize("text, fragment", [
    ("given F : 2\nunknown f : 1\n", "unknown f lacks equation"),
    ("given F : 2\nunknown f : 1\nf(x) = H(x)\n", "unknown symbol H"),
    ("given F : 2\nunknown f : 1\nf(x) = F(x)\n", "F expects 2 arguments"),
    ("given F : 2\nunknown f : 1\nf(x) = F(x, x)\nf(y) = F(y, y)\n", "duplicate equation"),
    ("given F : 2\nunknown f : 1\nf(x, y) = F(x, y)\n", "binds 2 variables"),
    ("given F : 2\nF(x, y) = x\n", "given symbol"),
    ("given F : 2, F : 1\n", "declared twice"),
])
def test_elaboration_errors(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_rps(text)
    assert fragment in str(info.value)
    assert info.value.line >= 1


def test_syntax_error_has_position():
    with pytest.raises(ParseError) as info:
        parse("given F : 2\nunknown f : 1\nf(x) = F(x,, x)\n")
    assert (info.value.line, info.value.col) == (3, 12)
    with pytest.raises(ParseError):
        parse("given F : -1\n")
    with pytest.raises(ParseError):
        parse("given F : 2 $\n")


def test_numbers_and_algebra_line():
    ast = parse("given F : 2\nunknown f : 1\nf(x) = F(x, 2.5)  # comment\nalgebra ctree(base=nat, zero=0)\n")
    assert ast.equations[0].body == Sym("F", (Sym("x"), Num(2.5, "2.5")))
    assert ast.algebra.options() == {"base": "nat", "zero": 0}


def test_approx_sign_accepted():
    r = parse_rps("given G : 1\nunknown f : 1\nf(x) ≈ G(f(x))\n")
    assert list(r.unknowns.names()) == ["f"]


_ident = st.sampled_from(["a", "b", "G", "H2", "x_1"])


@settings(max_examples=100, deadline=None)
@given(st.recursive(st.builds(Sym, _ident) | st.builds(lambda n: Num(n, str(n)), st.integers(0, 99)),
                    lambda kids: st.builds(lambda n, a: Sym(n, tuple(a)), _ident,
                                           st.lists(kids, min_size=1, max_size=3)),
                    max_leaves=12))
def test_term_round_trip(body):
    from rpscheme.dsl import Equation, SchemeFile
    f = SchemeFile((), (Equation("f", ("a",), body),))
    assert parse(print_scheme(f)) == f


# ---------------------------------------------------------------------------
# command line


def run(*argv):
    return main(list(argv))


def test_cli_check(capsys):
    assert run("check", str(SCHEMES / "eq1.rps")) == 0
    out = capsys.readouterr().out
    assert "phi/1" in out and "rooted in F" in out


def test_cli_unguarded_exit_1(capsys):
    assert run("check", str(SCHEMES / "unguarded.rps")) == 1
    assert "psi" in capsys.readouterr().err


def test_cli_usage_errors(capsys, tmp_path):
    assert run("check", str(tmp_path / "missing.rps")) == 2
    bad = tmp_path / "bad.rps"
    bad.write_text("given F : 2\nunknown f : 1\n")
    assert run("check", str(bad)) == 2
    assert run("unfold", str(SCHEMES / "eq1.rps"), "nope") == 2
    assert run("interp", str(SCHEMES / "factorial.rps"), "f", "1,2") == 2
    assert run("interp", str(SCHEMES / "eq1.rps"), "phi", "1") == 2  # no algebra
    assert run("bogus") == 2


def test_cli_unfold(capsys):
    assert run("unfold", str(SCHEMES / "eq1.rps"), "phi", "--depth", "4", "--cut") == 0
    assert capsys.readouterr().out.strip() == "F(x, F(G(x), F(G(⊥), F(⊥, ⊥))))"
    assert run("unfold", str(SCHEMES / "eq1.rps"), "phi", "--depth", "3") == 0
    assert capsys.readouterr().out.strip() == "F(x, F(G(x), F(G(G(x)), ⊥)))"
    assert run("unfold", str(SCHEMES / "eq1.rps"), "psi", "--format", "dot") == 0
    assert capsys.readouterr().out.startswith("digraph")


def test_cli_interp(capsys):
    assert run("interp", str(SCHEMES / "factorial.rps"), "f", "0", "5", "⊥") == 0
    assert capsys.readouterr().out.split() == ["1", "120", "⊥"]
    assert run("interp", str(SCHEMES / "factorial_ctree.rps"), "f", "4", "↑") == 0
    assert capsys.readouterr().out.split() == ["24", "↑"]
    assert run("interp", str(SCHEMES / "gcd_prefix.rps"), "phi", "12,13") == 0
    assert capsys.readouterr().out.strip() == "6"


def test_cli_missing_operation_exit_1(capsys):
    assert run("interp", str(SCHEMES / "eq1.rps"), "phi", "1", "--algebra", "nat_bot") == 1


def test_cli_fractal(tmp_path, capsys):
    out = tmp_path / "c.csv"
    trace = tmp_path / "t.csv"
    assert run("fractal", str(SCHEMES / "cantor.rps"), "--iters", "5", "--out", str(out),
               "--trace", str(trace)) == 0
    assert len(out.read_text().splitlines()) == 64
    assert trace.read_text().startswith("iteration,residual")
    assert run("fractal", str(SCHEMES / "factorial.rps")) == 2


def test_cli_laws(capsys):
    assert run("laws", "mod5", "--samples", "20") == 2  # not a choice
    assert run("laws", "ctree5", "--samples", "20") == 0
    assert "20/20" in capsys.readouterr().out


def test_cli_env_budget(monkeypatch, capsys):
    monkeypatch.setenv("RPSOLVE_FUEL", "oops")
    assert run("interp", str(SCHEMES / "factorial.rps"), "f", "3") == 2
    monkeypatch.setenv("RPSOLVE_FUEL", "400")
    assert run("interp", str(SCHEMES / "factorial.rps"), "f", "3") == 0


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "rpscheme", "check", str(SCHEMES / "unguarded.rps")],
                          capture_output=True, text=True)
    assert proc.returncode == 1
