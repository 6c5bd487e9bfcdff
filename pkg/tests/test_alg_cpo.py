import math

from hypothesis import given, settings, strategies as st

from rpscheme.alg_cpo import (
    BOT, CpoAlgebra, Operation, check_strictness, gcd_prefix,
    interpret_rps_lfp, lfp_of_endofunction, nat_bot, solve_flat_kleene)
from rpscheme.elgot import Budget, interpret_rps
from rpscheme.flatsys import Const, FlatSystem, Op


def common_prefix(n: int, m: int) -> int:
    """Number spelled by the longest common prefix of the binary expansions,
    the shorter one left-padded with zeros."""
    width = max(n.bit_length(), m.bit_length())
    a, b = format(n, f"0{width}b") if width else "", format(m, f"0{width}b") if width else ""
    k = 0
    while k < width and a[k] == b[k]:
        k += 1
    return int(a[:k], 2) if k else 0


def test_bot_singleton_and_repr():
    assert BOT is type(BOT)()
    assert repr(BOT) == "⊥"


def test_strict_ops_and_cond():
    alg = nat_bot()
    assert alg.apply(alg.op("add"), [BOT, 2]) is BOT
    assert alg.apply(alg.op("cond"), [0, 5, BOT]) == 5
    assert alg.apply(alg.op("cond"), [1, BOT, 7]) == 7
    assert alg.apply(alg.op("cond"), [BOT, 1, 1]) is BOT
    assert alg.apply(alg.op("pred"), [0]) == 0


def test_parse_format():
    alg = nat_bot()
    assert alg.parse_value("⊥") is BOT and alg.parse_value(" bot ") is BOT
    assert alg.parse_value("12") == 12
    assert alg.format_value(BOT) == "⊥"


def test_kleene_least_solution():
    alg = nat_bot()
    # x = succ(x) has least solution ⊥; y = cond(z, one, x); z = 0
    e = FlatSystem({"x": Op(alg.op("succ"), ("x",)), "y": Op(alg.op("cond"), ("z", "o", "x")),
                    "z": Const(0), "o": Op(alg.op("one"), ())})
    sol = solve_flat_kleene(alg, e)
    assert sol["x"] is BOT and sol["y"] == 1
    assert "x" in sol.unresolved or sol["x"] is BOT


def test_factorial_lfp_agrees(factorial):
    alg = nat_bot()
    f = factorial.unknowns["f"]
    a = interpret_rps(alg, factorial)[f]
    b = interpret_rps_lfp(alg, factorial)[f]
    for n in range(9):
        assert a(n) == b(n) == math.factorial(n)
    assert a(BOT) is BOT and b(BOT) is BOT


def test_gcd_prefix_example(gcd_scheme):
    phi = gcd_scheme.unknowns["phi"]
    assert interpret_rps(gcd_prefix(), gcd_scheme)[phi](12, 13) == 6
    # strict F never gets past the recursive argument
    assert interpret_rps(gcd_prefix(literal=True), gcd_scheme, Budget(fuel=40))[phi](12, 13) is BOT


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2**16 - 1), st.integers(0, 2**16 - 1))
def test_gcd_prefix_matches_oracle(n, m):
    phi_fn = _gcd_fn()
    assert phi_fn(n, m) == phi_fn(m, n) == common_prefix(n, m)


_CACHE = {}


def _gcd_fn():
    if "fn" not in _CACHE:
        from rpscheme.dsl import parse_rps
        from conftest import scheme_text
        r = parse_rps(scheme_text("gcd_prefix.rps"))
        _CACHE["fn"] = interpret_rps(gcd_prefix(), r)[r.unknowns["phi"]]
    return _CACHE["fn"]


def test_common_prefix_oracle():
    assert common_prefix(12, 13) == 6
    assert common_prefix(5, 5) == 5
    assert common_prefix(4, 1) == 0  # 100 vs 001


def test_lfp_of_endofunction_on_powerset():
    # reachable nodes of a graph from {0}
    edges = {0: {1}, 1: {2}, 2: {0}, 3: {4}}
    f = lambda s: frozenset(y for x in s for y in edges.get(x, ()))
    got = lfp_of_endofunction(f, frozenset({0}), lambda a, b: a | b, frozenset(), fuel=50)
    assert got == frozenset({0, 1, 2})


def test_lfp_of_capped_add():
    got = lfp_of_endofunction(lambda n: min(n + 1, 5), 0, max, 0, fuel=50)
    assert got == 5


def test_check_strictness_flags_non_monotone():
    bad = CpoAlgebra({"bad": Operation(1, lambda x: 1 if x is BOT else 0, strict=False)},
                     elements=[0, 1])
    assert check_strictness(bad) == ["bad"]
    assert check_strictness(nat_bot()) == []
