from __future__ import annotations

import random
from pathlib import Path

import pytest

from rpscheme.cotree import CoTree
from rpscheme.dsl import parse_rps
from rpscheme.flatsys import Const, FlatSystem, Op, solve_flat
from rpscheme.signature import Var, mk_signature

SCHEMES = Path(__file__).resolve().parent.parent / "schemes"


def scheme_text(name: str) -> str:
    return (SCHEMES / name).read_text(encoding="utf-8")


@pytest.fixture
def eq1():
    return parse_rps(scheme_text("eq1.rps"))


@pytest.fixture
def factorial():
    return parse_rps(scheme_text("factorial.rps"))


@pytest.fixture
def gcd_scheme():
    return parse_rps(scheme_text("gcd_prefix.rps"))


@pytest.fixture
def sin_scheme():
    return parse_rps(scheme_text("sin.rps"))


# small signature for random rational trees: a constant, two unary, one binary
RSIG = mk_signature([("c", 0), ("s", 1), ("t", 1), ("b", 2)], label="rand")


def random_system(rng: random.Random, n: int | None = None, leaves=(0, 1), sig=RSIG,
                  p_leaf: float = 0.25) -> FlatSystem:
    n = n or rng.randint(1, 6)
    xs = list(range(n))
    syms = list(sig)
    rows = {}
    for x in xs:
        if rng.random() < p_leaf:
            rows[x] = Const(Var(rng.choice(leaves)))
        else:
            s = rng.choice(syms)
            rows[x] = Op(s, tuple(rng.choice(xs) for _ in range(s.arity)))
    return FlatSystem(rows)


def random_rational_tree(rng: random.Random, **kw) -> CoTree:
    e = random_system(rng, **kw)
    return solve_flat(e)[0]


# one line per acceptance criterion, printed at the end of the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE:
            terminalreporter.write_line(line)
