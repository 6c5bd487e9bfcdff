import random

import pytest
from hypothesis import assume, given, settings, strategies as st

from rpscheme.cotree import (
    Leaf, bisimilar, cut, cut_equal, from_term, node, subst, var)
from rpscheme.rps import (
    Rps, UnguardedError, add_solved_as_givens, apply_solution, approximant, check_guarded,
    is_guarded, one_step, solution_law_image, solve_uninterpreted, substitute_solution)
from rpscheme.signature import App, SignatureError, Var, mk_signature, show_term, substitute


def test_eq1_guarded(eq1):
    w = check_guarded(eq1)
    assert {f.name: s.name for f, s in w.roots.items()} == {"phi": "F", "psi": "F"}


def test_unguarded_rejected():
    sig = mk_signature([("F", 2), ("G", 1)])
    phis = mk_signature([("phi", 1), ("psi", 1)])
    phi, psi = phis["phi"], phis["psi"]
    x = Var(0)
    r = Rps(sig, phis, {phi: App(sig["F"], (x, App(phi, (App(sig["G"], (x,)),)))),
                        psi: App(phi, (App(psi, (x,)),))})
    with pytest.raises(UnguardedError) as info:
        check_guarded(r)
    assert info.value.offenders == [psi]
    with pytest.raises(UnguardedError):
        solve_uninterpreted(r)


def test_constant_rhs_guarded():
    sig = mk_signature([("c", 0)])
    phis = mk_signature([("f", 1)])
    r = Rps(sig, phis, {phis["f"]: App(sig["c"], ())})
    assert is_guarded(r)


def test_rps_validation():
    sig = mk_signature([("G", 1)])
    phis = mk_signature([("f", 1)])
    with pytest.raises(SignatureError):
        Rps(sig, phis, {})
    with pytest.raises(SignatureError):
        Rps(sig, phis, {phis["f"]: App(sig["G"], (Var(1),))})


def test_one_step_eq1(eq1):
    phi = eq1.unknowns["phi"]
    step = one_step(eq1)
    state = App(phi, (Var(0),))
    layer = step(state)
    assert layer.sym.name == "F"
    assert layer.children[0] == Var(0)
    assert show_term(layer.children[1], ["x"]) == "phi(G(x))"
    assert step(Var(0)) == Leaf(Var(0))


def test_one_step_factorial(factorial):
    f = factorial.unknowns["f"]
    layer = one_step(factorial)(App(f, (Var(0),)))
    assert layer.sym.name == "cond"
    assert [show_term(c, ["n"]) for c in layer.children] == ["n", "one", "mul(f(pred(n)), n)"]


# trees transcribed from the figures, cut at depth 4 (root at depth 0)
PHI_4 = "F(x, F(G(x), F(G(⊥), F(⊥, ⊥))))"
PSI_4 = "F(F(G(x), F(G(⊥), F(⊥, ⊥))), G(G(x)))"
FACT_4 = "cond(n, one, mul(cond(pred(⊥), one, mul(⊥, ⊥)), n))"


def test_eq1_solutions_match_figures(eq1):
    sol = solve_uninterpreted(eq1)
    assert show_term(cut(sol[eq1.unknowns["phi"]], 4), ["x"]) == PHI_4
    assert show_term(cut(sol[eq1.unknowns["psi"]], 4), ["x"]) == PSI_4
    assert show_term(cut(sol[eq1.unknowns["phi"]], 2), ["x"]) == "F(x, F(⊥, ⊥))"


def test_factorial_solution_matches_figure(factorial):
    sol = solve_uninterpreted(factorial)
    assert show_term(cut(sol[factorial.unknowns["f"]], 4), ["n"]) == FACT_4


def test_finite_solution():
    sig = mk_signature([("s", 1)])
    phis = mk_signature([("f", 1)])
    f = phis["f"]
    r = Rps(sig, phis, {f: App(sig["s"], (Var(0),))})
    assert bisimilar(solve_uninterpreted(r)[f], from_term(App(sig["s"], (Var(0),))))


def test_apply_solution_examples(eq1):
    phi, psi = eq1.unknowns["phi"], eq1.unknowns["psi"]
    F, G = eq1.givens["F"], eq1.givens["G"]
    sol = solve_uninterpreted(eq1)
    assert bisimilar(apply_solution(eq1, Var(0)), var(0))
    assert cut_equal(apply_solution(eq1, App(phi, (Var(0),))), sol[phi], 20)
    t = App(F, (App(phi, (App(G, (Var(0),)),)), App(G, (App(G, (Var(0),)),))))
    assert cut_equal(apply_solution(eq1, t), sol[psi], 20)


def test_approximants(eq1):
    phi = eq1.unknowns["phi"]
    assert show_term(approximant(eq1, phi, 3), ["x"]) == "F(x, F(G(x), F(G(G(x)), ⊥)))"
    assert show_term(approximant(eq1, phi, 0), ["x"]) == "⊥"


def test_solution_law(eq1, factorial):
    for r in (eq1, factorial):
        sol = solve_uninterpreted(r)
        for f in r.unknowns:
            assert cut_equal(solution_law_image(r, sol, f), sol[f], 14)


def _rational_scheme(rng):
    """A guarded scheme whose unknowns only pass their own variables along
    (so the solution is rational)."""
    sig = mk_signature([("F", 2), ("G", 1), ("c", 0)])
    phis = mk_signature([("p", 1), ("q", 1)])
    F, G, c = sig["F"], sig["G"], sig["c"]
    x = Var(0)

    def leaf():
        k = rng.randrange(4)
        return [x, App(c, ()), App(phis["p"], (x,)), App(phis["q"], (x,))][k]

    rhs = {}
    for f in phis:
        if rng.random() < 0.5:
            rhs[f] = App(F, (leaf(), leaf()))
        else:
            rhs[f] = App(G, (leaf(),))
    return Rps(sig, phis, rhs)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_solution_law_bisimilar_on_rational(seed):
    r = _rational_scheme(random.Random(seed))
    sol = solve_uninterpreted(r)
    for f in r.unknowns:
        assert bisimilar(solution_law_image(r, sol, f), sol[f])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_perturbed_solution_breaks_law(seed):
    r = _rational_scheme(random.Random(seed))
    sol = solve_uninterpreted(r)
    f = next(iter(r.unknowns))
    fake = dict(sol)
    fake[f] = node(r.givens["F"], [sol[f], sol[f]])
    assume(not bisimilar(fake[f], sol[f]))
    assert not all(bisimilar(solution_law_image(r, fake, g), fake[g]) for g in r.unknowns)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10**6), st.integers(0, 10))
def test_apply_solution_is_homomorphism(seed, d):
    rng = random.Random(seed)
    r = _rational_scheme(rng)
    p = r.unknowns["p"]
    F = r.givens["F"]
    t = App(F, (App(p, (Var(0),)), Var(1)))
    s = {0: App(r.unknowns["q"], (Var(1),)), 1: Var(0)}
    lhs = apply_solution(r, substitute(t, s))
    rhs = subst(apply_solution(r, t), {k: apply_solution(r, v) for k, v in s.items()})
    assert cut_equal(lhs, rhs, d)
    sol = solve_uninterpreted(r)
    assert cut_equal(apply_solution(r, t), substitute_solution(r, from_term(t), sol), d)


def test_guardedness_stable_under_adding_solved_givens(eq1):
    phi = eq1.unknowns["phi"]
    r2 = add_solved_as_givens(eq1, [phi])
    assert is_guarded(r2)
    assert [f.name for f in r2.unknowns] == ["psi"]
    assert "phi" in r2.givens


def test_rational_cotree_rhs():
    sig = mk_signature([("G", 1), ("F", 2)])
    phis = mk_signature([("f", 1)])
    f = phis["f"]
    # rhs given as a tree: F(0, f(0))
    body = from_term(App(sig["F"], (Var(0), App(f, (Var(0),)))))
    r = Rps(sig, phis, {f: body})
    sol = solve_uninterpreted(r)
    assert show_term(cut(sol[f], 3), ["x"]) == "F(x, F(x, F(⊥, ⊥)))"
