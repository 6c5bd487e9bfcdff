"""Elgot algebras: the solver interface, evaluation of trees, interpreted
solutions of schemes, and a randomized harness for the two Elgot laws.

An algebra solves flat systems ``x ≈ σ(x1, ..., xn)`` / ``x ≈ <a>`` whose
parameters are carrier elements. Everything else is derived from that:

* ``eval_cotree`` (the evaluation morphism) solves the system whose variables
  are the subtrees of the given tree;
* ``interpret_rps`` (the standard interpreted solution) solves the demand-driven
  system whose variables are terms over givens + unknowns with carrier leaves.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .cotree import CoTree, Node, splice
from .flatsys import (
    Const, FlatSystem, LazyFlatSystem, Op, explore, is_morphism_of_equations, pair,
    rename, transport)
from .rps import Rps, check_guarded, instantiate, solve_uninterpreted
from .signature import App, OpSym, Param, Signature, Term, fold_term


@dataclass(frozen=True)
class Budget:
    """Approximation control: ``fuel`` bounds iterations (or search depth),
    ``tol`` is the target distance for metric backends, ``cap`` bounds how many
    variables of a demand-driven system are explored before it is treated as
    open."""

    fuel: int = 400
    tol: float = 1e-12
    cap: int = 5000

    def __post_init__(self):
        if self.fuel < 1:
            raise ValueError("fuel must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be > 0")


class Solution(dict):
    """Variable ↦ carrier value, plus bookkeeping.

    ``unresolved`` holds variables whose value is only a budget artefact (e.g.
    ⊥ because fuel ran out); ``iterations`` is what the backend spent.
    """

    def __init__(self, values=(), unresolved=(), iterations: int = 0):
        super().__init__(values)
        self.unresolved = set(unresolved)
        self.iterations = iterations


class NonConvergenceError(RuntimeError):
    """A metric backend did not reach its tolerance within the fuel."""


class ElgotAlgebra:
    """Interface of a pluggable Elgot algebra.

    Subclasses provide :meth:`apply` and the two solver strategies: one for a
    finite set of variables closed under the system (``solve_closed``) and one
    for single roots of a system whose reachable part is too large or infinite
    (``solve_open``). Operations are looked up by symbol name, so any signature
    with matching names and arities can be interpreted.
    """

    sig: Signature
    bottom: Any = None

    def apply(self, sym: OpSym, args: Sequence[Any]) -> Any:
        raise NotImplementedError

    def solve_closed(self, e, variables: list, budget: Budget) -> Solution:
        raise NotImplementedError

    def solve_open(self, e, roots: list, budget: Budget) -> Solution:
        raise NotImplementedError

    def equal(self, a: Any, b: Any, tol: float = 0.0) -> bool:
        return a == b

    def sample(self, rng: random.Random) -> Any:
        raise NotImplementedError

    def is_unresolved(self, v: Any) -> bool:
        return False

    def parse_value(self, text: str) -> Any:
        raise NotImplementedError

    def format_value(self, v: Any) -> str:
        if isinstance(v, float):
            return f"{v:.12g}"
        return str(v)

    def solve(self, e, budget: Budget | None = None, roots: Iterable[Hashable] | None = None) -> Solution:
        """Solve ``e``; for a demand-driven system ``roots`` says what is asked."""
        budget = budget or Budget()
        if not getattr(e, "lazy", False):
            return self.solve_closed(e, list(e.variables), budget)
        if roots is None:
            raise ValueError("a demand-driven system needs roots")
        roots = list(roots)
        order, closed = explore(e, roots, budget.cap)
        if closed:
            return self.solve_closed(e, order, budget)
        return self.solve_open(e, roots, budget)

    def eval_cotree(self, t: CoTree, budget: Budget | None = None) -> Any:
        return eval_cotree(self, t, budget)

    def op(self, name: str) -> OpSym:
        return self.sig[name]


def check_row(alg: ElgotAlgebra, e, sol: Mapping, x: Hashable, tol: float = 0.0) -> bool:
    """Does ``sol`` satisfy the equation of ``x``?"""
    r = e.rhs(x)
    if isinstance(r, Const):
        return alg.equal(sol[x], r.value, tol)
    return alg.equal(sol[x], alg.apply(r.sym, [sol[a] for a in r.args]), tol)


# ---------------------------------------------------------------------------
# shared iteration engines


def depth_value(alg: ElgotAlgebra, e, root: Hashable, k: int, start: Any,
                memo: dict | None = None) -> Any:
    """``v_k(root)`` where ``v_0 = start`` and ``v_j(x) = a(v_{j-1}(args))``.

    ``v_k(root)`` is the k-th iterate of the solution operator, evaluated at
    ``root``; it only looks at variables within distance k. For the system of
    a tree it equals the evaluation of the tree cut at depth k with ``start``
    in place of ⊥.
    """
    memo = {} if memo is None else memo
    stack = [(root, k)]
    while stack:
        x, j = stack[-1]
        if (x, j) in memo:
            stack.pop()
            continue
        if j == 0:
            memo[(x, 0)] = start(x) if callable(start) else start
            stack.pop()
            continue
        r = e.rhs(x)
        if isinstance(r, Const):
            memo[(x, j)] = r.value
            stack.pop()
            continue
        missing = [(a, j - 1) for a in r.args if (a, j - 1) not in memo]
        if missing:
            stack.extend(missing)
            continue
        memo[(x, j)] = alg.apply(r.sym, [memo[(a, j - 1)] for a in r.args])
        stack.pop()
    return memo[(root, k)]


def vector_step(alg: ElgotAlgebra, e, variables: list, current: Mapping) -> dict:
    """One synchronous application of the solution operator."""
    out = {}
    for x in variables:
        r = e.rhs(x)
        if isinstance(r, Const):
            out[x] = r.value
        else:
            out[x] = alg.apply(r.sym, [current[a] for a in r.args])
    return out


# ---------------------------------------------------------------------------
# terms and trees


def eval_term(alg: ElgotAlgebra, t: Term) -> Any:
    """Fold a finite closed term whose leaves are carrier elements."""

    def leaf(u: Term):
        if isinstance(u, Param):
            return u.value
        raise ValueError(f"cannot evaluate open leaf {u!r}")

    return fold_term(t, lambda s, vals: alg.apply(s, vals), leaf)


def tree_system(t: CoTree) -> LazyFlatSystem:
    """The flat system whose variables are the subtrees of ``t``."""

    def rule(u: CoTree):
        layer = u.observe()
        if isinstance(layer, Node):
            return Op(layer.sym, layer.children)
        if isinstance(layer.label, Param):
            return Const(layer.label.value)
        raise ValueError(f"tree has a non-parameter leaf {layer.label!r}")

    return LazyFlatSystem(rule)


def eval_cotree(alg: ElgotAlgebra, t: CoTree, budget: Budget | None = None) -> Any:
    """``â(t)``: evaluate a possibly infinite tree with carrier leaves."""
    return alg.solve(tree_system(t), budget or Budget(), roots=[t])[t]


# ---------------------------------------------------------------------------
# interpreted solutions of schemes


class SchemeSystem(LazyFlatSystem):
    """The demand-driven flat system induced by a scheme over an algebra.

    Variables are closed terms over givens + unknowns with ``Param`` leaves
    holding carrier elements. Terms are kept normalized: every maximal
    subterm without unknowns is evaluated to a parameter, which is sound in
    any Elgot algebra and keeps the reachable state sets small.
    """

    def __init__(self, alg: ElgotAlgebra, r: Rps):
        check_guarded(r)
        self.alg = alg
        self.scheme = r
        super().__init__(self._rule)

    def normalize(self, t: Term) -> Term:
        r = self.scheme

        def on_app(s: OpSym, vals: list) -> Term:
            if r.is_given(s) and all(isinstance(v, Param) for v in vals):
                return Param(self.alg.apply(s, [v.value for v in vals]))
            return App(s, tuple(vals))

        def on_leaf(u: Term) -> Term:
            if isinstance(u, Param):
                return u
            raise ValueError(f"scheme states must be closed, found {u!r}")

        return fold_term(t, on_app, on_leaf)

    def state(self, f: OpSym, args: Sequence[Any]) -> Term:
        return self.normalize(App(f, tuple(Param(a) for a in args)))

    def _rule(self, t: Term):
        r = self.scheme
        while True:
            if isinstance(t, Param):
                return Const(t.value)
            if r.is_given(t.sym):
                return Op(t.sym, t.args)
            body = r.rhs[t.sym]
            if isinstance(body, CoTree):
                raise ValueError("interpreted solutions need finite right-hand sides")
            t = self.normalize(instantiate(r, t.sym, t.args))


def interpret_rps(alg: ElgotAlgebra, r: Rps, budget: Budget | None = None) -> dict[OpSym, Callable]:
    """``e‡``: per unknown, the function on the carrier given by solving the
    induced flat system in ``alg``."""
    budget = budget or Budget()
    system = SchemeSystem(alg, r)

    def make(f: OpSym):
        def fn(*args):
            if len(args) != f.arity:
                raise TypeError(f"{f.name} takes {f.arity} arguments")
            s = system.state(f, args)
            return alg.solve(system, budget, roots=[s])[s]

        fn.__name__ = f.name
        fn.system = system
        return fn

    return {f: make(f) for f in r.unknowns}


@dataclass
class FundamentalReport:
    rows: list = field(default_factory=list)  # (symbol name, inputs, â(e†), e‡)
    max_discrepancy: float = 0.0
    mismatches: int = 0

    @property
    def ok(self) -> bool:
        return self.mismatches == 0


def fundamental_check(alg: ElgotAlgebra, r: Rps, inputs: Mapping[OpSym, Iterable[Sequence]] | Iterable[Sequence],
                      budget: Budget | None = None, tol: float = 0.0,
                      distance: Callable[[Any, Any], float] | None = None) -> FundamentalReport:
    """Compare ``â(e†(f)[inputs])`` with ``e‡(f)(inputs)``.

    ``inputs`` is either a mapping unknown ↦ argument tuples or one list of
    tuples used for every unknown of matching arity.
    """
    budget = budget or Budget()
    trees = solve_uninterpreted(r)
    interp = interpret_rps(alg, r, budget)
    rep = FundamentalReport()
    for f in r.unknowns:
        cases = inputs.get(f, ()) if isinstance(inputs, Mapping) else [
            a for a in inputs if len(a) == f.arity]
        for args in cases:
            lhs = alg.eval_cotree(splice(trees[f], list(args)), budget)
            rhs = interp[f](*args)
            if distance is not None:
                gap = distance(lhs, rhs)
                rep.max_discrepancy = max(rep.max_discrepancy, gap)
                bad = gap > tol
            else:
                bad = not alg.equal(lhs, rhs, tol)
                if bad:
                    rep.max_discrepancy = math.inf
            rep.mismatches += bad
            rep.rows.append((f.name, tuple(args), lhs, rhs))
    return rep


# ---------------------------------------------------------------------------
# law harness


def random_flat_system(alg: ElgotAlgebra, rng: random.Random, names: Sequence[Hashable],
                       params: Callable[[], Any], p_const: float = 0.3) -> FlatSystem:
    syms = list(alg.sig)
    rows = {}
    for x in names:
        if not syms or rng.random() < p_const:
            rows[x] = Const(params())
        else:
            s = rng.choice(syms)
            rows[x] = Op(s, tuple(rng.choice(names) for _ in range(s.arity)))
    return FlatSystem(rows)


@dataclass
class LawReport:
    functoriality: int = 0
    compositionality: int = 0
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def summary(self) -> str:
        nf = sum(1 for f in self.failures if f[0] == "functoriality")
        nc = len(self.failures) - nf
        return (f"functoriality: {self.functoriality - nf}/{self.functoriality} passed; "
                f"compositionality: {self.compositionality - nc}/{self.compositionality} passed")


def _functoriality_case(alg: ElgotAlgebra, rng: random.Random, budget: Budget, tol: float):
    n_target = rng.randint(1, 4)
    ys = [f"y{i}" for i in range(n_target)]
    f = random_flat_system(alg, rng, ys, lambda: alg.sample(rng))
    n_src = rng.randint(n_target, 6)
    xs = [f"x{i}" for i in range(n_src)]
    # surjective h so that every argument of f has a preimage
    targets = ys + [rng.choice(ys) for _ in range(n_src - n_target)]
    rng.shuffle(targets)
    h = dict(zip(xs, targets))
    e = transport(h, f, lambda cands: rng.choice(cands))
    assert is_morphism_of_equations(h, e, f)
    se = alg.solve(e, budget)
    sf = alg.solve(f, budget)
    for x in xs:
        if not alg.equal(se[x], sf[h[x]], tol):
            return {"e": e, "f": f, "h": h, "variable": x, "lhs": se[x], "rhs": sf[h[x]]}
    return None


def _compositionality_case(alg: ElgotAlgebra, rng: random.Random, budget: Budget, tol: float):
    ys = [f"y{i}" for i in range(rng.randint(1, 3))]
    f = random_flat_system(alg, rng, ys, lambda: alg.sample(rng))
    xs = [f"x{i}" for i in range(rng.randint(1, 3))]
    e = random_flat_system(alg, rng, xs, lambda: rng.choice(ys), p_const=0.4)
    sf = alg.solve(f, budget)
    lhs = alg.solve(rename(lambda y: sf[y], e), budget)
    rhs = alg.solve(pair(f, e), budget)
    for x in xs:
        if not alg.equal(lhs[x], rhs[(0, x)], tol):
            return {"e": e, "f": f, "variable": x, "lhs": lhs[x], "rhs": rhs[(0, x)]}
    return None


def law_harness(alg: ElgotAlgebra, samples: int = 1000, seed: int = 0,
                budget: Budget | None = None, tol: float = 0.0) -> LawReport:
    """Check Functoriality and Compositionality on random flat systems.

    Functoriality: for a morphism of equations ``h: e → f``, the solution of
    ``e`` is that of ``f`` composed with ``h``. Compositionality: solving ``f``
    first and renaming its solution into ``e`` agrees with solving ``f ⊞ e``.
    """
    rng = random.Random(seed)
    budget = budget or Budget()
    rep = LawReport()
    for _ in range(samples):
        bad = _functoriality_case(alg, rng, budget, tol)
        rep.functoriality += 1
        if bad is not None:
            rep.failures.append(("functoriality", bad))
        bad = _compositionality_case(alg, rng, budget, tol)
        rep.compositionality += 1
        if bad is not None:
            rep.failures.append(("compositionality", bad))
    return rep
