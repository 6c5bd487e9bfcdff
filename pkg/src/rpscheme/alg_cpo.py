"""Algebras on pointed orders with least solutions by Kleene iteration.

Flat domains get exact least fixed points: every variable changes at most
once along the Kleene chain, so the chain has stabilized as soon as one
iterate repeats. General pointed orders get fuel-bounded approximations.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Mapping, Sequence

from .elgot import Budget, ElgotAlgebra, Solution, depth_value, vector_step
from .rps import Rps, check_guarded
from .signature import App, OpSym, Param, Signature, Term, fold_term


class _Bot:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "⊥"

    __str__ = __repr__

    def __reduce__(self):
        return (_Bot, ())


BOT = _Bot()


@dataclass(frozen=True)
class Operation:
    """An operation of a given arity. Strict operations return ⊥ on any ⊥
    argument without calling ``fn``; non-strict ones see ⊥ themselves."""

    arity: int
    fn: Callable[..., Any]
    strict: bool = True


class CpoAlgebra(ElgotAlgebra):
    """A pointed order with monotone operations.

    ``leq`` is the order; equality of carrier elements is ``==``. The solver
    iterates the Kleene chain from the constant-⊥ assignment and stops when an
    iterate repeats; past ``budget.fuel`` the still-moving variables are
    reported as unresolved.
    """

    def __init__(self, ops: Mapping[str, Operation], bottom: Any = BOT,
                 leq: Callable[[Any, Any], bool] | None = None,
                 elements: Sequence[Any] | None = None, name: str = "cpo"):
        self.ops = dict(ops)
        self.sig = Signature([(n, o.arity) for n, o in self.ops.items()], label=name)
        self.bottom = bottom
        self._leq = leq
        self.elements = list(elements) if elements is not None else None
        self.name = name

    def leq(self, a: Any, b: Any) -> bool:
        if self._leq is None:
            return a == self.bottom or a == b
        return self._leq(a, b)

    def apply(self, sym: OpSym, args: Sequence[Any]) -> Any:
        op = self.ops[sym.name]
        if len(args) != op.arity:
            raise ValueError(f"{sym.name} expects {op.arity} arguments")
        if op.strict and any(a == self.bottom for a in args):
            return self.bottom
        return op.fn(*args)

    def is_unresolved(self, v: Any) -> bool:
        return v == self.bottom

    def sample(self, rng: random.Random) -> Any:
        if self.elements is None:
            raise NotImplementedError("no element list to sample from")
        return rng.choice(self.elements)

    def solve_closed(self, e, variables: list, budget: Budget) -> Solution:
        return kleene_closed(self, e, variables, budget.fuel)

    def solve_open(self, e, roots: list, budget: Budget) -> Solution:
        return kleene_open(self, e, roots, budget.fuel)

    def eval_cotree(self, t, budget: Budget | None = None) -> Any:
        # the open strategy evaluates cut(t, k) with ⊥ leaves for growing k
        from .elgot import tree_system
        return self.solve_open(tree_system(t), [t], budget or Budget())[t]


def kleene_closed(alg: CpoAlgebra, e, variables: list, fuel: int) -> Solution:
    """Least solution on a finite variable set closed under ``e``."""
    cur = {x: alg.bottom for x in variables}
    for k in range(1, fuel + 1):
        nxt = vector_step(alg, e, variables, cur)
        if nxt == cur:
            return Solution(cur, iterations=k)
        cur = nxt
    # one more step tells which entries are still moving
    nxt = vector_step(alg, e, variables, cur)
    moving = {x for x in variables if nxt[x] != cur[x] or cur[x] == alg.bottom}
    return Solution(cur, unresolved=moving, iterations=fuel)


def kleene_open(alg: CpoAlgebra, e, roots: list, fuel: int) -> Solution:
    """Per-root Kleene approximants ``v_k(root)`` for k up to ``fuel``.

    On a flat domain the first non-⊥ approximant is the final value; on other
    orders iteration stops when the approximant repeats, which is only a
    heuristic and reported as such via ``unresolved``.
    """
    memo: dict = {}
    out, unresolved, spent = {}, set(), 0
    flat = alg._leq is None
    for root in roots:
        prev = alg.bottom
        for k in range(1, fuel + 1):
            v = depth_value(alg, e, root, k, alg.bottom, memo)
            spent = max(spent, k)
            if flat and v != alg.bottom:
                break
            if not flat and k > 1 and v == prev:
                unresolved.add(root)
                break
            prev = v
        else:
            unresolved.add(root)
        if flat and v == alg.bottom:
            unresolved.add(root)
        out[root] = v
    return Solution(out, unresolved=unresolved, iterations=spent)


class FlatDomainAlgebra(CpoAlgebra):
    """A set with a fresh ⊥ under the flat order.

    Operations are strict unless declared otherwise. The symbol named by
    ``cond`` (arity 3) is the conditional: ⊥ on a ⊥ test, its second argument
    when the test equals ``zero``, its third otherwise.
    """

    def __init__(self, ops: Mapping[str, Operation], cond: str | None = None, zero: Any = 0,
                 elements: Sequence[Any] | None = None, name: str = "flat"):
        ops = dict(ops)
        if cond is not None:
            ops[cond] = Operation(3, self._cond, strict=False)
        super().__init__(ops, BOT, None, elements, name)
        self.cond = cond
        self.zero = zero

    def _cond(self, x, y, z):
        if x == BOT:
            return BOT
        return y if x == self.zero else z

    def sample(self, rng: random.Random) -> Any:
        if self.elements is None:
            raise NotImplementedError("no element list to sample from")
        return BOT if rng.random() < 0.15 else rng.choice(self.elements)

    def parse_value(self, text: str) -> Any:
        text = text.strip()
        if text in ("⊥", "bot", "_|_"):
            return BOT
        return int(text)

    def format_value(self, v: Any) -> str:
        return "⊥" if v == BOT else str(v)


def check_strictness(alg: CpoAlgebra, rng: random.Random | None = None, trials: int = 200) -> list[str]:
    """Names of strict-declared operations that are not monotone on samples.

    For flat domains monotonicity of a strict operation is automatic; for
    non-strict ones a ⊥ argument must not produce a value that differs from
    the one obtained after refining that argument.
    """
    rng = rng or random.Random(0)
    bad = []
    if alg.elements is None:
        return bad
    for name, op in alg.ops.items():
        if op.strict or name == getattr(alg, "cond", None):
            continue
        for _ in range(trials):
            args = [rng.choice(alg.elements) for _ in range(op.arity)]
            i = rng.randrange(op.arity) if op.arity else None
            if i is None:
                break
            low = list(args)
            low[i] = alg.bottom
            a, b = alg.apply(alg.sig[name], low), alg.apply(alg.sig[name], args)
            if not alg.leq(a, b):
                bad.append(name)
                break
    return bad


# ---------------------------------------------------------------------------
# built-in algebras


def nat_bot() -> FlatDomainAlgebra:
    """Natural numbers with ⊥: one, zero, succ, pred (truncated), add, mul, cond."""
    ops = {
        "one": Operation(0, lambda: 1),
        "zero": Operation(0, lambda: 0),
        "succ": Operation(1, lambda n: n + 1),
        "pred": Operation(1, lambda n: n - 1 if n > 0 else 0),
        "add": Operation(2, lambda a, b: a + b),
        "mul": Operation(2, lambda a, b: a * b),
    }
    return FlatDomainAlgebra(ops, cond="cond", zero=0, elements=list(range(5)), name="nat_bot")


def gcd_prefix(literal: bool = False) -> FlatDomainAlgebra:
    """``F`` and ``G`` on naturals with ⊥ for the common-binary-prefix scheme.

    ``G`` halves (strictly). ``F(x, y, z)`` is ``x`` when ``x = y`` and ``z``
    otherwise; it is ⊥ when ``x`` or ``y`` is ⊥ but does not inspect ``z``
    once the first two agree, which is what makes the scheme terminate. With
    ``literal=True`` F is strict in all three arguments, and the scheme's least
    solution is ⊥ everywhere.
    """
    def F(x, y, z):
        if x == BOT or y == BOT:
            return BOT
        return x if x == y else z

    ops = {
        "F": Operation(3, F, strict=literal),
        "G": Operation(1, lambda x: x // 2),
    }
    return FlatDomainAlgebra(ops, elements=list(range(8)), name="gcd_prefix")


def solve_flat_kleene(alg: CpoAlgebra, e, fuel: int = 400, roots=None) -> Solution:
    return alg.solve(e, Budget(fuel=fuel), roots=roots)


def interpret_rps_lfp(alg: CpoAlgebra, r: Rps, fuel: int = 400) -> dict[OpSym, Callable]:
    """Least fixed point of the operator R on interpretations of the unknowns.

    ``R^0`` is constantly ⊥ and ``R^{k+1}(f)`` evaluates the right-hand side of
    ``f`` with the unknowns read as ``R^k``. Each call iterates k upward until
    the answer is non-⊥ (flat domains) or the fuel is spent.
    """
    check_guarded(r)
    memo: dict = {}

    def call(f: OpSym, vals: tuple, k: int) -> Any:
        if k == 0:
            return alg.bottom
        key = (f, vals, k)
        hit = memo.get(key)
        if hit is not None:
            return hit
        body = r.rhs[f]

        def on_app(s: OpSym, xs: list) -> Any:
            if r.is_given(s):
                return alg.apply(s, xs)
            return call(s, tuple(xs), k - 1)

        def on_leaf(u: Term) -> Any:
            return vals[u.index] if not isinstance(u, Param) else u.value

        res = fold_term(body, on_app, on_leaf)
        memo[key] = res
        return res

    def make(f: OpSym):
        def fn(*args):
            v = alg.bottom
            prev = None
            for k in range(1, fuel + 1):
                v = call(f, tuple(args), k)
                if alg._leq is None and v != alg.bottom:
                    return v
                if alg._leq is not None and v == prev:
                    return v
                prev = v
            return v

        fn.__name__ = f.name
        return fn

    return {f: make(f) for f in r.unknowns}


def lfp_of_endofunction(f: Callable[[Any], Any], a: Any, join: Callable[[Any, Any], Any],
                        bottom: Any, leq: Callable[[Any, Any], bool] | None = None,
                        fuel: int = 400) -> Any:
    """``⋁_k f^k(a)``, computed by the scheme ``φ(x) ≈ J(x, φ(Gx))`` with J the
    binary join and G = f."""
    from .signature import Var

    order = leq or (lambda x, y: join(x, y) == y)
    ops = {"J": Operation(2, join, strict=False), "G": Operation(1, f, strict=False)}
    alg = CpoAlgebra(ops, bottom=bottom, leq=order, name="join")
    sig = alg.sig
    phis = Signature([("phi", 1)])
    phi = phis["phi"]
    x = Var(0)
    r = Rps(sig, phis, {phi: App(sig["J"], (x, App(phi, (App(sig["G"], (x,)),))))})
    from .elgot import interpret_rps
    return interpret_rps(alg, r, Budget(fuel=fuel))[phi](a)
