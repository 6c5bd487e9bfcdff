"""The computation-tree algebra: a base algebra extended strictly by a fresh
element ↑, with a short-circuiting conditional.

The solution of a flat system is its computation function where defined and
↑ elsewhere. The computation function is the least partial map closed under:

(i)   ``x ≈ <a>`` with ``a ≠ ↑`` gives ``a``;
(ii)  ``x ≈ σ(x1..xn)``, σ not the conditional, all ``xi`` defined, gives σ of them;
(iii) ``x ≈ cond(x1,x2,x3)`` with ``x1`` = 0 and ``x2`` defined gives ``x2``'s value;
(iv)  the same with ``x1`` defined and ≠ 0 and ``x3`` defined gives ``x3``'s value.
"""

from __future__ import annotations

import random
import warnings
from itertools import product
from typing import Any, Callable, Hashable, Mapping, Sequence

from .elgot import Budget, ElgotAlgebra, Solution
from .flatsys import Const, Op
from .signature import OpSym, Signature


class _Up:
    __slots__ = ()
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "↑"

    __str__ = __repr__

    def __reduce__(self):
        return (_Up, ())


UP = _Up()
_UNDEF = object()


class CTreeAlgebra(ElgotAlgebra):
    """Base operations ``ops`` (name ↦ (arity, fn)) on a set with equality.

    ``cond`` names the ternary conditional and ``zero`` its zero-test element;
    both are declared, never guessed.
    """

    def __init__(self, ops: Mapping[str, tuple[int, Callable[..., Any]]], cond: str = "cond",
                 zero: Any = 0, elements: Sequence[Any] | None = None, name: str = "ctree"):
        self.ops = dict(ops)
        if cond in self.ops:
            raise ValueError(f"{cond} is the conditional and must not have a base definition")
        entries = [(n, a) for n, (a, _) in self.ops.items()] + [(cond, 3)]
        self.sig = Signature(entries, label=name)
        self.cond = cond
        self.zero = zero
        self.bottom = UP
        self.elements = list(elements) if elements is not None else None
        self.name = name

    def base(self, name: str, args: Sequence[Any]) -> Any:
        arity, fn = self.ops[name]
        return fn(*args)

    def apply(self, sym: OpSym, args: Sequence[Any]) -> Any:
        if sym.name == self.cond:
            x, y, z = args
            if x is UP:
                return UP
            return y if x == self.zero else z
        if any(a is UP for a in args):
            return UP
        return self.base(sym.name, args)

    def is_unresolved(self, v: Any) -> bool:
        return v is UP

    def sample(self, rng: random.Random) -> Any:
        if self.elements is None:
            raise NotImplementedError("no element list to sample from")
        return UP if rng.random() < 0.15 else rng.choice(self.elements)

    def parse_value(self, text: str) -> Any:
        text = text.strip()
        if text in ("↑", "up", "^"):
            return UP
        return int(text)

    def format_value(self, v: Any) -> str:
        return "↑" if v is UP else str(v)

    def solve_closed(self, e, variables: list, budget: Budget) -> Solution:
        return computation_fn_closed(self, e, variables)

    def solve_open(self, e, roots: list, budget: Budget) -> Solution:
        return computation_fn_open(self, e, roots, budget.fuel)

    def eval_cotree(self, t, budget: Budget | None = None) -> Any:
        return eval_cotree_search(self, t, (budget or Budget()).fuel)


def _clause(alg: CTreeAlgebra, r, val: Callable[[Hashable], Any]) -> Any:
    """Value of one row given the currently known values, or _UNDEF."""
    if isinstance(r, Const):
        return _UNDEF if r.value is UP else r.value
    if r.sym.name == alg.cond:
        t = val(r.args[0])
        if t is _UNDEF:
            return _UNDEF
        return val(r.args[1]) if t == alg.zero else val(r.args[2])
    vals = []
    for a in r.args:
        v = val(a)
        if v is _UNDEF:
            return _UNDEF
        vals.append(v)
    out = alg.base(r.sym.name, vals)
    return _UNDEF if out is UP else out


def computation_fn_closed(alg: CTreeAlgebra, e, variables: list) -> Solution:
    """Inductive closure of the four clauses on a closed variable set."""
    users: dict[Hashable, list] = {x: [] for x in variables}
    for x in variables:
        r = e.rhs(x)
        if isinstance(r, Op):
            for a in set(r.args):
                users[a].append(x)
    known: dict[Hashable, Any] = {}
    work = list(variables)
    queued = set(work)
    rounds = 0
    while work:
        x = work.pop()
        queued.discard(x)
        if x in known:
            continue
        rounds += 1
        v = _clause(alg, e.rhs(x), lambda a: known.get(a, _UNDEF))
        if v is not _UNDEF:
            known[x] = v
            for u in users[x]:
                if u not in known and u not in queued:
                    work.append(u)
                    queued.add(u)
    out = {x: known.get(x, UP) for x in variables}
    return Solution(out, iterations=rounds)


def computation_fn_open(alg: CTreeAlgebra, e, roots: list, fuel: int) -> Solution:
    """Depth-bounded search with cycle detection, deepened up to ``fuel``.

    A variable already on the evaluation stack is undefined along that path.
    Defined values are final and kept across depths.
    """
    defined: dict[Hashable, tuple] = {}
    out, unresolved, spent = {}, set(), 0
    for root in roots:
        v = _UNDEF
        for depth in range(1, fuel + 1):
            spent = max(spent, depth)
            v = _search(alg, e, root, depth, defined)
            if v is not _UNDEF:
                break
        if v is _UNDEF:
            unresolved.add(root)
            v = UP
        out[root] = v
    return Solution(out, unresolved=unresolved, iterations=spent)


def _search(alg: CTreeAlgebra, e, root: Hashable, depth: int, defined: dict) -> Any:
    """Value of ``root`` from a derivation of height at most ``depth``.

    ``defined`` maps variables to ``(value, height)`` of the lowest derivation
    found so far; it is reused only where that height fits.
    """
    on_stack: set = set()

    def go(x: Hashable, d: int) -> tuple[Any, int]:
        hit = defined.get(x)
        if hit is not None and hit[1] <= d:
            return hit
        if d == 0 or x in on_stack:
            return _UNDEF, 0
        on_stack.add(x)
        used = [0]

        def val(a):
            v, h = go(a, d - 1)
            used[0] = max(used[0], h)
            return v

        try:
            v = _clause(alg, e.rhs(x), val)
        finally:
            on_stack.discard(x)
        if v is _UNDEF:
            return _UNDEF, 0
        res = (v, used[0] + 1)
        if hit is None or res[1] < hit[1]:
            defined[x] = res
        return res

    return go(root, depth)[0]


def computation_fn(alg: CTreeAlgebra, e, roots=None, fuel: int = 400) -> dict:
    """The partial computation function: only defined variables appear."""
    sol = alg.solve(e, Budget(fuel=fuel), roots=roots)
    return {x: v for x, v in sol.items() if v is not UP}


def solve(alg: CTreeAlgebra, e, roots=None, fuel: int = 400) -> Solution:
    return alg.solve(e, Budget(fuel=fuel), roots=roots)


def eval_cotree_search(alg: CTreeAlgebra, t, fuel: int = 400) -> Any:
    """Search for a finite evaluable subtree of ``t``, pruned by the
    conditional, within ``fuel`` layers; ↑ if there is none."""
    return search_depth(alg, t, fuel)[0]


def search_depth(alg: CTreeAlgebra, t, fuel: int = 400) -> tuple[Any, int | None]:
    """``(value, depth)``: the depth is the height of the pruned subtree found."""
    from .elgot import tree_system

    e = tree_system(t)
    defined: dict = {}
    for depth in range(1, fuel + 1):
        v = _search(alg, e, t, depth, defined)
        if v is not _UNDEF:
            return v, depth
    return UP, None


def check_converse_strictness(alg: CTreeAlgebra, elements: Sequence[Any] | None = None) -> list[str]:
    """Base operations that produce ↑ from defined arguments.

    Such operations void the guarantee that the algebra is an Elgot algebra; a
    warning is issued for each one found. Only feasible on finite bases.
    """
    elements = elements if elements is not None else alg.elements
    if elements is None:
        return []
    bad = []
    for name, (arity, fn) in alg.ops.items():
        for args in product(elements, repeat=arity):
            if fn(*args) is UP:
                bad.append(name)
                warnings.warn(f"operation {name} yields ↑ on defined arguments {args}")
                break
    return bad


# ---------------------------------------------------------------------------
# built-in algebras


def nat_ctree() -> CTreeAlgebra:
    """Naturals with one, zero, succ, pred (truncated), add, mul and cond."""
    ops = {
        "one": (0, lambda: 1),
        "zero": (0, lambda: 0),
        "succ": (1, lambda n: n + 1),
        "pred": (1, lambda n: n - 1 if n > 0 else 0),
        "add": (2, lambda a, b: a + b),
        "mul": (2, lambda a, b: a * b),
    }
    return CTreeAlgebra(ops, cond="cond", zero=0, elements=list(range(5)), name="nat_ctree")


def mod5_ctree() -> CTreeAlgebra:
    """A five-element base: arithmetic modulo 5 with a zero test."""
    ops = {
        "one": (0, lambda: 1),
        "pred": (1, lambda n: (n - 1) % 5),
        "add": (2, lambda a, b: (a + b) % 5),
        "mul": (2, lambda a, b: (a * b) % 5),
    }
    return CTreeAlgebra(ops, cond="cond", zero=0, elements=list(range(5)), name="mod5")
