"""Recursive program schemes and their uninterpreted solutions.

A scheme defines each unknown symbol ``f/n`` of Φ by a right-hand side over
Σ + Φ in the variables ``0..n-1``. When every right-hand side starts with a
given symbol (Greibach normal form) the scheme is guarded, and its unique
solution assigns to each unknown an infinite Σ-tree. That tree is obtained by
unfolding the term ``f(0, ..., n-1)`` with :func:`one_step`, which replaces a
root unknown by its right-hand side and emits the given symbol that surfaces.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

from .cotree import (
    Coalgebra, CoTree, Leaf, Node, from_term, identity_image, second_order_subst)
from .signature import (
    App, BOTTOM, OpSym, Param, Signature, SignatureError, Term, Var,
    show_term, subterms, substitute)


class UnguardedError(ValueError):
    """Some right-hand side is not rooted in a given symbol."""

    def __init__(self, offenders: Sequence[OpSym]):
        self.offenders = list(offenders)
        names = ", ".join(f.name for f in self.offenders)
        super().__init__(
            "scheme is not guarded (right-hand side not rooted in a given symbol) "
            f"for: {names}; a unique solution is only guaranteed for guarded schemes")


@dataclass
class Rps:
    """A recursive program scheme.

    ``rhs`` maps each unknown to a finite term over givens + unknowns with
    ``Var(0..n-1)`` leaves, or to a rational :class:`CoTree` of the same kind.
    ``var_names`` optionally records the user's names for printing.
    """

    givens: Signature
    unknowns: Signature
    rhs: dict[OpSym, Term | CoTree]
    var_names: dict[OpSym, list[str]] = field(default_factory=dict)

    def __post_init__(self):
        for f in self.unknowns:
            if f not in self.rhs:
                raise SignatureError(f"unknown {f.name} lacks an equation")
        for f, t in self.rhs.items():
            if f.sig is not self.unknowns:
                raise SignatureError(f"{f.name} is not an unknown of this scheme")
            if isinstance(t, CoTree):
                continue
            for u in subterms(t):
                if isinstance(u, App):
                    if u.sym.sig is not self.givens and u.sym.sig is not self.unknowns:
                        raise SignatureError(f"symbol {u.sym.name} is neither given nor unknown")
                elif isinstance(u, Var):
                    if not (isinstance(u.index, int) and 0 <= u.index < f.arity):
                        raise SignatureError(
                            f"variable {u.index!r} out of range in equation for {f.name}/{f.arity}")
                elif u is BOTTOM:
                    raise SignatureError(f"equation for {f.name} contains ⊥")

    def is_given(self, s: OpSym) -> bool:
        return s.sig is self.givens

    def head(self, f: OpSym) -> App:
        return App(f, tuple(Var(i) for i in range(f.arity)))

    def names_for(self, f: OpSym) -> list[str] | None:
        return self.var_names.get(f)


@dataclass(frozen=True)
class GuardedWitness:
    """For each unknown, the given symbol at the root of its right-hand side."""

    roots: dict[OpSym, OpSym]


def check_guarded(r: Rps) -> GuardedWitness:
    roots: dict[OpSym, OpSym] = {}
    bad = []
    for f in r.unknowns:
        t = r.rhs[f]
        if isinstance(t, CoTree):
            layer = t.observe()
            root = layer.sym if isinstance(layer, Node) else None
        else:
            root = t.sym if isinstance(t, App) else None
        if root is not None and r.is_given(root):
            roots[f] = root
        else:
            bad.append(f)
    if bad:
        raise UnguardedError(bad)
    return GuardedWitness(roots)


def is_guarded(r: Rps) -> bool:
    try:
        check_guarded(r)
    except UnguardedError:
        return False
    return True


class _Inst(Term):
    """State for a tree-shaped right-hand side: ``tree`` with variable i
    standing for the state ``args[i]``."""

    __slots__ = ("tree", "args", "_hash")

    def __init__(self, tree: CoTree, args: tuple):
        self.tree = tree
        self.args = args
        self._hash = hash((tree, args))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return (isinstance(other, _Inst) and self._hash == other._hash
                and self.tree == other.tree and self.args == other.args)


def instantiate(r: Rps, f: OpSym, args: Sequence[Term]) -> Term:
    """Right-hand side of ``f`` with argument terms plugged in for 0..n-1."""
    body = r.rhs[f]
    args = tuple(args)
    if isinstance(body, CoTree):
        return _Inst(body, args)
    return substitute(body, lambda i: args[i])


def one_step(r: Rps, w: GuardedWitness | None = None):
    """The step function of the flat system induced by a guarded scheme.

    States are terms over givens + unknowns with Var/Param leaves. A leaf is
    emitted as is; a given symbol is emitted with its argument terms as child
    states; an unknown at the root is first replaced by its right-hand side.
    """
    if w is None:
        w = check_guarded(r)

    def step(t: Term):
        while True:
            if isinstance(t, (Var, Param)):
                return Leaf(t)
            if isinstance(t, _Inst):
                layer = t.tree.observe()
                if isinstance(layer, Leaf):
                    lab = layer.label
                    if isinstance(lab, Var) and isinstance(lab.index, int) and lab.index < len(t.args):
                        t = t.args[lab.index]
                        continue
                    return layer
                kids = tuple(_Inst(c, t.args) for c in layer.children)
                if r.is_given(layer.sym):
                    return Node(layer.sym, kids)
                t = App(layer.sym, kids)
                continue
            if isinstance(t, App):
                if r.is_given(t.sym):
                    return Node(t.sym, t.args)
                t = instantiate(r, t.sym, t.args)
                continue
            raise TypeError(f"not a scheme state: {t!r}")

    return step


class SchemeCoalgebra(Coalgebra):
    """Coalgebra of :func:`one_step`; all solution trees of a scheme share it."""

    __slots__ = ("_step",)

    def __init__(self, r: Rps, w: GuardedWitness | None = None):
        super().__init__()
        self._step = one_step(r, w)

    def _observe(self, t):
        out = self._step(t)
        if isinstance(out, Node):
            return Node(out.sym, tuple(CoTree(self, c) for c in out.children))
        return out


def solve_uninterpreted(r: Rps) -> dict[OpSym, CoTree]:
    """``e†``: each unknown ``f/n`` ↦ its Σ-tree in the variables 0..n-1."""
    coalg = SchemeCoalgebra(r, check_guarded(r))
    return {f: CoTree(coalg, r.head(f)) for f in r.unknowns}


def apply_solution(r: Rps, t: Term, coalg: SchemeCoalgebra | None = None) -> CoTree:
    """The Σ-tree of a term over givens + unknowns: every unknown replaced by
    its solution, computed by unfolding ``t`` itself."""
    coalg = coalg or SchemeCoalgebra(r, check_guarded(r))
    return CoTree(coalg, t)


def rhs_tree(r: Rps, f: OpSym) -> CoTree:
    body = r.rhs[f]
    return body if isinstance(body, CoTree) else from_term(body)


def substitute_solution(r: Rps, t: CoTree, sol: Mapping[OpSym, CoTree]) -> CoTree:
    """Second-order substitution: givens map to themselves, unknowns to ``sol``."""

    def image(s: OpSym) -> CoTree:
        if r.is_given(s):
            return identity_image(s)
        return sol[s]

    return second_order_subst(t, image)


def solution_law_image(r: Rps, sol: Mapping[OpSym, CoTree], f: OpSym) -> CoTree:
    """The right-hand side of ``f`` with ``sol`` substituted for the unknowns.

    ``sol`` is a solution iff this tree equals ``sol[f]`` for every ``f``.
    """
    return substitute_solution(r, rhs_tree(r, f), sol)


def approximant(r: Rps, f: OpSym, k: int, args: Sequence[Term] | None = None) -> Term:
    """The k-th Kleene approximant of ``f``: unknowns expanded k levels deep,
    remaining unknown calls replaced by ⊥."""
    check_guarded(r)
    for g, body in r.rhs.items():
        if isinstance(body, CoTree):
            raise ValueError("approximants need finite right-hand sides")
    memo: dict[tuple, Term] = {}

    def call(g: OpSym, vals: tuple, j: int) -> Term:
        if j == 0:
            return BOTTOM
        key = (g, vals, j)
        res = memo.get(key)
        if res is None:
            res = ev(r.rhs[g], vals, j - 1)
            memo[key] = res
        return res

    def ev(t: Term, env: tuple, j: int) -> Term:
        if isinstance(t, Var):
            return env[t.index]
        if isinstance(t, App):
            vals = tuple(ev(a, env, j) for a in t.args)
            if r.is_given(t.sym):
                return App(t.sym, vals)
            return call(t.sym, vals, j)
        return t

    if args is None:
        args = tuple(Var(i) for i in range(f.arity))
    return call(f, tuple(args), k)


def show_solution(r: Rps, f: OpSym, t: Term) -> str:
    return show_term(t, r.names_for(f))


def add_solved_as_givens(r: Rps, solved: Sequence[OpSym]) -> Rps:
    """Re-declare unknowns as givens (their equations dropped), keeping the rest.

    Used to compose schemes: solved symbols become ordinary givens.
    """
    keep = [f for f in r.unknowns if f not in solved]
    givens = Signature(list(r.givens.entries) + [(f.name, f.arity) for f in solved],
                       label=r.givens.label)
    unknowns = Signature([(f.name, f.arity) for f in keep], label=r.unknowns.label)

    def move(t: Term) -> Term:
        if isinstance(t, App):
            if r.is_given(t.sym):
                sym = givens[t.sym.name]
            elif t.sym in solved:
                sym = givens[t.sym.name]
            else:
                sym = unknowns[t.sym.name]
            return App(sym, tuple(move(a) for a in t.args))
        return t

    rhs = {}
    names = {}
    for f in keep:
        body = r.rhs[f]
        if isinstance(body, CoTree):
            raise ValueError("only finite right-hand sides can be re-declared")
        rhs[unknowns[f.name]] = move(body)
        if f in r.var_names:
            names[unknowns[f.name]] = r.var_names[f]
    return Rps(givens, unknowns, rhs, names)


def param_term(value: Any) -> Param:
    return Param(value)
