"""Flat and guarded equation systems.

A flat system assigns to every variable either ``Op(sym, args)`` (one symbol
applied to variables) or ``Const(value)`` (a parameter). Parameters are trees
when the system is solved in the tree algebra (:func:`solve_flat`) and carrier
elements when it is handed to an Elgot algebra.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Any, Callable, Hashable, Iterable, Mapping

from .cotree import Coalgebra, CoTree, Leaf, Node, var
from .signature import App, BOTTOM, OpSym, Param, SignatureError, Term, Var


class GuardednessError(ValueError):
    """A right-hand side is a bare variable of the system."""

    def __init__(self, offenders):
        self.offenders = list(offenders)
        names = ", ".join(map(str, self.offenders))
        super().__init__(f"unguarded equation(s) for: {names}")


@dataclass(frozen=True, slots=True)
class Op:
    sym: OpSym
    args: tuple

    def __post_init__(self):
        if len(self.args) != self.sym.arity:
            raise SignatureError(
                f"{self.sym.name} expects {self.sym.arity} arguments, got {len(self.args)}")


@dataclass(frozen=True, slots=True)
class Const:
    value: Any


Rhs = Op | Const


class FlatSystem:
    """A finite flat system; ``rhs`` maps each variable to ``Op`` or ``Const``."""

    lazy = False

    def __init__(self, rhs: Mapping[Hashable, Rhs]):
        self._rhs = dict(rhs)
        for x, r in self._rhs.items():
            if isinstance(r, Op):
                for a in r.args:
                    if a not in self._rhs:
                        raise KeyError(f"equation for {x!r} mentions unknown variable {a!r}")
            elif not isinstance(r, Const):
                raise TypeError(f"right-hand side of {x!r} must be Op or Const, got {r!r}")

    @property
    def variables(self) -> list[Hashable]:
        return list(self._rhs)

    def rhs(self, x: Hashable) -> Rhs:
        return self._rhs[x]

    def items(self):
        return self._rhs.items()

    def __eq__(self, other):
        return isinstance(other, FlatSystem) and self._rhs == other._rhs

    def __repr__(self) -> str:
        rows = "; ".join(f"{x!r} ≈ {_show_rhs(r)}" for x, r in self._rhs.items())
        return f"FlatSystem({rows})"


class LazyFlatSystem:
    """A flat system whose variables are discovered on demand.

    ``rule`` maps a variable to its right-hand side; results are memoized. The
    set of variables may be infinite; solvers only visit what a query reaches.
    """

    lazy = True

    def __init__(self, rule: Callable[[Hashable], Rhs]):
        self._rule = rule
        self._memo: dict[Hashable, Rhs] = {}

    def rhs(self, x: Hashable) -> Rhs:
        r = self._memo.get(x)
        if r is None:
            r = self._rule(x)
            self._memo[x] = r
        return r


def _show_rhs(r: Rhs) -> str:
    if isinstance(r, Op):
        if not r.args:
            return r.sym.name
        return f"{r.sym.name}({', '.join(map(repr, r.args))})"
    return f"<{r.value!r}>"


def explore(e, roots: Iterable[Hashable], cap: int | None = None) -> tuple[list, bool]:
    """Variables reachable from ``roots`` in breadth-first order.

    Returns ``(variables, closed)``; ``closed`` is False when the cap stopped
    the exploration before the reachable set was exhausted.
    """
    seen = set()
    order = []
    queue = deque()
    for r in roots:
        if r not in seen:
            seen.add(r)
            order.append(r)
            queue.append(r)
    while queue:
        x = queue.popleft()
        r = e.rhs(x)
        if isinstance(r, Op):
            for a in r.args:
                if a not in seen:
                    if cap is not None and len(seen) >= cap:
                        return order, False
                    seen.add(a)
                    order.append(a)
                    queue.append(a)
    return order, True


# ---------------------------------------------------------------------------
# solving in the tree algebra


class _FlatCoalgebra(Coalgebra):
    __slots__ = ("_system",)

    def __init__(self, system):
        super().__init__()
        self._system = system

    def _observe(self, x):
        r = self._system.rhs(x)
        if isinstance(r, Op):
            return Node(r.sym, tuple(CoTree(self, a) for a in r.args))
        value = r.value
        if isinstance(value, CoTree):
            return value.observe()
        if isinstance(value, (Var, Param)):
            return Leaf(value)
        return Leaf(Param(value))


def solve_flat(sys) -> dict[Hashable, CoTree] | Callable[[Hashable], CoTree]:
    """Unique solution of a flat system in the algebra of trees over its parameters.

    Parameters may be CoTrees (spliced in) or plain labels (become leaves).
    For a lazy system a function from variables to trees is returned.
    """
    coalg = _FlatCoalgebra(sys)
    if getattr(sys, "lazy", False):
        return lambda x: CoTree(coalg, x)
    return {x: CoTree(coalg, x) for x in sys.variables}


# ---------------------------------------------------------------------------
# parameter renaming and pairing


def rename(h: Callable[[Any], Any], e: FlatSystem) -> FlatSystem:
    """``h ▷ e``: apply ``h`` to every parameter, leaving Op rows alone."""
    return FlatSystem({x: Const(h(r.value)) if isinstance(r, Const) else r
                       for x, r in e.items()})


def pair(f: FlatSystem, e: FlatSystem) -> FlatSystem:
    """``f ⊞ e`` on the tagged variables ``(0, x)`` for x of e, ``(1, y)`` for y of f.

    The parameters of ``e`` must be variables of ``f``. A row ``x ≈ <y>`` of
    ``e`` is replaced by ``f``'s row for ``y``, re-tagged.
    """
    fvars = set(f.variables)

    def tag_f(r: Rhs) -> Rhs:
        if isinstance(r, Op):
            return Op(r.sym, tuple((1, a) for a in r.args))
        return r

    out: dict[Hashable, Rhs] = {}
    for x, r in e.items():
        if isinstance(r, Op):
            out[(0, x)] = Op(r.sym, tuple((0, a) for a in r.args))
        else:
            if r.value not in fvars:
                raise KeyError(f"parameter {r.value!r} of the inner system is not a variable of the outer one")
            out[(0, x)] = tag_f(f.rhs(r.value))
    for y, r in f.items():
        out[(1, y)] = tag_f(r)
    return FlatSystem(out)


def inl(x: Hashable) -> tuple:
    return (0, x)


def inr(y: Hashable) -> tuple:
    return (1, y)


def is_morphism_of_equations(h: Mapping[Hashable, Hashable] | Callable, e: FlatSystem,
                             f: FlatSystem) -> bool:
    """Check ``f ∘ h = (Hh + A) ∘ e`` row by row."""
    look = h if callable(h) else h.__getitem__
    for x, r in e.items():
        try:
            target = f.rhs(look(x))
        except KeyError:
            return False
        if isinstance(r, Op):
            if not isinstance(target, Op) or target.sym != r.sym:
                return False
            if tuple(look(a) for a in r.args) != target.args:
                return False
        elif target != r:
            return False
    return True


def transport(h: Mapping[Hashable, Hashable], f: FlatSystem, choose=None) -> FlatSystem:
    """Build ``e`` on the domain of ``h`` such that ``h`` is a morphism e → f.

    Each argument ``y`` of ``f``'s row is pulled back to some preimage under
    ``h``; ``choose(candidates)`` picks one (first by default). ``h`` must hit
    every variable that occurs as an argument.
    """
    pre: dict[Hashable, list] = {}
    for x, y in h.items():
        pre.setdefault(y, []).append(x)
    pick = choose or (lambda cands: cands[0])
    out = {}
    for x, y in h.items():
        r = f.rhs(y)
        if isinstance(r, Op):
            out[x] = Op(r.sym, tuple(pick(pre[a]) for a in r.args))
        else:
            out[x] = r
    return FlatSystem(out)


# ---------------------------------------------------------------------------
# guarded systems


@dataclass
class GuardedSystem:
    """Equations ``x ≈ t_x`` with finite terms over Σ.

    Leaves are ``Var(x)`` for system variables and ``Param(y)`` for parameters.
    No right-hand side may be a bare ``Var``.
    """

    rhs: dict[Hashable, Term] = field(default_factory=dict)

    def __post_init__(self):
        bad = [x for x, t in self.rhs.items() if isinstance(t, Var)]
        if bad:
            raise GuardednessError(bad)
        for x, t in self.rhs.items():
            if t is BOTTOM or _has_bottom(t):
                raise ValueError(f"right-hand side of {x!r} contains ⊥")
            for v in _vars(t):
                if v not in self.rhs:
                    raise KeyError(f"equation for {x!r} mentions unknown variable {v!r}")


def _vars(t: Term):
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            yield u.index
        elif isinstance(u, App):
            stack.extend(u.args)


def _has_bottom(t: Term) -> bool:
    stack = [t]
    while stack:
        u = stack.pop()
        if u is BOTTOM:
            return True
        if isinstance(u, App):
            stack.extend(u.args)
    return False


def flatten_guarded(g: GuardedSystem) -> FlatSystem:
    """Flat system with the same solution; one fresh variable per proper subterm.

    Fresh variables are ``(x, path)`` where ``path`` is the argument-index path
    from the root of ``x``'s right-hand side.
    """
    out: dict[Hashable, Rhs] = {}

    def name_of(x, path, u: Term):
        if isinstance(u, Var):
            return u.index
        fresh = (x, path)
        emit(fresh, x, path, u)
        return fresh

    def emit(v, x, path, u: Term):
        if isinstance(u, App):
            out[v] = Op(u.sym, tuple(name_of(x, path + (i,), a) for i, a in enumerate(u.args)))
        elif isinstance(u, Param):
            out[v] = Const(var(u))
        else:
            raise GuardednessError([x])

    for x, t in g.rhs.items():
        emit(x, x, (), t)
    return FlatSystem(out)


def solve_guarded(g: GuardedSystem) -> dict[Hashable, CoTree]:
    sol = solve_flat(flatten_guarded(g))
    return {x: sol[x] for x in g.rhs}


def dependency_dot(e: FlatSystem, name: str = "system") -> str:
    """DOT graph of a flat system: an edge x -> y when y occurs in x's row."""
    ids = {x: i for i, x in enumerate(e.variables)}
    lines = [f"digraph {name} {{"]
    for x, r in e.items():
        label = r.sym.name if isinstance(r, Op) else repr(r.value)
        text = f"{x} ≈ {label}".replace('"', '\\"')
        lines.append(f'  v{ids[x]} [label="{text}"];')
    for x, r in e.items():
        if isinstance(r, Op):
            for i, a in enumerate(r.args):
                lines.append(f'  v{ids[x]} -> v{ids[a]} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
