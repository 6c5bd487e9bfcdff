"""Possibly infinite Σ-trees, represented as a coalgebra state plus a step function.

A :class:`CoTree` is a pair ``(coalgebra, seed)``. Observing it yields one
:class:`Layer`: either a :class:`Leaf` (a variable or parameter) or a
:class:`Node` whose children are again CoTrees. Layers are memoized per state,
so a tree generated by a finite-state coalgebra (a rational tree) is a finite
graph and can be compared exactly with :func:`bisimilar`.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Any, Callable, Hashable, Iterable, Mapping, Sequence

from .signature import (
    App, BOTTOM, OpSym, Param, SignatureError, Term, Var, show_leaf, show_term)


@dataclass(frozen=True, slots=True)
class Leaf:
    """Root layer of a tree that is just a variable or parameter."""

    label: Term  # Var or Param


@dataclass(frozen=True, slots=True)
class Node:
    sym: OpSym
    children: tuple


Layer = Leaf | Node


class UndecidedError(RuntimeError):
    """Bisimulation check ran out of its state budget without an answer."""


class ErasingMapError(ValueError):
    """A second-order substitution maps some symbol to a bare variable."""


class Coalgebra:
    """State machine producing layers; subclasses implement :meth:`_observe`.

    ``_observe`` must return a Leaf, or a Node whose children are CoTrees.
    """

    __slots__ = ("_memo", "__weakref__")

    def __init__(self):
        self._memo: dict[Hashable, Layer] = {}

    def observe(self, state: Hashable) -> Layer:
        layer = self._memo.get(state)
        if layer is None:
            layer = self._observe(state)
            # concurrent forcing writes the same value twice at worst
            self._memo[state] = layer
        return layer

    def _observe(self, state: Hashable) -> Layer:
        raise NotImplementedError


class CoTree:
    """A point of the final coalgebra: one state of some coalgebra."""

    __slots__ = ("coalg", "seed", "_hash")

    def __init__(self, coalg: Coalgebra, seed: Hashable):
        self.coalg = coalg
        self.seed = seed
        self._hash = hash((id(coalg), seed))

    def observe(self) -> Layer:
        return self.coalg.observe(self.seed)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        # identity of states, not tree equality; see bisimilar/cut_equal
        return (isinstance(other, CoTree) and self.coalg is other.coalg
                and self.seed == other.seed)

    def __repr__(self) -> str:
        return f"CoTree({show_term(cut(self, 4))} ...)"


# ---------------------------------------------------------------------------
# constructors


class _StepCoalgebra(Coalgebra):
    __slots__ = ("_step",)

    def __init__(self, step: Callable[[Any], Any]):
        super().__init__()
        self._step = step

    def _observe(self, state):
        out = self._step(state)
        if isinstance(out, Node):
            if len(out.children) != out.sym.arity:
                raise SignatureError(
                    f"step produced {out.sym.name} with {len(out.children)} children")
            return Node(out.sym, tuple(CoTree(self, s) for s in out.children))
        if isinstance(out, Leaf):
            return out
        raise TypeError(f"step must return Leaf or Node, got {out!r}")


def unfold(seed: Hashable, step: Callable[[Any], Layer]) -> CoTree:
    """The tree obtained by repeatedly observing ``seed`` with ``step``.

    ``step`` maps a state to ``Leaf(label)`` or ``Node(sym, child_states)``.
    """
    return CoTree(_StepCoalgebra(step), seed)


class _ConstCoalgebra(Coalgebra):
    """Single-state coalgebra emitting a fixed layer."""

    __slots__ = ("_layer",)

    def __init__(self, layer: Layer):
        super().__init__()
        self._layer = layer

    def _observe(self, state):
        return self._layer


def var(x: Any) -> CoTree:
    """Leaf tree. ``x`` may be a Var/Param term or a bare variable index."""
    label = x if isinstance(x, (Var, Param)) else Var(x)
    return CoTree(_ConstCoalgebra(Leaf(label)), 0)


def param(value: Any) -> CoTree:
    return CoTree(_ConstCoalgebra(Leaf(Param(value))), 0)


def node(f: OpSym, children: Sequence[CoTree] = ()) -> CoTree:
    children = tuple(children)
    if len(children) != f.arity:
        raise SignatureError(f"{f.name} expects {f.arity} children, got {len(children)}")
    return CoTree(_ConstCoalgebra(Node(f, children)), 0)


class _TermCoalgebra(Coalgebra):
    """States are subterms of a finite term; ⊥ becomes a leaf labelled ⊥."""

    __slots__ = ()

    def _observe(self, t):
        if isinstance(t, App):
            return Node(t.sym, tuple(CoTree(self, a) for a in t.args))
        if isinstance(t, (Var, Param)) or t is BOTTOM:
            return Leaf(t)
        raise ValueError(f"not a term: {t!r}")


def from_term(t: Term) -> CoTree:
    """The finite tree of a term, so that partial terms can be cut again."""
    return CoTree(_TermCoalgebra(), t)


# ---------------------------------------------------------------------------
# observation


def cut(t: CoTree, n: int) -> Term:
    """Finite approximation: every node at depth ``n`` becomes ⊥."""
    if n < 0:
        raise ValueError("cut depth must be >= 0")
    memo: dict[tuple[CoTree, int], Term] = {}

    def go(u: CoTree, k: int) -> Term:
        if k == 0:
            return BOTTOM
        key = (u, k)
        r = memo.get(key)
        if r is None:
            layer = u.observe()
            if isinstance(layer, Leaf):
                r = layer.label
            else:
                r = App(layer.sym, tuple(go(c, k - 1) for c in layer.children))
            memo[key] = r
        return r

    return go(t, n)


def cut_equal(a: CoTree, b: CoTree, depth: int) -> bool:
    """``cut(a, depth) == cut(b, depth)``, decided without building the cuts."""
    seen: set = set()
    stack = [(a, b, depth)]
    while stack:
        u, v, k = stack.pop()
        if k == 0 or (u, v, k) in seen:
            continue
        seen.add((u, v, k))
        lu, lv = u.observe(), v.observe()
        if isinstance(lu, Leaf) or isinstance(lv, Leaf):
            if lu != lv:
                return False
            continue
        if lu.sym != lv.sym:
            return False
        stack.extend((x, y, k - 1) for x, y in zip(lu.children, lv.children))
    return True


def reachable(t: CoTree, cap: int = 10_000) -> list[CoTree] | None:
    """All subtree states reachable from ``t``, or None if more than ``cap``."""
    seen = {t}
    order = [t]
    queue = deque([t])
    while queue:
        u = queue.popleft()
        layer = u.observe()
        if isinstance(layer, Node):
            for c in layer.children:
                if c not in seen:
                    if len(seen) >= cap:
                        return None
                    seen.add(c)
                    order.append(c)
                    queue.append(c)
    return order


def is_finite(t: CoTree, cap: int = 10_000) -> bool:
    """True iff ``t`` is a finite tree (acyclic reachable state graph)."""
    states = reachable(t, cap)
    if states is None:
        return False
    colour: dict[CoTree, int] = {}
    for root in states:
        if root in colour:
            continue
        stack = [(root, iter(_kids(root)))]
        colour[root] = 1
        while stack:
            u, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[u] = 2
                stack.pop()
                continue
            c = colour.get(nxt, 0)
            if c == 1:
                return False
            if c == 0:
                colour[nxt] = 1
                stack.append((nxt, iter(_kids(nxt))))
    return True


def _kids(u: CoTree) -> tuple:
    layer = u.observe()
    return layer.children if isinstance(layer, Node) else ()


def to_term(t: CoTree, cap: int = 10_000) -> Term:
    """Convert a finite tree to a term; raises if the tree is infinite."""
    if not is_finite(t, cap):
        raise ValueError("tree is infinite (or larger than the state cap)")
    memo: dict[CoTree, Term] = {}

    def go(u: CoTree) -> Term:
        r = memo.get(u)
        if r is None:
            layer = u.observe()
            if isinstance(layer, Leaf):
                r = layer.label
            else:
                r = App(layer.sym, tuple(go(c) for c in layer.children))
            memo[u] = r
        return r

    return go(t)


# ---------------------------------------------------------------------------
# first-order substitution


class _SubstCoalgebra(Coalgebra):
    __slots__ = ("_look",)

    def __init__(self, look: Callable[[Term], CoTree | None]):
        super().__init__()
        self._look = look

    def _observe(self, u: CoTree):
        layer = u.observe()
        if isinstance(layer, Leaf):
            image = self._look(layer.label)
            return layer if image is None else image.observe()
        return Node(layer.sym, tuple(CoTree(self, c) for c in layer.children))


def subst(t: CoTree, s: Mapping[Any, CoTree] | Callable[[Any], CoTree | None]) -> CoTree:
    """Replace leaves of ``t`` by trees.

    ``s`` is keyed by variable index (for ``Var`` leaves) or by the leaf term
    itself; leaves without an image are kept. A callable receives the leaf term
    and returns a tree or None.
    """
    if callable(s) and not isinstance(s, Mapping):
        look = s
    else:
        def look(label: Term) -> CoTree | None:
            if label in s:
                return s[label]
            if isinstance(label, Var) and label.index in s:
                return s[label.index]
            return None

    return CoTree(_SubstCoalgebra(look), t)


def splice(t: CoTree, values: Sequence[Any]) -> CoTree:
    """Replace variable ``i`` by the parameter leaf ``values[i]``."""
    return subst(t, {i: param(v) for i, v in enumerate(values)})


# ---------------------------------------------------------------------------
# second-order substitution


def identity_image(f: OpSym) -> CoTree:
    """``f(0, ..., n-1)``: the image of ``f`` under the identity map."""
    return node(f, [var(i) for i in range(f.arity)])


class _SecondOrderCoalgebra(Coalgebra):
    """States: ("t", u) for a subtree u of the input; ("i", w, kids) for a
    subtree w of the image of some symbol whose variables stand for kids."""

    __slots__ = ("_images",)

    def __init__(self, images: Callable[[OpSym], CoTree]):
        super().__init__()
        self._images = images

    def _observe(self, state):
        if state[0] == "t":
            layer = state[1].observe()
            if isinstance(layer, Leaf):
                return layer
            image = self._images(layer.sym)
            return self._observe(("i", image, layer.children))
        _, w, kids = state
        layer = w.observe()
        if isinstance(layer, Node):
            return Node(layer.sym, tuple(CoTree(self, ("i", c, kids)) for c in layer.children))
        label = layer.label
        if isinstance(label, Var) and isinstance(label.index, int) and 0 <= label.index < len(kids):
            return self.observe(("t", kids[label.index]))
        return layer


def second_order_subst(t: CoTree, m: Mapping[OpSym, CoTree] | Callable[[OpSym], CoTree]) -> CoTree:
    """Replace every symbol ``f`` in ``t`` by its image tree ``m[f]``.

    Variables ``0..n-1`` of the image stand for the (recursively substituted)
    children of the replaced node. Every image must be non-erasing: its root
    is a node, never a bare variable.
    """
    if callable(m) and not isinstance(m, Mapping):
        table = m
        checked: set[OpSym] = set()

        def images(f: OpSym) -> CoTree:
            img = table(f)
            if f not in checked:
                _check_non_erasing(f, img)
                checked.add(f)
            return img
    else:
        for f, img in m.items():
            _check_non_erasing(f, img)

        def images(f: OpSym) -> CoTree:
            try:
                return m[f]
            except KeyError:
                raise KeyError(f"second-order map has no image for {f.name}") from None

    return CoTree(_SecondOrderCoalgebra(images), ("t", t))


def _check_non_erasing(f: OpSym, img: CoTree) -> None:
    if isinstance(img.observe(), Leaf):
        raise ErasingMapError(f"image of {f.name} is a bare leaf; only non-erasing maps are allowed")


# ---------------------------------------------------------------------------
# bisimulation


def bisimilar(a: CoTree, b: CoTree, cap: int = 10_000) -> bool:
    """Decide equality of two rational trees.

    Explores pairs of states with union-find (Hopcroft-Karp style): pairs whose
    states are already known equivalent are skipped. Raises
    :class:`UndecidedError` if more than ``cap`` pairs would be needed.
    """
    parent: dict[CoTree, CoTree] = {}

    def find(x: CoTree) -> CoTree:
        root = x
        while root in parent:
            root = parent[root]
        while x in parent and x != root:
            parent[x], x = root, parent[x]
        return root

    pending = deque([(a, b)])
    merged = 0
    while pending:
        u, v = pending.popleft()
        ru, rv = find(u), find(v)
        if ru == rv:
            continue
        lu, lv = u.observe(), v.observe()
        if isinstance(lu, Leaf) or isinstance(lv, Leaf):
            if lu != lv:
                return False
        elif lu.sym != lv.sym:
            return False
        if merged >= cap:
            raise UndecidedError(f"bisimulation exceeded {cap} state pairs")
        parent[ru] = rv
        merged += 1
        if isinstance(lu, Node):
            pending.extend(zip(lu.children, lv.children))
    return True


# ---------------------------------------------------------------------------
# DOT output


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def term_to_dot(t: Term, var_names=None, name: str = "tree") -> str:
    """DOT graph of a finite (cut) tree; ⊥ leaves are labelled "⊥"."""
    lines = [f"digraph {name} {{", "  node [shape=plaintext];"]
    counter = 0
    stack: list[tuple[Term, int | None]] = [(t, None)]
    while stack:
        u, parent = stack.pop()
        me = counter
        counter += 1
        label = u.sym.name if isinstance(u, App) else show_leaf(u, var_names)
        lines.append(f'  n{me} [label="{_dot_escape(label)}"];')
        if parent is not None:
            lines.append(f"  n{parent} -> n{me};")
        if isinstance(u, App):
            for c in reversed(u.args):
                stack.append((c, me))
    lines.append("}")
    return "\n".join(lines) + "\n"


def state_graph_dot(t: CoTree, cap: int = 10_000, var_names=None, name: str = "states") -> str:
    """DOT graph of the reachable state graph of a rational tree."""
    states = reachable(t, cap)
    if states is None:
        raise UndecidedError(f"more than {cap} reachable states")
    ids = {s: i for i, s in enumerate(states)}
    lines = [f"digraph {name} {{", "  node [shape=plaintext];"]
    for s in states:
        layer = s.observe()
        label = layer.sym.name if isinstance(layer, Node) else show_leaf(layer.label, var_names)
        lines.append(f'  s{ids[s]} [label="{_dot_escape(label)}"];')
    for s in states:
        layer = s.observe()
        if isinstance(layer, Node):
            for i, c in enumerate(layer.children):
                lines.append(f'  s{ids[s]} -> s{ids[c]} [label="{i}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def leaves(t: CoTree, depth: int) -> Iterable[Term]:
    """Leaf labels occurring above ``depth``."""
    for u in _walk(cut(t, depth)):
        if isinstance(u, (Var, Param)):
            yield u


def _walk(t: Term):
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(u.args)
