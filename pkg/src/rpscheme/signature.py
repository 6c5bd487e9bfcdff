"""Signatures of ranked operation symbols and finite (partial) terms over them."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Callable, Iterable, Iterator, Mapping, Sequence


class SignatureError(ValueError):
    """Malformed signature or ill-formed term."""


class Signature:
    """An ordered list of ``(name, arity)`` pairs.

    Signatures compare by identity: two signatures declaring the same names are
    still different signatures, so symbols coming from a sum never get confused.
    """

    __slots__ = ("_entries", "_by_name", "label")

    def __init__(self, entries: Iterable[tuple[str, int]] = (), label: str = ""):
        entries = tuple((str(n), int(a)) for n, a in entries)
        by_name: dict[str, int] = {}
        for i, (name, arity) in enumerate(entries):
            if arity < 0:
                raise SignatureError(f"negative arity for symbol {name!r}")
            if name in by_name:
                raise SignatureError(f"duplicate symbol name {name!r}")
            by_name[name] = i
        self._entries = entries
        self._by_name = by_name
        self.label = label

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[OpSym]:
        return (OpSym(self, i) for i in range(len(self._entries)))

    def __contains__(self, item: object) -> bool:
        if isinstance(item, OpSym):
            return item.sig is self
        return item in self._by_name

    def __getitem__(self, name: str) -> OpSym:
        try:
            return OpSym(self, self._by_name[name])
        except KeyError:
            raise KeyError(f"no symbol {name!r} in signature") from None

    def get(self, name: str) -> OpSym | None:
        i = self._by_name.get(name)
        return None if i is None else OpSym(self, i)

    @property
    def entries(self) -> tuple[tuple[str, int], ...]:
        return self._entries

    def names(self) -> list[str]:
        return [n for n, _ in self._entries]

    def __repr__(self) -> str:
        body = ", ".join(f"{n}/{a}" for n, a in self._entries)
        return f"Signature({body})"


@dataclass(frozen=True, slots=True)
class OpSym:
    """A symbol, identified by its signature (by identity) and position."""

    sig: Signature
    index: int

    def __post_init__(self):
        if not 0 <= self.index < len(self.sig):
            raise SignatureError(f"symbol index {self.index} out of range")

    @property
    def name(self) -> str:
        return self.sig.entries[self.index][0]

    @property
    def arity(self) -> int:
        return self.sig.entries[self.index][1]

    def __repr__(self) -> str:
        return self.name


def mk_signature(entries: Iterable[tuple[str, int]], label: str = "") -> Signature:
    return Signature(entries, label=label)


def arity(s: OpSym) -> int:
    return s.arity


class SumSignature(Signature):
    """Disjoint union of two signatures with total, invertible injections.

    Names that occur in both summands are qualified as ``name#0`` / ``name#1``.
    """

    __slots__ = ("left", "right")

    def __init__(self, left: Signature, right: Signature):
        clash = set(left.names()) & set(right.names())

        def qualify(name: str, side: int) -> str:
            return f"{name}#{side}" if name in clash else name

        entries = [(qualify(n, 0), a) for n, a in left.entries]
        entries += [(qualify(n, 1), a) for n, a in right.entries]
        super().__init__(entries, label=f"({left.label}+{right.label})")
        self.left = left
        self.right = right

    def inl(self, s: OpSym) -> OpSym:
        if s.sig is not self.left:
            raise SignatureError(f"{s!r} is not a symbol of the left summand")
        return OpSym(self, s.index)

    def inr(self, s: OpSym) -> OpSym:
        if s.sig is not self.right:
            raise SignatureError(f"{s!r} is not a symbol of the right summand")
        return OpSym(self, len(self.left) + s.index)

    def split(self, s: OpSym) -> tuple[int, OpSym]:
        """Inverse of the injections: ``(0, a_sym)`` or ``(1, b_sym)``."""
        if s.sig is not self:
            raise SignatureError(f"{s!r} is not a symbol of this sum")
        n = len(self.left)
        if s.index < n:
            return 0, OpSym(self.left, s.index)
        return 1, OpSym(self.right, s.index - n)


def sum_signatures(a: Signature, b: Signature) -> SumSignature:
    return SumSignature(a, b)


# ---------------------------------------------------------------------------
# finite terms


class Term:
    """Base class of finite terms. Subclasses are immutable and hashable."""

    __slots__ = ()


@dataclass(frozen=True, slots=True)
class Var(Term):
    """Syntactic variable; in schemes always a numeral ``0..n-1``."""

    index: Any

    def __repr__(self) -> str:
        return f"Var({self.index!r})"


@dataclass(frozen=True, slots=True)
class Param(Term):
    """Opaque parameter leaf: a label, or an element of some algebra's carrier."""

    value: Any

    def __repr__(self) -> str:
        return f"Param({self.value!r})"


class _Bottom(Term):
    __slots__ = ()
    _instance: _Bottom | None = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "BOTTOM"

    def __reduce__(self):
        return (_Bottom, ())


BOTTOM = _Bottom()


class App(Term):
    """An operation symbol applied to argument terms (hash cached)."""

    __slots__ = ("sym", "args", "_hash")

    def __init__(self, sym: OpSym, args: Sequence[Term] = ()):
        args = tuple(args)
        if len(args) != sym.arity:
            raise SignatureError(
                f"{sym.name} expects {sym.arity} arguments, got {len(args)}")
        self.sym = sym
        self.args = args
        self._hash = hash((sym, args))

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if self is other:
            return True
        if not isinstance(other, App) or self._hash != other._hash:
            return False
        return self.sym == other.sym and self.args == other.args

    def __repr__(self) -> str:
        return show_term(self)


def app(sym: OpSym, *args: Term) -> App:
    return App(sym, args)


def subterms(t: Term) -> Iterator[Term]:
    """Pre-order traversal of ``t`` (with repetitions)."""
    stack = [t]
    while stack:
        u = stack.pop()
        yield u
        if isinstance(u, App):
            stack.extend(reversed(u.args))


def is_well_formed(t: Term) -> bool:
    for u in subterms(t):
        if isinstance(u, App) and len(u.args) != u.sym.arity:
            return False
        if not isinstance(u, (App, Var, Param, _Bottom)):
            return False
    return True


def height(t: Term) -> int:
    if isinstance(t, App) and t.args:
        return 1 + max(height(a) for a in t.args)
    return 0


def symbols_of(t: Term) -> set[OpSym]:
    return {u.sym for u in subterms(t) if isinstance(u, App)}


def variables_of(t: Term) -> set[Any]:
    return {u.index for u in subterms(t) if isinstance(u, Var)}


def substitute(t: Term, mapping: Mapping[Any, Term] | Callable[[Any], Term]) -> Term:
    """First-order substitution of terms for ``Var`` leaves."""
    look = mapping if callable(mapping) else mapping.__getitem__
    cache: dict[Term, Term] = {}

    def go(u: Term) -> Term:
        if isinstance(u, Var):
            return look(u.index)
        if isinstance(u, App):
            r = cache.get(u)
            if r is None:
                r = App(u.sym, tuple(go(a) for a in u.args))
                cache[u] = r
            return r
        return u

    return go(t)


def fold_term(t: Term, on_app: Callable[[OpSym, list], Any],
              on_leaf: Callable[[Term], Any]) -> Any:
    """Bottom-up evaluation of a finite term, iterative to survive deep terms."""
    stack: list[tuple[Term, bool]] = [(t, False)]
    out: list[Any] = []
    while stack:
        u, expanded = stack.pop()
        if not isinstance(u, App):
            out.append(on_leaf(u))
            continue
        if expanded:
            n = len(u.args)
            vals = out[len(out) - n:] if n else []
            del out[len(out) - n:]
            out.append(on_app(u.sym, vals))
            continue
        stack.append((u, True))
        for a in reversed(u.args):
            stack.append((a, False))
    return out[-1]


def show_leaf(u: Term, var_names: Sequence[str] | Mapping[Any, str] | None = None) -> str:
    if isinstance(u, Var):
        if var_names is not None:
            try:
                return var_names[u.index]
            except (IndexError, KeyError, TypeError):
                pass
        return f"x{u.index}" if isinstance(u.index, int) else str(u.index)
    if isinstance(u, Param):
        return format_value(u.value)
    if u is BOTTOM:
        return "⊥"
    raise TypeError(f"not a leaf: {u!r}")


def format_value(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.12g}"
    return str(v)


def show_term(t: Term, var_names: Sequence[str] | Mapping[Any, str] | None = None) -> str:
    """Render as ``f(a, b)``; nullary symbols print bare."""

    def on_app(sym: OpSym, vals: list) -> str:
        if not vals:
            return sym.name
        return f"{sym.name}({', '.join(vals)})"

    return fold_term(t, on_app, lambda u: show_leaf(u, var_names))
