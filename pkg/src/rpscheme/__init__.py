"""Recursive program schemes: uninterpreted solutions as infinite trees and
interpreted solutions in Elgot algebras."""

from .signature import (
    App, BOTTOM, OpSym, Param, Signature, SignatureError, SumSignature, Var,
    app, arity, mk_signature, show_term, sum_signatures)
from .cotree import (
    CoTree, ErasingMapError, Leaf, Node, UndecidedError, bisimilar, cut, cut_equal,
    from_term, node, param, second_order_subst, splice, subst, unfold, var)
from .flatsys import (
    Const, FlatSystem, GuardedSystem, GuardednessError, LazyFlatSystem, Op,
    flatten_guarded, is_morphism_of_equations, pair, rename, solve_flat)
from .rps import (
    Rps, UnguardedError, apply_solution, check_guarded, one_step, solve_uninterpreted)

__version__ = "0.1.0"

__all__ = [
    "App",
    "BOTTOM",
    "OpSym",
    "Param",
    "Signature",
    "SignatureError",
    "SumSignature",
    "Var",
    "app",
    "arity",
    "mk_signature",
    "show_term",
    "sum_signatures",
    "CoTree",
    "ErasingMapError",
    "Leaf",
    "Node",
    "UndecidedError",
    "bisimilar",
    "cut",
    "cut_equal",
    "from_term",
    "node",
    "param",
    "second_order_subst",
    "splice",
    "subst",
    "unfold",
    "var",
    "Const",
    "FlatSystem",
    "GuardedSystem",
    "GuardednessError",
    "LazyFlatSystem",
    "Op",
    "flatten_guarded",
    "is_morphism_of_equations",
    "pair",
    "rename",
    "solve_flat",
    "Rps",
    "UnguardedError",
    "apply_solution",
    "check_guarded",
    "one_step",
    "solve_uninterpreted",
]
