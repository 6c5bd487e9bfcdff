"""Command line: ``rpsolve check|unfold|interp|fractal|laws``.

Exit codes: 0 success, 1 domain error (e.g. an unguarded scheme), 2 usage
error (bad arguments, unreadable or malformed input).
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import Any, Callable

from . import alg_cms, alg_cpo, alg_ctree
from .cotree import cut, term_to_dot
from .dsl import ParseError, SchemeFile, parse, to_rps
from .elgot import Budget, ElgotAlgebra, NonConvergenceError, SchemeSystem, law_harness
from .flatsys import explore
from .rps import Rps, UnguardedError, approximant, check_guarded, solve_uninterpreted
from .signature import show_term

EXIT_OK, EXIT_DOMAIN, EXIT_USAGE = 0, 1, 2


class DomainError(Exception):
    pass


class UsageError(Exception):
    pass


def _ctree(base: str = "nat", zero: Any = 0, cond: str = "cond") -> alg_ctree.CTreeAlgebra:
    bases = {"nat": alg_ctree.nat_ctree, "mod5": alg_ctree.mod5_ctree}
    if base not in bases:
        raise UsageError(f"unknown ctree base {base!r}; choose from {', '.join(bases)}")
    alg = bases[base]()
    if cond != alg.cond or zero != alg.zero:
        alg = alg_ctree.CTreeAlgebra({k: v for k, v in alg.ops.items()}, cond=cond, zero=zero,
                                     elements=alg.elements, name=alg.name)
    return alg


def _gcd(literal: Any = False) -> alg_cpo.FlatDomainAlgebra:
    return alg_cpo.gcd_prefix(literal=str(literal).lower() in ("1", "true", "yes"))


ALGEBRAS: dict[str, Callable[..., ElgotAlgebra]] = {
    "nat_bot": alg_cpo.nat_bot,
    "gcd_prefix": _gcd,
    "ctree": _ctree,
    "ctree5": lambda: _ctree("mod5"),
    "sin": alg_cms.sin_algebra,
    "interval": alg_cms.affine_interval_algebra,
    "cantor": alg_cms.cantor_algebra,
    "ifs2d": alg_cms.sierpinski_row_algebra,
}


# point-set algebras are left out: iterating them to a tolerance is exponential
LAW_ALGEBRAS = ["ctree", "ctree5", "gcd_prefix", "interval", "nat_bot", "sin"]


def make_algebra(name: str, options: dict | None = None) -> ElgotAlgebra:
    if name not in ALGEBRAS:
        raise UsageError(f"unknown algebra {name!r}; choose from {', '.join(sorted(ALGEBRAS))}")
    try:
        return ALGEBRAS[name](**(options or {}))
    except TypeError as exc:
        raise UsageError(f"bad options for algebra {name}: {exc}") from None


def default_budget() -> Budget:
    try:
        fuel = int(os.environ.get("RPSOLVE_FUEL", "400"))
        tol = float(os.environ.get("RPSOLVE_TOL", "1e-12"))
        return Budget(fuel=fuel, tol=tol)
    except ValueError as exc:
        raise UsageError(f"bad RPSOLVE_FUEL/RPSOLVE_TOL: {exc}") from None


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def load(path: str) -> tuple[SchemeFile, Rps]:
    text = read_text(path)
    try:
        ast = parse(text)
        return ast, to_rps(ast)
    except ParseError as exc:
        raise UsageError(f"{path}: {exc}") from None


def guarded(r: Rps):
    try:
        return check_guarded(r)
    except UnguardedError as exc:
        raise DomainError(f"{exc}; no solution is computed") from None


def unknown_symbol(r: Rps, name: str):
    s = r.unknowns.get(name)
    if s is None:
        raise UsageError(f"{name} is not an unknown of this scheme "
                         f"(unknowns: {', '.join(r.unknowns.names()) or 'none'})")
    return s


def algebra_for(ast: SchemeFile, r: Rps, override: str | None) -> ElgotAlgebra:
    if override:
        alg = make_algebra(override)
    elif ast.algebra is not None:
        alg = make_algebra(ast.algebra.name, ast.algebra.options())
    else:
        raise UsageError("no algebra: add an 'algebra' line to the file or pass --algebra")
    for g in r.givens:
        if g.name not in alg.sig or alg.sig[g.name].arity != g.arity:
            raise DomainError(f"algebra {getattr(alg, 'name', '?')} has no operation {g.name}/{g.arity}")
    return alg


# ---------------------------------------------------------------------------
# commands


def cmd_check(args) -> int:
    _, r = load(args.file)
    w = guarded(r)
    print(f"ok: guarded scheme with {len(r.givens)} given and {len(r.unknowns)} unknown symbol(s)")
    for f, s in w.roots.items():
        print(f"  {f.name}/{f.arity}: right-hand side rooted in {s.name}")
    return EXIT_OK


def cmd_unfold(args) -> int:
    _, r = load(args.file)
    guarded(r)
    f = unknown_symbol(r, args.symbol)
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    if args.cut:
        t = cut(solve_uninterpreted(r)[f], args.depth)
    else:
        t = approximant(r, f, args.depth)
    names = r.names_for(f)
    if args.format == "dot":
        sys.stdout.write(term_to_dot(t, names, name=f.name))
    else:
        print(show_term(t, names))
    return EXIT_OK


def _split_tuple(text: str) -> list[str]:
    return [p for p in text.replace(";", ",").split(",") if p.strip()]


def cmd_interp(args) -> int:
    ast, r = load(args.file)
    guarded(r)
    f = unknown_symbol(r, args.symbol)
    alg = algebra_for(ast, r, args.algebra)
    budget = _budget(args)
    from .elgot import interpret_rps
    fn = interpret_rps(alg, r, budget)[f]
    tuples = [_split_tuple(a) for a in args.inputs] or [[]]
    if f.arity == 0:
        tuples = [[]]
    for parts in tuples:
        if len(parts) != f.arity:
            raise UsageError(f"{f.name} takes {f.arity} argument(s), got {len(parts)}: {','.join(parts)}")
        try:
            vals = [alg.parse_value(p) for p in parts]
        except (ValueError, NotImplementedError) as exc:
            raise UsageError(f"bad argument: {exc}") from None
        try:
            print(alg.format_value(fn(*vals)))
        except NonConvergenceError as exc:
            raise DomainError(str(exc)) from None
    return EXIT_OK


def cmd_fractal(args) -> int:
    ast, r = load(args.file)
    guarded(r)
    alg = algebra_for(ast, r, args.algebra)
    if not isinstance(alg, alg_cms.IfsAlgebra):
        raise UsageError("fractal needs a point-set algebra (cantor, ifs2d)")
    if args.iters < 0:
        raise UsageError("--iters must be >= 0")
    f = unknown_symbol(r, args.symbol) if args.symbol else next(iter(r.unknowns), None)
    if f is None:
        raise UsageError("scheme has no unknowns")
    if args.input:
        inputs = [alg.parse_value(read_text(args.input))]
    else:
        inputs = [alg.start]
    inputs = inputs * f.arity
    system = SchemeSystem(alg, r)
    root = system.state(f, inputs)
    order, closed = explore(system, [root], 100_000)
    if not closed:
        raise DomainError("the scheme's flat system is not finite for this input")
    sol = alg.solve_closed(system, order, Budget(fuel=max(args.iters, 1)), iterations=args.iters)
    out = sol[root]
    text = alg_cms.points_csv(out)
    if args.out and args.out != "-":
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        print(f"wrote {len(out)} points to {args.out} (resolution bound {out.bound:.12g})",
              file=sys.stderr)
    else:
        sys.stdout.write(text)
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            fh.write(alg_cms.trace_csv(alg.trace))
    return EXIT_OK


def cmd_laws(args) -> int:
    alg = make_algebra(args.algebra)
    tol = 1e-9 if isinstance(alg, alg_cms.ContractingAlgebra) else 0.0
    rep = law_harness(alg, samples=args.samples, seed=args.seed, budget=_budget(args), tol=tol)
    print(rep.summary())
    if rep.failures:
        law, case = rep.failures[0]
        print(f"first counterexample ({law}):")
        for k, v in case.items():
            print(f"  {k}: {v!r}")
        return EXIT_DOMAIN
    return EXIT_OK


def _budget(args) -> Budget:
    base = default_budget()
    fuel = args.fuel if getattr(args, "fuel", None) is not None else base.fuel
    tol = args.tol if getattr(args, "tol", None) is not None else base.tol
    try:
        return Budget(fuel=fuel, tol=tol)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="rpsolve",
        description="Solve recursive program schemes as infinite trees or in algebras.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("check", help="parse a scheme and check that it is guarded")
    c.add_argument("file", help="scheme file, or - for stdin")
    c.set_defaults(run=cmd_check)

    u = sub.add_parser("unfold", help="print a finite approximation of a solution tree")
    u.add_argument("file")
    u.add_argument("symbol")
    u.add_argument("--depth", type=int, default=3,
                   help="number of unfoldings of the unknowns (default 3)")
    u.add_argument("--cut", action="store_true",
                   help="instead cut the solution tree at this depth (root is depth 0)")
    u.add_argument("--format", choices=("term", "dot"), default="term")
    u.set_defaults(run=cmd_unfold)

    def budget_flags(q):
        q.add_argument("--fuel", type=int, default=None,
                       help="iteration/search budget (default $RPSOLVE_FUEL or 400)")
        q.add_argument("--tol", type=float, default=None,
                       help="metric tolerance (default $RPSOLVE_TOL or 1e-12)")

    i = sub.add_parser("interp", help="evaluate the interpreted solution on inputs")
    i.add_argument("file")
    i.add_argument("symbol")
    i.add_argument("inputs", nargs="*", help="argument tuples, comma separated (e.g. 12,13)")
    i.add_argument("--algebra", default=None, help="override the file's algebra")
    budget_flags(i)
    i.set_defaults(run=cmd_interp)

    fr = sub.add_parser("fractal", help="write the point set of a self-similar scheme as CSV")
    fr.add_argument("file")
    fr.add_argument("--iters", type=int, default=8)
    fr.add_argument("--out", default=None, help="output CSV (default stdout)")
    fr.add_argument("--symbol", default=None, help="unknown to solve (default the first)")
    fr.add_argument("--input", default=None, help="CSV point set for the scheme's argument(s)")
    fr.add_argument("--trace", default=None, help="write the convergence trace as CSV")
    fr.add_argument("--algebra", default=None)
    fr.set_defaults(run=cmd_fractal)

    la = sub.add_parser("laws", help="check the Elgot laws on random flat systems")
    la.add_argument("algebra", choices=LAW_ALGEBRAS)
    la.add_argument("--samples", type=int, default=1000)
    la.add_argument("--seed", type=int, default=0)
    budget_flags(la)
    la.set_defaults(run=cmd_laws)
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.run(args)
    except UsageError as exc:
        print(f"rpsolve: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"rpsolve: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
