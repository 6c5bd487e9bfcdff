"""Complete metric spaces with contracting operations, solved by Banach
iteration; finite point-set approximations of compact sets under the
Hausdorff metric; iterated function systems.
"""

from __future__ import annotations

import csv
import io
import math
import random
from dataclasses import dataclass
from typing import Any, Callable, Iterable, Mapping, Sequence

import numpy as np
from scipy.spatial import cKDTree

from .cotree import CoTree, Leaf, Node
from .elgot import (
    Budget, ElgotAlgebra, NonConvergenceError, Solution, depth_value,
    vector_step)
from .rps import Rps, check_guarded
from .signature import OpSym, Param, Signature, Term, fold_term

TOL_FLOOR = 1e-12


@dataclass(frozen=True)
class Contraction:
    """An operation with its declared contraction factor."""

    arity: int
    fn: Callable[..., Any]
    factor: float


class ContractingAlgebra(ElgotAlgebra):
    """Operations that contract the metric ``dist`` by their declared factors.

    ``diameter`` (if known) bounds all distances; it lets single queries of
    demand-driven systems use the a-priori Banach bound. ``start`` is the
    arbitrary element iteration begins from.
    """

    def __init__(self, ops: Mapping[str, Contraction], dist: Callable[[Any, Any], float],
                 start: Any, diameter: float | None = None,
                 sampler: Callable[[random.Random], Any] | None = None, name: str = "cms"):
        self.ops = dict(ops)
        for n, o in self.ops.items():
            if not 0 <= o.factor < 1:
                raise ValueError(f"operation {n} must have contraction factor in [0, 1)")
        self.sig = Signature([(n, o.arity) for n, o in self.ops.items()], label=name)
        self.dist = dist
        self.start = start
        self.diameter = diameter
        self._sampler = sampler
        self.name = name
        self.trace: list[tuple[int, float]] = []

    @property
    def epsilon(self) -> float:
        return max((o.factor for o in self.ops.values()), default=0.0)

    def apply(self, sym: OpSym, args: Sequence[Any]) -> Any:
        op = self.ops[sym.name]
        return op.fn(*args)

    def equal(self, a: Any, b: Any, tol: float = 0.0) -> bool:
        return self.dist(a, b) <= tol

    def sample(self, rng: random.Random) -> Any:
        if self._sampler is None:
            raise NotImplementedError("no sampler")
        return self._sampler(rng)

    def parse_value(self, text: str) -> Any:
        return float(text)

    def stop_gap(self, tol: float) -> float:
        """Successive-iterate gap that guarantees distance ≤ tol to the fixed point."""
        eps = self.epsilon
        if eps == 0:
            return math.inf
        return max(tol, TOL_FLOOR) * (1 - eps) / eps

    def solve_closed(self, e, variables: list, budget: Budget, start=None,
                     iterations: int | None = None) -> Solution:
        return banach_vector(self, e, variables, budget, start, iterations)

    def solve_open(self, e, roots: list, budget: Budget, start=None) -> Solution:
        return banach_open(self, e, roots, budget, start)

    def solve(self, e, budget: Budget | None = None, roots=None) -> Solution:
        budget = budget or Budget()
        if getattr(e, "lazy", False) and self.diameter is not None and roots is not None:
            # a-priori bound: no need to explore the whole reachable set
            return self.solve_open(e, list(roots), budget)
        return super().solve(e, budget, roots)

    def annotate(self, value: Any, err: float) -> Any:
        """Attach an error bound to a computed value (point sets keep it)."""
        return value


def banach_vector(alg: ContractingAlgebra, e, variables: list, budget: Budget,
                  start=None, iterations: int | None = None) -> Solution:
    """Iterate the solution operator on a closed variable set.

    Stops once successive iterates are within ``tol·(1-ε)/ε`` in the sup
    metric, so the result is within ``tol`` of the unique solution. With
    ``iterations`` set, runs exactly that many steps instead and attaches the
    a-posteriori error bound to the values.
    """
    s0 = start if start is not None else alg.start
    cur = {x: (s0(x) if callable(s0) else s0) for x in variables}
    gap = alg.stop_gap(budget.tol)
    alg.trace = []
    first = None
    n = iterations if iterations is not None else budget.fuel
    for k in range(1, n + 1):
        nxt = vector_step(alg, e, variables, cur)
        d = max((alg.dist(cur[x], nxt[x]) for x in variables), default=0.0)
        alg.trace.append((k, d))
        if first is None:
            first = d
        cur = nxt
        if iterations is None and d <= gap:
            return Solution(cur, iterations=k)
    if iterations is not None:
        eps = alg.epsilon
        err = (eps ** iterations) * (first or 0.0) / (1 - eps)
        return Solution({x: alg.annotate(v, err) for x, v in cur.items()}, iterations=n)
    raise NonConvergenceError(
        f"no convergence to tol={budget.tol} within {budget.fuel} iterations; "
        f"check the declared contraction factors")


def banach_open(alg: ContractingAlgebra, e, roots: list, budget: Budget, start=None) -> Solution:
    """Per-root Banach iteration on a demand-driven system.

    ``v_k(root)`` is the k-th iterate at ``root``. With a known diameter D it is
    within ``ε^k·D`` of the solution, so k is chosen a priori. Without one the
    iteration stops when the root value moves by less than the stopping gap,
    which bounds only that coordinate (a heuristic, documented as such).
    """
    s0 = start if start is not None else alg.start
    eps = alg.epsilon
    tol = max(budget.tol, TOL_FLOOR)
    memo: dict = {}
    out = {}
    spent = 0
    for root in roots:
        if alg.diameter is not None:
            if eps == 0 or alg.diameter == 0:
                k = 1
            else:
                k = max(1, math.ceil(math.log(tol / alg.diameter) / math.log(eps)))
            if k > budget.fuel:
                raise NonConvergenceError(f"tol={tol} needs {k} iterations, fuel is {budget.fuel}")
            out[root] = depth_value(alg, e, root, k, s0, memo)
            spent = max(spent, k)
            continue
        gap = alg.stop_gap(tol)
        prev = depth_value(alg, e, root, 1, s0, memo)
        for k in range(2, budget.fuel + 1):
            v = depth_value(alg, e, root, k, s0, memo)
            if alg.dist(prev, v) <= gap:
                out[root] = v
                spent = max(spent, k)
                break
            prev = v
        else:
            raise NonConvergenceError(f"no convergence within {budget.fuel} iterations")
    return Solution(out, iterations=spent)


def banach_solve_flat(alg: ContractingAlgebra, e, tol: float = 1e-12, fuel: int = 400,
                      roots=None, start=None) -> Solution:
    budget = Budget(fuel=fuel, tol=tol)
    if start is None:
        return alg.solve(e, budget, roots)
    if getattr(e, "lazy", False):
        return alg.solve_open(e, list(roots), budget, start)
    return alg.solve_closed(e, list(e.variables), budget, start)


def interpret_rps_banach(alg: ContractingAlgebra, r: Rps, tol: float = 1e-12, fuel: int = 400,
                         seed: Callable[[OpSym, tuple], Any] | None = None) -> dict[OpSym, Callable]:
    """The unique fixed point of R: ``R^{k}(s)`` from a seed interpretation ``s``.

    ``R(g)(f)(a) = rhs_f`` evaluated with unknowns read as ``g``. With diameter
    D the k-th iterate is within ``ε^k·D`` of the fixed point; otherwise the
    value is iterated until it moves by less than the stopping gap.
    """
    check_guarded(r)
    seed = seed or (lambda f, args: alg.start)
    eps = alg.epsilon
    tol = max(tol, TOL_FLOOR)
    memo: dict = {}

    def call(f: OpSym, vals: tuple, k: int) -> Any:
        if k == 0:
            return seed(f, vals)
        key = (f, vals, k)
        if key in memo:
            return memo[key]

        def on_app(s: OpSym, xs: list) -> Any:
            if r.is_given(s):
                return alg.apply(s, xs)
            return call(s, tuple(xs), k - 1)

        def on_leaf(u: Term) -> Any:
            return u.value if isinstance(u, Param) else vals[u.index]

        res = fold_term(r.rhs[f], on_app, on_leaf)
        memo[key] = res
        return res

    def make(f: OpSym):
        def fn(*args):
            args = tuple(args)
            if alg.diameter is not None:
                k = 1 if eps == 0 else max(1, math.ceil(math.log(tol / alg.diameter) / math.log(eps)))
                return call(f, args, min(k, fuel))
            gap = alg.stop_gap(tol)
            prev = call(f, args, 1)
            for k in range(2, fuel + 1):
                v = call(f, args, k)
                if alg.dist(prev, v) <= gap:
                    return v
                prev = v
            raise NonConvergenceError(f"{f.name}{args}: no convergence within {fuel} iterations")

        fn.__name__ = f.name
        return fn

    return {f: make(f) for f in r.unknowns}


def check_contraction(alg: ContractingAlgebra, rng: random.Random | None = None,
                      trials: int = 200, slack: float = 1e-12) -> list[str]:
    """Operations violating their declared factor on random argument pairs."""
    rng = rng or random.Random(0)
    bad = []
    for name, op in alg.ops.items():
        s = alg.sig[name]
        for _ in range(trials):
            xs = [alg.sample(rng) for _ in range(op.arity)]
            ys = [alg.sample(rng) for _ in range(op.arity)]
            lhs = alg.dist(alg.apply(s, xs), alg.apply(s, ys))
            rhs = op.factor * max((alg.dist(a, b) for a, b in zip(xs, ys)), default=0.0)
            if lhs > rhs + slack:
                bad.append(name)
                break
    return bad


# ---------------------------------------------------------------------------
# the unit interval


def interval_algebra(ops: Mapping[str, Contraction], start: float = 0.0, name: str = "interval") -> ContractingAlgebra:
    """Operations on [0, 1] with the usual distance; diameter 1."""
    return ContractingAlgebra(ops, lambda a, b: abs(a - b), start, diameter=1.0,
                              sampler=lambda rng: rng.random(), name=name)


def sin_algebra() -> ContractingAlgebra:
    """``F(u, v) = (u + v)/4`` and ``G(u) = sin(u)/2`` on [0, 1]."""
    return interval_algebra({
        "F": Contraction(2, lambda u, v: (u + v) / 4, 0.5),
        "G": Contraction(1, lambda u: math.sin(u) / 2, 0.5),
    }, name="sin")


def affine_interval_algebra() -> ContractingAlgebra:
    """A generic contracting interval algebra used by the law harness."""
    return interval_algebra({
        "h": Contraction(1, lambda u: u / 2, 0.5),
        "k": Contraction(1, lambda u: 1 - u / 3, 1 / 3),
        "m": Contraction(2, lambda u, v: (u + v) / 4 + 0.25, 0.5),
        "c": Contraction(0, lambda: 0.75, 0.0),
    }, name="interval")


# ---------------------------------------------------------------------------
# point sets and the Hausdorff metric


class PointSet:
    """A non-empty finite set of points approximating a compact set.

    ``bound`` is an upper bound on the Hausdorff distance to the set it
    stands for. Points are stored sorted and de-duplicated.
    """

    __slots__ = ("points", "bound")

    def __init__(self, points, bound: float = 0.0):
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts.reshape(-1, 1)
        if pts.size == 0:
            raise ValueError("point sets must be non-empty")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        self.points = np.unique(pts, axis=0)
        self.bound = float(bound)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.points)

    def __eq__(self, other) -> bool:
        return (isinstance(other, PointSet) and self.points.shape == other.points.shape
                and bool(np.array_equal(self.points, other.points)))

    def __hash__(self) -> int:
        return hash(self.points.tobytes())

    def __repr__(self) -> str:
        return f"PointSet({len(self)} points in {self.dim}D, bound={self.bound:.3g})"

    def union(self, *others: PointSet) -> PointSet:
        return PointSet(np.vstack([self.points] + [o.points for o in others]),
                        max([self.bound] + [o.bound for o in others]))


def directed_hausdorff(a: PointSet, b: PointSet) -> float:
    d, _ = cKDTree(b.points).query(a.points)
    return float(np.max(d))


def hausdorff(a: PointSet, b: PointSet) -> float:
    """Hausdorff distance of two non-empty finite sets."""
    if len(a) == 0 or len(b) == 0:
        raise ValueError("hausdorff distance needs non-empty sets")
    return max(directed_hausdorff(a, b), directed_hausdorff(b, a))


@dataclass(frozen=True)
class AffineMap:
    """``p ↦ scale * p + offset`` coordinate-wise."""

    scale: tuple
    offset: tuple

    def __post_init__(self):
        if len(self.scale) != len(self.offset):
            raise ValueError("scale and offset must have the same dimension")

    @classmethod
    def of(cls, scale, offset) -> AffineMap:
        scale = tuple(np.atleast_1d(np.asarray(scale, dtype=float)))
        offset = tuple(np.atleast_1d(np.asarray(offset, dtype=float)))
        if len(scale) == 1 and len(offset) > 1:
            scale = scale * len(offset)
        return cls(scale, offset)

    @property
    def factor(self) -> float:
        return max(abs(s) for s in self.scale)

    def __call__(self, pts: np.ndarray) -> np.ndarray:
        return pts * np.asarray(self.scale) + np.asarray(self.offset)


class IfsAlgebra(ContractingAlgebra):
    """Point sets with one n-ary operation ``α(A1..An) = ⋃ f_i[A_i]``."""

    def __init__(self, maps: Sequence[AffineMap], symbol: str = "alpha",
                 start: PointSet | None = None, name: str = "ifs"):
        maps = list(maps)
        if not maps:
            raise ValueError("an iterated function system needs at least one map")
        for m in maps:
            if not m.factor < 1:
                raise ValueError("all maps must be contracting (|scale| < 1)")
        dims = {len(m.scale) for m in maps}
        if len(dims) != 1:
            raise ValueError("all maps must have the same dimension")
        self.maps = maps
        self.dim = dims.pop()
        if start is None:
            start = PointSet(np.zeros((1, self.dim)))
        eps = max(m.factor for m in maps)
        super().__init__({symbol: Contraction(len(maps), self._alpha, eps)}, hausdorff, start,
                         diameter=None, sampler=self._sample, name=name)
        self.symbol = symbol

    def _alpha(self, *sets: PointSet) -> PointSet:
        pts = np.vstack([m(s.points) for m, s in zip(self.maps, sets)])
        bound = max(m.factor * s.bound for m, s in zip(self.maps, sets))
        return PointSet(pts, bound)

    def alpha(self, *sets: PointSet) -> PointSet:
        return self._alpha(*sets)

    def annotate(self, value: PointSet, err: float) -> PointSet:
        return PointSet(value.points, err)

    def _sample(self, rng: random.Random) -> PointSet:
        n = rng.randint(1, 6)
        return PointSet([[rng.random() for _ in range(self.dim)] for _ in range(n)])

    def parse_value(self, text: str) -> PointSet:
        return read_points_csv(text)


def ifs_algebra(maps: Sequence[AffineMap], symbol: str = "alpha", start: PointSet | None = None) -> IfsAlgebra:
    return IfsAlgebra(maps, symbol, start)


def cantor_algebra() -> IfsAlgebra:
    """``α(A, B) = A/3 ∪ (2/3 + B/3)`` on subsets of the line, started from {0, 1}."""
    return IfsAlgebra([AffineMap.of(1 / 3, 0.0), AffineMap.of(1 / 3, 2 / 3)],
                      start=PointSet([0.0, 1.0]), name="cantor")


def sierpinski_row_algebra() -> IfsAlgebra:
    """The three maps ``(x/3 + i/3, y/3)``, i = 0, 1, 2, on the plane."""
    maps = [AffineMap.of(1 / 3, (i / 3, 0.0)) for i in range(3)]
    return IfsAlgebra(maps, start=PointSet([[0, 0], [1, 0], [0, 1], [1, 1]]), name="ifs2d")


def cantor_set(iters: int) -> PointSet:
    """Iterate ``S ↦ α(S, S)`` from {0, 1}; within ``3^-iters`` of the Cantor set."""
    if iters < 0:
        raise ValueError("iters must be >= 0")
    alg = cantor_algebra()
    s = alg.start
    for _ in range(iters):
        s = alg.alpha(s, s)
    return PointSet(s.points, 3.0 ** (-iters))


def unit_square_corners() -> PointSet:
    return PointSet([[0, 0], [1, 0], [0, 1], [1, 1]])


# ---------------------------------------------------------------------------
# CSV


def points_csv(s: PointSet) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    for p in s.points:
        w.writerow([f"{c:.12g}" for c in p])
    return buf.getvalue()


def read_points_csv(text: str) -> PointSet:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].lstrip().startswith("#")]
    return PointSet([[float(c) for c in r] for r in rows])


def trace_csv(trace: Iterable[tuple[int, float]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["iteration", "residual"])
    for k, d in trace:
        w.writerow([k, f"{d:.12g}"])
    return buf.getvalue()


# ---------------------------------------------------------------------------
# the tree metric


def tree_distance(s: CoTree, t: CoTree, eps: float = 0.5, depth_cap: int = 32,
                  dist: Callable[[Any, Any], float] | None = None) -> float:
    """Distance of two trees with metric leaves.

    Trees differing at the root (different symbols, or a leaf against a node)
    are at distance 1; parameter leaves are at their own distance (capped at
    1); nodes with the same symbol are at ``eps`` times the largest distance of
    corresponding children. Below ``depth_cap`` levels the difference is
    ignored, which underestimates by at most ``eps^depth_cap``.
    """
    dist = dist or (lambda a, b: 0.0 if a == b else 1.0)
    memo: dict = {}

    def go(u: CoTree, v: CoTree, k: int) -> float:
        if k == 0:
            return 0.0
        key = (u, v, k)
        if key in memo:
            return memo[key]
        lu, lv = u.observe(), v.observe()
        if isinstance(lu, Leaf) and isinstance(lv, Leaf):
            a, b = lu.label, lv.label
            if isinstance(a, Param) and isinstance(b, Param):
                r = min(1.0, float(dist(a.value, b.value)))
            else:
                r = 0.0 if a == b else 1.0
        elif isinstance(lu, Node) and isinstance(lv, Node) and lu.sym == lv.sym:
            r = eps * max((go(a, b, k - 1) for a, b in zip(lu.children, lv.children)), default=0.0)
        else:
            r = 1.0
        memo[key] = r
        return r

    return go(s, t, depth_cap)
