import math
import random

import numpy as np
import pytest

from rpscheme.alg_cms import (
    AffineMap, Contraction, ContractingAlgebra, IfsAlgebra, PointSet, banach_solve_flat,
    cantor_algebra, cantor_set, check_contraction, hausdorff, interpret_rps_banach,
    interval_algebra, points_csv, read_points_csv, sierpinski_row_algebra, sin_algebra,
    trace_csv, tree_distance)
from rpscheme.cotree import from_term, param
from rpscheme.elgot import Budget, NonConvergenceError, interpret_rps
from rpscheme.flatsys import Const, FlatSystem, Op
from rpscheme.signature import App, Param, mk_signature


def _pointsets(rng, n):
    for _ in range(n):
        yield PointSet([[rng.uniform(-1, 1), rng.uniform(-1, 1)] for _ in range(rng.randint(1, 8))])


def test_hausdorff_is_a_metric_on_samples():
    rng = random.Random(7)
    triples = list(zip(*(_pointsets(rng, 500) for _ in range(3))))
    for a, b, c in triples:
        assert hausdorff(a, a) == 0.0
        assert hausdorff(a, b) == pytest.approx(hausdorff(b, a), abs=0)
        assert hausdorff(a, c) <= hausdorff(a, b) + hausdorff(b, c) + 1e-12


def test_hausdorff_known_value():
    assert hausdorff(PointSet([0.0]), PointSet([0.0, 1.0])) == 1.0
    assert hausdorff(PointSet([[0, 0]]), PointSet([[3, 4]])) == 5.0


def test_pointset_basics():
    s = PointSet([1.0, 0.0, 1.0])
    assert len(s) == 2 and s.dim == 1
    assert s == PointSet([0.0, 1.0]) and hash(s) == hash(PointSet([0.0, 1.0]))
    with pytest.raises(ValueError):
        PointSet([])
    with pytest.raises(ValueError):
        PointSet([math.nan])


def test_csv_round_trip(tmp_path):
    s = PointSet([[0.1, 0.25], [1 / 3, 2 / 3]])
    assert read_points_csv(points_csv(s)) == PointSet(read_points_csv(points_csv(s)).points)
    assert hausdorff(read_points_csv(points_csv(s)), s) < 1e-11
    assert trace_csv([(1, 0.5)]).splitlines() == ["iteration,residual", "1,0.5"]


def test_affine_and_ifs_validation():
    with pytest.raises(ValueError):
        IfsAlgebra([AffineMap.of(1.0, 0.0)])
    with pytest.raises(ValueError):
        IfsAlgebra([])
    with pytest.raises(ValueError):
        ContractingAlgebra({"g": Contraction(1, abs, 1.0)}, lambda a, b: abs(a - b), 0.0)


def _ternary_distance_to_cantor_prefix(x: float, k: int) -> float:
    """Distance from x to the nearest point whose first k ternary digits avoid 1."""
    # the 2^k intervals [c, c + 3^-k] with c = sum of 2·3^-i over chosen digits
    starts = np.array([0.0])
    for i in range(1, k + 1):
        starts = np.concatenate([starts, starts + 2 * 3.0 ** (-i)])
    width = 3.0 ** (-k)
    d = np.maximum(0.0, np.maximum(starts - x, x - (starts + width)))
    return float(d.min())


def test_cantor_against_digit_oracle():
    k = 10
    s = cantor_set(k)
    assert len(s) == 2 ** (k + 1)
    for x in s.points[:, 0]:
        assert _ternary_distance_to_cantor_prefix(x, k) <= 3.0 ** (-k) + 1e-12
    alg = cantor_algebra()
    assert hausdorff(s, alg.alpha(s, s)) <= 2 * 3.0 ** (-k)


def test_ifs_contraction_declared():
    for alg in (cantor_algebra(), sierpinski_row_algebra()):
        assert check_contraction(alg, trials=100) == []
        assert alg.epsilon == pytest.approx(1 / 3)


def test_check_contraction_flags_wrong_factor():
    alg = interval_algebra({"g": Contraction(1, lambda u: u, 0.5)})
    assert check_contraction(alg) == ["g"]


def test_banach_flat_system():
    alg = sin_algebra()
    F, G = alg.op("F"), alg.op("G")
    # x = F(a, y), y = G(x), a = 1
    e = FlatSystem({"x": Op(F, ("a", "y")), "y": Op(G, ("x",)), "a": Const(1.0)})
    sol = banach_solve_flat(alg, e, tol=1e-12)
    x = sol["x"]
    assert abs(x - (1.0 + math.sin(x) / 2) / 4) < 1e-11


def test_sin_scheme_residual(sin_scheme):
    alg = sin_algebra()
    phi = sin_scheme.unknowns["phi"]
    f = interpret_rps(alg, sin_scheme, Budget(tol=1e-12))[phi]
    for x in np.linspace(0, 1, 21):
        assert abs(f(x) - (x + f(math.sin(x) / 2)) / 4) < 1e-9


def test_sin_seeds_agree(sin_scheme):
    alg = sin_algebra()
    phi = sin_scheme.unknowns["phi"]
    a = interpret_rps_banach(alg, sin_scheme, seed=lambda f, args: 0.0)[phi]
    b = interpret_rps_banach(alg, sin_scheme, seed=lambda f, args: 1.0)[phi]
    for x in np.linspace(0, 1, 11):
        assert abs(a(x) - b(x)) < 2e-9


def test_nonconvergence_reported():
    alg = ContractingAlgebra({"g": Contraction(1, lambda u: u / 2 + 1, 0.5)},
                             lambda a, b: abs(a - b), 0.0)
    e = FlatSystem({"x": Op(alg.op("g"), ("x",))})
    with pytest.raises(NonConvergenceError):
        alg.solve(e, Budget(fuel=3, tol=1e-12))
    assert alg.solve(e)["x"] == pytest.approx(2.0, abs=1e-11)


def test_tree_distance():
    sig = mk_signature([("F", 2)])
    F = sig["F"]
    a = from_term(App(F, (Param(0.0), Param(1.0))))
    b = from_term(App(F, (Param(0.0), Param(0.5))))
    assert tree_distance(a, a) == 0.0
    assert tree_distance(a, b, dist=lambda u, v: abs(u - v)) == pytest.approx(0.25)
    assert tree_distance(a, param(0.0)) == 1.0
    assert tree_distance(a, b, eps=0.25, dist=lambda u, v: abs(u - v)) == pytest.approx(0.125)
