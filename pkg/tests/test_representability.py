from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from chvatalkit.chvatal_ast import (
    ACFunction,
    ACInequality,
    ACSystem,
    Ceil,
    Leaf,
    Sum,
    affine,
    ceiling_count,
    evaluate,
    expand,
)
from chvatalkit.cli import parse
from chvatalkit.core_arith import DomainError, denominator_lcm
from chvatalkit.fourier_motzkin import LinearSystem, fm_eliminate
from chvatalkit.representability import (
    MILPSystem,
    lift_to_milp,
    milp_to_ac,
    reduce_ceiling_once,
    ves_eliminate,
)

from conftest import data_path, trees


def L(*coeffs, const=0):
    return Leaf(tuple(F(c) for c in coeffs), F(const))


def load(name):
    with open(data_path(name)) as fh:
        return parse(fh.read())


def ge_rows(system: MILPSystem):
    return {(tuple(r), v) for r, v in zip(system.A, system.b)}


# -- lifting ----------------------------------------------------------------------


def test_worked_example_first_reduction():
    s = reduce_ceiling_once(load("lift.sys"))
    assert s.dimension == 5 and s.integer_vars == {4}
    first, second = s.inequalities
    # ceil(0.5 x3) - 0.8 x4 - y1 <= 0 and y1 + ceil(3 x1 + 2.5 x2) <= 0
    assert expand(first.function) == expand(Sum(1, Ceil(L(0, 0, F(1, 2), 0, 0)), 1, L(0, 0, 0, F(-4, 5), -1)))
    assert expand(second.function) == expand(Sum(1, Ceil(L(3, F(5, 2), 0, 0, 0)), 1, L(0, 0, 0, 0, 1)))
    assert first.bound == second.bound == 0


def test_worked_example_full_lift():
    res = lift_to_milp(load("lift.sys"))
    m = res.milp
    assert m.roles == ("target",) * 4 + ("aux-int",) * 3
    # 0.5 x3 - y2 <= 0, -0.8 x4 - y1 + y2 <= 0, 3 x1 + 2.5 x2 - y3 <= 0, y1 + y3 <= 0
    want = {
        ((0, 0, F(-1, 2), 0, 0, 1, 0), 0),
        ((0, 0, 0, F(4, 5), 1, -1, 0), 0),
        ((-3, F(-5, 2), 0, 0, 0, 0, 1), 0),
        ((0, 0, 0, 0, -1, 0, -1), 0),
    }
    assert ge_rows(m) == want
    assert len(res.introduced) == 3


def test_single_ceiling_reduction():
    s = ACSystem((ACInequality(ACFunction(Ceil(L(1))), F(2)),), 1)
    out = reduce_ceiling_once(s)
    assert [ceiling_count(q.function) for q in out.inequalities] == [0, 0]
    assert [q.bound for q in out.inequalities] == [0, 2]
    assert evaluate(out.inequalities[0].function, [F(3, 2), 2]) == F(-1, 2)
    assert evaluate(out.inequalities[1].function, [F(3, 2), 2]) == 2


def test_reduction_needs_a_ceiling():
    with pytest.raises(DomainError):
        reduce_ceiling_once(ACSystem((ACInequality(affine([1]), F(0)),), 1))


def test_pure_affine_lift_is_identity():
    s = ACSystem((ACInequality(affine([1, -2], 3), F(4)),), 2)
    m = lift_to_milp(s).milp
    assert m.roles == ("target", "target")
    assert ge_rows(m) == {((-1, 2), -1)}


def test_integer_variable_gets_one_copy():
    s = ACSystem((ACInequality(affine([1, 1]), F(4)),), 2, frozenset({1}))
    res = lift_to_milp(s)
    assert res.milp.roles == ("target", "target", "aux-int")
    assert len(res.milp.A) == 3 and len(res.introduced) == 1
    assert ((0, 1, -1), 0) in ge_rows(res.milp) and ((0, -1, 1), 0) in ge_rows(res.milp)


# -- projecting back --------------------------------------------------------------


def test_batch_size_projection():
    ac = milp_to_ac(load("batch_milp.sys"))
    assert ac.integer_vars == frozenset() and ac.dimension == 1
    got = [x for x in range(-60, 261) if ac.contains([x])]
    assert got == [0] + list(range(50, 201))
    for x in (F(1, 2), F(99, 2), F(401, 2)):
        assert not ac.contains([x])
    assert ac.contains([F(101, 2)])


def test_monoid_projection():
    # b = 2 z1 + 3 z2 with z >= 0 integral
    m = MILPSystem(
        ((1, -2, -3), (-1, 2, 3), (0, 1, 0), (0, 0, 1)),
        (0, 0, 0, 0),
        ("target", "aux-int", "aux-int"),
    )
    ac = milp_to_ac(m)
    assert [b for b in range(-2, 11) if ac.contains([b])] == [0] + list(range(2, 11))
    for q in ac.inequalities:
        assert q.bound == 0 and evaluate(q.function, [0]) == 0


def test_no_integer_columns_is_plain_fm():
    m = MILPSystem(((1, 1), (1, -1)), (0, -2), ("target", "aux-cont"))
    ac = milp_to_ac(m)
    assert ac.total_ceiling_count() == 0
    assert [x for x in range(-5, 5) if ac.contains([x])] == list(range(-1, 5))


# -- variable elimination ----------------------------------------------------------


def test_ves_continuous_matches_fm():
    s = ACSystem(
        (ACInequality(affine([1, 1]), F(4)), ACInequality(affine([-1, 2]), F(1)), ACInequality(affine([0, -1]), F(3))),
        2,
    )
    out = ves_eliminate(s, 0)
    assert out.total_ceiling_count() == 0
    lin, _ = fm_eliminate(LinearSystem(((-1, -1), (1, -2), (0, 1)), (-4, -1, -3)), 0)
    for k in range(-20, 21):
        y = F(k, 3)
        assert out.contains([y]) == lin.contains([0, y])


def test_ves_integer_example():
    # 2 x1 + x2 >= 13, -5 x1 - 2 x2 >= -30, -x1 + x2 >= 5 with x1 integral
    rows = [((-2, -1), -13), ((5, 2), 30), ((1, -1), -5)]
    s = ACSystem(tuple(ACInequality(affine(r), F(v)) for r, v in rows), 2, frozenset({0, 1}))
    out = ves_eliminate(s, 0)
    assert out.dimension == 1

    def brute(x2):
        return any(all(r[0] * x1 + r[1] * x2 <= v for r, v in rows) for x1 in range(-20, 21))

    assert brute(9) and out.contains([9])
    for x2 in (5, 6, 7, 8):
        assert not brute(x2) and not out.contains([x2])
    assert [x for x in range(-10, 30) if out.contains([x])] == [x for x in range(-10, 30) if brute(x)]


def test_ves_last_variable():
    out = ves_eliminate(load("batch_ac.sys"), 0)
    assert out.dimension == 0 and out.contains([])


def test_ves_rejects_bad_index():
    with pytest.raises(DomainError):
        ves_eliminate(load("batch_ac.sys"), 3)


# -- oracles and properties ----------------------------------------------------------


def lifted_member(m: MILPSystem, x, window=15) -> bool:
    """Brute force over integer auxiliaries in a window; targets are fixed to x."""
    tgt = [j for j, r in enumerate(m.roles) if r == "target"]
    aux = [j for j, r in enumerate(m.roles) if r == "aux-int"]
    assert len(tgt) + len(aux) == m.ncols
    A = np.array(m.A, dtype=object).reshape(len(m.A), -1)
    rest = np.array(m.b, dtype=object) - A[:, tgt] @ np.array([F(v) for v in x], dtype=object)
    if not aux:
        return bool(np.all(rest <= 0))
    d = denominator_lcm([*A[:, aux].ravel(), *rest])
    Ay = (A[:, aux] * d).astype(np.int64)
    r = (rest * d).astype(np.int64)
    axis = np.arange(-window, window + 1, dtype=np.int64)
    Y = np.stack([g.ravel() for g in np.meshgrid(*[axis] * len(aux), indexing="ij")], axis=1)
    return bool(np.any(np.all(Y @ Ay.T >= r, axis=1)))


def ref_member(system: ACSystem, x) -> bool:
    return all(evaluate(q.function, x) <= q.bound for q in system.inequalities)


def small_systems(n):
    ineq = st.builds(
        lambda f, b: ACInequality(f, F(b)),
        trees(n, max_leaves=3).filter(lambda f: ceiling_count(f) <= 2),
        st.integers(-3, 3),
    )
    return st.lists(ineq, min_size=1, max_size=2).filter(
        lambda qs: sum(ceiling_count(q.function) for q in qs) <= 2
    )


HALF_GRID = [(F(i, 2), F(j, 2)) for i in range(-4, 5) for j in range(-4, 5)]


@given(small_systems(2), st.sets(st.integers(0, 1)))
def test_lift_is_exact(ineqs, ints):
    s = ACSystem(tuple(ineqs), 2, frozenset(ints))
    assume(s.total_ceiling_count() + len(ints) <= 3)
    m = lift_to_milp(s).milp
    assert all(r != "aux-cont" for r in m.roles)
    for x in HALF_GRID:
        if any(x[j].denominator != 1 for j in ints):
            continue
        assert lifted_member(m, x) == ref_member(s, x)


@given(small_systems(2))
def test_each_reduction_lowers_ceiling_count(ineqs):
    s = ACSystem(tuple(ineqs), 2)
    assume(s.total_ceiling_count() > 0)
    while s.total_ceiling_count():
        before = s.total_ceiling_count()
        s = reduce_ceiling_once(s)
        assert s.total_ceiling_count() < before


def one_dim_systems():
    ineq = st.builds(
        lambda c, k, b: ACInequality(ACFunction(Sum(1, Ceil(L(c[0], const=k)), 1, L(c[1])), 1), F(b)),
        st.tuples(st.integers(-3, 3).map(lambda v: F(v, 2)), st.integers(-2, 2).map(lambda v: F(v, 3))),
        st.integers(-1, 1).map(lambda v: F(v, 2)),
        st.integers(-4, 4),
    )
    return st.lists(ineq, min_size=1, max_size=2)


@given(one_dim_systems())
def test_lift_then_project_roundtrip(ineqs):
    s = ACSystem(tuple(ineqs), 1)
    back = milp_to_ac(lift_to_milp(s).milp)
    for k in range(-12, 13):
        x = [F(k, 2)]
        assert back.contains(x) == ref_member(s, x)


def two_var_systems():
    row = st.tuples(st.integers(-3, 3), st.integers(-3, 3), st.integers(-6, 6))
    return st.lists(row, min_size=1, max_size=3)


@given(two_var_systems(), st.sampled_from([0, 1]), st.booleans())
def test_ves_projection_is_exact(rows, var, ceil_first):
    ineqs = []
    for k, (a, c, v) in enumerate(rows):
        f = affine([F(a, 2), c])
        if ceil_first and k == 0:
            f = ACFunction(Ceil(f.root), 2)
        ineqs.append(ACInequality(f, F(v)))
    s = ACSystem(tuple(ineqs), 2, frozenset({0, 1}))
    out = ves_eliminate(s, var)
    keep = 1 - var
    for y in range(-6, 7):
        def at(t):
            p = [0, 0]
            p[var], p[keep] = t, y
            return p

        brute = any(ref_member(s, at(t)) for t in range(-60, 61))
        assert out.contains([y]) == brute
