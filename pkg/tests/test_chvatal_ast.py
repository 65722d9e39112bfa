from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from chvatalkit.chvatal_ast import (
    CEIL_PATTERNS,
    ACFunction,
    ACInequality,
    ACSystem,
    Affine,
    Ceil,
    Leaf,
    Scale,
    Split,
    Sum,
    affine,
    carrier,
    ceiling_count,
    ceilingize,
    compose_affine,
    decompose,
    depth,
    evaluate,
    evaluate_many,
    expand,
    format_function,
    from_json,
    to_json,
)
from chvatalkit.core_arith import DomainError

from conftest import int_points, points, ref_ceil_count, ref_eval, small_rationals, trees


def L(*coeffs, const=0):
    return Leaf(tuple(F(c) for c in coeffs), F(const))


# g_hat = 3 ceil(x1 + 5 ceil(2 x1 - x2 + 7/2)) + ceil(-2 x3)
G_HAT = ACFunction(Sum(F(3), Ceil(Sum(F(1), L(1, 0, 0), F(5), Ceil(L(2, -1, 0, const=F(7, 2))))), F(1), Ceil(L(0, 0, -2))))
# f_hat = 3 ceil(x1 + 5 ceil(2 x1 + x2)) + ceil(2 x3)
F_INNER = Sum(F(1), L(1, 0, 0), F(5), Ceil(L(2, 1, 0)))
F_HAT = ACFunction(Sum(F(3), Ceil(F_INNER), F(1), Ceil(L(0, 0, 2))))
BATCH = ACFunction(Sum(F(1), L(F(1, 200)), F(1), Ceil(L(F(-1, 50)))))


def test_evaluate_batch_function():
    assert evaluate(BATCH, [100]) == F(-3, 2)
    assert evaluate(BATCH, [30]) == F(3, 20)


def test_evaluate_homogeneous_at_origin():
    assert evaluate(F_HAT, [0, 0, 0]) == 0


def test_evaluate_rejects_wrong_arity():
    with pytest.raises(DomainError):
        evaluate(F_HAT, [0, 0])


def test_ceiling_count_and_depth():
    assert ceiling_count(G_HAT) == 3
    assert depth(G_HAT) == 4
    assert ceiling_count(L(1)) == 0 and depth(L(1)) == 0
    assert ceiling_count(Ceil(Ceil(L(1)))) == 2
    assert depth(Ceil(L(1))) == 1


def test_carrier_examples():
    # ceil(ceil(x1 + x2) + 3 x2) + x1 -> 2 x1 + 4 x2
    f = Sum(F(1), Ceil(Sum(F(1), Ceil(L(1, 1)), F(3), L(0, 1))), F(1), L(1, 0))
    assert carrier(f).root == L(2, 4)
    assert carrier(L(1, 2, const=3)).root == L(1, 2, const=3)
    assert carrier(G_HAT).root == L(33, -15, -2, const=F(105, 2))


def test_decompose_examples():
    g = L(1, 2)
    d = decompose(Ceil(g))
    assert isinstance(d, Split) and d.gamma == 1 and d.g1.root == g
    assert expand(d.g2) == expand(L(0, 0))
    a = decompose(L(2, const=1))
    assert isinstance(a, Affine) and a.function.root == L(2, const=1)
    s = decompose(F_HAT)
    assert s.gamma == 3 and s.g1.root == F_INNER
    assert expand(s.g2) == expand(Ceil(L(0, 0, 2)))
    assert ceiling_count(s.g1) + ceiling_count(s.g2) + 1 <= 3


def test_ceilingize_examples():
    g = affine([2, 4])
    assert ceilingize(g, "whole").root == Ceil(L(2, 4))
    assert expand(ceilingize(g, "per-term")) == expand(Sum(F(1), Ceil(L(2, 0)), F(1), Ceil(L(0, 4))))
    for p in CEIL_PATTERNS:
        assert ceilingize(affine([0, 0]), p).root == L(0, 0)


def test_ceilingize_rejects_foreign_template():
    with pytest.raises(DomainError):
        ceilingize(affine([2, 4]), ACFunction(Ceil(L(2, 3))))


def test_compose_examples():
    f = ACFunction(Ceil(L(1)))
    g = compose_affine(f, [[-3, -2]], [5])
    assert g.root == Ceil(L(-3, -2, const=5))
    h = ACFunction(Ceil(L(1, 2, 0, F(1, 10))))
    ident = [[1 if i == j else 0 for j in range(4)] for i in range(4)]
    assert compose_affine(h, ident).root == h.root
    assert ceiling_count(compose_affine(affine([1, 1]), [[1, 0], [0, 1]])) == 0


def test_compose_rejects_mismatch():
    with pytest.raises(DomainError):
        compose_affine(affine([1, 1]), [[1, 0]])


def test_negative_weights_rejected():
    with pytest.raises(DomainError):
        Scale(F(-1), L(1))
    with pytest.raises(DomainError):
        Sum(F(1), L(1), F(-1), L(1))


def test_system_membership():
    sys_ = ACSystem((ACInequality(BATCH, F(0)), ACInequality(affine([1]), F(200))), 1, frozenset({0}))
    assert [x for x in range(-5, 260) if sys_.contains([x])] == [0] + list(range(50, 201))


def test_format_function_text():
    assert format_function(BATCH, ["x"]) == "(1/200 x) + ceil(-1/50 x)"


# -- properties ----------------------------------------------------------------------


@given(trees(3), points(3))
def test_evaluate_matches_reference(f, x):
    assert evaluate(f, x) == ref_eval(f, x)
    assert ceiling_count(f) == ref_ceil_count(f)


@given(trees(2), st.lists(int_points(2, 30), min_size=1, max_size=8))
def test_vectorised_evaluation(f, pts):
    num, den = evaluate_many(f, np.array(pts, dtype=np.int64))
    assert [F(int(n), den) for n in num] == [evaluate(f, p) for p in pts]


@given(trees(3), points(3))
def test_decompose_reconstructs(f, x):
    d = decompose(f)
    if ceiling_count(f) == 0:
        assert isinstance(d, Affine)
        assert evaluate(d.function, x) == evaluate(f, x)
        return
    assert isinstance(d, Split) and d.gamma > 0
    assert ceiling_count(d.g1) + ceiling_count(d.g2) + 1 <= ceiling_count(f)
    assert evaluate(f, x) == d.gamma * ref_eval(Ceil(d.g1.root), x) + evaluate(d.g2, x)


@given(st.lists(small_rationals(), min_size=3, max_size=3), small_rationals(), st.sampled_from(CEIL_PATTERNS))
def test_carrier_of_ceilingize(coeffs, const, pattern):
    g = affine(coeffs, const)
    assert carrier(ceilingize(g, pattern)).root == g.root


@given(trees(2), st.lists(st.lists(small_rationals(), min_size=3, max_size=3), min_size=2, max_size=2),
       st.lists(small_rationals(), min_size=2, max_size=2), points(3))
def test_compose_pointwise(f, T, d, x):
    g = compose_affine(f, T, d)
    y = [sum(F(a) * b for a, b in zip(row, x)) + di for row, di in zip(T, d)]
    assert evaluate(g, x) == evaluate(f, y)


def _ceil_args_integral(node, x) -> bool:
    if isinstance(node, Leaf):
        return True
    if isinstance(node, Ceil):
        return ref_eval(node.child, x).denominator == 1 and _ceil_args_integral(node.child, x)
    if isinstance(node, Scale):
        return _ceil_args_integral(node.child, x)
    return _ceil_args_integral(node.left, x) and _ceil_args_integral(node.right, x)


@given(trees(2), int_points(2))
def test_integral_ceiling_arguments_agree_with_carrier(f, x):
    if _ceil_args_integral(f.root, x):
        assert evaluate(f, x) == evaluate(carrier(f), x)


def _nonneg(node):
    if isinstance(node, Leaf):
        return Leaf(tuple(abs(c) for c in node.coeffs), node.const)
    if isinstance(node, Ceil):
        return Ceil(_nonneg(node.child))
    if isinstance(node, Scale):
        return Scale(node.factor, _nonneg(node.child))
    return Sum(node.a, _nonneg(node.left), node.b, _nonneg(node.right))


@given(trees(2), int_points(2), st.lists(st.integers(0, 4), min_size=2, max_size=2))
def test_monotone_for_nonnegative_leaves(f, x, step):
    g = _nonneg(f.root)
    y = [a + b for a, b in zip(x, step)]
    assert evaluate(g, x) <= evaluate(g, y)


@given(trees(3))
def test_json_roundtrip(f):
    assert from_json(to_json(f)).root == f.root
