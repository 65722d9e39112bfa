"""Shared hypothesis strategies and small reference evaluators used as test oracles."""

from __future__ import annotations

import itertools
import math
import os
from fractions import Fraction

from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from chvatalkit.chvatal_ast import ACFunction, Ceil, Leaf, Scale, Sum

settings.register_profile(
    "default",
    max_examples=200,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

DATA = os.path.join(os.path.dirname(__file__), "data")


def data_path(name: str) -> str:
    return os.path.join(DATA, name)


def small_rationals(bound: int = 5, denom: int = 4):
    return st.builds(
        Fraction,
        st.integers(-bound * denom, bound * denom),
        st.integers(1, denom),
    )


def nonneg_rationals(bound: int = 3, denom: int = 4):
    return st.builds(Fraction, st.integers(0, bound * denom), st.integers(1, denom))


def leaves(n: int):
    return st.builds(
        lambda cs, k: Leaf(tuple(cs), k),
        st.lists(small_rationals(), min_size=n, max_size=n),
        small_rationals(),
    )


def trees(n: int, max_leaves: int = 6):
    """Random affine Chvátal trees of arity n."""
    return st.recursive(
        leaves(n),
        lambda kids: st.one_of(
            st.builds(Ceil, kids),
            st.builds(Scale, nonneg_rationals(), kids),
            st.builds(Sum, nonneg_rationals(), kids, nonneg_rationals(), kids),
        ),
        max_leaves=max_leaves,
    ).map(lambda node: ACFunction(node, n))


def points(n: int, bound: int = 6):
    return st.lists(small_rationals(bound), min_size=n, max_size=n).map(tuple)


def int_points(n: int, bound: int = 6):
    return st.lists(st.integers(-bound, bound), min_size=n, max_size=n).map(tuple)


def ref_eval(node, x) -> Fraction:
    """Straight recursive evaluation with math.ceil (exact on Fractions)."""
    if isinstance(node, ACFunction):
        node = node.root
    if isinstance(node, Leaf):
        return sum((Fraction(c) * Fraction(v) for c, v in zip(node.coeffs, x)), Fraction(node.const))
    if isinstance(node, Ceil):
        return Fraction(math.ceil(ref_eval(node.child, x)))
    if isinstance(node, Scale):
        return node.factor * ref_eval(node.child, x)
    return node.a * ref_eval(node.left, x) + node.b * ref_eval(node.right, x)


def ref_ceil_count(node) -> int:
    if isinstance(node, ACFunction):
        node = node.root
    if isinstance(node, Leaf):
        return 0
    if isinstance(node, Ceil):
        return 1 + ref_ceil_count(node.child)
    if isinstance(node, Scale):
        return ref_ceil_count(node.child)
    return ref_ceil_count(node.left) + ref_ceil_count(node.right)


def planar_lp_feasible(A, b) -> bool:
    """Is {x in R^2 : A x >= b} nonempty?

    A nonempty planar polyhedron contains a vertex, the origin, or a point
    where one of its boundary lines meets a coordinate axis.
    """
    rows = [(tuple(Fraction(c) for c in r), Fraction(v)) for r, v in zip(A, b)]
    cands = [(Fraction(0), Fraction(0))]
    for (r1, b1), (r2, b2) in itertools.combinations(rows, 2):
        det = r1[0] * r2[1] - r1[1] * r2[0]
        if det:
            cands.append(((b1 * r2[1] - r1[1] * b2) / det, (r1[0] * b2 - b1 * r2[0]) / det))
    for r, v in rows:
        for k in range(2):
            if r[k]:
                p = [Fraction(0), Fraction(0)]
                p[k] = v / r[k]
                cands.append(tuple(p))
    return any(all(r[0] * p[0] + r[1] * p[1] >= v for r, v in rows) for p in cands)


def planar_int_feasible(A, b, window: int = 40) -> bool:
    """Is there an integer x in R^2 with A x >= b?  Sweeps x1, solves x2 exactly."""
    for x1 in range(-window, window + 1):
        lo, hi = -window, window
        ok = True
        for r, v in zip(A, b):
            rest = Fraction(v) - Fraction(r[0]) * x1
            if r[1] > 0:
                lo = max(lo, math.ceil(rest / Fraction(r[1])))
            elif r[1] < 0:
                hi = min(hi, math.floor(rest / Fraction(r[1])))
            elif rest > 0:
                ok = False
        if ok and lo <= hi:
            return True
    return False
