import itertools
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chvatalkit.chvatal_ast import ACSystem
from chvatalkit.cli import parse
from chvatalkit.core_arith import CapacityError, DomainError
from chvatalkit.fourier_motzkin import LinearSystem
from chvatalkit.oracle import (
    Box,
    enumerate_feasible,
    hull_2d,
    integer_feasible,
    polygon_vertices,
    project_bruteforce,
    rational_feasible,
)
from chvatalkit.representability import MILPSystem
from chvatalkit.williams_hooker import WHDisjunction, WHSystem

from conftest import data_path, planar_int_feasible, planar_lp_feasible

GAP = [
    [-1, F(1, 2), F(-1, 10)],
    [1, F(-1, 4), 0],
    [0, -1, 1],
    [0, 0, 1],
    [0, 0, -1],
]


def load(name):
    with open(data_path(name)) as fh:
        return parse(fh.read())


def test_box_validation():
    with pytest.raises(DomainError):
        Box((2,), (1,))
    assert Box.cube(0, 2, 2).volume() == 9


def test_box_cap(monkeypatch):
    monkeypatch.setenv("CHVATALKIT_CAPS", "box_points=100")
    with pytest.raises(CapacityError):
        Box.cube(0, 10, 2).points()


def test_batch_ac_set():
    pts = enumerate_feasible(load("batch_ac.sys"), Box((-10,), (250,)))
    assert [p[0] for p in pts] == [0] + list(range(50, 201))


def test_empty_system_keeps_all_points():
    assert enumerate_feasible(ACSystem((), 1), Box((0,), (2,))) == ((0,), (1,), (2,))


def test_strip_has_no_lattice_points():
    s = LinearSystem(((3, 2), (-3, -2), (3, -2), (-3, 2)), (1, -4, -1, -2))
    assert enumerate_feasible(s, Box.cube(-10, 10, 2)) == ()
    assert rational_feasible(s)


def test_two_stage_projection_onto_x2():
    s = WHSystem.build([(2, 1), (-5, -2), (-1, 1)], [13, -30, 5])
    xs = {p[0] for p in project_bruteforce(s, Box.cube(-20, 20, 2), [1])}
    assert 9 in xs and not xs & {5, 6, 7, 8}


def test_projection_onto_everything_is_identity():
    s = load("batch_ac.sys")
    box = Box((-10,), (250,))
    assert project_bruteforce(s, box, [0]) == enumerate_feasible(s, box)


def test_two_ray_set_projection():
    E = WHDisjunction(
        None,
        disjuncts=(
            WHSystem.build([(1, 0), (-2, 1), (2, -1)], [0, 0, 0]),
            WHSystem.build([(0, 1), (1, -2), (-1, 2)], [0, 0, 0]),
        ),
    )
    got = project_bruteforce(E, Box.cube(0, 6, 2), [0])
    want = sorted({(x,) for x, y in itertools.product(range(7), repeat=2) if y == 2 * x or x == 2 * y})
    assert list(got) == want == [(0,), (1,), (2,), (3,), (4,), (6,)]


@pytest.mark.parametrize(
    "A,b,want",
    [
        (((2,), (-2,)), (1, -3), True),
        (((1,), (-1,)), (1, 0), False),
        (tuple(map(tuple, GAP)), (0, 0, 0, 1, -1), True),
    ],
)
def test_rational_feasible_examples(A, b, want):
    assert rational_feasible(LinearSystem(A, b)) == want


def test_milp_membership():
    pts = enumerate_feasible(load("batch_milp.sys"), Box((-5,), (205,)))
    assert [p[0] for p in pts] == [0] + list(range(50, 201))


def test_hull_of_square_corners():
    facets = hull_2d(((0, 0), (1, 0), (0, 1), (1, 1)))
    assert sorted(polygon_vertices([a for a, _ in facets], [v for _, v in facets])) == [(0, 0), (0, 1), (1, 0), (1, 1)]


# -- properties --------------------------------------------------------------------

coef = st.integers(-3, 3)
systems2 = st.integers(1, 4).flatmap(
    lambda m: st.tuples(
        st.lists(st.lists(coef, min_size=2, max_size=2), min_size=m, max_size=m),
        st.lists(st.integers(-5, 5), min_size=m, max_size=m),
    )
)
BOX2 = Box.cube(-5, 5, 2)


@given(systems2)
def test_enumeration_matches_loop_and_is_deterministic(Ab):
    A, b = Ab
    s = LinearSystem(tuple(map(tuple, A)), tuple(b))
    got = enumerate_feasible(s, BOX2)
    want = tuple(
        p for p in itertools.product(range(-5, 6), repeat=2)
        if all(r[0] * p[0] + r[1] * p[1] >= v for r, v in zip(A, b))
    )
    assert got == want
    assert enumerate_feasible(s, BOX2) == got


@given(systems2)
def test_lattice_points_imply_rational_feasibility(Ab):
    A, b = Ab
    s = LinearSystem(tuple(map(tuple, A)), tuple(b))
    if enumerate_feasible(s, BOX2):
        assert rational_feasible(s)
    assert rational_feasible(s) == planar_lp_feasible(A, b)


@given(systems2)
def test_integer_feasible_matches_sweep(Ab):
    A, b = Ab
    assert integer_feasible(A, b) == planar_int_feasible(A, b)


@given(st.lists(st.tuples(st.integers(-4, 4), st.integers(-4, 4)), min_size=1, max_size=8))
def test_hull_contains_points_with_lattice_vertices(pts):
    facets = hull_2d(tuple(pts))
    A = [a for a, _ in facets]
    b = [v for _, v in facets]
    for p in pts:
        assert all(a[0] * p[0] + a[1] * p[1] >= v for a, v in facets)
    assert set(polygon_vertices(A, b)) <= set(pts)


@given(st.integers(-3, 3), st.integers(1, 3), st.integers(-8, 8))
def test_milp_projection_matches_loop(lo, width, x):
    # x = 2 y + t with integer y in [lo, lo + width] and continuous t in [0, 1/2]
    m = MILPSystem(
        ((1, -2, -1), (-1, 2, 1), (0, 0, 1), (0, 0, -1), (0, 1, 0), (0, -1, 0)),
        (0, 0, 0, F(-1, 2), lo, -(lo + width)),
        ("target", "aux-int", "aux-cont"),
    )
    want = any(0 <= x - 2 * y <= F(1, 2) for y in range(lo, lo + width + 1))
    assert bool(enumerate_feasible(m, Box((x,), (x,)))) == want
