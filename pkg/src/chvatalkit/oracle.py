"""Brute-force ground truth over explicit integer boxes.

Everything here is plain enumeration.  The one concession to speed is the
integer completion search used for auxiliary integer columns, which walks
the rational shadow of the remaining columns instead of a fixed window.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .chvatal_ast import ACSystem, evaluate_many
from .core_arith import (
    DomainError,
    ceil_rational,
    check_cap,
    denominator_lcm,
    floor_rational,
    mat,
    vec,
)
from .fourier_motzkin import LinearSystem, fm_eliminate_all, fm_feasible

PointSet = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class Box:
    lower: tuple[int, ...]
    upper: tuple[int, ...]

    def __post_init__(self):
        lo = tuple(int(v) for v in self.lower)
        hi = tuple(int(v) for v in self.upper)
        if len(lo) != len(hi) or any(a > b for a, b in zip(lo, hi)):
            raise DomainError("box needs lower <= upper of equal length")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @classmethod
    def cube(cls, lo: int, hi: int, n: int) -> "Box":
        return cls((lo,) * n, (hi,) * n)

    @property
    def dimension(self) -> int:
        return len(self.lower)

    def volume(self) -> int:
        return math.prod(b - a + 1 for a, b in zip(self.lower, self.upper))

    def points(self) -> np.ndarray:
        """All lattice points, lexicographically sorted, as an (N, n) int64 array."""
        check_cap("box_points", self.volume())
        if not self.lower:
            return np.zeros((1, 0), dtype=np.int64)
        axes = [np.arange(a, b + 1, dtype=np.int64) for a, b in zip(self.lower, self.upper)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=1)


# -- membership masks ------------------------------------------------------------------


def _int_rows(A, b) -> tuple[np.ndarray, np.ndarray]:
    rows, rhs = [], []
    for r, bi in zip(A, b):
        d = denominator_lcm(tuple(r) + (bi,))
        rows.append([int(c * d) for c in r])
        rhs.append(ceil_rational(Fraction(bi) * d))
    return np.array(rows, dtype=object).reshape(len(rows), -1), np.array(rhs, dtype=object)


def _linear_mask(A, b, pts: np.ndarray) -> np.ndarray:
    if not len(A):
        return np.ones(len(pts), dtype=bool)
    R, rhs = _int_rows(A, b)
    return np.all(pts.astype(object) @ R.T >= rhs, axis=1).astype(bool)


def _ac_mask(system: ACSystem, pts: np.ndarray) -> np.ndarray:
    ok = np.ones(len(pts), dtype=bool)
    for ineq in system.inequalities:
        num, den = evaluate_many(ineq.function, pts)
        bd = ineq.bound
        ok &= np.asarray(num * bd.denominator <= bd.numerator * den, dtype=bool)
    if system.families:
        for i in np.nonzero(ok)[0]:
            x = [int(v) for v in pts[i]]
            ok[i] = all(f.accepts(x) for f in system.families)
    return ok


def _wh_mask(system, pts: np.ndarray) -> np.ndarray:
    if system.slacks():
        raise DomainError("system still has free slacks; use its disjunction")
    ok = np.ones(len(pts), dtype=bool)
    P = pts.astype(object)
    for r in system.inequalities:
        ok &= np.asarray(P @ np.array(r.coeffs, dtype=object) >= r.rhs.const, dtype=bool)
    for c in system.congruences:
        ok &= np.asarray((P @ np.array(c.coeffs, dtype=object) - c.rhs.const) % c.modulus == 0, dtype=bool)
    return ok


def member_mask(constraints, pts: np.ndarray) -> np.ndarray:
    """Boolean mask of the points (rows of pts) lying in the described set."""
    from .representability import MILPSystem
    from .williams_hooker import WHDisjunction, WHSystem

    pts = np.asarray(pts, dtype=np.int64).reshape(len(pts), -1)
    if isinstance(constraints, ACSystem):
        return _ac_mask(constraints, pts)
    if isinstance(constraints, LinearSystem):
        return _linear_mask(constraints.A, constraints.b, pts)
    if isinstance(constraints, WHSystem):
        return _wh_mask(constraints, pts)
    if isinstance(constraints, WHDisjunction):
        ok = np.zeros(len(pts), dtype=bool)
        for d in constraints.expand():
            ok |= _wh_mask(d, pts)
        return ok
    if isinstance(constraints, MILPSystem):
        comp = MixedCompletion(constraints)
        return np.array([comp.member([int(v) for v in p]) for p in pts], dtype=bool)
    raise TypeError(f"unsupported constraint container {type(constraints).__name__}")


def enumerate_feasible(constraints, box: Box) -> PointSet:
    pts = box.points()
    mask = member_mask(constraints, pts)
    return tuple(tuple(int(v) for v in p) for p in pts[mask])


def project_bruteforce(constraints, box: Box, keep: Sequence[int]) -> PointSet:
    pts = enumerate_feasible(constraints, box)
    return tuple(sorted({tuple(p[j] for j in keep) for p in pts}))


def rational_feasible(system: LinearSystem) -> bool:
    return fm_feasible(system)


# -- integer completion ------------------------------------------------------------


class IntegerCompletion:
    """Decide: exists integer z with C z >= b - A p, for a parameter vector p.

    Bounds on z_k come from the exact rational shadow of the rows on
    (p, z_1..z_k); values are tried in increasing order and the search
    backtracks.  Sides left unbounded by the shadow are capped at ``window``.
    """

    def __init__(self, A_params, C_ints, b, window: int = 64):
        A_params = [vec(r) for r in A_params]
        C_ints = [vec(r) for r in C_ints]
        self.np_ = len(A_params[0]) if A_params else 0
        self.q = len(C_ints[0]) if C_ints else 0
        self.window = window
        rows = [a + c for a, c in zip(A_params, C_ints)] if A_params else C_ints
        self.root = LinearSystem(tuple(rows), vec(b)) if rows else None
        self.levels: list[tuple] = []
        ncols = self.np_ + self.q
        for k in range(self.q + 1):
            if self.root is None:
                self.levels.append(((), ()))
                continue
            drop = list(range(self.np_ + k, ncols))
            out, _ = fm_eliminate_all(self.root, drop)
            self.levels.append((out.A, out.b))

    def exists(self, params: Sequence) -> bool:
        p = vec(params)
        if self.root is None:
            return True
        return self._search(p, ())

    def _rows_hold(self, k: int, prefix) -> bool:
        A, b = self.levels[k]
        return all(sum(c * v for c, v in zip(r, prefix)) >= bi for r, bi in zip(A, b))

    def _search(self, p, z) -> bool:
        k = len(z)
        prefix = p + z
        if k == self.q:
            return self._rows_hold(k, prefix)
        A, b = self.levels[k + 1]
        col = self.np_ + k
        lo = hi = None
        for r, bi in zip(A, b):
            rest = bi - sum(c * v for c, v in zip(r[:col], prefix))
            a = r[col]
            if a > 0:
                v = ceil_rational(rest / a)
                lo = v if lo is None or v > lo else lo
            elif a < 0:
                v = floor_rational(rest / a)
                hi = v if hi is None or v < hi else hi
            elif rest > 0:
                return False
        if lo is None and hi is None:
            candidates = itertools.chain([0], *([i, -i] for i in range(1, self.window + 1)))
        else:
            if lo is None:
                lo = hi - self.window
            if hi is None:
                hi = lo + self.window
            candidates = range(lo, hi + 1)
        return any(self._search(p, z + (Fraction(v),)) for v in candidates)


class MixedCompletion:
    """Membership in the projection of a MILP system onto its target columns."""

    def __init__(self, milp):
        from .representability import MILPSystem

        assert isinstance(milp, MILPSystem)
        tgt = [j for j, r in enumerate(milp.roles) if r == "target"]
        cont = [j for j, r in enumerate(milp.roles) if r == "aux-cont"]
        ints = [j for j, r in enumerate(milp.roles) if r == "aux-int"]
        order = tgt + ints + cont
        A = mat(milp.A) if milp.A else ()
        sys = LinearSystem(tuple(tuple(r[j] for j in order) for r in A), milp.b)
        nt, ni = len(tgt), len(ints)
        if cont:
            sys, _ = fm_eliminate_all(sys, range(nt + ni, nt + ni + len(cont)))
        rows = [r[: nt + ni] for r in sys.A]
        self.nt = nt
        self.completion = IntegerCompletion([r[:nt] for r in rows], [r[nt:] for r in rows], sys.b)

    def member(self, x: Sequence) -> bool:
        if len(x) != self.nt:
            raise DomainError("point arity differs from the number of target columns")
        return self.completion.exists(x)


def integer_feasible(A: Sequence[Sequence], b: Sequence, box: Box | None = None) -> bool:
    """Is {z integer : A z >= b} nonempty?  With a box, plain enumeration inside it."""
    A = mat(A)
    if box is not None:
        return bool(_linear_mask(A, vec(b), box.points()).any())
    return IntegerCompletion([], A, vec(b)).exists(())


def hull_2d(points: PointSet) -> list[tuple[tuple[int, int], int]]:
    """Facets (a, beta) with a.x >= beta of the convex hull of planar integer points.

    Degenerate hulls (a segment or a point) are returned as pairs of opposite
    inequalities plus end caps so the description stays exact.
    """
    pts = sorted(set(points))
    if not pts:
        return []

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    ring = lower[:-1] + upper[:-1]
    if len(ring) == 1:
        (x, y), = ring
        return [((1, 0), x), ((-1, 0), -x), ((0, 1), y), ((0, -1), -y)]
    facets = []
    if len(ring) == 2:
        p, q = ring
        d = (q[0] - p[0], q[1] - p[1])
        nrm = (-d[1], d[0])
        facets.append((nrm, nrm[0] * p[0] + nrm[1] * p[1]))
        facets.append(((-nrm[0], -nrm[1]), -(nrm[0] * p[0] + nrm[1] * p[1])))
        facets.append((d, d[0] * p[0] + d[1] * p[1]))
        facets.append(((-d[0], -d[1]), -(d[0] * q[0] + d[1] * q[1])))
        return facets
    for i in range(len(ring)):
        p, q = ring[i], ring[(i + 1) % len(ring)]
        # counter-clockwise ring: interior lies to the left of p->q
        nrm = (-(q[1] - p[1]), q[0] - p[0])
        facets.append((nrm, nrm[0] * p[0] + nrm[1] * p[1]))
    return facets


def polygon_vertices(A: Sequence[Sequence], b: Sequence) -> list[tuple[Fraction, Fraction]]:
    """Vertices of a bounded planar polyhedron {x : A x >= b}, by pairwise line intersection."""
    A = mat(A)
    bb = vec(b)
    out = set()
    for i, j in itertools.combinations(range(len(A)), 2):
        (a1, a2), (c1, c2) = A[i], A[j]
        det = a1 * c2 - a2 * c1
        if det == 0:
            continue
        x = (bb[i] * c2 - a2 * bb[j]) / det
        y = (a1 * bb[j] - bb[i] * c1) / det
        if all(r[0] * x + r[1] * y >= v for r, v in zip(A, bb)):
            out.add((x, y))
    return sorted(out)
