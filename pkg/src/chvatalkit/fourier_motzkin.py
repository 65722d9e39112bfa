"""Fourier-Motzkin elimination over exact rationals.

Systems are read as A x >= b.  Every output row carries the nonnegative
multiplier vector over the rows of the system it descends from, so a chain
of eliminations yields a certificate for each derived row.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .chvatal_ast import (
    ACFunction,
    ACInequality,
    ACSystem,
    Ceil,
    Leaf,
    Scale,
    Sum,
    integer_valued,
)
from .core_arith import (
    ONE,
    ZERO,
    DomainError,
    RationalMatrix,
    RationalVector,
    check_cap,
    dot,
    is_integral,
    mat,
    nullspace,
    primitive,
    rank,
    unit,
    vec,
    vec_mat,
)


@dataclass(frozen=True)
class LinearSystem:
    """A x >= b.

    With ``symbolic=True`` the right-hand side of row i is the linear form
    ``history[i] . (b_1..b_m)`` in parameters of the root system; ``b`` is then
    ignored.  ``history`` defaults to the identity (each row is itself).
    """

    A: RationalMatrix
    b: RationalVector
    symbolic: bool = False
    history: tuple[RationalVector, ...] | None = None
    eliminated: tuple[int, ...] = ()
    ncols: int = -1  # needed when A has no rows

    def __post_init__(self):
        A = mat(self.A) if self.A else ()
        object.__setattr__(self, "A", A)
        if A:
            if self.ncols not in (-1, len(A[0])):
                raise DomainError("ncols differs from the width of A")
            object.__setattr__(self, "ncols", len(A[0]))
        elif self.ncols == -1:
            object.__setattr__(self, "ncols", 0)
        b = vec(self.b) if len(self.b) else (ZERO,) * len(A)
        object.__setattr__(self, "b", b)
        if len(b) != len(A):
            raise DomainError("row count of A differs from length of b")
        if self.history is None:
            object.__setattr__(self, "history", tuple(unit(len(A), i) for i in range(len(A))))
        elif len(self.history) != len(A):
            raise DomainError("history length differs from row count")

    @classmethod
    def parametric(cls, A) -> "LinearSystem":
        A = mat(A)
        return cls(A, (ZERO,) * len(A), symbolic=True)

    @property
    def m(self) -> int:
        return len(self.A)

    @property
    def n(self) -> int:
        return self.ncols

    def rhs_forms(self) -> tuple[RationalVector, ...]:
        return self.history

    def contains(self, x: Sequence) -> bool:
        if self.symbolic:
            raise DomainError("symbolic system has no numeric right-hand side")
        xs = vec(x)
        return all(dot(r, xs) >= bi for r, bi in zip(self.A, self.b))

    def instantiate(self, b_root: Sequence) -> "LinearSystem":
        """Numeric system obtained by substituting root parameters."""
        if not self.symbolic:
            return self
        bb = vec(b_root)
        return LinearSystem(self.A, tuple(dot(u, bb) for u in self.history),
                            history=self.history, eliminated=self.eliminated, ncols=self.ncols)


@dataclass(frozen=True)
class FMCertificate:
    """Nonnegative multipliers over the root rows, one per output row."""

    multipliers: tuple[RationalVector, ...]
    eliminated_order: tuple[int, ...]

    def verify(self, root: LinearSystem, out: LinearSystem) -> bool:
        if len(self.multipliers) != out.m:
            return False
        for u, row, rhs in zip(self.multipliers, out.A, out.b):
            if any(c < 0 for c in u):
                return False
            if vec_mat(u, root.A) != row:
                return False
            if any(row[j] != 0 for j in self.eliminated_order):
                return False
            if not root.symbolic and dot(u, root.b) != rhs:
                return False
        return True


def _partition(A: Sequence[RationalVector], var: int) -> tuple[list[int], list[int], list[int]]:
    pos = [i for i, r in enumerate(A) if r[var] > 0]
    neg = [i for i, r in enumerate(A) if r[var] < 0]
    zer = [i for i, r in enumerate(A) if r[var] == 0]
    return pos, neg, zer


def fm_eliminate(system: LinearSystem, var: int) -> tuple[LinearSystem, FMCertificate]:
    """Eliminate one variable; the output keeps the arity with a zero column.

    Rows are scaled so the eliminated coefficient is +-1, paired over
    positive x negative rows, and followed by the rows that lack the variable.
    Exact duplicates and trivially true zero rows are dropped; rows that are
    merely redundant over the polyhedron are kept.
    """
    if not 0 <= var < system.n:
        raise DomainError(f"variable index {var} out of range")
    A, b, H = system.A, system.b, system.history
    pos, neg, zer = _partition(A, var)
    check_cap("fm_rows", len(pos) * len(neg) + len(zer))
    rows: list[tuple[RationalVector, Fraction, RationalVector]] = []
    for p in pos:
        sp = 1 / A[p][var]
        for q in neg:
            sq = 1 / -A[q][var]
            coeffs = tuple(sp * x + sq * y for x, y in zip(A[p], A[q]))
            rows.append((coeffs, sp * b[p] + sq * b[q], tuple(sp * x + sq * y for x, y in zip(H[p], H[q]))))
    for z in zer:
        rows.append((A[z], b[z], H[z]))
    seen = set()
    kept = []
    for coeffs, rhs, u in rows:
        if all(c == 0 for c in coeffs):
            if system.symbolic and all(c == 0 for c in u):
                continue
            if not system.symbolic and rhs <= 0:
                continue
        key = (coeffs, u if system.symbolic else rhs)
        if key in seen:
            continue
        seen.add(key)
        kept.append((coeffs, rhs, u))
    out = LinearSystem(
        tuple(r[0] for r in kept) or (),
        tuple(r[1] for r in kept),
        symbolic=system.symbolic,
        history=tuple(r[2] for r in kept),
        eliminated=system.eliminated + (var,),
        ncols=system.n,
    )
    return out, FMCertificate(out.history, out.eliminated)


def fm_eliminate_all(system: LinearSystem, order: Sequence[int]) -> tuple[LinearSystem, FMCertificate]:
    cur = system
    for v in order:
        cur, _ = fm_eliminate(cur, v)
    return cur, FMCertificate(cur.history, cur.eliminated)


def fm_zero_rows(system: LinearSystem) -> tuple[RationalVector, ...]:
    """Multipliers of rows whose coefficients are all zero (the b-forms after full elimination)."""
    return tuple(u for row, u in zip(system.A, system.history) if all(c == 0 for c in row))


# -- projection cone -------------------------------------------------------------


@dataclass(frozen=True)
class ProjectionCone:
    A: RationalMatrix
    rays: tuple[tuple[int, ...], ...]

    def contains(self, u: Sequence) -> bool:
        uu = vec(u)
        return all(c >= 0 for c in uu) and all(c == 0 for c in vec_mat(uu, self.A))


def projection_cone_rays(A: Sequence[Sequence], check_size: bool = True) -> ProjectionCone:
    """Extreme rays of {u >= 0 : uA = 0}, as primitive integer vectors.

    A vector of the cone is extreme exactly when its support S is minimal,
    i.e. the rows indexed by S have a one-dimensional space of dependencies
    and that dependency is strictly positive on S.  Such supports have at
    most rank(A) + 1 elements, which bounds the enumeration.
    """
    A = mat(A)
    m = len(A)
    if check_size:
        check_cap("cone_rows", m)
    n = len(A[0]) if A else 0
    top = min(m, (rank(A) if n else 0) + 1)
    check_cap("cone_subsets", sum(math.comb(m, k) for k in range(1, top + 1)))
    rays: list[tuple[int, ...]] = []
    seen = set()
    for size in range(1, top + 1):
        for S in itertools.combinations(range(m), size):
            cols = [[A[i][j] for i in S] for j in range(n)]
            basis = nullspace(cols, ncols=size) if n else [unit(size, k) for k in range(size)]
            if len(basis) != 1:
                continue
            g = basis[0]
            if all(c < 0 for c in g):
                g = tuple(-c for c in g)
            elif not all(c > 0 for c in g):
                continue
            full = [ZERO] * m
            for i, c in zip(S, g):
                full[i] = c
            ray = primitive(full)
            if ray not in seen:
                seen.add(ray)
                rays.append(ray)
    return ProjectionCone(A, tuple(rays))


# -- integer step ----------------------------------------------------------------


def _drop(v: Sequence[Fraction], j: int) -> RationalVector:
    return tuple(v[:j]) + tuple(v[j + 1:])


def integer_fm_step(system: LinearSystem, var: int) -> ACSystem:
    """Exact projection of the integer points of A x >= b along one variable.

    For a lower-bound row p and an upper-bound row q an integer value of the
    variable exists between them iff ceil(lower_p(x)) <= upper_q(x) on the
    remaining integer x.  Output is over the remaining variables, all integer.
    """
    if system.symbolic:
        raise DomainError("integer step needs a numeric right-hand side")
    if not 0 <= var < system.n:
        raise DomainError(f"variable index {var} out of range")
    A, b = system.A, system.b
    n1 = system.n - 1
    pos, neg, zer = _partition(A, var)
    check_cap("fm_rows", len(pos) * len(neg) + len(zer))
    ineqs: list[ACInequality] = []
    for p in pos:
        a = A[p][var]
        # variable >= lower_p(x) = b_p/a - sum (a_pj/a) x_j
        lower = Leaf(tuple(-c / a for c in _drop(A[p], var)), b[p] / a)
        for q in neg:
            a2 = A[q][var]
            # variable <= upper_q(x) = b_q/a2 - sum (a_qj/a2) x_j
            neg_upper = Leaf(tuple(c / a2 for c in _drop(A[q], var)), -b[q] / a2)
            ineqs.append(ACInequality(ACFunction(Sum(ONE, Ceil(lower), ONE, neg_upper)), ZERO))
    for z in zer:
        ineqs.append(ACInequality(ACFunction(Leaf(tuple(-c for c in _drop(A[z], var)), b[z])), ZERO))
    return ACSystem(tuple(ineqs), n1, frozenset(range(n1)))


# -- rows with Chvátal right-hand sides ----------------------------------------------


@dataclass(frozen=True)
class ParamRow:
    """coeffs . x >= rhs(b), with rhs an affine Chvátal function of parameters."""

    coeffs: RationalVector
    rhs: ACFunction

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)


RhsRule = Callable[[ParamRow], ParamRow]


def no_rounding(row: ParamRow) -> ParamRow:
    return row


def round_if_integral(row: ParamRow) -> ParamRow:
    """Ceil the right-hand side of a nonzero row with integral coefficients."""
    if row.is_zero() or not is_integral(row.coeffs) or integer_valued(row.rhs):
        return row
    return ParamRow(row.coeffs, ACFunction(Ceil(row.rhs.root)))


def param_rows(A: Sequence[Sequence], rhs: Sequence[ACFunction] | None = None) -> tuple[ParamRow, ...]:
    """Rows of A x >= b with b_i as the i-th parameter (or the given rhs functions)."""
    A = mat(A)
    m = len(A)
    if rhs is None:
        rhs = [ACFunction(Leaf(unit(m, i), ZERO)) for i in range(m)]
    return tuple(ParamRow(r, f) for r, f in zip(A, rhs))


def param_fm_eliminate(rows: Sequence[ParamRow], var: int, rule: RhsRule = no_rounding) -> tuple[ParamRow, ...]:
    """One elimination on rows with tree right-hand sides.

    Rows are scaled to +-1 on the variable, then ``rule`` is applied to each
    scaled row before pairing; paired rows are emitted as built.
    """
    pos = [r for r in rows if r.coeffs[var] > 0]
    neg = [r for r in rows if r.coeffs[var] < 0]
    zer = [r for r in rows if r.coeffs[var] == 0]

    def scaled(r: ParamRow) -> ParamRow:
        s = 1 / abs(r.coeffs[var])
        if s == 1:
            return rule(r)
        return rule(ParamRow(tuple(s * c for c in r.coeffs), ACFunction(Scale(s, r.rhs.root))))

    sp = [scaled(r) for r in pos]
    sn = [scaled(r) for r in neg]
    out: list[ParamRow] = []
    for p in sp:
        for q in sn:
            coeffs = tuple(x + y for x, y in zip(p.coeffs, q.coeffs))
            out.append(ParamRow(coeffs, ACFunction(Sum(ONE, p.rhs.root, ONE, q.rhs.root))))
    out.extend(zer)
    return tuple(out)


def param_fm_all(rows: Sequence[ParamRow], order: Sequence[int], rule: RhsRule = no_rounding) -> tuple[ParamRow, ...]:
    cur = tuple(rule(r) for r in rows)
    for v in order:
        cur = param_fm_eliminate(cur, v, rule)
    return cur


def fm_feasible(system: LinearSystem) -> bool:
    """Exact LP feasibility of A x >= b by eliminating every variable.

    Rows are normalised (first nonzero coefficient of magnitude 1) and only
    the tightest row per direction is kept, which keeps elimination small.
    """
    if system.symbolic:
        raise DomainError("feasibility needs a numeric right-hand side")
    rows = _tightest(zip(system.A, system.b))
    for var in range(system.n):
        if rows is None:
            return False
        pos = [(r, b) for r, b in rows.items() if r[var] > 0]
        neg = [(r, b) for r, b in rows.items() if r[var] < 0]
        new = [(r, b) for r, b in rows.items() if r[var] == 0]
        for rp, bp in pos:
            for rq, bq in neg:
                sp, sq = 1 / rp[var], 1 / -rq[var]
                new.append((tuple(sp * x + sq * y for x, y in zip(rp, rq)), sp * bp + sq * bq))
        check_cap("fm_rows", len(new))
        rows = _tightest(new)
    return rows is not None


def _tightest(pairs) -> dict | None:
    """Normalised rows keyed by direction with the largest rhs; None if a zero row is violated."""
    out: dict = {}
    for r, b in pairs:
        lead = next((c for c in r if c != 0), None)
        if lead is None:
            if b > 0:
                return None
            continue
        k = 1 / abs(lead)
        key = tuple(k * c for c in r)
        v = k * b
        if key not in out or v > out[key]:
            out[key] = v
    return out


def variable_bounds(system: LinearSystem, var: int) -> tuple[Fraction | None, Fraction | None]:
    """Rational range of one variable over the polyhedron (None for unbounded sides).

    Assumes the system is feasible.
    """
    others = [j for j in range(system.n) if j != var]
    out, _ = fm_eliminate_all(system, others)
    lo = hi = None
    for row, rhs in zip(out.A, out.b):
        a = row[var]
        if a > 0:
            v = rhs / a
            lo = v if lo is None or v > lo else lo
        elif a < 0:
            v = rhs / a
            hi = v if hi is None or v < hi else hi
    return lo, hi
