"""Hilbert bases, TDI systems and Chvátal closure iterations.

Cones here are generated by finitely many rational vectors.  Hilbert bases
are found by enumerating lattice points of the fundamental parallelepipeds
of the simplicial subcones and then discarding reducible elements.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .core_arith import (
    ZERO,
    ceil_rational,
    denominator_lcm,
    cap,
    check_cap,
    dot,
    mat,
    primitive,
    rank,
    rref,
    solve_unique,
    unit,
    vec,
)
from .fourier_motzkin import LinearSystem, fm_feasible, variable_bounds

IntVector = tuple[int, ...]


@dataclass(frozen=True)
class Cone:
    generators: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        gens = mat(self.generators)
        if not gens:
            raise ValueError("a cone needs at least one generator (use a zero vector for {0})")
        object.__setattr__(self, "generators", gens)

    @property
    def dimension(self) -> int:
        return len(self.generators[0])


# -- cone geometry ---------------------------------------------------------------------


def _independent_subsets(gens: Sequence[IntVector], max_size: int | None = None):
    """Linearly independent subsets of gens (as index tuples), smallest first."""
    top = rank(gens) if max_size is None else max_size
    for size in range(1, top + 1):
        for T in itertools.combinations(range(len(gens)), size):
            if rank([gens[i] for i in T]) == size:
                yield T


def _conic_combination(rows: Sequence[Sequence[Fraction]], target, subsets=None):
    """Nonnegative lam with sum lam_i rows_i = target, supported on an independent subset."""
    if all(t == 0 for t in target):
        return (ZERO,) * len(rows)
    for T in subsets if subsets is not None else _independent_subsets(rows):
        lam = solve_unique([rows[i] for i in T], target)
        if lam is not None and all(c >= 0 for c in lam):
            out = [ZERO] * len(rows)
            for i, c in zip(T, lam):
                out[i] = c
            return tuple(out)
    return None


def _parallelepiped_points(T: Sequence[IntVector]) -> list[IntVector]:
    """Nonzero lattice points sum lam_i t_i with 0 <= lam_i < 1, for independent t_i.

    Restricted to r coordinates where the t_i are independent, the admissible
    lam form the finite group generated by the columns of the inverse matrix
    modulo 1; its elements are walked breadth first and kept when the full
    point is integral.
    """
    r = len(T)
    _, coords = rref(T)
    cols = [tuple(t[c] for c in coords) for t in T]
    gens = [tuple(x - (x.numerator // x.denominator) for x in solve_unique(cols, unit(r, j))) for j in range(r)]
    zero = (Fraction(0),) * r
    seen = {zero}
    frontier = [zero]
    while frontier:
        nxt = []
        for lam in frontier:
            for g in gens:
                s = tuple((a + b) % 1 for a, b in zip(lam, g))
                if s not in seen:
                    seen.add(s)
                    check_cap("parallelepiped_points", len(seen))
                    nxt.append(s)
        frontier = nxt
    out = []
    for lam in seen:
        if not any(lam):
            continue
        p = tuple(sum(l * t[c] for l, t in zip(lam, T)) for c in range(len(T[0])))
        if all(x.denominator == 1 for x in p):
            out.append(tuple(int(x) for x in p))
    return sorted(out)


def _is_pointed(gens: Sequence[IntVector]) -> bool:
    from .fourier_motzkin import projection_cone_rays

    return not projection_cone_rays(gens, check_size=False).rays


def _positive_functional(gens: Sequence[IntVector]) -> tuple[Fraction, ...]:
    """Some c with c.g >= 1 for every generator of a pointed cone."""
    n = len(gens[0])
    rows = [vec(g) for g in gens]
    rhs = [Fraction(1)] * len(rows)
    c = []
    for j in range(n):
        lo, hi = variable_bounds(LinearSystem(tuple(rows), tuple(rhs)), j)
        v = lo if lo is not None else hi if hi is not None else Fraction(0)
        c.append(v)
        e = tuple(Fraction(int(i == j)) for i in range(n))
        rows += [e, tuple(-a for a in e)]
        rhs += [v, -v]
    return tuple(c)


def _hilbert_simplicial(gens: tuple[IntVector, ...]) -> tuple[IntVector, ...]:
    # coordinates lam in the generator basis grade the cone; h divides g iff lam(g) >= lam(h)
    cands = [(tuple(Fraction(int(i == j)) for j in range(len(gens))), g) for i, g in enumerate(gens)]
    for p in _parallelepiped_points(gens):
        cands.append((solve_unique(gens, p), p))
    cands.sort(key=lambda lp: (sum(lp[0]), lp[1]))
    keep: list = []
    for lam, g in cands:
        if not any(all(a >= b for a, b in zip(lam, mu)) for mu, _ in keep):
            keep.append((lam, g))
    return _ordered([g for _, g in keep])


def _ordered(vs) -> tuple[IntVector, ...]:
    return tuple(sorted(vs, key=lambda v: (sum(map(abs, v)), tuple(-x for x in v))))


@lru_cache(maxsize=4096)
def _hilbert(gens: tuple[IntVector, ...]) -> tuple[IntVector, ...]:
    if not gens:
        return ()
    r = rank(gens)
    if len(gens) == r:
        return _hilbert_simplicial(gens)
    subsets = list(_independent_subsets(gens))
    cands = list(gens)
    seen = set(cands)
    for T in subsets:
        if len(T) != r:
            continue
        for p in _parallelepiped_points([gens[i] for i in T]):
            if p not in seen:
                seen.add(p)
                cands.append(p)
    if _is_pointed(gens):
        # in order of a positive grading, g is reducible iff g - h lies in the
        # cone for an already accepted h
        c = _positive_functional(gens)
        keep = []
        for g in sorted(cands, key=lambda v: (dot(c, v), v)):
            if not any(
                _conic_combination(gens, tuple(a - b for a, b in zip(g, h)), subsets) is not None for h in keep
            ):
                keep.append(g)
    else:
        # lineality present: no canonical basis, only drop obvious sums
        keep = list(cands)
        for g in sorted(cands, key=lambda v: (-sum(map(abs, v)), v)):
            rest = [h for h in keep if h != g]
            if any(tuple(a + b for a, b in zip(h1, h2)) == g for h1, h2 in itertools.combinations_with_replacement(rest, 2)):
                keep = rest
    return _ordered(keep)


def hilbert_basis(cone: Cone | Sequence[Sequence]) -> list[IntVector]:
    """Finite integral generating set of the lattice points of a cone.

    For pointed cones this is the unique minimal Hilbert basis.  For cones
    with a lineality space any valid generating set is returned.
    """
    gens = cone.generators if isinstance(cone, Cone) else mat(cone)
    if gens:
        check_cap("hilbert_dim", len(gens[0]))
    prim = []
    for g in gens:
        if any(g):
            p = primitive(g)
            if p not in prim:
                prim.append(p)
    return list(_hilbert(tuple(prim)))


def in_lattice_span(basis: Sequence[IntVector], point: IntVector, depth: int | None = None) -> bool:
    """Bounded search: is point a nonnegative integer combination of basis?"""
    basis = [tuple(b) for b in basis if any(b)]
    limit = depth if depth is not None else 2 * sum(map(abs, point)) + 4

    # layered search over remainders; each layer is deduplicated
    layer = {tuple(point)}
    seen = set(layer)
    for _ in range(limit):
        if any(not any(p) for p in layer):
            return True
        nxt = set()
        for p in layer:
            for b in basis:
                q = tuple(a - c for a, c in zip(p, b))
                if q not in seen:
                    seen.add(q)
                    nxt.add(q)
        if not nxt:
            return False
        layer = nxt
    return any(not any(p) for p in layer)


# -- TDI systems --------------------------------------------------------------------------


@dataclass(frozen=True)
class TDIMultipliers:
    U: tuple[tuple[Fraction, ...], ...]
    M: tuple[tuple[Fraction, ...], ...]
    source_subsets: tuple[tuple[int, ...], ...]


def _tdi_rows(A, subsets) -> TDIMultipliers:
    U, M, src = [], [], []
    seen = set()
    for S in subsets:
        rows = [A[i] for i in S]
        if not any(any(r) for r in rows):
            # a zero row 0 >= b_i carries infeasibility, so keep it as is
            u = tuple(Fraction(1) if i == S[0] else ZERO for i in range(len(A)))
            if len(S) == 1 and u not in seen:
                seen.add(u)
                U.append(u)
                M.append(vec(rows[0]))
                src.append(tuple(S))
            continue
        for h in hilbert_basis(rows):
            lam = _conic_combination(rows, h)
            if lam is None:
                raise AssertionError("Hilbert basis element outside its cone")
            u = [ZERO] * len(A)
            for i, c in zip(S, lam):
                u[i] += c
            u = tuple(u)
            if u in seen:
                continue
            seen.add(u)
            U.append(u)
            M.append(vec(h))
            src.append(tuple(S))
    return TDIMultipliers(tuple(U), tuple(M), tuple(src))


def build_tdi(A: Sequence[Sequence]) -> TDIMultipliers:
    """Rows u >= 0 such that {UA x >= Ub} is TDI for every b, via all row subsets."""
    A = mat(A)
    check_cap("tdi_rows", len(A))
    if A:
        check_cap("hilbert_dim", len(A[0]))
    subsets = [S for k in range(1, len(A) + 1) for S in itertools.combinations(range(len(A)), k)]
    return _tdi_rows(A, subsets)


def _tdi_independent(W: Sequence[IntVector]) -> TDIMultipliers:
    """TDI rows from the independent subsets of W only.

    If c lies in the cone of the rows tight at an optimum, it lies in the
    cone of an independent subset of them, whose Hilbert basis elements are
    tight too; so these subsets already give a TDI system.
    """
    top = min(len(W[0]), len(W))
    check_cap("tdi_subsets", sum(math.comb(len(W), k) for k in range(1, top + 1)))
    return _tdi_rows(mat(W), list(_independent_subsets(W, top)))


def chvatal_closure_step(A, b, tdi: TDIMultipliers):
    """(M, ceil(Ub)): the Chvátal closure of {x : Ax >= b}."""
    bb = vec(b)
    return tdi.M, tuple(Fraction(ceil_rational(dot(u, bb))) for u in tdi.U)


def _vertices(M, b):
    n = len(M[0])
    out = []
    for T in itertools.combinations(range(len(M)), n):
        rows = [M[i] for i in T]
        if rank(rows) < n:
            continue
        # solve rows x = b_T
        cols = [tuple(r[j] for r in rows) for j in range(n)]
        x = solve_unique(cols, [b[i] for i in T])
        if x is not None and all(dot(r, x) >= bi for r, bi in zip(M, b)):
            out.append(x)
    return out


def integral_dual(M, b, c, vertices=None) -> bool | None:
    """Does max{yb : yM = c, y >= 0} have an integral optimum?

    None when min{cx : Mx >= b} is not attained at a vertex (unbounded,
    empty or without vertices).
    """
    M, b, c = mat(M), vec(b), vec(c)
    verts = _vertices(M, b) if vertices is None else vertices
    if not verts or _conic_combination(M, c) is None:
        return None
    best = min(verts, key=lambda x: dot(c, x))
    tight = [tuple(int(a) for a in M[i]) for i in range(len(M)) if dot(M[i], best) == b[i]]
    if any(Fraction(a).denominator != 1 for r in M for a in r):
        raise ValueError("integral dual check needs an integral matrix")
    return in_lattice_span(tight, tuple(int(a) for a in c))


def tdi_check(M, b, c_box: int) -> list[tuple[int, ...]]:
    """Integral objectives in [-c_box, c_box]^n violating the TDI property."""
    n = len(M[0])
    bad = []
    verts = _vertices(mat(M), vec(b))
    for c in itertools.product(range(-c_box, c_box + 1), repeat=n):
        if integral_dual(M, b, c, verts) is False:
            bad.append(c)
    return bad


# -- iterated closure -------------------------------------------------------------------


def rank_bound(n: int) -> int:
    """Number of closure rounds sufficient to reach the integer hull in dimension n."""
    if n < 1:
        raise ValueError("dimension must be positive")
    t = 1
    for k in range(2, n + 1):
        p = k**5
        s = math.isqrt(p)
        c = s if s * s == p else s + 1  # ceil(k^(5/2))
        t = c + 2 + (c + 1) * t
    return t


@dataclass(frozen=True, eq=False)
class ClosureLevel:
    """One closure round: each output row w gets max over its multipliers of ceil(u . beta)."""

    rows: tuple[IntVector, ...]
    choices: tuple[tuple[tuple[Fraction, ...], ...], ...]

    @functools.cached_property
    def sparse(self):
        """Per row, each multiplier as (denominator, ((index, integer numerator), ...))."""
        out = []
        for us in self.choices:
            forms = []
            for u in us:
                d = denominator_lcm(u)
                forms.append((d, tuple((i, int(c * d)) for i, c in enumerate(u) if c)))
            out.append(tuple(forms))
        return tuple(out)


def _level(tdi: TDIMultipliers) -> ClosureLevel:
    groups: dict[IntVector, list] = {}
    for u, m in zip(tdi.U, tdi.M):
        groups.setdefault(tuple(int(a) for a in m), []).append(u)
    rows = tuple(sorted(groups))
    check_cap("closure_rows", len(rows))
    return ClosureLevel(rows, tuple(tuple(groups[w]) for w in rows))


class ClosureProgram:
    """The right-hand-side independent part of iterated Chvátal closure for a matrix A.

    Round 1 uses the TDI system of A; later rounds use the TDI system of the
    previous round's distinct row vectors.  Building stops once the row set
    stops changing, after which the last level repeats.
    """

    def __init__(self, A: Sequence[Sequence]):
        self.A = mat(A)
        if not self.A:
            raise ValueError("closure needs at least one row")
        self.n = len(self.A[0])
        self.rounds = rank_bound(self.n)
        self.levels: list[ClosureLevel] = [_level(build_tdi(self.A))]
        # level k >= 1 indexes the rows of level k-1, so at least two levels exist
        while len(self.levels) <= self.rounds:
            nxt = _level(_tdi_independent(self.levels[-1].rows))
            done = nxt.rows == self.levels[-1].rows
            self.levels.append(nxt)
            if done:
                break

    def level(self, k: int) -> ClosureLevel:
        """Level for round k (0-based)."""
        return self.levels[min(k, len(self.levels) - 1)]

    @property
    def final_rows(self) -> tuple[IntVector, ...]:
        return self.levels[-1].rows

    def step(self, k: int, beta, rounding: bool = True) -> tuple[Fraction, ...]:
        lev = self.level(k)
        # integer arithmetic on beta scaled by its common denominator
        L = denominator_lcm(beta)
        ib = [int(v * L) for v in beta]
        out = []
        for forms in lev.sparse:
            best = max(Fraction(sum(c * ib[i] for i, c in terms), d * L) for d, terms in forms)
            out.append(Fraction(ceil_rational(best)) if rounding else best)
        return tuple(out)

    def run(self, b, rounding: bool = True):
        """Yield (rows, beta) for each round until a fixed point or the round bound."""
        beta = vec(b)
        prev = None
        for k in range(self.rounds):
            beta = self.step(k, beta, rounding)
            cur = (self.level(k).rows, beta)
            if cur == prev:
                return
            yield cur
            prev = cur

    def final(self, b, rounding: bool = True):
        last = None
        for last in self.run(b, rounding):
            pass
        return last


@dataclass(frozen=True)
class ClosureTrace:
    iterations: tuple[tuple[tuple, tuple], ...]
    status: str  # fixed-point | empty | bound-exhausted

    @property
    def final(self):
        return self.iterations[-1] if self.iterations else None


def prune(rows: Sequence[Sequence], beta: Sequence) -> tuple[tuple, tuple] | None:
    """Irredundant subsystem of {x : rows . x >= beta} (None if it is empty).

    Rows are scaled to primitive integer directions first.  Row i is dropped
    when the others force rows_i . x >= beta_i; the test is an exact LP with
    the strict side shifted by 1/D, where D bounds every denominator a vertex
    value can have (Hadamard bound times the lcm of the rhs denominators).
    """
    best: dict[IntVector, Fraction] = {}
    for r, bi in zip(rows, beta):
        if not any(r):
            if bi > 0:
                return None
            continue
        p = primitive(r)
        k = Fraction(next(c for c in r if c)) / next(c for c in p if c)
        v = Fraction(bi) / k
        if p not in best or v > best[p]:
            best[p] = v
    dirs = sorted(best)
    vals = [best[d] for d in dirs]
    if not fm_feasible(LinearSystem(tuple(vec(d) for d in dirs), tuple(vals))):
        return None
    if not dirs:
        return (), ()
    n = len(dirs[0])
    sq = sorted((sum(c * c for c in d) for d in dirs), reverse=True)[:n]
    D = math.isqrt(math.prod(sq)) + 1
    eps = Fraction(1, D * denominator_lcm(vals))
    keep = list(range(len(dirs)))
    for i in range(len(dirs)):
        others = [j for j in keep if j != i]
        A = [vec(dirs[j]) for j in others] + [vec(-c for c in dirs[i])]
        b = [vals[j] for j in others] + [-vals[i] + eps]
        if not fm_feasible(LinearSystem(tuple(A), tuple(b))):
            keep.remove(i)
    return tuple(dirs[j] for j in keep), tuple(vals[j] for j in keep)


@lru_cache(maxsize=1024)
def _pruned_tdi(rows: tuple[IntVector, ...]) -> ClosureLevel:
    if len(rows) <= cap("tdi_rows"):
        return _level(build_tdi(rows))
    return _level(_tdi_independent(rows))


def _apply(level: ClosureLevel, beta, rounding: bool) -> tuple[Fraction, ...]:
    L = denominator_lcm(beta)
    ib = [int(v * L) for v in beta]
    out = []
    for forms in level.sparse:
        best = max(Fraction(sum(c * ib[i] for i, c in terms), d * L) for d, terms in forms)
        out.append(Fraction(ceil_rational(best)) if rounding else best)
    return tuple(out)


def closure_trace(A, b, rounding: bool = True) -> ClosureTrace:
    """Iterate the closure on {x : Ax >= b}, pruning redundant rows between rounds.

    Round 1 uses the TDI system of A; each later round uses the TDI system
    of the previous round's irredundant rows.  With ``rounding=False`` the
    right-hand sides are not ceiled, which reproduces P itself.
    """
    A = mat(A)
    if not A:
        return ClosureTrace((), "fixed-point")
    n = len(A[0])
    check_cap("hilbert_dim", n)
    rounds = rank_bound(n)
    level = _pruned_tdi_input(A)
    beta = _apply(level, vec(b), rounding)
    iters = []
    cur = prune(level.rows, beta)
    for k in range(rounds + 1):
        if cur is None:
            iters.append((tuple(vec(r) for r in level.rows), beta))
            return ClosureTrace(tuple(iters), "empty")
        rows, vals = cur
        if iters and iters[-1] == (tuple(vec(r) for r in rows), vals):
            return ClosureTrace(tuple(iters), "fixed-point")
        if k == rounds:
            break
        iters.append((tuple(vec(r) for r in rows), vals))
        if not rows:
            return ClosureTrace(tuple(iters), "fixed-point")
        level = _pruned_tdi(rows)
        beta = _apply(level, vals, rounding)
        cur = prune(level.rows, beta)
    return ClosureTrace(tuple(iters), "bound-exhausted")


@lru_cache(maxsize=256)
def _pruned_tdi_input(A) -> ClosureLevel:
    return _level(build_tdi(A))


def integer_hull(A, b) -> ClosureTrace:
    """Closure iterates of {x : Ax >= b} until the integer hull (or emptiness) is reached."""
    return closure_trace(A, b)
