"""LP and IP consistency testers for A x >= b as functions of b."""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Sequence

from .chvatal_ast import (
    ACFunction,
    ACNode,
    Ceil,
    Leaf,
    Scale,
    Sum,
    carrier,
    ceiling_count,
    ceilingize,
    compose_affine,
    evaluate,
)
from .core_arith import (
    ONE,
    ZERO,
    CapacityError,
    DomainError,
    check_cap,
    dot,
    mat,
    primitive,
    unit,
    vec,
)
from .fourier_motzkin import (
    LinearSystem,
    fm_eliminate_all,
    fm_feasible,
    param_fm_all,
    param_rows,
    projection_cone_rays,
    round_if_integral,
)
from .hilbert_tdi import ClosureProgram, closure_trace

LP, IP = "LP", "IP"
_MATERIALIZE_LIMIT = 64


class ChvatalFamily:
    """All Chvátal functions obtained by iterating closure on A x >= b, then projecting.

    Round k maps each distinct row vector w to the max over its multipliers u
    of ceil(u . beta_{k-1}); the tester is max over projection-cone rays lam
    of lam . beta_T.  Expanding every max gives one Chvátal function per
    choice, so the family is finite but usually huge; it is evaluated
    numerically and materialised only on request.  With ``rounding=False``
    the ceilings are dropped, giving the carrier family.

    The parameter vector b may be an affine image b = offset + T x, in which
    case the family is a family of functions of x.
    """

    def __init__(self, A, rounding: bool = True, T=None, offset=None):
        self.A = mat(A)
        self.rounding = rounding
        m = len(self.A)
        self.T = mat(T) if T is not None else None
        self.offset = vec(offset) if offset is not None else (ZERO,) * m
        self.dimension = len(self.T[0]) if self.T else m
        self._rays: dict = {}

    # numeric side

    def _params(self, x) -> tuple[Fraction, ...]:
        xs = vec(x)
        if len(xs) != self.dimension:
            raise DomainError("argument arity differs from family dimension")
        if self.T is None:
            return xs
        return tuple(o + dot(r, xs) for o, r in zip(self.offset, self.T))

    @functools.cached_property
    def program(self) -> ClosureProgram:
        """The right-hand-side independent closure program (may hit capacity limits)."""
        return ClosureProgram(self.A)

    def _final(self, x):
        return self.program.final(self._params(x), self.rounding)

    def rays(self, rows=None) -> tuple[tuple[int, ...], ...]:
        rows = rows if rows is not None else self.program.final_rows
        if rows not in self._rays:
            self._rays[rows] = projection_cone_rays(rows, check_size=False).rays
        return self._rays[rows]

    def max_value(self, x) -> Fraction | None:
        rows, beta = self._final(x)
        vals = [dot(lam, beta) for lam in self.rays(rows)]
        return max(vals) if vals else None

    def accepts(self, x) -> bool:
        """max_value(x) <= 0, decided by running the closure numerically on this b."""
        return closure_trace(self.A, self._params(x), self.rounding).status != "empty"

    def carrier(self) -> "ChvatalFamily":
        return ChvatalFamily(self.A, False, self.T, None if self.T is None else self.offset)

    def compose(self, T, offset) -> "ChvatalFamily":
        """Family of x -> f(offset + T x)."""
        T, offset = mat(T), vec(offset)
        if self.T is None:
            return ChvatalFamily(self.A, self.rounding, T, offset)
        # b = off0 + T0 (offset + T x)
        n = len(T[0]) if T else 0
        T2 = tuple(tuple(dot(r, [T[i][j] for i in range(len(T))]) for j in range(n)) for r in self.T)
        off2 = tuple(o + dot(r, offset) for o, r in zip(self.offset, self.T))
        return ChvatalFamily(self.A, self.rounding, T2, off2)

    # symbolic side

    def _counts(self) -> list[list[int]]:
        prog = self.program
        prev = [1] * len(self.A)
        out = []
        for k in range(prog.rounds):
            lev = prog.level(k)
            cur = []
            for us in lev.choices:
                total = 0
                for u in us:
                    p = 1
                    for i, c in enumerate(u):
                        if c:
                            p *= prev[i]
                    total += p
                cur.append(total)
            out.append(cur)
            prev = cur
        return out

    def count(self) -> int:
        last = self._counts()[-1]
        total = 0
        for lam in self.rays():
            p = 1
            for i, c in enumerate(lam):
                if c:
                    p *= last[i]
            total += p
        return total

    def members(self) -> Iterator[ACFunction]:
        """Every function of the family, lazily; capped by the family_size limit."""
        check_cap("family_size", self.count())
        prog = self.program
        m = len(self.A)
        base = [Leaf(unit(m, i), ZERO) for i in range(m)]

        def beta(k: int, i: int) -> Iterator[ACNode]:
            if k < 0:
                yield base[i]
                return
            for u in prog.level(k).choices[i]:
                for node in _combine(u, lambda j: beta(k - 1, j)):
                    if self.rounding and not _integral_combination(u, k):
                        node = Ceil(node)
                    yield node

        last = prog.rounds - 1
        for lam in self.rays():
            for node in _combine(tuple(Fraction(c) for c in lam), lambda j: beta(last, j)):
                f = ACFunction(node, m)
                yield f if self.T is None else compose_affine(f, self.T, self.offset)


def _integral_combination(u, k: int) -> bool:
    # beta entries are integer valued after the first round, so an integral
    # combination of them needs no ceiling
    return k > 0 and all(c.denominator == 1 for c in u)


def _combine(u, children) -> Iterator[ACNode]:
    """All nodes sum_i u_i * child_i, one child choice per support index."""
    support = [i for i, c in enumerate(u) if c]
    if not support:
        raise DomainError("empty multiplier")
    for picks in itertools.product(*(list(children(i)) for i in support)):
        parts = [(u[i], nd) for i, nd in zip(support, picks)]
        w, acc = parts[0]
        if len(parts) == 1:
            yield acc if w == 1 else Scale(w, acc)
            continue
        w2, nxt = parts[1]
        acc = Sum(w, acc, w2, nxt)
        for w, nxt in parts[2:]:
            acc = Sum(ONE, acc, w, nxt)
        yield acc


# -- testers ---------------------------------------------------------------------------


@dataclass(frozen=True)
class MaxTester:
    """b is declared feasible iff max_i f_i(b) <= 0 (an empty max counts as feasible)."""

    functions: tuple[ACFunction, ...]
    kind: str
    family: ChvatalFamily | None = None

    def __post_init__(self):
        if self.kind not in (LP, IP):
            raise DomainError(f"unknown tester kind {self.kind!r}")
        if self.kind == LP and any(ceiling_count(f) for f in self.functions):
            raise DomainError("an LP tester holds linear forms only")

    def value(self, b: Sequence) -> Fraction | None:
        bb = vec(b)
        vals = [evaluate(f, bb) for f in self.functions]
        if self.family is not None:
            v = self.family.max_value(bb)
            if v is not None:
                vals.append(v)
        return max(vals) if vals else None

    def feasible(self, b: Sequence) -> bool:
        bb = vec(b)
        if any(evaluate(f, bb) > 0 for f in self.functions):
            return False
        return self.family is None or self.family.accepts(bb)


def lp_tester_from_fm(A: Sequence[Sequence], order: Sequence[int] | None = None) -> MaxTester:
    """Linear forms u.b, one per zero row left after eliminating every variable."""
    A = mat(A)
    n = len(A[0]) if A else 0
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise DomainError("order must be a permutation of the variables")
    out, _ = fm_eliminate_all(LinearSystem.parametric(A), order)
    m = len(A)
    return MaxTester(tuple(ACFunction(Leaf(u, ZERO), m) for u in out.history), LP)


@dataclass(frozen=True)
class RedundancyReport:
    labels: tuple[str, ...]  # "extreme-ray" | "redundant", one per function
    missing_rays: tuple[tuple[int, ...], ...]

    @property
    def valid(self) -> bool:
        return not self.missing_rays


def classify_redundant(tester: MaxTester, A: Sequence[Sequence]) -> RedundancyReport:
    if tester.kind != LP:
        raise DomainError("redundancy is defined for LP testers")
    rays = set(projection_cone_rays(A).rays)
    labels, hit = [], set()
    for f in tester.functions:
        leaf = carrier(f).root
        if leaf.const != 0 or not any(leaf.coeffs):
            labels.append("redundant")
            continue
        p = primitive(leaf.coeffs)
        if p in rays and all(c >= 0 for c in p):
            labels.append("extreme-ray")
            hit.add(p)
        else:
            labels.append("redundant")
    return RedundancyReport(tuple(labels), tuple(sorted(rays - hit)))


def ray_witness(ray: Sequence[int], big: int) -> tuple[int, ...]:
    """b with b_J = 1 on the ray's support J and -big elsewhere."""
    return tuple(1 if c else -big for c in ray)


def ip_tester(A: Sequence[Sequence]) -> MaxTester:
    """Chvátal functions f with {z integer : A z >= b} nonempty iff every f(b) <= 0."""
    A = mat(A)
    m = len(A)
    zero_rows = [i for i, r in enumerate(A) if not any(r)]
    live = [i for i in range(m) if i not in zero_rows]
    # a zero row reads 0 >= b_i
    fixed = tuple(ACFunction(Leaf(unit(m, i), ZERO), m) for i in zero_rows)
    if not live:
        return MaxTester(fixed, IP)
    fam = ChvatalFamily([A[i] for i in live])
    if zero_rows:
        fam = fam.compose([unit(m, i) for i in live], (ZERO,) * len(live))
    try:
        small = fam.count() <= _MATERIALIZE_LIMIT
    except CapacityError:
        small = False
    if small:
        return MaxTester(fixed + tuple(fam.members()), IP)
    return MaxTester(fixed, IP, fam)


def naive_integer_fm_tester(A: Sequence[Sequence], order: Sequence[int] | None = None) -> MaxTester:
    """FM with a ceiling on every integral-coefficient row: a candidate, not a valid tester."""
    A = mat(A)
    n = len(A[0]) if A else 0
    order = list(range(n)) if order is None else list(order)
    rows = param_fm_all(param_rows(A), order, round_if_integral)
    return MaxTester(tuple(r.rhs for r in rows), IP)


def ceilingize_tester(tester: MaxTester, patterns) -> MaxTester:
    """Ceilingize every form; patterns is one pattern or one per function."""
    if tester.kind != LP:
        raise DomainError("ceilingization starts from an LP tester")
    if isinstance(patterns, (str, ACFunction, ACNode)):
        patterns = [patterns] * len(tester.functions)
    patterns = list(patterns)
    if len(patterns) != len(tester.functions):
        raise DomainError("one pattern per tester function expected")
    return MaxTester(tuple(ceilingize(f, p) for f, p in zip(tester.functions, patterns)), IP)


def carrier_tester(tester: MaxTester) -> MaxTester:
    fam = tester.family.carrier() if tester.family is not None else None
    return MaxTester(tuple(carrier(f) for f in tester.functions), LP, fam)


# -- validation -----------------------------------------------------------------------


@dataclass(frozen=True)
class Validation:
    passed: bool
    counterexample: tuple[Fraction, ...] | None = None
    tester_verdict: bool | None = None
    oracle_verdict: bool | None = None
    checked: int = 0


def _oracle(A, b, integer: bool) -> bool:
    from .oracle import integer_feasible

    if integer:
        return integer_feasible(A, b)
    return fm_feasible(LinearSystem(A, b))


def _b_vectors(box) -> Iterable:
    from .oracle import Box

    if isinstance(box, Box):
        return (tuple(int(v) for v in p) for p in box.points())
    return box


def validate_tester(tester: MaxTester, A: Sequence[Sequence], box, integer: bool | None = None) -> Validation:
    """Compare tester verdicts with the oracle on every b of the box, in order.

    ``integer`` defaults to the tester kind (IP testers against lattice
    feasibility, LP testers against rational feasibility).
    """
    A = mat(A)
    integer = tester.kind == IP if integer is None else integer
    count = 0
    for b in _b_vectors(box):
        bb = vec(b)
        count += 1
        t = tester.feasible(bb)
        o = _oracle(A, bb, integer)
        if t != o:
            return Validation(False, bb, t, o, count)
    return Validation(True, checked=count)
