"""Exact rational scalars, vectors and matrices plus the number-theoretic helpers.

Rationals are :class:`fractions.Fraction`, which is already canonical
(positive denominator, reduced).  Vectors and matrices are tuples so they
hash and compare structurally.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Iterable, Sequence

Rational = Fraction
RationalVector = tuple[Fraction, ...]
RationalMatrix = tuple[RationalVector, ...]

ZERO = Fraction(0)
ONE = Fraction(1)


class DomainError(ValueError):
    """An argument lies outside the operation's domain."""


class CapacityError(RuntimeError):
    """A desk-scale capacity limit was exceeded."""

    def __init__(self, what: str, needed: int, cap: int):
        super().__init__(f"{what}: need {needed}, cap is {cap}")
        self.what = what
        self.needed = needed
        self.cap = cap


def Q(x) -> Fraction:
    """Coerce ints, Fractions and "p/q" strings to a Fraction (floats rejected)."""
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return parse_rational(x)
    raise TypeError(f"cannot make an exact rational from {type(x).__name__}")


def parse_rational(text: str) -> Fraction:
    """Parse "p/q", "p" or a finite decimal like "2.5" exactly."""
    s = text.strip()
    if not s:
        raise DomainError("empty rational literal")
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise DomainError(f"bad rational literal {text!r}") from exc


def format_rational(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def vec(values: Iterable) -> RationalVector:
    return tuple(Q(v) for v in values)


def mat(rows: Iterable[Iterable]) -> RationalMatrix:
    out = tuple(vec(r) for r in rows)
    if out and len({len(r) for r in out}) != 1:
        raise DomainError("matrix rows differ in length")
    return out


def zeros(n: int) -> RationalVector:
    return (ZERO,) * n


def unit(n: int, i: int) -> RationalVector:
    return tuple(ONE if j == i else ZERO for j in range(n))


def dot(u: Sequence[Fraction], v: Sequence[Fraction]) -> Fraction:
    if len(u) != len(v):
        raise DomainError(f"length mismatch {len(u)} vs {len(v)}")
    return sum((a * b for a, b in zip(u, v)), ZERO)


def vadd(u: Sequence[Fraction], v: Sequence[Fraction]) -> RationalVector:
    return tuple(a + b for a, b in zip(u, v))


def vscale(c: Fraction, v: Sequence[Fraction]) -> RationalVector:
    return tuple(c * a for a in v)


def vec_mat(u: Sequence[Fraction], A: Sequence[Sequence[Fraction]]) -> RationalVector:
    """Row vector times matrix, uA."""
    if len(u) != len(A):
        raise DomainError("uA: length mismatch")
    ncols = len(A[0]) if A else 0
    out = [ZERO] * ncols
    for ui, row in zip(u, A):
        if ui:
            for j, a in enumerate(row):
                out[j] += ui * a
    return tuple(out)


def mat_vec(A: Sequence[Sequence[Fraction]], x: Sequence[Fraction]) -> RationalVector:
    return tuple(dot(row, x) for row in A)


def is_integral(v: Iterable[Fraction]) -> bool:
    return all(Fraction(a).denominator == 1 for a in v)


def lcm_list(values: Iterable) -> int:
    """Least common multiple of the absolute values of nonzero integers."""
    vals = list(values)
    if not vals:
        raise DomainError("lcm of an empty list")
    out = 1
    for v in vals:
        f = Q(v)
        if f.denominator != 1:
            raise DomainError(f"lcm needs integers, got {f}")
        if f == 0:
            raise DomainError("lcm with a zero entry")
        out = math.lcm(out, abs(f.numerator))
    return out


def ceil_rational(x) -> int:
    """Smallest integer not below x."""
    f = Q(x)
    return -((-f.numerator) // f.denominator)


def floor_rational(x) -> int:
    f = Q(x)
    return f.numerator // f.denominator


def mod_reduce(z: int, m: int) -> int:
    """Representative of z modulo m in {0, ..., m-1}."""
    if m <= 0:
        raise DomainError(f"modulus must be positive, got {m}")
    return int(z) % int(m)


def denominator_lcm(values: Iterable[Fraction]) -> int:
    out = 1
    for v in values:
        out = math.lcm(out, Fraction(v).denominator)
    return out


def primitive(v: Sequence[Fraction]) -> tuple[int, ...]:
    """Positive rescaling of a nonzero rational vector to a coprime integer vector."""
    d = denominator_lcm(v)
    ints = [int(a * d) for a in v]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    if g == 0:
        raise DomainError("zero vector has no primitive form")
    return tuple(a // g for a in ints)


def rref(rows: Sequence[Sequence[Fraction]]) -> tuple[list[list[Fraction]], list[int]]:
    """Reduced row echelon form and pivot columns."""
    M = [list(map(Q, r)) for r in rows]
    pivots: list[int] = []
    ncols = len(M[0]) if M else 0
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, len(M)) if M[i][c] != 0), None)
        if p is None:
            continue
        M[r], M[p] = M[p], M[r]
        inv = 1 / M[r][c]
        M[r] = [a * inv for a in M[r]]
        for i in range(len(M)):
            if i != r and M[i][c] != 0:
                f = M[i][c]
                M[i] = [a - f * b for a, b in zip(M[i], M[r])]
        pivots.append(c)
        r += 1
        if r == len(M):
            break
    return M, pivots


def rank(rows: Sequence[Sequence[Fraction]]) -> int:
    if not rows:
        return 0
    return len(rref(rows)[1])


def nullspace(rows: Sequence[Sequence[Fraction]], ncols: int | None = None) -> list[RationalVector]:
    """Basis of {x : rows . x = 0}."""
    if not rows:
        n = ncols or 0
        return [unit(n, i) for i in range(n)]
    M, piv = rref(rows)
    n = len(M[0])
    free = [c for c in range(n) if c not in piv]
    basis = []
    for f in free:
        x = [ZERO] * n
        x[f] = ONE
        for r, pc in enumerate(piv):
            x[pc] = -M[r][f]
        basis.append(tuple(x))
    return basis


def solve_unique(cols: Sequence[Sequence[Fraction]], target: Sequence[Fraction]) -> RationalVector | None:
    """Coefficients lam with sum(lam_i * cols[i]) = target, for linearly independent cols.

    Returns None when target is outside their span.
    """
    k = len(cols)
    n = len(target)
    aug = [[Q(cols[i][r]) for i in range(k)] + [Q(target[r])] for r in range(n)]
    M, piv = rref(aug)
    if k in piv:
        return None
    lam = [ZERO] * k
    for r, pc in enumerate(piv):
        lam[pc] = M[r][k]
    return tuple(lam)


DEFAULT_CAPS = {
    "box_points": 10**7,
    "cone_rows": 12,
    "cone_subsets": 200_000,
    "closure_rows": 400,
    "tdi_rows": 6,
    "tdi_subsets": 5_000,
    "hilbert_dim": 4,
    "parallelepiped_points": 200_000,
    "disjuncts": 10**5,
    "family_size": 10**6,
    "fm_rows": 20_000,
}


def cap(name: str) -> int:
    """Desk-scale limit, overridable by the CHVATALKIT_CAPS env var ("name=value,...")."""
    import os

    raw = os.environ.get("CHVATALKIT_CAPS", "")
    for item in raw.split(","):
        if "=" in item:
            key, val = item.split("=", 1)
            if key.strip() == name:
                return int(val)
    return DEFAULT_CAPS[name]


def check_cap(name: str, needed: int) -> None:
    limit = cap(name)
    if needed > limit:
        raise CapacityError(name, needed, limit)
