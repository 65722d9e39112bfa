"""Elimination of integer variables from inequality + congruence systems.

Systems hold integer rows ``a x >= b`` and congruences ``c x == d (mod m)``
over integer variables.  Eliminating a variable introduces bounded integer
slacks; right-hand sides are kept affine in those slacks so a single
template describes every disjunct.  Slack keys are ``(stage, index)``, both
1-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from .core_arith import (
    DomainError,
    RationalVector,
    check_cap,
    dot,
    lcm_list,
    mod_reduce,
    vec,
)

SlackKey = tuple[int, int]


@dataclass(frozen=True)
class SlackAffine:
    """const + sum coeff * slack, all integers."""

    const: int = 0
    terms: tuple[tuple[SlackKey, int], ...] = ()

    def __post_init__(self):
        merged: dict[SlackKey, int] = {}
        for k, c in self.terms:
            merged[tuple(k)] = merged.get(tuple(k), 0) + int(c)
        object.__setattr__(self, "const", int(self.const))
        object.__setattr__(self, "terms", tuple(sorted((k, c) for k, c in merged.items() if c)))

    @staticmethod
    def of(x: "int | SlackAffine") -> "SlackAffine":
        return x if isinstance(x, SlackAffine) else SlackAffine(_int(x))

    def __add__(self, other: "int | SlackAffine") -> "SlackAffine":
        o = SlackAffine.of(other)
        return SlackAffine(self.const + o.const, self.terms + o.terms)

    def __neg__(self) -> "SlackAffine":
        return self.scale(-1)

    def __sub__(self, other: "int | SlackAffine") -> "SlackAffine":
        return self + (-SlackAffine.of(other))

    def scale(self, k: int) -> "SlackAffine":
        k = _int(k)
        return SlackAffine(self.const * k, tuple((s, c * k) for s, c in self.terms))

    def plus_slack(self, key: SlackKey, coeff: int = 1) -> "SlackAffine":
        return SlackAffine(self.const, self.terms + ((key, coeff),))

    def value(self, slacks: Mapping[SlackKey, int]) -> int:
        return self.const + sum(c * slacks[k] for k, c in self.terms)

    def substitute(self, slacks: Mapping[SlackKey, int]) -> "SlackAffine":
        const = self.const
        keep = []
        for k, c in self.terms:
            if k in slacks:
                const += c * slacks[k]
            else:
                keep.append((k, c))
        return SlackAffine(const, tuple(keep))

    def reduced(self, m: int) -> "SlackAffine":
        return SlackAffine(mod_reduce(self.const, m), tuple((k, mod_reduce(c, m)) for k, c in self.terms))

    def slacks(self) -> set[SlackKey]:
        return {k for k, _ in self.terms}

    def __str__(self) -> str:
        terms = [(c, f"s{st}_{i}") for (st, i), c in self.terms]
        if not self.const or not terms:
            return _linear_text(terms, self.const)
        tail = _linear_text(terms, 0)
        return f"{self.const} - {tail[1:]}" if tail.startswith("-") else f"{self.const} + {tail}"


def _linear_text(terms: Sequence[tuple[int, str]], const: int) -> str:
    out = []
    for c, name in terms:
        if c:
            mag = abs(c)
            out.append(("- " if c < 0 else "+ ") + (name if mag == 1 else f"{mag} {name}"))
    if const or not out:
        out.append(("- " if const < 0 else "+ ") + str(abs(const)))
    text = " ".join(out)
    return text[2:] if text.startswith("+ ") else "-" + text[2:]


def _int(x) -> int:
    f = Fraction(x)
    if f.denominator != 1:
        raise DomainError(f"{x} is not an integer")
    return int(f)


def _ivec(v: Iterable) -> tuple[int, ...]:
    return tuple(_int(c) for c in v)


@dataclass(frozen=True)
class WHInequality:
    """coeffs . x >= rhs."""

    coeffs: tuple[int, ...]
    rhs: SlackAffine

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _ivec(self.coeffs))
        object.__setattr__(self, "rhs", SlackAffine.of(self.rhs))


@dataclass(frozen=True)
class CongruenceConstraint:
    """coeffs . x == rhs (mod modulus), modulus >= 1."""

    coeffs: tuple[int, ...]
    rhs: SlackAffine
    modulus: int

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _ivec(self.coeffs))
        object.__setattr__(self, "rhs", SlackAffine.of(self.rhs))
        if _int(self.modulus) < 1:
            raise DomainError("modulus must be a positive integer")
        object.__setattr__(self, "modulus", _int(self.modulus))

    def canonical(self) -> "CongruenceConstraint":
        m = self.modulus
        return CongruenceConstraint(tuple(mod_reduce(c, m) for c in self.coeffs), self.rhs.reduced(m), m)


@dataclass(frozen=True)
class WHSystem:
    inequalities: tuple[WHInequality, ...]
    congruences: tuple[CongruenceConstraint, ...]
    dimension: int
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "inequalities", tuple(self.inequalities))
        object.__setattr__(self, "congruences", tuple(self.congruences))
        for r in self.inequalities + self.congruences:
            if len(r.coeffs) != self.dimension:
                raise DomainError("constraint arity differs from system dimension")
        if self.names is not None and len(self.names) != self.dimension:
            raise DomainError("names length differs from dimension")

    @classmethod
    def build(cls, rows=(), rhs=(), congruences=(), dimension=None, names=None) -> "WHSystem":
        """From integer rows A x >= b and (c, d, m) congruence triples."""
        ineqs = tuple(WHInequality(r, b) for r, b in zip(rows, rhs))
        congs = tuple(CongruenceConstraint(c, d, m) for c, d, m in congruences)
        if dimension is None:
            first = (ineqs + congs)[0] if ineqs + congs else None
            dimension = len(first.coeffs) if first else 0
        return cls(ineqs, congs, dimension, names)

    def var_names(self) -> tuple[str, ...]:
        return self.names or tuple(f"x{i + 1}" for i in range(self.dimension))

    def slacks(self) -> set[SlackKey]:
        out: set[SlackKey] = set()
        for r in self.inequalities + self.congruences:
            out |= r.rhs.slacks()
        return out

    def instantiate(self, slacks: Mapping[SlackKey, int]) -> "WHSystem":
        return WHSystem(
            tuple(WHInequality(r.coeffs, r.rhs.substitute(slacks)) for r in self.inequalities),
            tuple(CongruenceConstraint(c.coeffs, c.rhs.substitute(slacks), c.modulus) for c in self.congruences),
            self.dimension,
            self.names,
        )

    def canonical(self) -> "WHSystem":
        return WHSystem(self.inequalities, tuple(c.canonical() for c in self.congruences), self.dimension, self.names)

    def contains(self, x: Sequence[int], slacks: Mapping[SlackKey, int] | None = None) -> bool:
        s = slacks or {}
        xs = _ivec(x)
        for r in self.inequalities:
            if dot(r.coeffs, xs) < r.rhs.value(s):
                return False
        for c in self.congruences:
            if (dot(c.coeffs, xs) - c.rhs.value(s)) % c.modulus:
                return False
        return True


# -- classification ------------------------------------------------------------


@dataclass(frozen=True)
class Classification:
    P: tuple[int, ...]
    N: tuple[int, ...]
    R: tuple[int, ...]
    Z_ineq: tuple[int, ...]
    Z_cong: tuple[int, ...]


def classify(system: WHSystem, var: int) -> Classification:
    """Split rows by the sign of var's coefficient (P: positive, lower bounds in >= form)."""
    _check_var(system, var)
    ineqs, congs = system.inequalities, system.congruences
    return Classification(
        tuple(i for i, r in enumerate(ineqs) if r.coeffs[var] > 0),
        tuple(i for i, r in enumerate(ineqs) if r.coeffs[var] < 0),
        tuple(j for j, c in enumerate(congs) if c.coeffs[var] != 0),
        tuple(i for i, r in enumerate(ineqs) if r.coeffs[var] == 0),
        tuple(j for j, c in enumerate(congs) if c.coeffs[var] == 0),
    )


def _check_var(system: WHSystem, var: int) -> None:
    if not 0 <= var < system.dimension:
        raise DomainError(f"variable index {var} out of range")


def _drop(v: Sequence[int], j: int) -> tuple[int, ...]:
    return tuple(v[:j]) + tuple(v[j + 1:])


def _vlin(a: int, u: Sequence[int], b: int, v: Sequence[int]) -> tuple[int, ...]:
    return tuple(a * x + b * y for x, y in zip(u, v))


def _rest_names(system: WHSystem, var: int) -> tuple[str, ...] | None:
    return _drop(system.names, var) if system.names else None


def _z_part(system: WHSystem, var: int, cl: Classification):
    ineqs = [WHInequality(_drop(system.inequalities[i].coeffs, var), system.inequalities[i].rhs) for i in cl.Z_ineq]
    congs = [
        CongruenceConstraint(_drop(system.congruences[j].coeffs, var), system.congruences[j].rhs,
                             system.congruences[j].modulus)
        for j in cl.Z_cong
    ]
    return ineqs, congs


# -- single-variable steps ----------------------------------------------------------


@dataclass(frozen=True)
class StageInfo:
    """Bookkeeping for one eliminated variable."""

    var_name: str
    case: int
    q: int
    m: int
    slack_count: int
    pivot: int | None = None

    def slack_keys(self, stage: int) -> tuple[SlackKey, ...]:
        return tuple((stage, i + 1) for i in range(self.slack_count))


@dataclass(frozen=True)
class WHDisjunction:
    """Union over slack assignments of a template system, or an explicit union.

    For a template, every stage contributes ``slack_count`` slacks ranging
    over ``{0..m-1}``.  With ``disjuncts`` set, the union is that list.
    """

    template: WHSystem | None
    stages: tuple[StageInfo, ...] = ()
    disjuncts: tuple[WHSystem, ...] | None = None

    @property
    def dimension(self) -> int:
        if self.template is not None:
            return self.template.dimension
        return self.disjuncts[0].dimension if self.disjuncts else 0

    def slack_ranges(self) -> dict[SlackKey, int]:
        out = {}
        for st, info in enumerate(self.stages, start=1):
            for k in info.slack_keys(st):
                out[k] = info.m
        return out

    def disjunct_count(self) -> int:
        if self.disjuncts is not None:
            return len(self.disjuncts)
        return math.prod(self.slack_ranges().values())

    def assignments(self) -> Iterator[dict[SlackKey, int]]:
        """Slack assignments in lexicographic order."""
        ranges = self.slack_ranges()
        keys = sorted(ranges)
        for vals in itertools.product(*(range(ranges[k]) for k in keys)):
            yield dict(zip(keys, vals))

    def expand(self) -> Iterator[WHSystem]:
        if self.disjuncts is not None:
            yield from self.disjuncts
            return
        check_cap("disjuncts", self.disjunct_count())
        for s in self.assignments():
            yield self.template.instantiate(s)


def wh_eliminate_case1(system: WHSystem, var: int, stage: int = 1) -> tuple[WHSystem, StageInfo]:
    """Both lower and upper bounds on var: pair them through one slack per lower-bound row."""
    cl = classify(system, var)
    if not cl.P or not cl.N:
        raise DomainError("case 1 needs rows with both signs on the variable")
    ineqs, congs = system.inequalities, system.congruences
    q = lcm_list([ineqs[i].coeffs[var] for i in cl.P + cl.N] + [congs[j].coeffs[var] for j in cl.R])

    def scaled_row(i: int):
        r = ineqs[i]
        k = q // abs(r.coeffs[var])
        return _drop(tuple(k * c for c in r.coeffs), var), r.rhs.scale(k)

    P = [scaled_row(i) for i in cl.P]
    N = [scaled_row(i) for i in cl.N]
    R = []
    for j in cl.R:
        c = congs[j]
        k = q // c.coeffs[var]
        R.append((_drop(tuple(k * v for v in c.coeffs), var), c.rhs.scale(k), abs(k) * c.modulus))
    m = lcm_list([q] + [mj for _, _, mj in R])
    slack = [(stage, t + 1) for t in range(len(P))]
    out_i, out_c = _z_part(system, var, cl)
    # q*var = bp - ap.x + s_p ; substituting into each upper-bound row
    for (ap, bp), s in zip(P, slack):
        for an, bn in N:
            out_i.append(WHInequality(_vlin(1, ap, 1, an), (bp + bn).plus_slack(s)))
    for cj, dj, mj in R:
        for (ap, bp), s in zip(P, slack):
            out_c.append(CongruenceConstraint(_vlin(1, cj, -1, ap), (dj - bp).plus_slack(s, -1), mj))
    for (ap, bp), s in zip(P, slack):
        out_c.append(CongruenceConstraint(ap, bp.plus_slack(s), q))
    info = StageInfo(system.var_names()[var], 1, q, m, len(P))
    return WHSystem(tuple(out_i), tuple(out_c), system.dimension - 1, _rest_names(system, var)), info


def wh_eliminate_case2(system: WHSystem, var: int, stage: int = 1) -> tuple[WHSystem, StageInfo]:
    """One-sided (or no) bounds and some congruence on var: solve the lowest-index congruence for var."""
    cl = classify(system, var)
    if not cl.R or (cl.P and cl.N):
        raise DomainError("case 2 needs a congruence on the variable and at most one-sided bounds")
    congs = system.congruences
    q = lcm_list([congs[j].coeffs[var] for j in cl.R])
    R = []
    for j in cl.R:
        c = congs[j]
        k = q // c.coeffs[var]
        R.append((_drop(tuple(k * v for v in c.coeffs), var), c.rhs.scale(k), abs(k) * c.modulus))
    (cr, dr, mr), rest = R[0], R[1:]
    m = lcm_list([q] + [mj for _, _, mj in rest])
    s = (stage, 1)
    out_i, out_c = _z_part(system, var, cl)
    # q*var = dr - cr.x + s*mr
    for cj, dj, mj in rest:
        out_c.append(CongruenceConstraint(_vlin(1, cj, -1, cr), (dj - dr).plus_slack(s, -mr), mj))
    out_c.append(CongruenceConstraint(tuple(-v for v in cr), (-dr).plus_slack(s, -mr), q))
    info = StageInfo(system.var_names()[var], 2, q, m, 1, pivot=cl.R[0])
    return WHSystem(tuple(out_i), tuple(out_c), system.dimension - 1, _rest_names(system, var)), info


def wh_eliminate_case3(system: WHSystem, var: int) -> WHSystem:
    """Variable absent: drop its column."""
    cl = classify(system, var)
    if cl.P or cl.N or cl.R:
        raise DomainError("case 3 needs the variable to be absent")
    out_i, out_c = _z_part(system, var, cl)
    return WHSystem(tuple(out_i), tuple(out_c), system.dimension - 1, _rest_names(system, var))


def wh_eliminate(system: WHSystem, var: int, stage: int = 1) -> tuple[WHSystem, StageInfo]:
    cl = classify(system, var)
    if cl.P and cl.N:
        return wh_eliminate_case1(system, var, stage)
    if cl.R:
        return wh_eliminate_case2(system, var, stage)
    if cl.P or cl.N:
        # one-sided bounds without congruences: the variable can always be pushed far enough
        out_i, out_c = _z_part(system, var, cl)
        out = WHSystem(tuple(out_i), tuple(out_c), system.dimension - 1, _rest_names(system, var))
        return out, StageInfo(system.var_names()[var], 3, 1, 1, 0)
    return wh_eliminate_case3(system, var), StageInfo(system.var_names()[var], 3, 1, 1, 0)


def wh_project(system: WHSystem, variables: Sequence[int]) -> WHDisjunction:
    """Eliminate the given variables (original indices) in order, keeping slacks symbolic."""
    if len(set(variables)) != len(variables):
        raise DomainError("variables to eliminate must be distinct")
    for v in variables:
        _check_var(system, v)
    remaining = list(range(system.dimension))
    cur = system
    stages: list[StageInfo] = []
    for k, v in enumerate(variables, start=1):
        pos = remaining.index(v)
        cur, info = wh_eliminate(cur, pos, stage=k)
        remaining.pop(pos)
        stages.append(info)
    return WHDisjunction(cur, tuple(stages))


def cong_reduce(slack: int, m: int, context: Sequence[CongruenceConstraint] = ()) -> int:
    """Reduce a slack value mod m; m must be a common multiple of the context moduli."""
    if m < 1:
        raise DomainError("modulus must be positive")
    for c in context:
        if m % c.modulus:
            raise DomainError(f"{m} is not a multiple of modulus {c.modulus}")
    return mod_reduce(slack, m)


# -- membership ------------------------------------------------------------------------


def _system_mask(system: WHSystem, x: Sequence[int], keys: list[SlackKey], grid: np.ndarray) -> np.ndarray:
    """Which rows of the slack grid satisfy the template at point x."""
    ok = np.ones(len(grid), dtype=bool)
    idx = {k: i for i, k in enumerate(keys)}

    def rhs_values(rhs: SlackAffine) -> np.ndarray:
        vals = np.full(len(grid), rhs.const, dtype=np.int64)
        for k, c in rhs.terms:
            vals = vals + c * grid[:, idx[k]]
        return vals

    for r in system.inequalities:
        ok &= dot(r.coeffs, x) >= rhs_values(r.rhs)
    for c in system.congruences:
        ok &= (int(dot(c.coeffs, x)) - rhs_values(c.rhs)) % c.modulus == 0
    return ok


def wh_membership(d: WHDisjunction, point: Sequence[int]) -> bool:
    """True iff some slack assignment in range (or some listed disjunct) contains the point."""
    x = _ivec(point)
    if len(x) != d.dimension:
        raise DomainError("point arity differs from the disjunction")
    if d.disjuncts is not None:
        return any(s.contains(x) for s in d.disjuncts)
    ranges = d.slack_ranges()
    keys = sorted(ranges)
    if not keys:
        return d.template.contains(x)
    check_cap("disjuncts", d.disjunct_count())
    grid = np.indices([ranges[k] for k in keys]).reshape(len(keys), -1).T
    return bool(_system_mask(d.template, [int(v) for v in x], keys, grid).any())


def format_system(system: WHSystem) -> list[str]:
    names = system.var_names()

    def lhs(coeffs):
        return _linear_text(list(zip(coeffs, names)), 0)

    lines = [f"{lhs(r.coeffs)} >= {r.rhs}" for r in system.inequalities]
    lines += [f"{lhs(c.coeffs)} == {c.rhs} (mod {c.modulus})" for c in system.congruences]
    return lines
