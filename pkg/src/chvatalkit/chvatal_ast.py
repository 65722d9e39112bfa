"""Affine Chvátal functions as binary trees.

A tree is built from affine leaves by nonnegative combinations and the
ceiling operator.  Trees are immutable and never simplified behind the
caller's back: ceiling count and depth are properties of the representation.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence, Union

import numpy as np

from .core_arith import (
    ONE,
    ZERO,
    DomainError,
    Q,
    RationalVector,
    ceil_rational,
    denominator_lcm,
    format_rational,
    vec,
)


class ACNode(ABC):
    @abstractmethod
    def dim(self) -> int: ...


@dataclass(frozen=True)
class Leaf(ACNode):
    coeffs: RationalVector
    const: Fraction = ZERO

    def dim(self) -> int:
        return len(self.coeffs)


@dataclass(frozen=True)
class Ceil(ACNode):
    child: ACNode

    def dim(self) -> int:
        return self.child.dim()


@dataclass(frozen=True)
class Scale(ACNode):
    factor: Fraction
    child: ACNode

    def __post_init__(self):
        if self.factor < 0:
            raise DomainError("scale factor must be nonnegative")

    def dim(self) -> int:
        return self.child.dim()


@dataclass(frozen=True)
class Sum(ACNode):
    a: Fraction
    left: ACNode
    b: Fraction
    right: ACNode

    def __post_init__(self):
        if self.a < 0 or self.b < 0:
            raise DomainError("sum weights must be nonnegative")
        if self.left.dim() != self.right.dim():
            raise DomainError("sum children differ in dimension")

    def dim(self) -> int:
        return self.left.dim()


@dataclass(frozen=True)
class ACFunction:
    """Root node plus input arity."""

    root: ACNode
    dimension: int = field(default=-1)

    def __post_init__(self):
        d = self.root.dim()
        if self.dimension == -1:
            object.__setattr__(self, "dimension", d)
        elif d != self.dimension:
            raise DomainError(f"tree has arity {d}, declared {self.dimension}")

    def __call__(self, x: Sequence) -> Fraction:
        return evaluate(self, x)

    def __add__(self, other: "ACFunction") -> "ACFunction":
        return ACFunction(Sum(ONE, self.root, ONE, _node(other)))

    def __rmul__(self, c) -> "ACFunction":
        return ACFunction(Scale(Q(c), self.root))

    def __str__(self) -> str:
        return format_function(self)


# -- constructors ----------------------------------------------------------


def affine(coeffs: Iterable, const=0) -> ACFunction:
    return ACFunction(Leaf(vec(coeffs), Q(const)))


def zero(n: int) -> ACFunction:
    return affine([0] * n, 0)


def ceil(f: "ACFunction | ACNode") -> ACFunction:
    return ACFunction(Ceil(_node(f)))


def scale(c, f: "ACFunction | ACNode") -> ACFunction:
    return ACFunction(Scale(Q(c), _node(f)))


def add(a, f: "ACFunction | ACNode", b, g: "ACFunction | ACNode") -> ACFunction:
    return ACFunction(Sum(Q(a), _node(f), Q(b), _node(g)))


def _node(f: "ACFunction | ACNode") -> ACNode:
    return f.root if isinstance(f, ACFunction) else f


def _fn(f: "ACFunction | ACNode") -> ACFunction:
    return f if isinstance(f, ACFunction) else ACFunction(f)


# -- inequalities and systems -----------------------------------------------


@dataclass(frozen=True)
class ACInequality:
    """function(x) <= bound."""

    function: ACFunction
    bound: Fraction = ZERO

    def holds(self, x: Sequence) -> bool:
        return evaluate(self.function, x) <= self.bound


@dataclass(frozen=True)
class ACSystem:
    """Affine Chvátal inequalities over R^n with integrality marks on `integer_vars`.

    `families` holds implicitly enumerated inequality families (see
    :class:`chvatalkit.consistency.ChvatalFamily`); every member must be <= 0.
    """

    inequalities: tuple[ACInequality, ...]
    dimension: int
    integer_vars: frozenset[int] = frozenset()
    names: tuple[str, ...] | None = None
    families: tuple = ()

    def __post_init__(self):
        for ineq in self.inequalities:
            if ineq.function.dimension != self.dimension:
                raise DomainError("inequality arity differs from system dimension")
        if any(not 0 <= i < self.dimension for i in self.integer_vars):
            raise DomainError("integer variable index out of range")
        if self.names is not None and len(self.names) != self.dimension:
            raise DomainError("names length differs from dimension")

    def var_names(self) -> tuple[str, ...]:
        return self.names or tuple(f"x{i + 1}" for i in range(self.dimension))

    def contains(self, x: Sequence) -> bool:
        """Membership, ignoring integrality marks (callers enumerate lattice points)."""
        xs = vec(x)
        if any(ineq.function(xs) > ineq.bound for ineq in self.inequalities):
            return False
        return all(fam.accepts(xs) for fam in self.families)

    def total_ceiling_count(self) -> int:
        return sum(ceiling_count(i.function) for i in self.inequalities)


# -- evaluation ---------------------------------------------------------------


def evaluate(f: "ACFunction | ACNode", x: Sequence) -> Fraction:
    node = _node(f)
    xs = vec(x)
    if len(xs) != node.dim():
        raise DomainError(f"point has length {len(xs)}, function arity {node.dim()}")
    return _eval(node, xs)


def _eval(node: ACNode, x: RationalVector) -> Fraction:
    if isinstance(node, Leaf):
        s = node.const
        for c, v in zip(node.coeffs, x):
            if c:
                s += c * v
        return s
    if isinstance(node, Ceil):
        return Fraction(ceil_rational(_eval(node.child, x)))
    if isinstance(node, Scale):
        return node.factor * _eval(node.child, x) if node.factor else ZERO
    if isinstance(node, Sum):
        out = ZERO
        if node.a:
            out += node.a * _eval(node.left, x)
        if node.b:
            out += node.b * _eval(node.right, x)
        return out
    raise TypeError(node)


_BIG = 1 << 60


def _mul(arr: np.ndarray, k: int) -> np.ndarray:
    if arr.dtype != object and arr.size and int(np.abs(arr).max()) * abs(k) >= _BIG:
        arr = arr.astype(object)
    return arr * k


def evaluate_many(f: "ACFunction | ACNode", points: np.ndarray) -> tuple[np.ndarray, int]:
    """Exact evaluation at many integer points.

    Returns (numerators, denominator) with value_i = numerators[i] / denominator.
    """
    pts = np.asarray(points)
    if pts.ndim != 2 or pts.shape[1] != _node(f).dim():
        raise DomainError("points must be an (N, dim) integer array")
    return _eval_many(_node(f), pts)


def _eval_many(node: ACNode, pts: np.ndarray) -> tuple[np.ndarray, int]:
    if isinstance(node, Leaf):
        d = denominator_lcm(node.coeffs + (node.const,))
        ints = [int(c * d) for c in node.coeffs]
        k = int(node.const * d)
        bound = sum(abs(c) for c in ints) * (int(np.abs(pts).max()) if pts.size else 0) + abs(k)
        if bound < _BIG:
            num = pts.astype(np.int64) @ np.array(ints, dtype=np.int64) + k
        else:
            num = pts.astype(object) @ np.array(ints, dtype=object) + k
        return num, d
    if isinstance(node, Ceil):
        n, d = _eval_many(node.child, pts)
        return -((-n) // d), 1
    if isinstance(node, Scale):
        n, d = _eval_many(node.child, pts)
        return _mul(n, node.factor.numerator), d * node.factor.denominator
    if isinstance(node, Sum):
        n1, d1 = _eval_many(node.left, pts)
        n2, d2 = _eval_many(node.right, pts)
        e1, e2 = d1 * node.a.denominator, d2 * node.b.denominator
        L = math.lcm(e1, e2)
        return _mul(n1, node.a.numerator * (L // e1)) + _mul(n2, node.b.numerator * (L // e2)), L
    raise TypeError(node)


# -- structure ----------------------------------------------------------------


def ceiling_count(f: "ACFunction | ACNode") -> int:
    node = _node(f)
    if isinstance(node, Leaf):
        return 0
    if isinstance(node, Ceil):
        return 1 + ceiling_count(node.child)
    if isinstance(node, Scale):
        return ceiling_count(node.child)
    return ceiling_count(node.left) + ceiling_count(node.right)


def depth(f: "ACFunction | ACNode") -> int:
    node = _node(f)
    if isinstance(node, Leaf):
        return 0
    if isinstance(node, (Ceil, Scale)):
        return 1 + depth(node.child)
    return 1 + max(depth(node.left), depth(node.right))


def carrier(f: "ACFunction | ACNode") -> ACFunction:
    """Affine function left after deleting every ceiling."""
    c, k = _carrier(_node(f))
    return ACFunction(Leaf(c, k))


def _carrier(node: ACNode) -> tuple[RationalVector, Fraction]:
    if isinstance(node, Leaf):
        return node.coeffs, node.const
    if isinstance(node, Ceil):
        return _carrier(node.child)
    if isinstance(node, Scale):
        c, k = _carrier(node.child)
        return tuple(node.factor * v for v in c), node.factor * k
    c1, k1 = _carrier(node.left)
    c2, k2 = _carrier(node.right)
    return tuple(node.a * u + node.b * v for u, v in zip(c1, c2)), node.a * k1 + node.b * k2


def as_affine(f: "ACFunction | ACNode") -> Leaf:
    """Collapse a ceiling-free tree to a single leaf."""
    if ceiling_count(f) != 0:
        raise DomainError("function has ceilings; not affine")
    return carrier(f).root


# -- decomposition ------------------------------------------------------------


@dataclass(frozen=True)
class Affine:
    """Decomposition outcome: no ceilings, the function is this affine map."""

    function: ACFunction


@dataclass(frozen=True)
class Split:
    """Decomposition outcome: f = gamma * ceil(g1) + g2."""

    gamma: Fraction
    g1: ACFunction
    g2: ACFunction


def decompose(f: "ACFunction | ACNode") -> Affine | Split:
    """Write f as gamma*ceil(g1) + g2 with cc(g1) + cc(g2) + 1 <= cc(f).

    In a sum the summand carrying more ceilings is split first (ties go
    left); subtrees under a zero weight count as ceiling-free.
    """
    node = _node(f)
    if ceiling_count(node) == 0:
        return Affine(ACFunction(as_affine(node)))
    gamma, g1, g2 = _split(node)
    return Split(gamma, ACFunction(g1), ACFunction(g2))


def _live_cc(node: ACNode) -> int:
    """Ceilings that are not annihilated by a zero weight."""
    if isinstance(node, Leaf):
        return 0
    if isinstance(node, Ceil):
        return 1 + _live_cc(node.child)
    if isinstance(node, Scale):
        return _live_cc(node.child) if node.factor else 0
    return (_live_cc(node.left) if node.a else 0) + (_live_cc(node.right) if node.b else 0)


def _prune(node: ACNode) -> ACNode:
    """Replace zero-weighted subtrees by zero leaves."""
    n = node.dim()
    if isinstance(node, Leaf):
        return node
    if isinstance(node, Ceil):
        return Ceil(_prune(node.child))
    if isinstance(node, Scale):
        return Scale(node.factor, _prune(node.child) if node.factor else Leaf((ZERO,) * n))
    left = _prune(node.left) if node.a else Leaf((ZERO,) * n)
    right = _prune(node.right) if node.b else Leaf((ZERO,) * n)
    return Sum(node.a, left, node.b, right)


def _split(node: ACNode) -> tuple[Fraction, ACNode, ACNode]:
    n = node.dim()
    zero_leaf = Leaf((ZERO,) * n)
    if _live_cc(node) == 0:
        # every ceiling sits under a zero weight: f is affine in disguise
        return ONE, zero_leaf, _prune(node)
    if isinstance(node, Ceil):
        return ONE, node.child, zero_leaf
    if isinstance(node, Scale):
        g, g1, g2 = _split(node.child)
        return node.factor * g, g1, Scale(node.factor, g2)
    assert isinstance(node, Sum)
    lc = _live_cc(node.left) if node.a else 0
    rc = _live_cc(node.right) if node.b else 0
    if lc >= rc:
        g, g1, g2 = _split(node.left)
        return node.a * g, g1, Sum(node.a, g2, node.b, node.right)
    g, g1, g2 = _split(node.right)
    return node.b * g, g1, Sum(node.a, node.left, node.b, g2)


# -- ceilingization -------------------------------------------------------------

CEIL_PATTERNS = ("none", "whole", "per-term", "per-variable")


def ceilingize(g: "ACFunction | ACNode", pattern: "str | ACFunction") -> ACFunction:
    """A Chvátal function whose carrier is the affine function g."""
    leaf = as_affine(g)
    n = leaf.dim()
    if isinstance(pattern, (ACFunction, ACNode)):
        tmpl = _fn(pattern)
        if carrier(tmpl).root != leaf:
            raise DomainError("template carrier differs from the affine function")
        return tmpl
    if all(c == 0 for c in leaf.coeffs) and leaf.const == 0:
        return ACFunction(leaf)
    if pattern == "none":
        return ACFunction(leaf)
    if pattern == "whole":
        return ACFunction(Ceil(leaf))
    parts: list[tuple[Fraction, ACNode]] = []
    if pattern == "per-term":
        for j, c in enumerate(leaf.coeffs):
            if c:
                parts.append((ONE, Ceil(Leaf(_e(n, j, c)))))
        if leaf.const:
            parts.append((ONE, Ceil(Leaf((ZERO,) * n, leaf.const))))
    elif pattern == "per-variable":
        for j, c in enumerate(leaf.coeffs):
            if c:
                sign = ONE if c > 0 else -ONE
                parts.append((abs(c), Ceil(Leaf(_e(n, j, sign)))))
        if leaf.const:
            parts.append((ONE, Leaf((ZERO,) * n, leaf.const)))
    else:
        raise DomainError(f"unknown ceiling pattern {pattern!r}")
    return ACFunction(_fold(parts))


def _e(n: int, j: int, c: Fraction) -> RationalVector:
    return tuple(c if i == j else ZERO for i in range(n))


def _fold(parts: list[tuple[Fraction, ACNode]]) -> ACNode:
    w, acc = parts[0]
    if len(parts) == 1:
        return acc if w == 1 else Scale(w, acc)
    w2, nxt = parts[1]
    acc = Sum(w, acc, w2, nxt)
    for w, nxt in parts[2:]:
        acc = Sum(ONE, acc, w, nxt)
    return acc


# -- composition and re-indexing ---------------------------------------------------


def compose_affine(f: "ACFunction | ACNode", T: Sequence[Sequence], offset: Sequence | None = None) -> ACFunction:
    """g(x) = f(T x + offset), with T an m x n rational matrix and f of arity m."""
    node = _node(f)
    rows = [vec(r) for r in T]
    m = node.dim()
    if len(rows) != m:
        raise DomainError(f"map has {len(rows)} outputs, function arity is {m}")
    n = len(rows[0]) if rows else 0
    if any(len(r) != n for r in rows):
        raise DomainError("ragged map matrix")
    d = vec(offset) if offset is not None else (ZERO,) * m
    if len(d) != m:
        raise DomainError("offset length mismatch")
    return ACFunction(_subst(node, rows, d, n), n)


def _subst(node: ACNode, rows, d, n) -> ACNode:
    if isinstance(node, Leaf):
        coeffs = [ZERO] * n
        const = node.const
        for c, r, di in zip(node.coeffs, rows, d):
            if c:
                for j, a in enumerate(r):
                    coeffs[j] += c * a
                const += c * di
        return Leaf(tuple(coeffs), const)
    if isinstance(node, Ceil):
        return Ceil(_subst(node.child, rows, d, n))
    if isinstance(node, Scale):
        return Scale(node.factor, _subst(node.child, rows, d, n))
    return Sum(node.a, _subst(node.left, rows, d, n), node.b, _subst(node.right, rows, d, n))


def pad(f: "ACFunction | ACNode", new_dim: int) -> ACFunction:
    """Append zero coefficients so the function takes new_dim inputs."""
    node = _node(f)
    extra = new_dim - node.dim()
    if extra < 0:
        raise DomainError("cannot shrink arity by padding")
    return ACFunction(_pad(node, extra))


def _pad(node: ACNode, extra: int) -> ACNode:
    if isinstance(node, Leaf):
        return Leaf(node.coeffs + (ZERO,) * extra, node.const)
    if isinstance(node, Ceil):
        return Ceil(_pad(node.child, extra))
    if isinstance(node, Scale):
        return Scale(node.factor, _pad(node.child, extra))
    return Sum(node.a, _pad(node.left, extra), node.b, _pad(node.right, extra))


def drop_var(f: "ACFunction | ACNode", j: int) -> ACFunction:
    """Remove input j, which must have zero coefficient in every leaf."""
    node = _node(f)

    def go(nd: ACNode) -> ACNode:
        if isinstance(nd, Leaf):
            if nd.coeffs[j] != 0:
                raise DomainError(f"variable {j} still occurs")
            return Leaf(nd.coeffs[:j] + nd.coeffs[j + 1:], nd.const)
        if isinstance(nd, Ceil):
            return Ceil(go(nd.child))
        if isinstance(nd, Scale):
            return Scale(nd.factor, go(nd.child))
        return Sum(nd.a, go(nd.left), nd.b, go(nd.right))

    return ACFunction(go(node))


def occurs_under_ceiling(f: "ACFunction | ACNode", j: int) -> bool:
    def go(nd: ACNode, inside: bool) -> bool:
        if isinstance(nd, Leaf):
            return inside and nd.coeffs[j] != 0
        if isinstance(nd, Ceil):
            return go(nd.child, True)
        if isinstance(nd, Scale):
            return go(nd.child, inside)
        return go(nd.left, inside) or go(nd.right, inside)

    return go(_node(f), False)


def integer_valued(f: "ACFunction | ACNode") -> bool:
    """Sufficient syntactic test that f takes integer values on every input."""
    node = _node(f)
    if isinstance(node, Ceil):
        return True
    if isinstance(node, Leaf):
        return all(c == 0 for c in node.coeffs) and node.const.denominator == 1
    if isinstance(node, Scale):
        return node.factor == 0 or (node.factor.denominator == 1 and integer_valued(node.child))
    return all(
        w == 0 or (w.denominator == 1 and integer_valued(c))
        for w, c in ((node.a, node.left), (node.b, node.right))
    )


# -- normal form for comparisons ---------------------------------------------------


def expand(f: "ACFunction | ACNode") -> tuple:
    """Hashable normal form: affine part plus merged weighted ceiling terms.

    Two trees with equal normal forms define the same function; the converse
    does not hold.
    """
    coeffs, const, terms = _expand(_node(f))
    return (coeffs, const, frozenset((k, w) for k, w in terms.items() if w != 0))


def _expand(node: ACNode):
    if isinstance(node, Leaf):
        return node.coeffs, node.const, {}
    if isinstance(node, Ceil):
        return (ZERO,) * node.dim(), ZERO, {expand(node.child): ONE}
    if isinstance(node, Scale):
        c, k, t = _expand(node.child)
        a = node.factor
        return tuple(a * v for v in c), a * k, {key: a * w for key, w in t.items()}
    c1, k1, t1 = _expand(node.left)
    c2, k2, t2 = _expand(node.right)
    terms = {key: node.a * w for key, w in t1.items()}
    for key, w in t2.items():
        terms[key] = terms.get(key, ZERO) + node.b * w
    return (
        tuple(node.a * u + node.b * v for u, v in zip(c1, c2)),
        node.a * k1 + node.b * k2,
        terms,
    )


# -- text and JSON ------------------------------------------------------------------


def format_affine(coeffs: Sequence[Fraction], const: Fraction, names: Sequence[str]) -> str:
    parts: list[str] = []
    for c, name in zip(coeffs, names):
        if c == 0:
            continue
        mag = abs(c)
        txt = name if mag == 1 else f"{format_rational(mag)} {name}"
        parts.append(("- " if c < 0 else "+ ") + txt)
    if const != 0 or not parts:
        parts.append(("- " if const < 0 else "+ ") + format_rational(abs(const)))
    s = " ".join(parts)
    return s[2:] if s.startswith("+ ") else "-" + s[2:]


def format_function(f: "ACFunction | ACNode", names: Sequence[str] | None = None) -> str:
    node = _node(f)
    names = names or [f"x{i + 1}" for i in range(node.dim())]
    return _fmt(node, names)


def _atom(node: ACNode, names) -> str:
    if isinstance(node, Ceil):
        return f"ceil({_fmt(node.child, names)})"
    return f"({_fmt(node, names)})"


def _weighted(w: Fraction, node: ACNode, names) -> str:
    return _atom(node, names) if w == 1 else f"{format_rational(w)} {_atom(node, names)}"


def _fmt(node: ACNode, names) -> str:
    if isinstance(node, Leaf):
        return format_affine(node.coeffs, node.const, names)
    if isinstance(node, Ceil):
        return _atom(node, names)
    if isinstance(node, Scale):
        return f"{format_rational(node.factor)} {_atom(node.child, names)}"
    return f"{_weighted(node.a, node.left, names)} + {_weighted(node.b, node.right, names)}"


def to_json(f: "ACFunction | ACNode") -> dict:
    node = _node(f)
    if isinstance(node, Leaf):
        return {"leaf": {"coeffs": [format_rational(c) for c in node.coeffs],
                         "const": format_rational(node.const)}}
    if isinstance(node, Ceil):
        return {"ceil": to_json(node.child)}
    if isinstance(node, Scale):
        return {"scale": {"factor": format_rational(node.factor), "node": to_json(node.child)}}
    return {"sum": {"a": format_rational(node.a), "left": to_json(node.left),
                    "b": format_rational(node.b), "right": to_json(node.right)}}


def from_json(obj: dict) -> ACFunction:
    return ACFunction(_from_json(obj))


def _from_json(obj: dict) -> ACNode:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise DomainError("tree node must be a one-key object")
    (kind, body), = obj.items()
    if kind == "leaf":
        return Leaf(vec(body["coeffs"]), Q(body["const"]))
    if kind == "ceil":
        return Ceil(_from_json(body))
    if kind == "scale":
        return Scale(Q(body["factor"]), _from_json(body["node"]))
    if kind == "sum":
        return Sum(Q(body["a"]), _from_json(body["left"]), Q(body["b"]), _from_json(body["right"]))
    raise DomainError(f"unknown node kind {kind!r}")


ACLike = Union[ACFunction, ACNode]
