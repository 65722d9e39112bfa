"""Moving between mixed-integer affine Chvátal systems and MILP projections.

Lifting replaces ceilings by fresh integer variables; the reverse direction
eliminates continuous auxiliaries with Fourier-Motzkin and the integer ones
with a consistency tester composed with the remaining affine map.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chvatal_ast import (
    ACFunction,
    ACInequality,
    ACSystem,
    Ceil,
    Leaf,
    Scale,
    Split,
    Sum,
    as_affine,
    carrier,
    ceiling_count,
    compose_affine,
    decompose,
    drop_var,
    occurs_under_ceiling,
    pad,
)
from .consistency import ip_tester
from .core_arith import ONE, ZERO, DomainError, mat, unit, vec
from .fourier_motzkin import LinearSystem, fm_eliminate_all

ROLES = ("target", "aux-cont", "aux-int")


@dataclass(frozen=True)
class MILPSystem:
    """Rows A (x, y, z) >= b; each column is a target, a continuous or an integer auxiliary."""

    A: tuple[tuple[Fraction, ...], ...]
    b: tuple[Fraction, ...]
    roles: tuple[str, ...]
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        A = mat(self.A) if self.A else ()
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", vec(self.b))
        object.__setattr__(self, "roles", tuple(self.roles))
        if len(self.b) != len(A):
            raise DomainError("row count of A differs from length of b")
        if A and len(A[0]) != len(self.roles):
            raise DomainError("one role per column expected")
        if any(r not in ROLES for r in self.roles):
            raise DomainError(f"roles must be among {ROLES}")
        if self.names is not None and len(self.names) != len(self.roles):
            raise DomainError("one name per column expected")

    @property
    def ncols(self) -> int:
        return len(self.roles)

    def columns(self, role: str) -> list[int]:
        return [j for j, r in enumerate(self.roles) if r == role]

    def var_names(self) -> tuple[str, ...]:
        if self.names is not None:
            return self.names
        out, count = [], {"target": 0, "aux-cont": 0, "aux-int": 0}
        prefix = {"target": "x", "aux-cont": "y", "aux-int": "z"}
        for r in self.roles:
            count[r] += 1
            out.append(f"{prefix[r]}{count[r]}")
        return tuple(out)


@dataclass(frozen=True)
class LiftResult:
    milp: MILPSystem
    introduced: tuple[tuple[int, str], ...]  # (column, what it replaced)


# -- lifting ------------------------------------------------------------------------


def _fresh(names: Sequence[str], stem: str = "y") -> str:
    k = 1
    while f"{stem}{k}" in names:
        k += 1
    return f"{stem}{k}"


def reduce_ceiling_once(system: ACSystem) -> ACSystem:
    """Remove one ceiling with one fresh integer variable (appended last).

    The first inequality f <= b with a ceiling is written f = gamma*ceil(g1) + g2
    and replaced, in place, by g1 - w <= 0 and g2 + gamma*w <= b.
    """
    idx = next((i for i, q in enumerate(system.inequalities) if system_cc(q)), None)
    if idx is None:
        raise DomainError("no ceiling left to reduce")
    n = system.dimension
    ineq = system.inequalities[idx]
    split = decompose(ineq.function)
    assert isinstance(split, Split)
    w = Leaf(unit(n + 1, n), ZERO)
    g1 = pad(split.g1, n + 1).root
    g2 = pad(split.g2, n + 1).root
    first = ACInequality(ACFunction(Sum(ONE, g1, ONE, Leaf(tuple(-c for c in w.coeffs), ZERO))), ZERO)
    second = ACInequality(ACFunction(Sum(ONE, g2, split.gamma, w)), ineq.bound)
    rest = [ACInequality(pad(q.function, n + 1), q.bound) for q in system.inequalities]
    rest[idx: idx + 1] = [first, second]
    names = system.var_names()
    return ACSystem(
        tuple(rest),
        n + 1,
        system.integer_vars | {n},
        names + (_fresh(names),),
    )


def system_cc(ineq: ACInequality) -> int:
    return ceiling_count(ineq.function)


def _affine_rows(system: ACSystem) -> tuple[list, list]:
    """Ceiling-free inequalities c.x + k <= bound as rows (-c).x >= k - bound."""
    A, b = [], []
    for q in system.inequalities:
        leaf = as_affine(q.function)
        A.append(tuple(-c for c in leaf.coeffs))
        b.append(leaf.const - q.bound)
    return A, b


def lift_to_milp(system: ACSystem) -> LiftResult:
    """MILP whose projection onto the original variables is the given MIAC set."""
    if system.families:
        raise DomainError("implicit inequality families cannot be lifted")
    n0 = system.dimension
    cur = system
    introduced = []
    while cur.total_ceiling_count():
        idx = next(i for i, q in enumerate(cur.inequalities) if system_cc(q))
        cur = reduce_ceiling_once(cur)
        introduced.append((cur.dimension - 1, f"ceiling in inequality {idx + 1}"))
    A, b = _affine_rows(cur)
    ncols = cur.dimension
    names = list(cur.var_names())
    dups = sorted(system.integer_vars)
    total = ncols + len(dups)
    A = [tuple(r) + (ZERO,) * len(dups) for r in A]
    for k, j in enumerate(dups):
        col = ncols + k
        A.append(tuple(ONE if c == j else -ONE if c == col else ZERO for c in range(total)))
        A.append(tuple(-ONE if c == j else ONE if c == col else ZERO for c in range(total)))
        b.extend([ZERO, ZERO])
        names.append(_fresh(names, "v"))
        introduced.append((col, f"integer copy of {names[j]}"))
    roles = ("target",) * n0 + ("aux-int",) * (total - n0)
    return LiftResult(MILPSystem(tuple(A), tuple(b), roles, tuple(names)), tuple(introduced))


# -- projecting back ----------------------------------------------------------------


def milp_to_ac(system: MILPSystem, target_vars: Sequence[int] | None = None) -> ACSystem:
    """AC system (no integrality marks) describing the projection onto target_vars.

    Columns outside target_vars that are not integer auxiliaries are
    projected out as continuous variables.
    """
    tgt = system.columns("target") if target_vars is None else list(target_vars)
    ints = system.columns("aux-int")
    if set(tgt) & set(ints):
        raise DomainError("a target column cannot be an integer auxiliary")
    cont = [j for j in range(system.ncols) if j not in tgt and j not in ints]
    order = tgt + ints + cont
    nt, ni = len(tgt), len(ints)
    A = [tuple(r[j] for j in order) for r in system.A]
    lin = LinearSystem(tuple(A), system.b)
    if cont and A:
        lin, _ = fm_eliminate_all(lin, range(nt + ni, nt + ni + len(cont)))
    names = tuple(system.var_names()[j] for j in tgt)
    ineqs: list[ACInequality] = []
    int_rows, T, d = [], [], []
    for r, bi in zip(lin.A, lin.b):
        x_part, z_part = r[:nt], r[nt: nt + ni]
        if any(z_part):
            int_rows.append(z_part)
            T.append(tuple(-c for c in x_part))
            d.append(bi)
        elif any(x_part) or bi > 0:
            # d - a.x <= 0
            ineqs.append(ACInequality(ACFunction(Leaf(tuple(-c for c in x_part), bi), nt), ZERO))
    families = ()
    if int_rows:
        tester = ip_tester(int_rows)
        for f in tester.functions:
            ineqs.append(ACInequality(compose_affine(f, T, d), ZERO))
        if tester.family is not None:
            families = (tester.family.compose(T, d),)
    return ACSystem(tuple(ineqs), nt, frozenset(), names, families)


# -- variable elimination -------------------------------------------------------------


def _without(f: ACFunction, j: int) -> ACFunction:
    """f with input j removed, after zeroing its affine coefficients."""

    def zero(nd):
        if isinstance(nd, Leaf):
            return Leaf(tuple(ZERO if i == j else c for i, c in enumerate(nd.coeffs)), nd.const)
        if isinstance(nd, Scale):
            return Scale(nd.factor, zero(nd.child))
        if isinstance(nd, Sum):
            return Sum(nd.a, zero(nd.left), nd.b, zero(nd.right))
        return type(nd)(zero(nd.child))

    return drop_var(ACFunction(zero(f.root), f.dimension), j)


def _occurs(f: ACFunction, j: int) -> bool:
    def go(nd):
        if isinstance(nd, Leaf):
            return nd.coeffs[j] != 0
        if isinstance(nd, (Ceil, Scale)):
            return go(nd.child)
        return go(nd.left) or go(nd.right)

    return go(f.root)


def _reindex(ints: frozenset[int], j: int) -> frozenset[int]:
    return frozenset(i - (i > j) for i in ints if i != j)


def ves_eliminate(system: ACSystem, var: int) -> ACSystem:
    """Exact projection of a MIAC set along one variable, as a MIAC set.

    A continuous variable outside every ceiling is removed by pairing
    bounds.  Otherwise the inequalities mentioning it are lifted to a MILP
    in which it and the lift variables are auxiliaries, and that MILP is
    projected back to an AC system over the remaining variables.
    """
    n = system.dimension
    if not 0 <= var < n:
        raise DomainError(f"variable index {var} out of range")
    if system.families:
        raise DomainError("implicit inequality families cannot be eliminated through")
    names = system.var_names()
    rest_names = names[:var] + names[var + 1:]
    ints = _reindex(system.integer_vars, var)
    touching = [q for q in system.inequalities if _occurs(q.function, var)]
    kept = [ACInequality(drop_var(q.function, var), q.bound) for q in system.inequalities if not _occurs(q.function, var)]
    continuous = var not in system.integer_vars
    if continuous and not any(occurs_under_ceiling(q.function, var) for q in touching):
        coef = [carrier(q.function).root.coeffs[var] for q in touching]
        lower = [(q, -a) for q, a in zip(touching, coef) if a < 0]
        upper = [(q, a) for q, a in zip(touching, coef) if a > 0]
        out = []
        for ql, al in lower:
            for qu, au in upper:
                f = Sum(1 / al, _without(ql.function, var).root, 1 / au, _without(qu.function, var).root)
                out.append(ACInequality(ACFunction(f, n - 1), ql.bound / al + qu.bound / au))
        return ACSystem(tuple(out + kept), n - 1, ints, rest_names)
    # lift the inequalities that mention the variable
    sub = ACSystem(tuple(touching), n, frozenset({var}) if not continuous else frozenset(), names)
    while sub.total_ceiling_count():
        sub = reduce_ceiling_once(sub)
    A, b = _affine_rows(sub)
    roles = ["target"] * sub.dimension
    for j in range(n, sub.dimension):
        roles[j] = "aux-int"
    roles[var] = "aux-cont" if continuous else "aux-int"
    milp = MILPSystem(tuple(A), tuple(b), tuple(roles), sub.var_names())
    tgt = [j for j in range(n) if j != var]
    proj = milp_to_ac(milp, tgt)
    return ACSystem(tuple(kept) + proj.inequalities, n - 1, ints, rest_names, proj.families)
