"""Command-line surface: a small text format for systems and subcommands over it.

File format, one item per line (``#`` starts a comment)::

    kind ac|wh|milp          optional; otherwise inferred
    var x                    continuous variable (a target in MILP files)
    int x1 x2                integer variables
    aux y / auxint z         continuous / integer auxiliaries (MILP files)
    min <expr> / max <expr>  objective, echoed but never solved
    <expr> <= <expr>         also >= and ==
    <expr> == <expr> (mod m) congruence (integer variables only)

Expressions mix rationals (``1/50``, ``2.5``), variables, ``ceil(...)`` and
parentheses.  Without a ``kind`` line a file is MILP if it declares
auxiliaries, WH if it has a congruence or only integer variables and no
ceilings, and AC otherwise.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .chvatal_ast import (
    ACFunction,
    ACInequality,
    ACNode,
    ACSystem,
    Ceil,
    Leaf,
    Scale,
    Sum,
    as_affine,
    ceiling_count,
    format_affine,
    format_function,
    from_json,
    to_json,
)
from .consistency import (
    IP,
    LP,
    ChvatalFamily,
    MaxTester,
    ceilingize_tester,
    ip_tester,
    lp_tester_from_fm,
    naive_integer_fm_tester,
    validate_tester,
)
from .core_arith import ONE, ZERO, CapacityError, DomainError, format_rational, lcm_list, parse_rational
from .fourier_motzkin import LinearSystem, fm_eliminate_all, integer_fm_step
from .hilbert_tdi import build_tdi, chvatal_closure_step, closure_trace
from .oracle import Box, enumerate_feasible
from .representability import MILPSystem, lift_to_milp, milp_to_ac, ves_eliminate
from .williams_hooker import (
    CongruenceConstraint,
    SlackAffine,
    StageInfo,
    WHDisjunction,
    WHInequality,
    WHSystem,
    format_system,
    wh_project,
)

SCHEMA = 1
EXIT_PASS, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
KINDS = ("ac", "wh", "milp")


class ParseError(DomainError):
    def __init__(self, line: int, column: int, message: str):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column
        self.message = message


# -- tokens ----------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<op><=|>=|==|[-+*/()]))"
)


@dataclass(frozen=True)
class _Tok:
    kind: str  # num | name | op | end
    text: str
    col: int  # 1-based


def _tokenize(text: str, line: int) -> list[_Tok]:
    out, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            col = pos + len(text[pos:]) - len(text[pos:].lstrip()) + 1
            raise ParseError(line, col, f"unexpected character {text[col - 1]!r}")
        kind = m.lastgroup
        out.append(_Tok(kind, m.group(kind), m.start(kind) + 1))
        pos = m.end()
    out.append(_Tok("end", "", len(text) + 1))
    return out


# -- expressions -----------------------------------------------------------------------


@dataclass
class _Affine:
    coeffs: dict[str, Fraction]
    const: Fraction

    def scaled(self, c: Fraction) -> "_Affine":
        return _Affine({k: v * c for k, v in self.coeffs.items()}, self.const * c)

    def plus(self, other: "_Affine") -> "_Affine":
        out = dict(self.coeffs)
        for k, v in other.coeffs.items():
            out[k] = out.get(k, ZERO) + v
        return _Affine(out, self.const + other.const)


@dataclass
class _Expr:
    """Weighted items in source order; runs of plain terms merge into one affine item."""

    items: list[tuple[Fraction, "_Affine | _Expr", bool]]  # (weight, body, is_ceil)

    def affine(self) -> _Affine | None:
        acc = _Affine({}, ZERO)
        for w, body, is_ceil in self.items:
            if is_ceil:
                return None
            sub = body if isinstance(body, _Affine) else body.affine()
            if sub is None:
                return None
            acc = acc.plus(sub.scaled(w))
        return acc


class _Parser:
    def __init__(self, tokens: list[_Tok], line: int, declared: Sequence[str]):
        self.toks = tokens
        self.i = 0
        self.line = line
        self.declared = set(declared)

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def take(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def error(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        return ParseError(self.line, tok.col, msg)

    def expect(self, text: str) -> _Tok:
        t = self.peek()
        if t.text != text:
            raise self.error(f"expected {text!r}, found {t.text or 'end of line'!r}")
        return self.take()

    def number(self) -> Fraction:
        t = self.take()
        return parse_rational(t.text)

    def expr(self) -> _Expr:
        items: list = []
        run: _Affine | None = None
        first = True
        while True:
            t = self.peek()
            sign = ONE
            if t.text in "+-" and t.kind == "op":
                sign = -ONE if t.text == "-" else ONE
                self.take()
            elif not first:
                break
            first = False
            w, body, is_ceil, plain = self.term()
            if plain:
                run = body.scaled(sign * w) if run is None else run.plus(body.scaled(sign * w))
                continue
            if run is not None:
                items.append((ONE, run, False))
                run = None
            items.append((sign * w, body, is_ceil))
        if run is not None:
            items.append((ONE, run, False))
        return _Expr(items)

    def term(self):
        """(weight, body, is_ceil, plain); plain terms are affine and merge with neighbours."""
        t = self.peek()
        w = ONE
        has_num = False
        if t.kind == "num":
            w = self.number()
            has_num = True
            if self.peek().text == "*":
                self.take()
        t = self.peek()
        if t.kind == "name" and t.text == "ceil":
            self.take()
            self.expect("(")
            inner = self.expr()
            self.expect(")")
            return w, inner, True, False
        if t.text == "(" and self.toks[self.i + 1].text != "mod":
            self.take()
            inner = self.expr()
            self.expect(")")
            return w, inner, False, False
        if t.kind == "name":
            self.take()
            if t.text not in self.declared:
                raise self.error(f"undeclared variable {t.text!r}", t)
            body = _Affine({t.text: ONE}, ZERO)
            if self.peek().text == "/":
                self.take()
                if self.peek().kind != "num":
                    raise self.error("expected a number after '/'")
                d = self.number()
                if d == 0:
                    raise self.error("division by zero")
                w = w / d
            return w, body, False, True
        if has_num:
            return ONE, _Affine({}, w), False, True
        raise self.error(f"expected a term, found {t.text or 'end of line'!r}")


def _node(e: _Expr, names: Sequence[str], where) -> ACNode:
    """Tree for an expression: a lone item keeps its shape, more items fold left."""
    parts: list[tuple[Fraction, ACNode]] = []
    for w, body, is_ceil in e.items:
        if isinstance(body, _Affine):
            node: ACNode = _leaf(body, names)
        else:
            node = _node(body, names, where)
        if is_ceil:
            node = Ceil(node)
        if w < 0:
            if ceiling_count(node):
                raise where("a negative multiple of a ceiling is not an affine Chvátal function")
            node, w = _leaf_scaled(as_affine(node), w), ONE
        parts.append((w, node))
    if not parts:
        return Leaf(tuple(ZERO for _ in names), ZERO)
    w, acc = parts[0]
    if len(parts) == 1:
        return acc if w == 1 else Scale(w, acc)
    for k, (w2, nxt) in enumerate(parts[1:]):
        acc = Sum(w if k == 0 else ONE, acc, w2, nxt)
    return acc


def _leaf(a: _Affine, names: Sequence[str]) -> Leaf:
    return Leaf(tuple(a.coeffs.get(n, ZERO) for n in names), a.const)


def _leaf_scaled(leaf: Leaf, w: Fraction) -> Leaf:
    return Leaf(tuple(c * w for c in leaf.coeffs), leaf.const * w)


# -- files ------------------------------------------------------------------------------


@dataclass(frozen=True)
class ParsedFile:
    system: "ACSystem | WHSystem | MILPSystem"
    kind: str
    objective: str | None = None


_DECL = {"var": "var", "int": "int", "aux": "aux", "auxint": "auxint"}


@dataclass
class _Constraint:
    line: int
    col: int
    lhs: _Expr
    op: str
    rhs: _Expr
    modulus: Fraction | None


def parse(text: str) -> "ACSystem | WHSystem | MILPSystem":
    return parse_file(text).system


def parse_file(text: str) -> ParsedFile:
    decls: list[tuple[str, str]] = []
    kind = None
    objective = None
    body: list[tuple[int, str]] = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        head, _, rest = line.strip().partition(" ")
        col = len(line) - len(line.lstrip()) + 1
        if head in _DECL:
            names = rest.replace(",", " ").split()
            if not names:
                raise ParseError(ln, col, f"'{head}' needs at least one name")
            for nm in names:
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_']*", nm) or nm == "ceil":
                    raise ParseError(ln, line.index(nm) + 1, f"bad variable name {nm!r}")
                if any(nm == d for d, _ in decls):
                    raise ParseError(ln, line.index(nm) + 1, f"variable {nm!r} declared twice")
                decls.append((nm, _DECL[head]))
        elif head == "kind":
            if rest.strip() not in KINDS:
                raise ParseError(ln, col + 5, f"kind must be one of {', '.join(KINDS)}")
            kind = rest.strip()
        elif head in ("min", "max"):
            objective = line.strip()
        else:
            body.append((ln, line))
    names = [d for d, _ in decls]
    cons = [_parse_constraint(ln, line, names) for ln, line in body]
    if objective is not None:
        ln = next(i for i, r in enumerate(text.splitlines(), 1) if r.split("#", 1)[0].strip() == objective)
        p = _Parser(_tokenize(objective[3:], ln), ln, names)
        p.expr()
        if p.peek().kind != "end":
            raise p.error("trailing text after objective")
    roles = dict(decls)
    if kind is None:
        if any(r in ("aux", "auxint") for r in roles.values()):
            kind = "milp"
        elif any(c.modulus is not None for c in cons):
            kind = "wh"
        elif all(r == "int" for r in roles.values()) and all(_affine_pair(c) for c in cons):
            kind = "wh"
        else:
            kind = "ac"
    build = {"ac": _build_ac, "wh": _build_wh, "milp": _build_milp}[kind]
    return ParsedFile(build(decls, cons), kind, objective)


def _parse_constraint(ln: int, line: str, names: Sequence[str]) -> _Constraint:
    toks = _tokenize(line, ln)
    p = _Parser(toks, ln, names)
    start = p.peek()
    lhs = p.expr()
    op = p.peek()
    if op.text not in ("<=", ">=", "=="):
        raise p.error(f"expected a comparison, found {op.text or 'end of line'!r}")
    p.take()
    rhs = p.expr()
    modulus = None
    if p.peek().text == "(" and p.toks[p.i + 1].text == "mod":
        if op.text != "==":
            raise p.error("a modulus needs '=='")
        p.take()
        p.take()
        neg = p.peek().text == "-"
        if neg:
            p.take()
        mt = p.peek()
        if mt.kind != "num":
            raise p.error("expected a modulus")
        modulus = p.number()
        if neg:
            modulus = -modulus
        if modulus == 0:
            raise ParseError(ln, mt.col, "zero modulus")
        if modulus < 0 or modulus.denominator != 1:
            raise ParseError(ln, mt.col, "modulus must be a positive integer")
        p.expect(")")
    if p.peek().kind != "end":
        raise p.error(f"unexpected {p.peek().text!r}")
    return _Constraint(ln, start.col, lhs, op.text, rhs, modulus)


def _affine_pair(c: _Constraint):
    a, b = c.lhs.affine(), c.rhs.affine()
    return None if a is None or b is None else (a, b)


def _build_ac(decls, cons) -> ACSystem:
    names = [d for d, _ in decls]
    for d, r in decls:
        if r in ("aux", "auxint"):
            raise DomainError(f"auxiliary {d!r} in an AC file")
    ineqs: list[ACInequality] = []
    for c in cons:
        if c.modulus is not None:
            raise ParseError(c.line, c.col, "congruences belong in WH files")
        ineqs.extend(_ac_rows(c, names))
    ints = frozenset(i for i, (_, r) in enumerate(decls) if r == "int")
    return ACSystem(tuple(ineqs), len(names), ints, tuple(names))


def _ac_rows(c: _Constraint, names) -> list[ACInequality]:
    def where(msg):
        return ParseError(c.line, c.col, msg)

    lhs, rhs = c.lhs, c.rhs
    if c.op == "==":
        pair = _affine_pair(c)
        if pair is None:
            raise where("equations with ceilings are not affine Chvátal inequalities")
        a, b = pair
        d = a.plus(b.scaled(-ONE))
        leaf = _leaf(_Affine(d.coeffs, ZERO), names)
        return [
            ACInequality(ACFunction(leaf, len(names)), -d.const),
            ACInequality(ACFunction(_leaf_scaled(leaf, -ONE), len(names)), d.const),
        ]
    if c.op == ">=":
        lhs, rhs = rhs, lhs
    # lhs <= rhs
    ra = rhs.affine()
    if ra is None:
        la = lhs.affine()
        if la is None:
            raise where("ceilings on both sides; move them to the smaller side")
        raise where("a ceiling on the larger side is not an affine Chvátal inequality")
    bound = ra.const
    lin = _Affine(ra.coeffs, ZERO)
    if not any(lin.coeffs.values()):
        f = _node(lhs, names, where)
    else:
        la = lhs.affine()
        if la is not None:
            f = _leaf(la.plus(lin.scaled(-ONE)), names)
        else:
            f = Sum(ONE, _node(lhs, names, where), ONE, _leaf(lin.scaled(-ONE), names))
    return [ACInequality(ACFunction(f, len(names)), bound)]


def _integral_row(coeffs: Sequence[Fraction], rhs: Fraction) -> tuple[tuple[int, ...], int, int]:
    k = lcm_list([c.denominator for c in coeffs] + [rhs.denominator])
    return tuple(int(c * k) for c in coeffs), int(rhs * k), k


def _build_wh(decls, cons) -> WHSystem:
    names = [d for d, _ in decls]
    for d, r in decls:
        if r != "int":
            raise DomainError(f"WH systems need integer variables; {d!r} is declared {r}")
    ineqs, congs = [], []
    for c in cons:
        pair = _affine_pair(c)
        if pair is None:
            raise ParseError(c.line, c.col, "ceilings are not allowed in WH files")
        a, b = pair
        d = a.plus(b.scaled(-ONE))  # d.x + d.const (op) 0
        coeffs = tuple(d.coeffs.get(n, ZERO) for n in names)
        if c.modulus is not None:
            row, rhs, k = _integral_row(coeffs, -d.const)
            congs.append(CongruenceConstraint(row, rhs, int(c.modulus) * k))
            continue
        row, rhs, _ = _integral_row(coeffs, -d.const)
        if c.op in (">=", "=="):
            ineqs.append(WHInequality(row, rhs))
        if c.op in ("<=", "=="):
            ineqs.append(WHInequality(tuple(-v for v in row), -rhs))
    return WHSystem(tuple(ineqs), tuple(congs), len(names), tuple(names))


def _build_milp(decls, cons) -> MILPSystem:
    names = [d for d, _ in decls]
    role_of = {"var": "target", "aux": "aux-cont", "auxint": "aux-int"}
    for d, r in decls:
        if r == "int":
            raise DomainError(f"integer target {d!r}: declare an 'auxint' copy tied to it by an equation")
    A, b = [], []
    for c in cons:
        pair = _affine_pair(c)
        if pair is None or c.modulus is not None:
            raise ParseError(c.line, c.col, "MILP files hold linear constraints only")
        a, bb = pair
        d = a.plus(bb.scaled(-ONE))
        row = tuple(d.coeffs.get(n, ZERO) for n in names)
        if c.op in (">=", "=="):
            A.append(row)
            b.append(-d.const)
        if c.op in ("<=", "=="):
            A.append(tuple(-v for v in row))
            b.append(d.const)
    roles = tuple(role_of[r] for _, r in decls)
    return MILPSystem(tuple(A), tuple(b), roles, tuple(names))


# -- serialization ---------------------------------------------------------------------


def serialize(system, objective: str | None = None) -> str:
    """Canonical text; parse(serialize(s)) rebuilds s (AC families excepted, see to_json)."""
    lines = _text_lines(system)
    if objective:
        lines.insert(_decl_count(lines), objective)
    return "\n".join(lines) + "\n"


def _decl_count(lines: list[str]) -> int:
    return sum(1 for ln in lines if ln.split(" ", 1)[0] in ("kind", *_DECL))


def _text_lines(system) -> list[str]:
    if isinstance(system, ACSystem):
        names = system.var_names()
        out = ["kind ac"]
        out += [f"{'int' if i in system.integer_vars else 'var'} {n}" for i, n in enumerate(names)]
        out += [f"{format_function(q.function, names)} <= {format_rational(q.bound)}" for q in system.inequalities]
        for fam in system.families:
            out.append(f"# plus an implicit family over {len(fam.A)} closure rows (kept in JSON output)")
        return out
    if isinstance(system, WHSystem):
        out = ["kind wh"] + [f"int {n}" for n in system.var_names()]
        return out + format_system(system)
    if isinstance(system, MILPSystem):
        decl = {"target": "var", "aux-cont": "aux", "aux-int": "auxint"}
        names = system.var_names()
        out = ["kind milp"] + [f"{decl[r]} {n}" for r, n in zip(system.roles, names)]
        out += [f"{format_affine(r, ZERO, names)} >= {format_rational(v)}" for r, v in zip(system.A, system.b)]
        return out
    if isinstance(system, WHDisjunction):
        out = [f"# union over slacks {_ranges_text(system)}"]
        if system.template is not None:
            return out + _text_lines(system.template)
        for k, d in enumerate(system.disjuncts):
            out.append(f"# disjunct {k + 1}")
            out += _text_lines(d)
        return out
    raise TypeError(f"cannot serialize {type(system).__name__}")


def _ranges_text(d: WHDisjunction) -> str:
    r = d.slack_ranges()
    return ", ".join(f"s{st}_{i} in 0..{m - 1}" for (st, i), m in sorted(r.items())) or "(none)"


def _fr(x) -> str:
    return format_rational(Fraction(x))


def _mat_json(M) -> list:
    return [[_fr(v) for v in r] for r in M]


def _slack_json(s: SlackAffine) -> dict:
    return {"const": s.const, "terms": [[st, i, c] for (st, i), c in s.terms]}


def _slack_from(obj) -> SlackAffine:
    return SlackAffine(obj["const"], tuple(((st, i), c) for st, i, c in obj["terms"]))


def system_json(system) -> dict:
    if isinstance(system, ACSystem):
        return {
            "kind": "ac",
            "names": list(system.var_names()),
            "integer": sorted(system.integer_vars),
            "inequalities": [{"function": to_json(q.function), "bound": _fr(q.bound)} for q in system.inequalities],
            "families": [_family_json(f) for f in system.families],
        }
    if isinstance(system, WHSystem):
        return {
            "kind": "wh",
            "names": list(system.var_names()),
            "inequalities": [{"coeffs": list(r.coeffs), "rhs": _slack_json(r.rhs)} for r in system.inequalities],
            "congruences": [
                {"coeffs": list(c.coeffs), "rhs": _slack_json(c.rhs), "modulus": c.modulus} for c in system.congruences
            ],
        }
    if isinstance(system, MILPSystem):
        return {
            "kind": "milp",
            "names": list(system.var_names()),
            "roles": list(system.roles),
            "A": _mat_json(system.A),
            "b": [_fr(v) for v in system.b],
        }
    if isinstance(system, WHDisjunction):
        return {
            "kind": "wh-disjunction",
            "template": system_json(system.template) if system.template is not None else None,
            "stages": [
                {"var": s.var_name, "case": s.case, "q": s.q, "m": s.m, "slack_count": s.slack_count, "pivot": s.pivot}
                for s in system.stages
            ],
            "disjuncts": None if system.disjuncts is None else [system_json(d) for d in system.disjuncts],
        }
    if isinstance(system, LinearSystem):
        return {"kind": "linear", "A": _mat_json(system.A), "b": [_fr(v) for v in system.b]}
    raise TypeError(f"cannot encode {type(system).__name__}")


def _family_json(f: ChvatalFamily) -> dict:
    return {
        "A": _mat_json(f.A),
        "rounding": f.rounding,
        "T": None if f.T is None else _mat_json(f.T),
        "offset": [_fr(v) for v in f.offset],
    }


def system_from_json(obj: dict):
    if "result" in obj:
        obj = obj["result"]
    kind = obj.get("kind")
    if kind == "ac":
        names = tuple(obj["names"])
        ineqs = tuple(
            ACInequality(ACFunction(from_json(q["function"]).root, len(names)), Fraction(q["bound"]))
            for q in obj["inequalities"]
        )
        fams = tuple(
            ChvatalFamily(f["A"], f["rounding"], f["T"], f["offset"] if f["T"] is not None else None)
            for f in obj.get("families", [])
        )
        return ACSystem(ineqs, len(names), frozenset(obj["integer"]), names, fams)
    if kind == "wh":
        names = tuple(obj["names"])
        return WHSystem(
            tuple(WHInequality(tuple(r["coeffs"]), _slack_from(r["rhs"])) for r in obj["inequalities"]),
            tuple(
                CongruenceConstraint(tuple(c["coeffs"]), _slack_from(c["rhs"]), c["modulus"])
                for c in obj["congruences"]
            ),
            len(names),
            names,
        )
    if kind == "milp":
        return MILPSystem(
            tuple(tuple(Fraction(v) for v in r) for r in obj["A"]),
            tuple(Fraction(v) for v in obj["b"]),
            tuple(obj["roles"]),
            tuple(obj["names"]),
        )
    if kind == "wh-disjunction":
        tmpl = system_from_json(obj["template"]) if obj["template"] is not None else None
        stages = tuple(
            StageInfo(s["var"], s["case"], s["q"], s["m"], s["slack_count"], s["pivot"]) for s in obj["stages"]
        )
        dis = None if obj["disjuncts"] is None else tuple(system_from_json(d) for d in obj["disjuncts"])
        return WHDisjunction(tmpl, stages, dis)
    raise DomainError(f"unknown system kind {kind!r}")


def load(text: str):
    """A system from either the text format or a JSON document written by this tool."""
    if text.lstrip().startswith("{"):
        return system_from_json(json.loads(text))
    return parse(text)


# -- conversions -----------------------------------------------------------------------


def var_names(system) -> tuple[str, ...]:
    if isinstance(system, MILPSystem):
        return tuple(system.var_names()[j] for j in system.columns("target"))
    if isinstance(system, WHDisjunction):
        if system.template is not None:
            return system.template.var_names()
        return system.disjuncts[0].var_names() if system.disjuncts else ()
    return system.var_names()


def as_ac(system) -> ACSystem:
    if isinstance(system, ACSystem):
        return system
    if isinstance(system, WHSystem):
        if system.congruences:
            raise DomainError("congruences have no AC form here; use --scheme wh")
        n = system.dimension
        ineqs = tuple(
            ACInequality(ACFunction(Leaf(tuple(Fraction(-c) for c in r.coeffs), Fraction(r.rhs.const)), n), ZERO)
            for r in system.inequalities
        )
        return ACSystem(ineqs, n, frozenset(range(n)), system.var_names())
    raise DomainError(f"expected an AC or WH system, got {type(system).__name__}")


def as_wh(system) -> WHSystem:
    if isinstance(system, WHSystem):
        return system
    if isinstance(system, ACSystem) and system.integer_vars == frozenset(range(system.dimension)):
        A, b = linear_rows(system)
        rows = [_integral_row(r, v) for r, v in zip(A, b)]
        return WHSystem(tuple(WHInequality(r, v) for r, v, _ in rows), (), system.dimension, system.var_names())
    raise DomainError("the wh scheme needs a system of integer variables without ceilings")


def linear_rows(system) -> tuple[list, list]:
    """A x >= b for a ceiling-free AC system or a congruence-free WH system."""
    if isinstance(system, WHSystem):
        if system.congruences:
            raise DomainError("congruences are not linear inequalities")
        return (
            [tuple(Fraction(c) for c in r.coeffs) for r in system.inequalities],
            [Fraction(r.rhs.const) for r in system.inequalities],
        )
    if isinstance(system, ACSystem):
        if system.families:
            raise DomainError("implicit families are not linear inequalities")
        A, b = [], []
        for q in system.inequalities:
            if ceiling_count(q.function):
                raise DomainError("the system has ceilings; a linear system is needed")
            leaf = as_affine(q.function)
            A.append(tuple(-c for c in leaf.coeffs))
            b.append(leaf.const - q.bound)
        return A, b
    if isinstance(system, MILPSystem) and all(r == "target" for r in system.roles):
        return list(system.A), list(system.b)
    raise DomainError(f"expected a linear system, got {type(system).__name__}")


def _linear_ac(A, b, names, ints=frozenset()) -> ACSystem:
    n = len(names)
    ineqs = tuple(
        ACInequality(ACFunction(Leaf(tuple(-c for c in r), v), n), ZERO)
        for r, v in zip(A, b)
        if any(r) or v > 0
    )
    return ACSystem(ineqs, n, ints, tuple(names))


def _indices(names: Sequence[str], wanted: Sequence[str]) -> list[int]:
    out = []
    for w in wanted:
        if w not in names:
            raise DomainError(f"unknown variable {w!r}; have {', '.join(names)}")
        out.append(list(names).index(w))
    return out


# -- operations behind the subcommands -------------------------------------------------


def eliminate(system, scheme: str, variables: Sequence[str]):
    names = list(var_names(system))
    idx = _indices(names, variables)
    if len(set(idx)) != len(idx):
        raise DomainError("variables to eliminate must be distinct")
    if scheme == "fm":
        A, b = linear_rows(system)
        out, _ = fm_eliminate_all(LinearSystem(tuple(A), tuple(b), ncols=len(names)), idx)
        keep = [j for j in range(len(names)) if j not in idx]
        rows = [tuple(r[j] for j in keep) for r in out.A]
        return _linear_ac(rows, out.b, [names[j] for j in keep])
    if scheme == "integer-fm":
        if len(idx) != 1:
            raise DomainError("integer-fm eliminates exactly one variable")
        A, b = linear_rows(system)
        out = integer_fm_step(LinearSystem(tuple(A), tuple(b), ncols=len(names)), idx[0])
        rest = tuple(n for j, n in enumerate(names) if j != idx[0])
        return ACSystem(out.inequalities, out.dimension, out.integer_vars, rest)
    if scheme == "ves":
        cur = as_ac(system)
        for v in variables:
            cur = ves_eliminate(cur, list(cur.var_names()).index(v))
        return cur
    if scheme == "wh":
        return wh_project(as_wh(system), idx)
    raise DomainError(f"unknown scheme {scheme!r}")


def closure(system, iterate: bool = False) -> dict:
    A, b = linear_rows(system)
    if not A:
        raise DomainError("closure needs at least one inequality")
    names = var_names(system)
    if not iterate:
        M, rhs = chvatal_closure_step(A, b, build_tdi(A))
        return {"rows": _mat_json(M), "rhs": [_fr(v) for v in rhs], "text": _rows_text(M, rhs, names)}
    tr = closure_trace(A, b)
    return {
        "status": tr.status,
        "iterations": [
            {"rows": _mat_json(M), "rhs": [_fr(v) for v in rhs], "text": _rows_text(M, rhs, names)}
            for M, rhs in tr.iterations
        ],
    }


def _rows_text(M, rhs, names) -> list[str]:
    return [f"{format_affine(r, ZERO, names)} >= {_fr(v)}" for r, v in zip(M, rhs)]


def read_matrix(text: str) -> list[tuple[Fraction, ...]]:
    rows = []
    for ln, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        try:
            rows.append(tuple(parse_rational(t) for t in line.split()))
        except DomainError as exc:
            raise ParseError(ln, 1, str(exc)) from None
    if not rows:
        raise DomainError("empty matrix")
    if len({len(r) for r in rows}) != 1:
        raise DomainError("matrix rows differ in length")
    return rows


def build_tester(A, kind: str, order: Sequence[int] | None = None, patterns=None, naive: bool = False) -> MaxTester:
    if kind == "lp":
        t = lp_tester_from_fm(A, order)
        return ceilingize_tester(t, patterns) if patterns else t
    if patterns:
        raise DomainError("--ceil-pattern applies to the lp tester")
    return naive_integer_fm_tester(A, order) if naive else ip_tester(A)


def tester_json(t: MaxTester) -> dict:
    m = t.functions[0].dimension if t.functions else (t.family.dimension if t.family else 0)
    bn = [f"b{i + 1}" for i in range(m)]
    fam = None
    if t.family is not None:
        fam = _family_json(t.family)
    return {
        "kind": t.kind,
        "functions": [to_json(f) for f in t.functions],
        "text": [format_function(f, bn) for f in t.functions],
        "family": fam,
    }


def verify(first, second, box: Box) -> dict:
    n1, n2 = var_names(first), var_names(second)
    if len(n1) != len(n2):
        raise DomainError("the two descriptions differ in dimension")
    if box.dimension != len(n1):
        raise DomainError(f"box has dimension {box.dimension}, systems have {len(n1)}")
    perm = list(range(len(n1)))
    if set(n1) == set(n2) and n1 != n2:
        perm = [list(n2).index(v) for v in n1]
    s1 = set(enumerate_feasible(first, box))
    box2 = Box(tuple(box.lower[perm.index(j)] for j in range(len(n2))), tuple(box.upper[perm.index(j)] for j in range(len(n2))))
    s2 = {tuple(p[j] for j in perm) for p in enumerate_feasible(second, box2)}
    only1, only2 = sorted(s1 - s2), sorted(s2 - s1)
    return {
        "equal": not only1 and not only2,
        "names": list(n1),
        "points": [len(s1), len(s2)],
        "only_first": [list(p) for p in only1[:10]],
        "only_second": [list(p) for p in only2[:10]],
    }


# -- command line ----------------------------------------------------------------------


class _UsageError(Exception):
    pass


class _Args(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _parse_box(specs: Sequence[str], n: int) -> Box:
    bounds = []
    for s in specs:
        m = re.fullmatch(r"\[?\s*(-?\d+)\s*[:,]\s*(-?\d+)\s*\]?", s.strip())
        if not m:
            raise _UsageError(f"bad box {s!r}; use LO:HI (write --box=-5:5 for negative bounds)")
        bounds.append((int(m.group(1)), int(m.group(2))))
    if len(bounds) == 1:
        bounds *= n
    if len(bounds) != n:
        raise _UsageError(f"need one --box or {n} of them")
    return Box(tuple(a for a, _ in bounds), tuple(b for _, b in bounds))


def _split(s: str | None) -> list[str]:
    return [t for t in (s or "").replace(" ", "").split(",") if t]


def _parser() -> argparse.ArgumentParser:
    p = _Args(prog="chvatalkit", description="Affine Chvátal functions, eliminations and consistency testers.")
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Args)

    e = sub.add_parser("eliminate", help="project variables out of a system")
    e.add_argument("--scheme", required=True, choices=("fm", "integer-fm", "ves", "wh"))
    e.add_argument("--var", action="append", required=True, help="variable name, repeatable, in elimination order")
    e.add_argument("file")

    lf = sub.add_parser("lift", help="MILP whose projection is the given AC system")
    lf.add_argument("file")

    ta = sub.add_parser("to-ac", help="AC description of the projection of a MILP")
    ta.add_argument("file")

    c = sub.add_parser("closure", help="one Chvátal closure step, or the full trace with --iterate")
    c.add_argument("--iterate", action="store_true")
    c.add_argument("file")

    t = sub.add_parser("tester", help="build a consistency tester, or evaluate one with 'eval'")
    tk = t.add_subparsers(dest="kind", required=True, parser_class=_Args)
    for kind, text in (("lp", "FM-based LP tester"), ("ip", "IP tester"), ("eval", "evaluate a tester at one b")):
        k = tk.add_parser(kind, help=text)
        k.add_argument("file", nargs="?", help="system file whose rows give the matrix")
        k.add_argument("--matrix", help="plain matrix file, one row per line")
        k.add_argument("--order", help="comma-separated elimination order")
        k.add_argument("--ceil-pattern", help="none|whole|per-term|per-variable, one or one per form")
        k.add_argument("--naive", action="store_true", help="ip: FM with rounding on integral rows")
        if kind == "eval":
            k.add_argument("--tester", choices=("lp", "ip"), default="ip", help="which tester to run")
            k.add_argument("--b", required=True, help="comma-separated right-hand side")

    v = sub.add_parser("verify", help="compare two descriptions on the lattice points of a box")
    v.add_argument("--box", action="append", required=True, help="LO:HI once, or once per coordinate")
    v.add_argument("file1")
    v.add_argument("file2")
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _UsageError(f"cannot read {path}: {exc.strerror}") from None


def _emit(obj: dict, out) -> None:
    out.write(json.dumps({"schema": SCHEMA, **obj}, indent=2, ensure_ascii=False) + "\n")


def _tester_inputs(args):
    if args.matrix and args.file:
        raise _UsageError("give either a system file or --matrix")
    if args.matrix:
        A = read_matrix(_read(args.matrix))
        names = [f"x{j + 1}" for j in range(len(A[0]))]
    elif args.file:
        system = load(_read(args.file))
        A, _ = linear_rows(system)
        names = list(var_names(system))
    else:
        raise _UsageError("a system file or --matrix is required")
    order = _indices(names, _split(args.order)) if args.order else None
    pats = _split(args.ceil_pattern)
    patterns = pats[0] if len(pats) == 1 else (pats or None)
    return A, order, patterns


def run(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = _parser().parse_args(argv)
        return _dispatch(args, out)
    except _UsageError as exc:
        _emit({"error": "usage", "message": str(exc)}, out)
        return EXIT_USAGE
    except ParseError as exc:
        _emit({"error": "parse", "line": exc.line, "column": exc.column, "message": exc.message}, out)
        return EXIT_USAGE
    except CapacityError as exc:
        _emit({"error": "capacity", "what": exc.what, "needed": exc.needed, "cap": exc.cap}, out)
        return EXIT_FAIL
    except DomainError as exc:
        _emit({"error": "domain", "message": str(exc)}, out)
        return EXIT_USAGE


def _dispatch(args, out) -> int:
    if args.cmd == "eliminate":
        res = eliminate(load(_read(args.file)), args.scheme, args.var)
        doc = {"command": "eliminate", "scheme": args.scheme, "eliminated": args.var, "result": system_json(res),
               "text": _text_lines(res)}
        if isinstance(res, WHDisjunction):
            doc["disjuncts"] = res.disjunct_count()
        _emit(doc, out)
        return EXIT_PASS
    if args.cmd == "lift":
        system = load(_read(args.file))
        if not isinstance(system, ACSystem):
            system = as_ac(system)
        res = lift_to_milp(system)
        names = res.milp.var_names()
        _emit({"command": "lift", "result": system_json(res.milp), "text": _text_lines(res.milp),
               "introduced": [{"variable": names[j], "column": j, "replaces": why} for j, why in res.introduced]}, out)
        return EXIT_PASS
    if args.cmd == "to-ac":
        system = load(_read(args.file))
        if not isinstance(system, MILPSystem):
            raise DomainError("to-ac needs a MILP file")
        res = milp_to_ac(system)
        _emit({"command": "to-ac", "result": system_json(res), "text": _text_lines(res)}, out)
        return EXIT_PASS
    if args.cmd == "closure":
        res = closure(load(_read(args.file)), args.iterate)
        _emit({"command": "closure", "iterate": args.iterate, **res}, out)
        return EXIT_PASS
    if args.cmd == "tester":
        A, order, patterns = _tester_inputs(args)
        if args.kind != "eval":
            t = build_tester(A, args.kind, order, patterns, args.naive)
            _emit({"command": "tester", "tester": tester_json(t)}, out)
            return EXIT_PASS
        b = [parse_rational(s) for s in _split(args.b)]
        if len(b) != len(A):
            raise _UsageError(f"--b needs {len(A)} entries")
        t = build_tester(A, args.tester, order, patterns, args.naive)
        val = validate_tester(t, A, [b])
        verdict = t.feasible(b)
        _emit({"command": "tester-eval", "kind": t.kind, "b": [_fr(v) for v in b], "feasible": verdict,
               "value": None if t.value(b) is None else _fr(t.value(b)),
               "oracle_feasible": verdict if val.passed else val.oracle_verdict, "agrees": val.passed}, out)
        return EXIT_PASS if verdict else EXIT_FAIL
    if args.cmd == "verify":
        first, second = load(_read(args.file1)), load(_read(args.file2))
        box = _parse_box(args.box, len(var_names(first)))
        rep = verify(first, second, box)
        _emit({"command": "verify", "box": [list(box.lower), list(box.upper)], **rep}, out)
        return EXIT_PASS if rep["equal"] else EXIT_FAIL
    raise _UsageError(f"unknown command {args.cmd!r}")


def main(argv: Sequence[str] | None = None) -> None:
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
