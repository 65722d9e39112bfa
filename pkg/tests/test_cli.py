import io
import json
from fractions import Fraction as F

import pytest
from hypothesis import given
from hypothesis import strategies as st

from chvatalkit.chvatal_ast import ACInequality, ACSystem, ceiling_count, evaluate
from chvatalkit.cli import ParseError, load, parse, parse_file, run, serialize, system_json, system_from_json
from chvatalkit.representability import MILPSystem
from chvatalkit.williams_hooker import CongruenceConstraint, WHSystem

from conftest import data_path, points, trees


def cli(*argv):
    buf = io.StringIO()
    code = run([str(a) for a in argv], buf)
    return code, json.loads(buf.getvalue())


def path(name):
    return data_path(name)


# -- parsing ----------------------------------------------------------------------


def test_parse_integer_row():
    s = parse("int x1\nint x2\n2 x1 + 1 x2 >= 13")
    assert isinstance(s, WHSystem)
    assert len(s.inequalities) == 1 and s.inequalities[0].coeffs == (2, 1)
    assert s.inequalities[0].rhs.const == 13


def test_parse_congruence():
    s = parse("int x1 x2\n5 x2 == 5 (mod 10)")
    (c,) = s.congruences
    assert c == CongruenceConstraint((0, 5), 5, 10)


def test_parse_ceiling_row():
    s = parse("var x\nceil(-1/50 x) + 1/200 x <= 0")
    assert isinstance(s, ACSystem)
    (q,) = s.inequalities
    assert ceiling_count(q.function) == 1
    assert evaluate(q.function, [100]) == F(-3, 2)


def test_parse_milp_and_objective():
    pf = parse_file("min x\nvar x\nauxint y\nx >= 50 y\nx <= 200 y")
    assert isinstance(pf.system, MILPSystem) and pf.objective == "min x"
    assert pf.system.roles == ("target", "aux-int")


@pytest.mark.parametrize(
    "text,line,column,fragment",
    [
        ("var x\nx + y <= 1", 2, 5, "undeclared variable 'y'"),
        ("int x\nx == 1 (mod 0)", 2, 13, "zero modulus"),
        ("var x\nx <= 1 +", 2, 9, "expected a term"),
    ],
)
def test_parse_errors_carry_location(text, line, column, fragment):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert (info.value.line, info.value.column) == (line, column)
    assert fragment in str(info.value)


def test_canonical_file_roundtrip():
    for name in ("two_stage.sys", "batch_ac.sys", "batch_milp.sys", "lift.sys", "gap.sys"):
        with open(path(name)) as fh:
            s = parse(fh.read())
        text = serialize(s)
        assert serialize(parse(text)) == text
        assert system_from_json(json.loads(json.dumps(system_json(s)))) == s


# -- subcommands ------------------------------------------------------------------


def test_eliminate_wh_two_stage():
    code, doc = cli("eliminate", "--scheme", "wh", "--var", "x1", "--var", "x2", path("two_stage.sys"))
    assert code == 0 and doc["schema"] == 1 and doc["disjuncts"] == 9000
    assert doc["text"][0] == "# union over slacks s1_1 in 0..9, s2_1 in 0..29, s2_2 in 0..29"
    assert "15 z >= 75 + 15 s1_1 + s2_1" in doc["text"]
    assert "15 z >= 115 + s1_1 + s2_2" in doc["text"]


@pytest.mark.parametrize("scheme", ["fm", "ves"])
def test_eliminate_other_schemes(scheme):
    code, doc = cli("eliminate", "--scheme", scheme, "--var", "x1", path("gap.sys"))
    assert code == 0
    assert all("x1" not in line for line in doc["text"][1:])


def test_eliminate_integer_fm_needs_one_variable():
    code, doc = cli("eliminate", "--scheme", "integer-fm", "--var", "x1", "--var", "x2", path("gap.sys"))
    assert code == 2 and doc["error"] == "domain"
    code, _ = cli("eliminate", "--scheme", "integer-fm", "--var", "x1", path("gap.sys"))
    assert code == 0


def test_lift_reports_new_variables():
    code, doc = cli("lift", path("lift.sys"))
    assert code == 0
    assert [v["variable"] for v in doc["introduced"]] == ["y1", "y2", "y3"]
    assert load(json.dumps(doc)).roles.count("aux-int") == 3


def test_to_ac_batch():
    code, doc = cli("to-ac", path("batch_milp.sys"))
    assert code == 0
    s = load(json.dumps(doc))
    assert [x for x in range(-10, 251) if s.contains([x])] == [0] + list(range(50, 201))


def test_to_ac_rejects_non_milp():
    code, doc = cli("to-ac", path("batch_ac.sys"))
    assert code == 2 and doc["error"] == "domain"


def test_closure_commands():
    code, doc = cli("closure", "--iterate", path("halfint.sys"))
    assert code == 0 and doc["status"] == "fixed-point"
    final = doc["iterations"][-1]["text"]
    assert "x2 >= 1" in final and "-x2 >= -1" in final
    code, doc = cli("closure", path("halfint.sys"))
    assert code == 0 and "x1 + x2 >= 1" in doc["text"]


def test_tester_lp_golden():
    code, doc = cli("tester", "lp", "--order", "x1,x2,x3", path("gap.sys"))
    with open(path("golden/tester_lp_gap.json")) as fh:
        assert doc == json.load(fh)
    assert code == 0


def test_tester_ip_and_eval():
    code, doc = cli("tester", "ip", "--matrix", path("strip.txt"))
    assert code == 0 and doc["tester"]["kind"] == "IP"
    code, doc = cli("tester", "eval", "--matrix", path("strip.txt"), "--b=1,-4,-1,-2")
    assert code == 1 and doc["feasible"] is False and doc["agrees"]
    code, doc = cli("tester", "eval", "--matrix", path("strip.txt"), "--b=0,0,0,0")
    assert code == 0 and doc["feasible"] is True


def test_tester_eval_naive_disagrees():
    code, doc = cli("tester", "eval", "--naive", "--order", "x1,x2", "--matrix", path("strip.txt"),
                    "--b=1,-4,-1,-2")
    assert code == 0 and doc["feasible"] is True and doc["agrees"] is False


def test_tester_ceil_pattern():
    code, doc = cli("tester", "lp", "--ceil-pattern", "whole", "--order", "x1,x2,x3", path("gap.sys"))
    assert code == 0 and doc["tester"]["kind"] == "IP"
    assert all(t.startswith("ceil(") for t in doc["tester"]["text"])


def test_verify_batch_pair():
    code, doc = cli("verify", "--box=-10:250", path("batch_ac.sys"), path("batch_milp.sys"))
    assert code == 0 and doc["equal"] is True


def test_verify_reports_difference():
    code, doc = cli("verify", "--box=-10:250", path("batch_ac.sys"), path("batch_ac_loose.sys"))
    assert code == 1 and doc["equal"] is False


def test_capacity_error_exit(monkeypatch):
    monkeypatch.setenv("CHVATALKIT_CAPS", "box_points=10")
    code, doc = cli("verify", "--box=-10:250", path("batch_ac.sys"), path("batch_milp.sys"))
    assert code == 1 and doc["error"] == "capacity" and doc["cap"] == 10


def test_missing_file_is_usage_error():
    code, doc = cli("lift", path("no_such_file.sys"))
    assert code == 2 and doc["error"] == "usage"


def test_parse_error_exit(tmp_path):
    bad = tmp_path / "bad.sys"
    bad.write_text("var x\nx + y <= 1\n")
    code, doc = cli("lift", bad)
    assert code == 2 and doc["error"] == "parse" and (doc["line"], doc["column"]) == (2, 5)


def test_bad_flags_exit_two():
    code, doc = cli("eliminate", "--scheme", "nope", "--var", "x", "f")
    assert code == 2 and doc["error"] == "usage" and "invalid choice" in doc["message"]


def test_commands_are_deterministic():
    argv = ("eliminate", "--scheme", "wh", "--var", "x1", path("two_stage.sys"))
    assert cli(*argv) == cli(*argv)


# -- properties ----------------------------------------------------------------------


@given(st.lists(st.tuples(trees(2, max_leaves=4), st.integers(-5, 5)), min_size=1, max_size=3), points(2))
def test_ac_text_roundtrip(rows, x):
    s = ACSystem(tuple(ACInequality(f, F(b)) for f, b in rows), 2)
    text = serialize(s)
    back = parse(text)
    assert serialize(back) == text
    for q, r in zip(s.inequalities, back.inequalities):
        assert evaluate(q.function, x) - q.bound == evaluate(r.function, x) - r.bound


@given(
    st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9), st.integers(-20, 20)), max_size=3),
    st.lists(st.tuples(st.integers(-9, 9), st.integers(-9, 9), st.integers(-20, 20), st.integers(1, 12)),
             max_size=2),
)
def test_wh_text_roundtrip(rows, congs):
    s = WHSystem.build([r[:2] for r in rows], [r[2] for r in rows], [(c[:2], c[2], c[3]) for c in congs],
                       dimension=2, names=("x1", "x2"))
    text = serialize(s)
    assert parse(text) == s
    assert serialize(parse(text)) == text
