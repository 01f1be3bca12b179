from __future__ import annotations

import pytest

from residua.analysis.domain import Known
from residua.analysis.locations import CommonCell, Local
from residua.constraints import (GLOBAL, Constraint, format_constraints, initial_env,
                                 load_constraints, parse_constraints, validate)
from residua.errors import (ConflictingConstraint, ConstraintParseError,
                            ConstraintTypeMismatch, UnknownConstrainedName)
from residua.frontend import ast as A
from residua.frontend.printer import format_unit
from residua.frontend.symbols import resolve_symbols
from residua.specializer import ReplacementPolicy, specialize_program

from corpus import source


def entries(text):
    return [(c.scope, c.name, c.value) for c in parse_constraints(text)]


def test_single_global():
    assert entries("GLOBAL: NDIM = 3") == [(GLOBAL, "NDIM", A.IntLit(3))]


def test_conflicting_unit_entries():
    with pytest.raises(ConflictingConstraint):
        parse_constraints("UNIT SOLVE: MODE = 2\nUNIT SOLVE: MODE = 3")


def test_distinct_scopes():
    assert entries("UNIT SOLVE: EPS = 1.0E-6\nGLOBAL: NDIM = 3") == [
        ("SOLVE", "EPS", A.RealLit(1.0e-6)),
        (GLOBAL, "NDIM", A.IntLit(3)),
    ]


def test_identical_duplicates_collapse():
    assert entries("GLOBAL:\nN = 1\nn = 1\n") == [(GLOBAL, "N", A.IntLit(1))]


def test_same_name_in_two_scopes_is_fine():
    assert len(entries("GLOBAL: N = 1\nUNIT S: N = 2")) == 2


def test_scope_head_applies_to_following_lines():
    text = """# application constraints
GLOBAL:
  NDIM = 3      # dimension
  FLAG = .TRUE.
UNIT solve:
  eps = -0.5
  TAG = 'A#B'
"""
    assert entries(text) == [
        (GLOBAL, "NDIM", A.IntLit(3)),
        (GLOBAL, "FLAG", A.LogLit(True)),
        ("SOLVE", "EPS", A.RealLit(-0.5)),
        ("SOLVE", "TAG", A.StrLit("A#B")),
    ]


def test_fortran_comment_markers_are_not_comments():
    assert entries("GLOBAL:\nC = 1\n") == [(GLOBAL, "C", A.IntLit(1))]
    with pytest.raises(ConstraintParseError):
        parse_constraints("GLOBAL:\n! N = 1\n")


def test_must_open_with_scope():
    with pytest.raises(ConstraintParseError) as info:
        parse_constraints("\nN = 3\n")
    assert info.value.line == 2


@pytest.mark.parametrize("text", ["GLOBAL: N .GT. 3", "GLOBAL: N .LT. 3", "GLOBAL: N .NE. 3"])
def test_relational_is_reserved(text):
    with pytest.raises(ConstraintParseError, match="not yet supported"):
        parse_constraints(text)


def test_array_element_rejected():
    with pytest.raises(ConstraintParseError, match="array"):
        parse_constraints("GLOBAL: V(1) = 3")


@pytest.mark.parametrize("text", ["GLOBAL: N = ", "GLOBAL: N = X", "GLOBAL: N = 1 2", "GLOBAL N = 1",
                                  "GLOBAL: N = @"])
def test_malformed(text):
    with pytest.raises(ConstraintParseError):
        parse_constraints(text)


def test_format_round_trip():
    text = "GLOBAL: A = 1\nB = 2.5\nUNIT S: C = .FALSE.\n"
    assert entries(format_constraints(parse_constraints(text))) == entries(text)


def test_load_from_file(tmp_path):
    p = tmp_path / "app.pec"
    p.write_text("GLOBAL: MODE = 2\n")
    cs = load_constraints(str(p))
    assert cs.path == str(p) and list(cs) == [Constraint(GLOBAL, "MODE", A.IntLit(2), 1)]


# -- binding ----------------------------------------------------------------

PROG = """PROGRAM MAIN
  INTEGER N, MODE
  LOGICAL L
  REAL X
  COMMON /CFG/ MODE
  N = 1
  L = .TRUE.
  X = 0.0
  CALL S(N)
END
"""
SUB = """SUBROUTINE S(K)
  INTEGER K, T, MODE
  COMMON /CFG/ MODE
  T = K + MODE
  PRINT *, T
END
"""


@pytest.fixture
def table():
    return resolve_symbols(source(PROG, S=SUB))


def test_unit_scope_on_main(table):
    cs = parse_constraints("UNIT MAIN: N = 3")
    env = initial_env(cs, table.unit("MAIN"), table)
    assert env.bindings == {Local("MAIN", "N"): Known(A.INTEGER, 3)}


def test_global_binds_common_and_main_locals(table):
    cs = parse_constraints("GLOBAL: MODE = 2\nN = 4")
    main = initial_env(cs, table.unit("MAIN"), table)
    assert main.bindings == {CommonCell("CFG", 0): Known(A.INTEGER, 2),
                             Local("MAIN", "N"): Known(A.INTEGER, 4)}
    sub = initial_env(cs, table.unit("S"), table)
    assert sub.bindings == {CommonCell("CFG", 0): Known(A.INTEGER, 2)}


def test_unit_scope_formal(table):
    env = initial_env(parse_constraints("UNIT S: K = 7"), table.unit("S"), table)
    assert env.bindings == {Local("S", "K"): Known(A.INTEGER, 7)}


def test_logical_bound_to_integer(table):
    with pytest.raises(ConstraintTypeMismatch):
        validate(parse_constraints("GLOBAL: L = 1"), table)


def test_integer_literal_widens_to_real(table):
    env = initial_env(parse_constraints("GLOBAL: X = 2"), table.unit("MAIN"), table)
    assert env.bindings[Local("MAIN", "X")] == Known(A.REAL, 2.0)


def test_real_literal_for_integer_rejected(table):
    with pytest.raises(ConstraintTypeMismatch):
        validate(parse_constraints("GLOBAL: N = 2.0"), table)


@pytest.mark.parametrize("text", ["GLOBAL: T = 1", "UNIT S: NOPE = 1", "UNIT NOPE: K = 1",
                                  "UNIT S: MODE = 1"])
def test_unknown_names(table, text):
    with pytest.raises(UnknownConstrainedName):
        validate(parse_constraints(text), table)


def test_order_independent(table):
    a = parse_constraints("GLOBAL: MODE = 2\nN = 4\nUNIT MAIN: L = .FALSE.")
    b = parse_constraints("UNIT MAIN: L = .FALSE.\nGLOBAL: N = 4\nMODE = 2")
    m = table.unit("MAIN")
    assert initial_env(a, m, table) == initial_env(b, m, table)


def test_global_common_visible_in_callee():
    main = """PROGRAM MAIN
  INTEGER MODE, R
  COMMON /CFG/ MODE
  CALL PICK(R)
  PRINT *, R
END
"""
    pick = """SUBROUTINE PICK(R)
  INTEGER R, MODE
  COMMON /CFG/ MODE
  IF (MODE .EQ. 2) THEN
    R = 20
  ELSE
    R = 10
  END IF
END
"""
    res = specialize_program(source(main, PICK=pick), parse_constraints("GLOBAL: MODE = 2"),
                             ReplacementPolicy.replace_all())
    [variant] = [v for v in res.report.variants if v["unit"] == "PICK"]
    text = format_unit(res.program.unit(variant["name"]))
    assert "R = 20" in text and "R = 10" not in text
    [binding] = [b for b in res.report.bindings if b["variant"] == variant["name"]]
    assert binding["location"] == str(CommonCell("CFG", 0)) and binding["value"] == "2"


def test_unit_scope_follows_specialized_copies():
    main = "PROGRAM M\n  INTEGER K\n  READ *, K\n  CALL S(K)\n  CALL S(3)\nEND\n"
    sub = "SUBROUTINE S(J)\n  INTEGER J, W\n  PRINT *, J, W\nEND\n"
    cs = parse_constraints("UNIT S: W = 1")
    keep = ReplacementPolicy.keep_list(["W"])
    first = specialize_program(source(main, S=sub), cs, keep)
    copies = [u.name for u in first.program.units if u.source_name == "S"]
    assert copies == ["S", "S_1"]      # the unchanged copy keeps its name
    table = resolve_symbols(first.program)
    validate(cs, table)
    for name in copies:
        env = initial_env(cs, first.program.unit(name), table)
        assert env.bindings == {Local(name, "W"): Known(A.INTEGER, 1)}
    again = specialize_program(first.program, cs, keep)
    assert [format_unit(u) for u in again.program.units] == \
        [format_unit(u) for u in first.program.units]


def test_unit_scope_unknown_after_reparse():
    # printed sources do not record where a copy came from
    from residua.frontend.parser import parse_program
    from residua.frontend.printer import pretty_print
    main = "PROGRAM M\n  CALL S(3)\nEND\n"
    sub = "SUBROUTINE S(J)\n  INTEGER J, W\n  PRINT *, J, W\nEND\n"
    cs = parse_constraints("UNIT S: W = 1")
    res = specialize_program(source(main, S=sub), cs, ReplacementPolicy.replace_all())
    with pytest.raises(UnknownConstrainedName):
        validate(cs, resolve_symbols(parse_program(pretty_print(res.program))))
