from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from residua.analysis.locations import CommonCell
from residua.errors import (CommonLayoutMismatch, DuplicateUnit, LexError, MissingMain,
                            ParameterRedefinition, ParseError, ResiduaError,
                            UndeclaredVariable)
from residua.frontend import ast as A
from residua.frontend.lexer import tokenize
from residua.frontend.parser import parse_program, parse_source
from residua.frontend.printer import format_unit, pretty_print
from residua.frontend.symbols import PARAM, resolve_symbols

from corpus import FIXTURE_NAMES, load_fixture


def kinds(text):
    return [(t.kind, t.value) for t in tokenize(text)]


# -- lexer ------------------------------------------------------------------

def test_minimal_statement_tokens():
    assert kinds("X = 1") == [("IDENT", "X"), ("ASSIGN", "="), ("INT_LIT", 1)]


def test_keywords_are_case_insensitive():
    assert kinds("if (a .eq. 2) then") == [
        ("KEYWORD", "IF"), ("LPAREN", "("), ("IDENT", "A"), ("OP_EQ", ".EQ."),
        ("INT_LIT", 2), ("RPAREN", ")"), ("KEYWORD", "THEN")]


def test_exponent_literal():
    toks = tokenize("X = 1.0E-6")
    assert toks[-1].kind == "REAL_LIT" and toks[-1].value == 1.0e-6


def test_tokens_carry_positions():
    toks = tokenize("  X = 1\nY = 22")
    assert (toks[0].line, toks[0].col) == (1, 3)
    y = [t for t in toks if t.value == "Y"][0]
    assert (y.line, y.col) == (2, 1)


@pytest.mark.parametrize("line", ["! note", "* note", "C note", "c", "   ! indented"])
def test_comment_lines(line):
    toks = tokenize(line + "\nX = 1")
    assert toks[0].kind == "COMMENT"


def test_c_identifier_is_not_a_comment():
    assert tokenize("COUNT = 1")[0].kind == "IDENT"


@pytest.mark.parametrize("text,col", [("X = 1 @ 2", 7), ("X = 'open", 5), ("X = .FOO.", 5)])
def test_lex_errors_have_positions(text, col):
    with pytest.raises(LexError) as info:
        tokenize(text)
    assert info.value.line == 1 and info.value.col == col


@settings(max_examples=300, deadline=None)
@given(st.text(max_size=60))
def test_tokenizer_is_total(text):
    try:
        toks = tokenize(text)
    except LexError as exc:
        assert exc.line is not None and exc.col is not None
    else:
        assert all(t.line >= 1 and t.col >= 1 for t in toks)


@settings(max_examples=200, deadline=None)
@given(st.binary(max_size=40))
def test_tokenizer_total_on_bytes(data):
    text = data.decode("utf-8", errors="replace")
    try:
        tokenize(text)
    except LexError as exc:
        assert exc.line is not None


# -- parser -----------------------------------------------------------------

def test_single_file_program():
    p = parse_program([("p.f", "PROGRAM P\nX=1\nEND")])
    assert len(p.units) == 1 and p.units[0].kind == A.MAIN
    assert p.entry == "P"
    assert p.units[0].body == (A.Assign(A.Var("X"), A.IntLit(1)),)


def test_duplicate_unit_rejected():
    sub = "SUBROUTINE S\nEND\n"
    with pytest.raises(DuplicateUnit):
        parse_program([("m.f", "PROGRAM M\nEND\n"), ("a.f", sub), ("b.f", sub)])


def test_missing_main():
    with pytest.raises(MissingMain):
        parse_program([("s.f", "SUBROUTINE S\nEND\n")])


def test_syntax_error_position():
    with pytest.raises(ParseError) as info:
        parse_program([("m.f", "PROGRAM M\nINTEGER X\nX = (1 + \nEND\n")])
    assert info.value.path == "m.f" and info.value.line == 3


MAIN = """PROGRAM MAIN
  INTEGER N
  REAL S
  COMMON /B/ N, S
  N = 2
  CALL INIT
  CALL ACC(3)
  PRINT *, N, S
END
"""
INIT = """SUBROUTINE INIT
  INTEGER N
  REAL S
  COMMON /B/ N, S
  S = 0.0
END
"""
ACC = """SUBROUTINE ACC(K)
  INTEGER K, I
  INTEGER N
  REAL S
  COMMON /B/ N, S
  DO I = 1, K
    S = S + N * 0.5
  END DO
END
"""


def test_three_file_corpus_matches_hand_built_ast():
    p = parse_program([("main.f", MAIN), ("init.f", INIT), ("acc.f", ACC)])
    common = A.CommonDecl("B", ("N", "S"))
    expected = (
        A.Unit(A.MAIN, "MAIN", (), (A.TypeDecl("N", A.INTEGER), A.TypeDecl("S", A.REAL), common),
               (A.Assign(A.Var("N"), A.IntLit(2)),
                A.Call("INIT", ()),
                A.Call("ACC", (A.IntLit(3),)),
                A.Print((A.Var("N"), A.Var("S"))))),
        A.Unit(A.SUBROUTINE, "INIT", (), (A.TypeDecl("N", A.INTEGER), A.TypeDecl("S", A.REAL), common),
               (A.Assign(A.Var("S"), A.RealLit(0.0)),)),
        A.Unit(A.SUBROUTINE, "ACC", ("K",),
               (A.TypeDecl("K", A.INTEGER), A.TypeDecl("I", A.INTEGER),
                A.TypeDecl("N", A.INTEGER), A.TypeDecl("S", A.REAL), common),
               (A.DoLoop("I", A.IntLit(1), A.Var("K"), None,
                         (A.Assign(A.Var("S"),
                                   A.Binary("+", A.Var("S"),
                                            A.Binary("*", A.Var("N"), A.RealLit(0.5)))),)),)),
    )
    assert p.units == expected
    table = resolve_symbols(p)
    for unit in ("MAIN", "INIT", "ACC"):
        assert table[unit].location("N") == CommonCell("B", 0)
        assert table[unit].location("S") == CommonCell("B", 1)


def test_provenance_ids_unique_and_ordered():
    p = parse_program([("main.f", MAIN), ("init.f", INIT), ("acc.f", ACC)])
    provs = [s.prov for u in p.units for s in A.walk_stmts(u.body)]
    assert provs == sorted(provs) and len(set(provs)) == len(provs)


def test_else_if_is_nested_if():
    p = parse_source("""PROGRAM P
  INTEGER K
  K = 1
  IF (K .EQ. 1) THEN
    PRINT *, 1
  ELSE IF (K .EQ. 2) THEN
    PRINT *, 2
  ELSE
    PRINT *, 3
  END IF
END
""")
    outer = p.units[0].body[1]
    assert isinstance(outer, A.If) and len(outer.orelse) == 1
    inner = outer.orelse[0]
    assert isinstance(inner, A.If) and inner.orelse == (A.Print((A.IntLit(3),)),)


def test_logical_if_form():
    p = parse_source("PROGRAM P\nINTEGER K\nK = 1\nIF (K .GT. 0) STOP\nEND\n")
    s = p.units[0].body[1]
    assert isinstance(s, A.If) and s.then == (A.Stop(),) and s.orelse == ()


def test_function_requires_result_type():
    with pytest.raises(ResiduaError):
        parse_program([("m.f", "PROGRAM M\nEND\n"), ("f.f", "FUNCTION F(X)\nINTEGER X\nF = X\nEND\n")])


# -- symbols ----------------------------------------------------------------

def test_common_layout_mismatch():
    other = "SUBROUTINE S\n  INTEGER N, M, L\n  COMMON /B/ N, M, L\nEND\n"
    main = "PROGRAM M\n  INTEGER N, M\n  COMMON /B/ N, M\n  CALL S\nEND\n"
    with pytest.raises(CommonLayoutMismatch):
        resolve_symbols(parse_program([("m.f", main), ("s.f", other)]))


def test_common_cell_type_mismatch():
    other = "SUBROUTINE S\n  REAL N\n  COMMON /B/ N\nEND\n"
    main = "PROGRAM M\n  INTEGER N\n  COMMON /B/ N\n  CALL S\nEND\n"
    with pytest.raises(CommonLayoutMismatch):
        resolve_symbols(parse_program([("m.f", main), ("s.f", other)]))


def test_undeclared_variable():
    with pytest.raises(UndeclaredVariable):
        resolve_symbols(parse_source("PROGRAM M\n  X = 1\nEND\n"))


def test_parameter_redefinition():
    text = "PROGRAM M\n  REAL PI\n  PARAMETER (PI = 3.0)\n  PARAMETER (PI = 3.5)\nEND\n"
    with pytest.raises(ParameterRedefinition):
        resolve_symbols(parse_source(text))


def test_parameter_bound_as_constant():
    text = "PROGRAM M\n  REAL PI\n  PARAMETER (PI = 3.14159)\n  PRINT *, PI\nEND\n"
    info = resolve_symbols(parse_source(text))["M"].vars["PI"]
    assert info.kind == PARAM
    assert info.value == A.RealLit(3.14159)


# -- printer ----------------------------------------------------------------

def test_nested_if_inside_do_indent():
    p = parse_source("""PROGRAM P
INTEGER I
DO I = 1, 3
IF (I .GT. 1) THEN
PRINT *, I
END IF
END DO
END
""")
    lines = format_unit(p.units[0]).splitlines()
    assert "    IF (I .GT. 1) THEN" in lines
    assert "      PRINT *, I" in lines
    assert "    END IF" in lines


GOLDEN_IN = """! leading note
PROGRAM P
  INTEGER X
  ! set X
  X = 1
C old-style note
  IF (X .GT. 0) THEN
    * inner note
    PRINT *, X
  END IF
  ! before end
END
"""
GOLDEN_OUT = """! leading note
PROGRAM P
  INTEGER X
  ! set X
  X = 1
  ! old-style note
  IF (X .GT. 0) THEN
    ! inner note
    PRINT *, X
  END IF
  ! before end
END
"""


def test_comments_print_above_owner():
    p = parse_source(GOLDEN_IN)
    text = format_unit(p.units[0])
    assert text == GOLDEN_OUT
    assert parse_source(text) == p


@pytest.mark.parametrize("name", FIXTURE_NAMES)
def test_round_trip_on_corpus(name):
    p = load_fixture(name).program
    again = parse_program(pretty_print(p))
    assert again == p
    assert pretty_print(again) == pretty_print(p)


def test_negative_and_real_literals_round_trip():
    text = """PROGRAM P
  REAL X
  INTEGER K
  X = -1.5E-3 * 2.0 ** (-2)
  K = -(3 - 7) / 2
  PRINT *, X, K, 1.0E10, 0.1, 'IT''S'
END
"""
    p = parse_source(text)
    assert parse_program(pretty_print(p)) == p
