from __future__ import annotations

import dataclasses
import random

from residua.analysis.domain import Known
from residua.analysis.locations import CommonCell, Local
from residua.constraints import ConstraintSet, parse_constraints
from residua.frontend import ast as A
from residua.frontend.symbols import resolve_symbols
from residua.interp import InputVector, check_soundness, diff_test, random_inputs, run
from residua.interp.machine import wrap32
from residua.specializer import ReplacementPolicy, specialize_program

from corpus import load_fixture, load_mutant, source


def out(text, inputs=None, fuel=10 ** 6, **units):
    st = run(source(text, **units), inputs, fuel)
    return st.lines(), st.exit


# -- machine -------------------------------------------------------------------

def test_integer_arithmetic():
    lines, ex = out("""PROGRAM M
  INTEGER K
  K = 2147483647
  PRINT *, -7 / 2, 7 / (-2), K + 1, 2 ** 31, 3 ** 4, 2 ** 0
END
""")
    assert lines == ["-3 -3 -2147483648 -2147483648 81 1"]
    assert ex.kind == "normal"


def test_wrap32():
    assert wrap32(2 ** 32 + 5) == 5
    assert wrap32(-(2 ** 31) - 1) == 2 ** 31 - 1


def test_mixed_mode_promotes_to_real():
    lines, _ = out("PROGRAM M\n  REAL X\n  X = 1 / 2 + 1.0 / 4\n  PRINT *, X, 3 / 2.0\nEND\n")
    assert lines == ["0.25 1.5"]


def test_do_index_after_loop():
    lines, _ = out("""PROGRAM M
  INTEGER I, S
  S = 0
  DO I = 1, 0
    S = S + 1
  END DO
  PRINT *, I, S
  DO I = 1, 3
    S = S + I
  END DO
  PRINT *, I, S
  DO I = 10, 1, -4
    S = S + 1
  END DO
  PRINT *, I, S
END
""")
    assert lines == ["1 0", "4 6", "-2 9"]


def test_division_by_zero_fault_carries_statement():
    p = source("PROGRAM M\n  INTEGER K, Z\n  Z = 0\n  PRINT *, 1\n  K = 5 / Z\n  PRINT *, K\nEND\n")
    st = run(p)
    assert st.lines() == ["1"]
    assert str(st.exit) == "fault(div-by-zero)"
    assert st.exit.prov == p.units[0].body[2].prov


def test_uninitialized_read_faults():
    _, ex = out("PROGRAM M\n  INTEGER K\n  PRINT *, K\nEND\n")
    assert ex.fault == "uninitialized"


def test_read_consumes_stream():
    text = "PROGRAM M\n  INTEGER K\n  REAL X\n  LOGICAL L\n  READ *, K, X, L\n  PRINT *, K, X, L\nEND\n"
    lines, _ = out(text, InputVector(stream=(5, 12, 3)))
    assert lines == ["5 1.5 .TRUE."]
    _, ex = out(text, InputVector(stream=(5,)))
    assert ex.fault == "input"


def test_stop_exit():
    lines, ex = out("PROGRAM M\n  PRINT *, 1\n  STOP\n  PRINT *, 2\nEND\n")
    assert lines == ["1"] and ex.kind == "stopped"


def test_return_leaves_subroutine():
    lines, _ = out("PROGRAM M\n  CALL S\n  PRINT *, 2\nEND\n",
                   S="SUBROUTINE S\n  PRINT *, 1\n  RETURN\n  PRINT *, 9\nEND\n")
    assert lines == ["1", "2"]


def test_fuel_exhaustion():
    _, ex = out("PROGRAM M\n  LOGICAL T\n  T = .TRUE.\n  DO WHILE (T)\n  END DO\nEND\n", fuel=1000)
    assert ex.fault == "timeout"


def test_unbounded_recursion_hits_depth_limit():
    _, ex = out("PROGRAM M\n  CALL R\nEND\n", R="SUBROUTINE R\n  CALL R\nEND\n")
    assert ex.fault == "depth"


def test_no_short_circuit():
    main = """PROGRAM M
  INTEGER G
  LOGICAL B
  COMMON /C/ G
  G = 0
  B = .FALSE. .AND. F(1)
  PRINT *, G, B
END
"""
    f = "LOGICAL FUNCTION F(K)\n  INTEGER K, G\n  COMMON /C/ G\n  G = G + K\n  F = .TRUE.\nEND\n"
    lines, _ = out(main, F=f)
    assert lines == ["1 .FALSE."]


def test_reference_passing_and_arrays():
    main = """PROGRAM M
  INTEGER V(3), K
  K = 1
  V(2) = 10
  CALL INC(K)
  CALL INC(V(2))
  PRINT *, K, V(2)
  V(K + 2) = 1
END
"""
    lines, ex = out(main, INC="SUBROUTINE INC(J)\n  INTEGER J\n  J = J + 1\nEND\n")
    assert lines == ["2 11"]
    assert ex.fault == "bounds"


def test_common_state_is_observable():
    fx = load_fixture("common_share")
    st = run(fx.program, random_inputs(resolve_symbols(fx.program), fx.constraints,
                                       random.Random(1)))
    assert st.commons and all(isinstance(k, Known) or k is None or isinstance(k, tuple)
                              for k in st.commons.values())


def test_runs_are_deterministic():
    fx = load_fixture("while_loops")
    table = resolve_symbols(fx.program)
    iv = random_inputs(table, fx.constraints, random.Random(7))
    a, b = run(fx.program, iv), run(fx.program, iv)
    assert a.observables() == b.observables()
    iv2 = random_inputs(table, fx.constraints, random.Random(7))
    assert iv2 == iv


def test_random_inputs_respect_constraints():
    fx = load_fixture("mode_physics")
    table = resolve_symbols(fx.program)
    rng = random.Random(0)
    for _ in range(20):
        iv = random_inputs(table, fx.constraints, rng)
        assert len(iv.stream) == 64
        assert iv.commons[CommonCell("CTRL", 0)] == Known(A.INTEGER, 2)
        assert iv.commons[CommonCell("CTRL", 1)] == Known(A.INTEGER, 3)


# -- differential testing --------------------------------------------------------

def test_identical_programs_agree():
    fx = load_fixture("solve_two_keys")
    v = diff_test(fx.program, fx.program, fx.constraints, trials=50, seed=1)
    assert v.passed and v.trials == 50 and v.counterexample is None


def test_mutant_is_caught_and_shrunk():
    fx = load_fixture("solve_two_keys")
    v = diff_test(fx.program, load_mutant("solve_flip"), fx.constraints, trials=50, seed=1)
    assert not v.passed
    cx = v.counterexample
    assert cx.original.lines() != cx.residual.lines()
    # every input entry is irrelevant to the disagreement, so all shrink to zero
    data = cx.inputs.to_json()
    assert set(data["stream"]) == {0}
    assert set(data["main"].values()) <= {"0", "0.0", ".FALSE.", "''"}
    assert "original prints" in cx.describe()


def test_constraint_breaking_runs_are_skipped():
    main = "PROGRAM M\n  INTEGER K\n  READ *, K\n  CALL S(K)\nEND\n"
    s = "SUBROUTINE S(J)\n  INTEGER J\n  PRINT *, J\nEND\n"
    p = source(main, S=s)
    cs = parse_constraints("UNIT S: J = 3")
    v = diff_test(p, p, cs, trials=30, seed=0)
    assert v.passed and v.skipped > 0


# -- soundness monitor -------------------------------------------------------------

def test_monitor_accepts_honest_trace():
    fx = load_fixture("facts_chain")
    res = specialize_program(fx.program, fx.constraints, ReplacementPolicy.replace_all())
    rep = check_soundness(res, fx.program, fx.constraints, runs=40, seed=2)
    assert rep.runs == 40 and rep.checks > 0 and rep.violations == []


def test_monitor_flags_false_claim():
    main = "PROGRAM M\n  INTEGER K\n  READ *, K\n  PRINT *, K\nEND\n"
    p = source(main)
    res = specialize_program(p, ConstraintSet(), ReplacementPolicy.replace_all())
    print_prov = p.units[0].body[1].prov
    key = (res.trace.main, print_prov)
    envs = dict(res.trace.envs)
    envs[key] = envs[key].set(Local("M", "K"), Known(A.INTEGER, 12345))
    forged = dataclasses.replace(res, trace=dataclasses.replace(res.trace, envs=envs))
    rep = check_soundness(forged, p, runs=10, seed=0)
    assert rep.violations
    assert all(v.prov == print_prov and v.location == str(Local("M", "K")) for v in rep.violations)


def test_monitor_flags_false_disequality():
    main = "PROGRAM M\n  INTEGER K\n  K = 4\n  PRINT *, K\nEND\n"
    p = source(main)
    res = specialize_program(p, ConstraintSet(), ReplacementPolicy.replace_all())
    key = (res.trace.main, p.units[0].body[1].prov)
    envs = dict(res.trace.envs)
    envs[key] = envs[key].kill([Local("M", "K")]).add_fact(Local("M", "K"), Known(A.INTEGER, 4))
    forged = dataclasses.replace(res, trace=dataclasses.replace(res.trace, envs=envs))
    assert check_soundness(forged, p, runs=3, seed=0).violations
