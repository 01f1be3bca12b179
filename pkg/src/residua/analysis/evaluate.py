"""Abstract expression evaluation (constant folding over the lattice)."""

from __future__ import annotations

import math

from ..frontend import ast as A
from ..frontend.symbols import PARAM, UnitSymbols
from .domain import UNKNOWN, AbstractEnv, AbstractValue, Known

INT_BITS = 32
_MOD = 1 << INT_BITS
_HALF = 1 << (INT_BITS - 1)


class NoFold(Exception):
    """The operation would fault (or leave the finite reals) at run time."""


def wrap(v: int) -> int:
    v &= _MOD - 1
    return v - _MOD if v >= _HALF else v


def _int_div(a: int, b: int) -> int:
    if b == 0:
        raise NoFold("integer division by zero")
    q = abs(a) // abs(b)
    return wrap(q if (a >= 0) == (b >= 0) else -q)


def _int_pow(a: int, e: int) -> int:
    if e >= 0:
        return wrap(pow(a, e, _MOD))
    if a == 0:
        raise NoFold("zero raised to a negative power")
    if a == 1:
        return 1
    if a == -1:
        return 1 if e % 2 == 0 else -1
    return 0


def _real_int_pow(x: float, e: int) -> float:
    n = abs(e)
    result, base = 1.0, x
    while n > 0:
        if n & 1:
            result = result * base
        n >>= 1
        if n:
            base = base * base
    if e < 0:
        if result == 0.0:
            raise NoFold("zero raised to a negative power")
        result = 1.0 / result
    return result


def _finite(x: float) -> float:
    if not math.isfinite(x):
        raise NoFold("non-finite real")
    return x


def fold_arith(op: str, a: Known, b: Known) -> Known:
    """Fold a binary arithmetic operator; raises NoFold on runtime faults."""
    if a.type == b.type == A.INTEGER:
        x, y = a.value, b.value
        if op == "+":
            r = wrap(x + y)
        elif op == "-":
            r = wrap(x - y)
        elif op == "*":
            r = wrap(x * y)
        elif op == "/":
            r = _int_div(x, y)
        else:
            r = _int_pow(x, y)
        return Known(A.INTEGER, r)
    if op == "**" and b.type == A.INTEGER:
        return Known(A.REAL, _finite(_real_int_pow(float(a.value), b.value)))
    x, y = float(a.value), float(b.value)
    if op == "+":
        r = x + y
    elif op == "-":
        r = x - y
    elif op == "*":
        r = x * y
    elif op == "/":
        if y == 0.0:
            raise NoFold("real division by zero")
        r = x / y
    else:
        try:
            r = math.pow(x, y)
        except (ValueError, OverflowError) as exc:
            raise NoFold(str(exc)) from None
    return Known(A.REAL, _finite(r))


def fold_compare(op: str, a: Known, b: Known) -> Known:
    x, y = a.value, b.value
    if A.REAL in (a.type, b.type):
        x, y = float(x), float(y)
    r = {".EQ.": x == y, ".NE.": x != y, ".LT.": x < y, ".LE.": x <= y,
         ".GT.": x > y, ".GE.": x >= y}[op]
    return Known(A.LOGICAL, r)


def fold_unary(op: str, a: Known) -> Known:
    if op == ".NOT.":
        return Known(A.LOGICAL, not a.value)
    if a.type == A.INTEGER:
        return Known(A.INTEGER, wrap(-a.value))
    return Known(A.REAL, -a.value)


def convert(v: AbstractValue, typ: str) -> AbstractValue:
    """Value conversion performed by assignment to a variable of ``typ``."""
    if not isinstance(v, Known) or v.type == typ:
        return v
    if typ == A.REAL and v.type == A.INTEGER:
        return Known(A.REAL, float(v.value))
    if typ == A.INTEGER and v.type == A.REAL:
        if not math.isfinite(v.value):
            return UNKNOWN
        t = math.trunc(v.value)
        if not -_HALF <= t < _HALF:
            return UNKNOWN
        return Known(A.INTEGER, t)
    return UNKNOWN


def expr_type(e, syms: UnitSymbols, table=None) -> str:
    """Static type of a type-correct expression."""
    if isinstance(e, A.LITERALS):
        return A.literal_type(e)
    if isinstance(e, (A.Var, A.ArrayRef)):
        return syms.get(e.name).type
    if isinstance(e, A.FuncCall):
        return table.unit(e.name).result_type
    if isinstance(e, A.Unary):
        return A.LOGICAL if e.op == ".NOT." else expr_type(e.operand, syms, table)
    if e.op in A.REL_OPS or e.op in A.LOGIC_OPS:
        return A.LOGICAL
    lt, rt = expr_type(e.left, syms, table), expr_type(e.right, syms, table)
    return A.REAL if A.REAL in (lt, rt) else A.INTEGER


def is_safe(e) -> bool:
    """True when evaluating ``e`` can neither fault nor have side effects.

    Reads of uninitialized variables are not considered: inputs are
    required to initialize every location they use.
    """
    for x in A.subexprs(e):
        if isinstance(x, (A.FuncCall, A.ArrayRef)):
            return False
        if isinstance(x, A.Binary):
            if x.op == "/" and not (isinstance(x.right, (A.IntLit, A.RealLit)) and x.right.value != 0):
                return False
            if x.op == "**" and not (isinstance(x.right, A.IntLit) and x.right.value >= 0):
                return False
    return True


def fact_operands(e, syms: UnitSymbols, env: AbstractEnv | None = None):
    """Match ``v .EQ. k`` / ``v .NE. k``; returns (op, location, Known) or None.

    ``k`` is a literal, a PARAMETER name, or (when ``env`` is given) any
    expression whose abstract value is Known.  Its value is converted to
    the variable's type; comparisons that cannot be represented that way
    are not matched.
    """
    if not (isinstance(e, A.Binary) and e.op in (".EQ.", ".NE.") and isinstance(e.left, A.Var)):
        return None
    info = syms.vars.get(e.left.name)
    if info is None or info.kind == PARAM or info.is_array:
        return None
    r = e.right
    if isinstance(r, A.Var) and syms.vars.get(r.name) is not None and syms.vars[r.name].kind == PARAM:
        lit = Known.of_literal(syms.vars[r.name].value)
    elif isinstance(r, A.LITERALS):
        lit = Known.of_literal(r)
    elif env is not None:
        lit = eval_abstract(r, env, syms)
        if not isinstance(lit, Known):
            return None
    else:
        return None
    if lit.type != info.type:
        if info.type == A.REAL and lit.type == A.INTEGER:
            lit = Known(A.REAL, float(lit.value))
        else:
            return None
    return e.op, info.location, lit


def eval_abstract(e, env: AbstractEnv, syms: UnitSymbols, notes: list | None = None) -> AbstractValue:
    """Abstract value of ``e`` under ``env``.

    Function calls and array elements are Unknown.  Faulting operations on
    Known operands (division by zero and the like) are Unknown too; a note
    is appended to ``notes`` when given, as is every fact consulted:
    ``("nofold", reason)`` or ``("fact", location, value)``.
    """
    if isinstance(e, A.LITERALS):
        return Known.of_literal(e)
    if isinstance(e, A.Var):
        info = syms.vars[e.name]
        if info.kind == PARAM:
            return Known.of_literal(info.value)
        if info.is_array:
            return UNKNOWN
        return env.get(info.location)
    if isinstance(e, (A.ArrayRef, A.FuncCall)):
        return UNKNOWN
    if isinstance(e, A.Unary):
        v = eval_abstract(e.operand, env, syms, notes)
        return fold_unary(e.op, v) if isinstance(v, Known) else UNKNOWN
    op = e.op
    if op in A.LOGIC_OPS:
        return _eval_logic(e, env, syms, notes)
    lv = eval_abstract(e.left, env, syms, notes)
    rv = eval_abstract(e.right, env, syms, notes)
    if op in A.REL_OPS:
        if isinstance(lv, Known) and isinstance(rv, Known):
            return fold_compare(op, lv, rv)
        m = fact_operands(e, syms, env) if env.facts else None
        if m is not None and env.has_fact(m[1], m[2]):
            if notes is not None:
                notes.append(("fact", m[1], m[2]))
            return Known(A.LOGICAL, op == ".NE.")
        return UNKNOWN
    if isinstance(lv, Known) and isinstance(rv, Known):
        try:
            return fold_arith(op, lv, rv)
        except NoFold as exc:
            if notes is not None:
                notes.append(("nofold", str(exc)))
            return UNKNOWN
    if op == "*":
        zero = Known(A.INTEGER, 0)
        if (lv == zero and rv is UNKNOWN and _int_typed(e.right, syms) and is_safe(e.right)) or \
           (rv == zero and lv is UNKNOWN and _int_typed(e.left, syms) and is_safe(e.left)):
            return zero
    return UNKNOWN


def _int_typed(e, syms) -> bool:
    try:
        return expr_type(e, syms) == A.INTEGER
    except (KeyError, AttributeError):
        return False


def _eval_logic(e, env, syms, notes) -> AbstractValue:
    lv = eval_abstract(e.left, env, syms, notes)
    rv = eval_abstract(e.right, env, syms, notes)
    absorbing = e.op == ".OR."  # true absorbs .OR., false absorbs .AND.
    if isinstance(lv, Known) and isinstance(rv, Known):
        return Known(A.LOGICAL, (lv.value or rv.value) if absorbing else (lv.value and rv.value))
    if isinstance(lv, Known) and lv.value == absorbing and is_safe(e.right):
        return lv
    if isinstance(rv, Known) and rv.value == absorbing and is_safe(e.left):
        return rv
    return UNKNOWN
