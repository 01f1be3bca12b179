"""Scoped equality constraints on input variables.

File format (``.pec``)::

    # comment
    GLOBAL:
    NDIM = 3
    UNIT SOLVE: MODE = 2

A scope head applies to the bindings that follow it; a binding may also
share the line of its scope head.  Only ``name = literal`` is accepted.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from .analysis.domain import AbstractEnv, Known
from .analysis.locations import CommonCell, Location
from .errors import (ConflictingConstraint, ConstraintParseError, ConstraintTypeMismatch,
                     LexError, UnknownConstrainedName)
from .frontend import ast as A
from .frontend.lexer import tokenize
from .frontend.parser import Line, LineCursor, parse_signed_literal
from .frontend.symbols import COMMON, FORMAL, LOCAL, SymbolTable

GLOBAL = None  # scope value for GLOBAL entries; unit scopes are unit names

_RELATIONAL = {"OP_NE", "OP_LT", "OP_LE", "OP_GT", "OP_GE"}


@dataclass(frozen=True)
class Constraint:
    scope: str | None
    name: str
    value: A.Literal
    line: int = 0

    @property
    def scope_text(self) -> str:
        return "GLOBAL" if self.scope is None else f"UNIT {self.scope}"


@dataclass(frozen=True)
class ConstraintSet:
    entries: tuple = ()
    path: str | None = None

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def for_scope(self, scope: str | None) -> list[Constraint]:
        return [c for c in self.entries if c.scope == scope]


def _strip_comment(line: str) -> str:
    quoted = False
    for i, ch in enumerate(line):
        if ch == "'":
            quoted = not quoted
        elif ch == "#" and not quoted:
            return line[:i]
    return line


def parse_constraints(text: str, path: str | None = None) -> ConstraintSet:
    entries: dict[tuple, Constraint] = {}
    scope_set = False
    scope: str | None = None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        body = _strip_comment(raw).strip()
        if not body:
            continue
        try:
            # the pad keeps a name like C in column 1 from reading as a comment line
            toks = tokenize(" " + body, path)
        except LexError as exc:
            raise ConstraintParseError(exc.message, path, lineno, exc.col - 1) from None
        if any(t.kind == "COMMENT" for t in toks):
            raise ConstraintParseError("unexpected text; comments start with '#'", path, lineno, 1)
        toks = [_token_at(t, lineno) for t in toks if t.kind != "NEWLINE"]
        cur = LineCursor(Line(toks, ()), path)
        head = cur.peek()
        if head.kind == "IDENT" and head.value == "GLOBAL" and cur.at("COLON", offset=1):
            cur.pos += 2
            scope, scope_set = GLOBAL, True
        elif head.kind == "IDENT" and head.value == "UNIT" and cur.at("IDENT", offset=1):
            cur.pos += 1
            scope = cur.next().value
            if not cur.accept("COLON"):
                _fail(cur, "expected ':' after UNIT name")
            scope_set = True
        if cur.done():
            continue
        if not scope_set:
            _fail(cur, "constraint file must start with GLOBAL: or UNIT name:")
        name_tok = cur.peek()
        if name_tok.kind != "IDENT":
            _fail(cur, "expected a variable name")
        cur.next()
        nxt = cur.peek()
        if nxt is not None and nxt.kind == "LPAREN":
            _fail(cur, "constraints on array elements are not supported")
        if nxt is not None and nxt.kind in _RELATIONAL:
            _fail(cur, f"relational constraint {nxt.value} is not yet supported; only '=' is")
        if nxt is None or nxt.kind != "ASSIGN":
            _fail(cur, "expected '='")
        cur.next()
        try:
            value = parse_signed_literal(cur)
            cur.finish()
        except Exception as exc:  # ParseError from the shared literal reader
            raise ConstraintParseError(getattr(exc, "message", str(exc)), path, lineno) from None
        c = Constraint(scope, name_tok.value, value, lineno)
        key = (scope, c.name)
        if key in entries:
            prev = entries[key]
            if Known.of_literal(prev.value) != Known.of_literal(value):
                raise ConflictingConstraint(
                    f"{c.scope_text}: {c.name} constrained to two values "
                    f"(line {prev.line} and line {lineno})", path, lineno)
            continue
        entries[key] = c
    return ConstraintSet(tuple(entries.values()), path)


def _token_at(t, lineno):
    from .frontend.lexer import Token
    return Token(t.kind, t.value, lineno, t.col - 1)


def _fail(cur: LineCursor, msg: str):
    t = cur.peek() or cur.toks[-1]
    raise ConstraintParseError(msg, cur.path, t.line, t.col)


def load_constraints(path: str) -> ConstraintSet:
    with open(path, encoding="utf-8") as fh:
        return parse_constraints(fh.read(), path)


# -- binding to a program -------------------------------------------------

def _typed(c: Constraint, typ: str, cs: ConstraintSet) -> Known:
    k = Known.of_literal(c.value)
    if k.type == typ:
        return k
    if typ == A.REAL and k.type == A.INTEGER:
        return Known(A.REAL, float(k.value))
    raise ConstraintTypeMismatch(f"{c.scope_text}: {c.name} is {typ} but constrained to a "
                                 f"{k.type} value", cs.path, c.line)


def resolve_global(c: Constraint, table: SymbolTable, cs: ConstraintSet) -> tuple[Location, str]:
    """Location and type named by a GLOBAL constraint."""
    main = table.program.entry
    found: dict[Location, str] = {}
    minfo = table[main].vars.get(c.name)
    if minfo is not None and minfo.kind in (LOCAL, COMMON) and not minfo.is_array:
        found[minfo.location] = minfo.type
    for syms in table.units.values():
        info = syms.vars.get(c.name)
        if info is not None and info.kind == COMMON:
            if info.is_array:
                raise UnknownConstrainedName(f"GLOBAL: {c.name} is an array; array constraints "
                                             "are not supported", cs.path, c.line)
            found[info.location] = info.type
    if not found:
        raise UnknownConstrainedName(f"GLOBAL: {c.name} is neither a COMMON member nor a "
                                     f"scalar variable of {main}", cs.path, c.line)
    if len(found) > 1:
        where = ", ".join(sorted(str(l) for l in found))
        raise UnknownConstrainedName(f"GLOBAL: {c.name} is ambiguous ({where})", cs.path, c.line)
    return next(iter(found.items()))


def scope_units(scope: str, table: SymbolTable) -> list[str]:
    """Units a UNIT scope applies to: the unit itself and its specialized copies."""
    return [u.name for u in table.program.units if u.source_name == scope]


def resolve_unit(c: Constraint, table: SymbolTable, cs: ConstraintSet,
                 unit: str | None = None) -> tuple[Location, str]:
    """Location and type named by a UNIT constraint in ``unit`` (default: every match)."""
    names = [unit] if unit is not None else scope_units(c.scope, table)
    if not names:
        raise UnknownConstrainedName(f"UNIT {c.scope}: no such unit", cs.path, c.line)
    found = None
    for name in names:
        info = table[name].vars.get(c.name)
        if info is None or info.kind not in (LOCAL, FORMAL):
            raise UnknownConstrainedName(f"UNIT {c.scope}: {c.name} is not a local variable or "
                                         "formal of that unit", cs.path, c.line)
        if info.is_array:
            raise UnknownConstrainedName(f"UNIT {c.scope}: {c.name} is an array; array "
                                         "constraints are not supported", cs.path, c.line)
        found = found or (info.location, info.type)
    return found


def validate(cs: ConstraintSet, table: SymbolTable) -> None:
    """Check that every entry names a visible variable with a matching type."""
    for c in cs:
        loc, typ = resolve_global(c, table, cs) if c.scope is None else resolve_unit(c, table, cs)
        _typed(c, typ, cs)


def unit_bindings(cs: ConstraintSet, unit: A.Unit, table: SymbolTable) -> dict[Location, Known]:
    """Bindings from UNIT-scoped entries for ``unit``."""
    out = {}
    for c in cs.for_scope(unit.source_name):
        loc, typ = resolve_unit(c, table, cs, unit.name)
        out[loc] = _typed(c, typ, cs)
    return out


def global_bindings(cs: ConstraintSet, unit: A.Unit, table: SymbolTable) -> dict[Location, Known]:
    """Bindings from GLOBAL entries that are visible from ``unit``."""
    out = {}
    is_main = unit.name == table.program.entry
    for c in cs.for_scope(GLOBAL):
        loc, typ = resolve_global(c, table, cs)
        if isinstance(loc, CommonCell) or is_main:
            out[loc] = _typed(c, typ, cs)
    return out


def initial_env(cs: ConstraintSet, unit: A.Unit, table: SymbolTable) -> AbstractEnv:
    """Entry environment for ``unit`` if it were the specialization entry point."""
    bindings = global_bindings(cs, unit, table)
    bindings.update(unit_bindings(cs, unit, table))
    return AbstractEnv(bindings)


def format_constraints(entries: Iterable[Constraint]) -> str:
    from .frontend.printer import format_literal
    lines = []
    scope = object()
    for c in entries:
        if c.scope != scope:
            lines.append(c.scope_text + ":")
            scope = c.scope
        lines.append(f"{c.name} = {format_literal(c.value)}")
    return "\n".join(lines) + "\n"
