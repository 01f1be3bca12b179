"""Abstract syntax of MiniF77.

All nodes are frozen dataclasses.  Provenance identifiers (``prov``) and
call-site numbers (``site``) are excluded from equality so that two trees
compare equal whenever they have the same shape, which is what the
round-trip and idempotence checks rely on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Union

INTEGER = "INTEGER"
REAL = "REAL"
LOGICAL = "LOGICAL"
CHARACTER = "CHARACTER"
TYPES = (INTEGER, REAL, LOGICAL, CHARACTER)

ARITH_OPS = ("+", "-", "*", "/", "**")
REL_OPS = (".EQ.", ".NE.", ".LT.", ".LE.", ".GT.", ".GE.")
LOGIC_OPS = (".AND.", ".OR.")


# -- expressions -----------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int


@dataclass(frozen=True)
class RealLit:
    value: float


@dataclass(frozen=True)
class LogLit:
    value: bool


@dataclass(frozen=True)
class StrLit:
    value: str


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class ArrayRef:
    name: str
    index: "Expr"


@dataclass(frozen=True)
class FuncCall:
    name: str
    args: tuple
    site: int = field(default=0, compare=False)


@dataclass(frozen=True)
class Unary:
    op: str  # "-" or ".NOT."
    operand: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Literal = Union[IntLit, RealLit, LogLit, StrLit]
Expr = Union[IntLit, RealLit, LogLit, StrLit, Var, ArrayRef, FuncCall, Unary, Binary]
LITERALS = (IntLit, RealLit, LogLit, StrLit)


def literal_type(lit: Literal) -> str:
    return {IntLit: INTEGER, RealLit: REAL, LogLit: LOGICAL, StrLit: CHARACTER}[type(lit)]


def make_literal(typ: str, value) -> Literal:
    if typ == INTEGER:
        return IntLit(int(value))
    if typ == REAL:
        return RealLit(float(value))
    if typ == LOGICAL:
        return LogLit(bool(value))
    return StrLit(str(value))


def subexprs(e: Expr) -> Iterator[Expr]:
    """Yield ``e`` and all of its subexpressions in pre-order."""
    yield e
    if isinstance(e, ArrayRef):
        yield from subexprs(e.index)
    elif isinstance(e, FuncCall):
        for a in e.args:
            yield from subexprs(a)
    elif isinstance(e, Unary):
        yield from subexprs(e.operand)
    elif isinstance(e, Binary):
        yield from subexprs(e.left)
        yield from subexprs(e.right)


def calls_in(e: Expr) -> list[FuncCall]:
    """Function calls in evaluation order (arguments before the call)."""
    out: list[FuncCall] = []

    def walk(x):
        if isinstance(x, ArrayRef):
            walk(x.index)
        elif isinstance(x, FuncCall):
            for a in x.args:
                walk(a)
            out.append(x)
        elif isinstance(x, Unary):
            walk(x.operand)
        elif isinstance(x, Binary):
            walk(x.left)
            walk(x.right)

    walk(e)
    return out


def names_in(e: Expr) -> set[str]:
    """Variable, array and PARAMETER identifiers mentioned by ``e``."""
    return {x.name for x in subexprs(e) if isinstance(x, (Var, ArrayRef))}


# -- statements ------------------------------------------------------------

@dataclass(frozen=True)
class Stmt:
    prov: int = field(default=0, compare=False, kw_only=True)
    comments: tuple = field(default=(), kw_only=True)


@dataclass(frozen=True)
class Assign(Stmt):
    target: Union[Var, ArrayRef]
    value: Expr


@dataclass(frozen=True)
class If(Stmt):
    cond: Expr
    then: tuple
    orelse: tuple = ()


@dataclass(frozen=True)
class DoLoop(Stmt):
    var: str
    lo: Expr
    hi: Expr
    step: Expr | None
    body: tuple


@dataclass(frozen=True)
class DoWhile(Stmt):
    cond: Expr
    body: tuple


@dataclass(frozen=True)
class Call(Stmt):
    name: str
    args: tuple = ()


@dataclass(frozen=True)
class Return(Stmt):
    pass


@dataclass(frozen=True)
class Stop(Stmt):
    pass


@dataclass(frozen=True)
class Continue(Stmt):
    pass


@dataclass(frozen=True)
class Print(Stmt):
    args: tuple = ()


@dataclass(frozen=True)
class Read(Stmt):
    targets: tuple = ()


def walk_stmts(body) -> Iterator[Stmt]:
    """Pre-order traversal over a statement sequence, nested bodies included."""
    for s in body:
        yield s
        if isinstance(s, If):
            yield from walk_stmts(s.then)
            yield from walk_stmts(s.orelse)
        elif isinstance(s, (DoLoop, DoWhile)):
            yield from walk_stmts(s.body)


def stmt_exprs(s: Stmt) -> list[Expr]:
    """Expressions evaluated by ``s`` itself (not by nested statements)."""
    if isinstance(s, Assign):
        if isinstance(s.target, ArrayRef):
            return [s.target.index, s.value]
        return [s.value]
    if isinstance(s, (If, DoWhile)):
        return [s.cond]
    if isinstance(s, DoLoop):
        return [s.lo, s.hi] + ([s.step] if s.step is not None else [])
    if isinstance(s, (Call, Print)):
        return list(s.args)
    if isinstance(s, Read):
        return [t.index for t in s.targets if isinstance(t, ArrayRef)]
    return []


def count_stmts(body) -> int:
    return sum(1 for _ in walk_stmts(body))


# -- declarations and units ------------------------------------------------

@dataclass(frozen=True)
class TypeDecl:
    name: str
    type: str
    size: int | str | None = None  # None for scalars; literal or PARAMETER name
    comments: tuple = ()


@dataclass(frozen=True)
class ParamDecl:
    name: str
    value: Literal
    comments: tuple = ()


@dataclass(frozen=True)
class CommonDecl:
    block: str
    names: tuple
    comments: tuple = ()


Decl = Union[TypeDecl, ParamDecl, CommonDecl]

MAIN = "PROGRAM"
SUBROUTINE = "SUBROUTINE"
FUNCTION = "FUNCTION"


@dataclass(frozen=True)
class Unit:
    kind: str
    name: str
    formals: tuple = ()
    decls: tuple = ()
    body: tuple = ()
    result_type: str | None = None
    comments: tuple = ()
    end_comments: tuple = ()
    path: str | None = field(default=None, compare=False)
    # name of the source unit this one was specialized from
    origin: str | None = field(default=None, compare=False)

    @property
    def source_name(self) -> str:
        return self.origin or self.name


@dataclass(frozen=True)
class Program:
    units: tuple
    entry: str
    files: dict = field(default_factory=dict, compare=False, hash=False)

    def unit(self, name: str) -> Unit:
        for u in self.units:
            if u.name == name:
                return u
        raise KeyError(name)

    def unit_map(self) -> dict[str, Unit]:
        return {u.name: u for u in self.units}

    @property
    def main(self) -> Unit:
        return self.unit(self.entry)
