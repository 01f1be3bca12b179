"""Name resolution, COMMON layout and type checking."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..analysis.locations import ArrayWhole, CommonCell, Local, Location
from ..errors import (ArgumentTypeMismatch, ArityMismatch, CommonLayoutMismatch,
                      ParameterRedefinition, TypeMismatch, UndeclaredVariable,
                      UnresolvedCallee)
from . import ast as A

NUMERIC = (A.INTEGER, A.REAL)

LOCAL, FORMAL, COMMON, PARAM, RESULT = "local", "formal", "common", "param", "result"


@dataclass(frozen=True)
class VarInfo:
    name: str
    type: str
    kind: str
    size: int | None = None
    location: Location | None = None
    value: A.Literal | None = None      # PARAMETER value
    common: tuple[str, int] | None = None
    formal_index: int | None = None

    @property
    def is_array(self) -> bool:
        return self.size is not None


@dataclass
class UnitSymbols:
    unit: A.Unit
    vars: dict[str, VarInfo] = field(default_factory=dict)

    @property
    def name(self) -> str:
        return self.unit.name

    def get(self, name: str) -> VarInfo:
        return self.vars[name]

    def location(self, name: str) -> Location | None:
        info = self.vars.get(name)
        return info.location if info else None

    def formal_locations(self) -> list[Location]:
        return [self.vars[f].location for f in self.unit.formals]


@dataclass
class SymbolTable:
    program: A.Program
    units: dict[str, UnitSymbols]
    commons: dict[str, tuple[tuple[str, int | None], ...]]

    def __getitem__(self, unit_name: str) -> UnitSymbols:
        return self.units[unit_name]

    def unit(self, name: str) -> A.Unit:
        return self.units[name].unit

    def has_unit(self, name: str) -> bool:
        return name in self.units


def _err(cls, msg, unit: A.Unit):
    return cls(msg, unit.path)


def _unit_symbols(u: A.Unit) -> UnitSymbols:
    syms = UnitSymbols(u)
    types: dict[str, A.TypeDecl] = {}
    params: dict[str, A.ParamDecl] = {}
    commons: dict[str, tuple[str, int]] = {}
    param_order: list[str] = []

    for d in u.decls:
        if isinstance(d, A.TypeDecl):
            if d.name in types:
                raise _err(TypeMismatch, f"{d.name} declared twice in {u.name}", u)
            if u.kind == A.FUNCTION and d.name == u.name:
                raise _err(TypeMismatch, f"function result {d.name} must not be redeclared", u)
            if isinstance(d.size, str) and d.size not in params:
                raise _err(UndeclaredVariable,
                           f"array bound {d.size} of {d.name} is not a PARAMETER declared earlier", u)
            types[d.name] = d
        elif isinstance(d, A.ParamDecl):
            if d.name in params:
                raise _err(ParameterRedefinition, f"PARAMETER {d.name} defined twice in {u.name}", u)
            params[d.name] = d
            param_order.append(d.name)
        else:
            for i, n in enumerate(d.names):
                if n in commons:
                    raise _err(TypeMismatch, f"{n} appears in two COMMON blocks in {u.name}", u)
                commons[n] = (d.block, i)

    def param_value(name: str) -> A.Literal:
        d = params[name]
        lit = d.value
        if name in types:
            decl = types[name]
            if decl.size is not None:
                raise _err(TypeMismatch, f"PARAMETER {name} cannot be an array", u)
            lit = _coerce_literal(lit, decl.type, u, name)
        return lit

    for name in param_order:
        lit = param_value(name)
        syms.vars[name] = VarInfo(name, A.literal_type(lit), PARAM, value=lit)

    for name, decl in types.items():
        if name in params:
            continue
        size = decl.size
        if isinstance(size, str):
            v = syms.vars[size].value
            if not isinstance(v, A.IntLit):
                raise _err(TypeMismatch, f"array bound {size} is not an INTEGER PARAMETER", u)
            size = v.value
        if size is not None and size <= 0:
            raise _err(TypeMismatch, f"array {name} must have a positive bound", u)
        if name in commons:
            block, idx = commons[name]
            base = CommonCell(block, idx)
            kind = COMMON
        else:
            base = Local(u.name, name)
            kind = FORMAL if name in u.formals else LOCAL
        loc = ArrayWhole(base) if size is not None else base
        fidx = u.formals.index(name) if name in u.formals else None
        if fidx is not None and kind == COMMON:
            raise _err(TypeMismatch, f"formal {name} cannot be in COMMON", u)
        syms.vars[name] = VarInfo(name, decl.type, kind, size, loc,
                                  common=commons.get(name), formal_index=fidx)

    for n in commons:
        if n not in types:
            if n in params:
                raise _err(TypeMismatch, f"PARAMETER {n} cannot be in COMMON", u)
            raise _err(UndeclaredVariable, f"COMMON member {n} has no type declaration in {u.name}", u)
    for f in u.formals:
        if f not in types:
            if f in params:
                raise _err(TypeMismatch, f"formal {f} cannot be a PARAMETER", u)
            raise _err(UndeclaredVariable, f"formal {f} of {u.name} has no type declaration", u)
    if u.kind == A.FUNCTION:
        syms.vars[u.name] = VarInfo(u.name, u.result_type, RESULT, location=Local(u.name, u.name))
    return syms


def _coerce_literal(lit: A.Literal, typ: str, u: A.Unit, name: str) -> A.Literal:
    lt = A.literal_type(lit)
    if lt == typ:
        return lit
    if typ == A.REAL and lt == A.INTEGER:
        return A.RealLit(float(lit.value))
    raise _err(TypeMismatch, f"{name} is {typ} but given a {lt} value", u)


def resolve_symbols(p: A.Program) -> SymbolTable:
    """Build per-unit symbol tables, check COMMON layouts and types."""
    units = {u.name: _unit_symbols(u) for u in p.units}
    layouts: dict[str, tuple] = {}
    owner: dict[str, str] = {}
    for u in p.units:
        for d in u.decls:
            if not isinstance(d, A.CommonDecl):
                continue
            syms = units[u.name]
            layout = tuple((syms.get(n).type, syms.get(n).size) for n in d.names)
            if d.block in layouts and layouts[d.block] != layout:
                raise CommonLayoutMismatch(
                    f"COMMON /{d.block}/ in {u.name} has layout {_layout_str(layout)} "
                    f"but {owner[d.block]} has {_layout_str(layouts[d.block])}", u.path)
            layouts.setdefault(d.block, layout)
            owner.setdefault(d.block, u.name)
    table = SymbolTable(p, units, layouts)
    for u in p.units:
        TypeChecker(table, units[u.name]).check_body(u.body)
    return table


def _layout_str(layout) -> str:
    return "(" + ", ".join(t + (f"({s})" if s else "") for t, s in layout) + ")"


class TypeChecker:
    def __init__(self, table: SymbolTable, syms: UnitSymbols):
        self.table = table
        self.syms = syms
        self.unit = syms.unit

    def fail(self, cls, msg):
        raise cls(f"{self.unit.name}: {msg}", self.unit.path)

    def var(self, name: str) -> VarInfo:
        info = self.syms.vars.get(name)
        if info is None:
            self.fail(UndeclaredVariable, f"undeclared variable {name}")
        return info

    def expr(self, e) -> str:
        if isinstance(e, A.LITERALS):
            return A.literal_type(e)
        if isinstance(e, A.Var):
            info = self.var(e.name)
            if info.is_array:
                self.fail(TypeMismatch, f"array {e.name} used without a subscript")
            return info.type
        if isinstance(e, A.ArrayRef):
            info = self.var(e.name)
            if not info.is_array:
                self.fail(TypeMismatch, f"{e.name} is not an array")
            if self.expr(e.index) != A.INTEGER:
                self.fail(TypeMismatch, f"subscript of {e.name} must be INTEGER")
            return info.type
        if isinstance(e, A.FuncCall):
            callee = self.callee(e.name, A.FUNCTION)
            self.args(callee, e.args)
            return callee.result_type
        if isinstance(e, A.Unary):
            t = self.expr(e.operand)
            if e.op == ".NOT.":
                if t != A.LOGICAL:
                    self.fail(TypeMismatch, ".NOT. needs a LOGICAL operand")
                return A.LOGICAL
            if t not in NUMERIC:
                self.fail(TypeMismatch, "unary minus needs a numeric operand")
            return t
        lt, rt = self.expr(e.left), self.expr(e.right)
        if e.op in A.ARITH_OPS:
            if lt not in NUMERIC or rt not in NUMERIC:
                self.fail(TypeMismatch, f"operator {e.op} needs numeric operands")
            return A.REAL if A.REAL in (lt, rt) else A.INTEGER
        if e.op in A.REL_OPS:
            if not ((lt in NUMERIC and rt in NUMERIC) or lt == rt == A.CHARACTER):
                self.fail(TypeMismatch, f"cannot compare {lt} with {rt}")
            return A.LOGICAL
        if lt != A.LOGICAL or rt != A.LOGICAL:
            self.fail(TypeMismatch, f"operator {e.op} needs LOGICAL operands")
        return A.LOGICAL

    def callee(self, name: str, kind: str) -> A.Unit:
        if name not in self.table.units:
            raise UnresolvedCallee(f"{self.unit.name}: call to undefined unit {name}", self.unit.path)
        u = self.table.units[name].unit
        if u.kind != kind:
            self.fail(TypeMismatch, f"{name} is a {u.kind}, not a {kind}")
        return u

    def args(self, callee: A.Unit, actuals) -> None:
        check_arguments(self.table, self.syms, callee, actuals, self.expr)

    def target(self, t) -> str:
        info = self.var(t.name)
        if info.kind == PARAM:
            self.fail(ParameterRedefinition, f"assignment to PARAMETER {t.name}")
        return self.expr(t)

    def check_body(self, body) -> None:
        for s in body:
            self.stmt(s)

    def stmt(self, s) -> None:
        if isinstance(s, A.Assign):
            tt, vt = self.target(s.target), self.expr(s.value)
            if not (tt == vt or (tt in NUMERIC and vt in NUMERIC)):
                self.fail(TypeMismatch, f"cannot assign {vt} to {tt} {s.target.name}")
        elif isinstance(s, (A.If, A.DoWhile)):
            if self.expr(s.cond) != A.LOGICAL:
                self.fail(TypeMismatch, "condition must be LOGICAL")
            if isinstance(s, A.If):
                self.check_body(s.then)
                self.check_body(s.orelse)
            else:
                self.check_body(s.body)
        elif isinstance(s, A.DoLoop):
            if self.target(A.Var(s.var)) != A.INTEGER:
                self.fail(TypeMismatch, f"DO index {s.var} must be INTEGER")
            for b in (s.lo, s.hi, s.step):
                if b is not None and self.expr(b) != A.INTEGER:
                    self.fail(TypeMismatch, "DO bounds must be INTEGER")
            self.check_body(s.body)
        elif isinstance(s, A.Call):
            self.args(self.callee(s.name, A.SUBROUTINE), s.args)
        elif isinstance(s, A.Print):
            for a in s.args:
                self.expr(a)
        elif isinstance(s, A.Read):
            for t in s.targets:
                self.target(t)


def check_arguments(table: SymbolTable, syms: UnitSymbols, callee: A.Unit, actuals,
                    type_of=None) -> None:
    """Raise ArityMismatch / ArgumentTypeMismatch for a call site."""
    if len(actuals) != len(callee.formals):
        raise ArityMismatch(f"{syms.name}: {callee.name} expects {len(callee.formals)} "
                            f"arguments, got {len(actuals)}", syms.unit.path)
    csyms = table.units[callee.name]
    for i, (f, a) in enumerate(zip(callee.formals, actuals)):
        finfo = csyms.get(f)
        if finfo.is_array:
            ainfo = syms.vars.get(a.name) if isinstance(a, A.Var) else None
            if ainfo is None or not ainfo.is_array:
                raise ArgumentTypeMismatch(
                    f"{syms.name}: argument {i + 1} of {callee.name} must be an array",
                    syms.unit.path)
            if ainfo.type != finfo.type or ainfo.size < finfo.size:
                raise ArgumentTypeMismatch(
                    f"{syms.name}: array argument {i + 1} of {callee.name} has "
                    f"{ainfo.type}({ainfo.size}), needs {finfo.type}({finfo.size})",
                    syms.unit.path)
            continue
        if isinstance(a, A.Var) and a.name in syms.vars and syms.vars[a.name].is_array:
            raise ArgumentTypeMismatch(
                f"{syms.name}: argument {i + 1} of {callee.name} must be a scalar",
                syms.unit.path)
        at = type_of(a) if type_of else None
        if at is not None and at != finfo.type:
            raise ArgumentTypeMismatch(
                f"{syms.name}: argument {i + 1} of {callee.name} is {at}, needs {finfo.type}",
                syms.unit.path)
