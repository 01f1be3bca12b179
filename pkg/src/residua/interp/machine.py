"""Big-step reference interpreter for MiniF77.

Storage is a graph of :class:`Cell` objects so that by-reference argument
passing and COMMON sharing fall out of plain object identity.  Every
failure the program can hit at run time is reified as a :class:`Fault`
outcome rather than raised to the caller.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from ..analysis.domain import Known
from ..analysis.locations import CommonCell
from ..frontend import ast as A
from ..frontend.printer import format_literal
from ..frontend.symbols import COMMON, FORMAL, PARAM, SymbolTable, resolve_symbols

DEFAULT_FUEL = 10 ** 6
MAX_DEPTH = 200

_MOD = 1 << 32


def wrap32(v: int) -> int:
    v &= _MOD - 1
    return v - _MOD if v >= 1 << 31 else v


class Cell:
    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = value

    def __repr__(self) -> str:
        return f"Cell({self.value!r})"


class Fault(Exception):
    def __init__(self, kind: str, prov: int | None = None, detail: str = ""):
        super().__init__(f"{kind} at {prov}: {detail}")
        self.kind = kind
        self.prov = prov
        self.detail = detail


class _Stop(Exception):
    pass


class _Return(Exception):
    pass


class ConstraintViolation(Exception):
    """A run left the domain of the active constraints; the trial is void."""


NORMAL, STOPPED, FAULT = "normal", "stopped", "fault"


@dataclass(frozen=True)
class ExitKind:
    kind: str
    fault: str | None = None
    prov: int | None = field(default=None, compare=False)

    def __str__(self) -> str:
        return self.kind if self.fault is None else f"fault({self.fault})"


@dataclass
class ConcreteState:
    trace: list          # list of tuples of Known, one per PRINT
    commons: dict        # CommonCell -> Known | None | tuple (arrays)
    exit: ExitKind
    steps: int = 0

    def lines(self) -> list[str]:
        return [" ".join(format_literal(k.literal()) for k in rec) for rec in self.trace]

    def observables(self) -> tuple:
        return (tuple(self.trace), tuple(sorted(self.commons.items(), key=lambda kv: (kv[0].block, kv[0].index))),
                self.exit)


# -- concrete operations ----------------------------------------------------

def _div_int(a: int, b: int, prov) -> int:
    if b == 0:
        raise Fault("div-by-zero", prov, "integer division by zero")
    q = abs(a) // abs(b)
    return wrap32(q if (a < 0) == (b < 0) else -q)


def _pow_int(a: int, e: int, prov) -> int:
    if e >= 0:
        r = 1
        base = a
        while e:
            if e & 1:
                r = wrap32(r * base)
            base = wrap32(base * base)
            e >>= 1
        return r
    if a == 0:
        raise Fault("div-by-zero", prov, "zero to a negative power")
    if a in (1, -1):
        return a if e % 2 else 1
    return 0


def _pow_real_int(x: float, e: int, prov) -> float:
    r = 1.0
    b = x
    n = abs(e)
    while n:
        if n & 1:
            r *= b
        n >>= 1
        if n:
            b *= b
    if e < 0:
        if r == 0.0:
            raise Fault("div-by-zero", prov, "zero to a negative power")
        r = 1.0 / r
    return r


def arith(op: str, a, ta: str, b, tb: str, prov=None):
    """Concrete binary arithmetic; returns (value, type)."""
    if ta == tb == A.INTEGER:
        if op == "+":
            return wrap32(a + b), A.INTEGER
        if op == "-":
            return wrap32(a - b), A.INTEGER
        if op == "*":
            return wrap32(a * b), A.INTEGER
        if op == "/":
            return _div_int(a, b, prov), A.INTEGER
        return _pow_int(a, b, prov), A.INTEGER
    if op == "**" and tb == A.INTEGER:
        return _pow_real_int(float(a), b, prov), A.REAL
    x, y = float(a), float(b)
    if op == "+":
        return x + y, A.REAL
    if op == "-":
        return x - y, A.REAL
    if op == "*":
        return x * y, A.REAL
    if op == "/":
        if y == 0.0:
            raise Fault("div-by-zero", prov, "real division by zero")
        return x / y, A.REAL
    try:
        return math.pow(x, y), A.REAL
    except (ValueError, OverflowError) as exc:
        raise Fault("arith", prov, str(exc)) from None


def compare(op: str, a, b) -> bool:
    if op == ".EQ.":
        return a == b
    if op == ".NE.":
        return a != b
    if op == ".LT.":
        return a < b
    if op == ".LE.":
        return a <= b
    if op == ".GT.":
        return a > b
    return a >= b


def to_type(v, src: str, dst: str, prov=None):
    if src == dst:
        return v
    if dst == A.REAL and src == A.INTEGER:
        return float(v)
    if dst == A.INTEGER and src == A.REAL:
        if not math.isfinite(v):
            raise Fault("conversion", prov, "non-finite real to integer")
        t = math.trunc(v)
        if not -(1 << 31) <= t < (1 << 31):
            raise Fault("conversion", prov, "real out of integer range")
        return t
    raise Fault("conversion", prov, f"{src} to {dst}")


# -- frames -----------------------------------------------------------------

class Frame:
    __slots__ = ("unit", "syms", "cells", "ctx")

    def __init__(self, unit: A.Unit, syms, cells: dict, ctx=None):
        self.unit = unit
        self.syms = syms
        self.cells = cells    # name -> Cell | list[Cell]
        self.ctx = ctx


class Monitor:
    """Hooks for instrumented runs; the default does nothing."""

    def enter(self, caller: Frame | None, site) -> object:
        return None

    def before(self, frame: Frame, stmt: A.Stmt, machine: "Machine") -> None:
        pass


class Machine:
    def __init__(self, program: A.Program, inputs=None, fuel: int = DEFAULT_FUEL,
                 monitor: Monitor | None = None, table: SymbolTable | None = None):
        self.p = program
        self.table = table or resolve_symbols(program)
        self.inputs = inputs
        self.fuel = fuel
        self.steps = 0
        self.monitor = monitor or Monitor()
        self.trace: list = []
        self.commons: dict[str, list] = {}
        self.stream = list(inputs.stream) if inputs is not None else []
        self.depth = 0
        self._types = {}

    # storage

    def _common_block(self, block: str):
        if block not in self.commons:
            layout = self.table.commons[block]
            self.commons[block] = [
                [Cell() for _ in range(size)] if size is not None else Cell()
                for _, size in layout]
        return self.commons[block]

    def _size(self, info) -> int:
        return info.size

    def _activate(self, unit: A.Unit, actual_cells: list | None, ctx) -> Frame:
        syms = self.table[unit.name]
        cells: dict = {}
        for name, info in syms.vars.items():
            if info.kind == PARAM:
                continue
            if info.kind == COMMON:
                block, idx = info.common
                cells[name] = self._common_block(block)[idx]
            elif info.kind == FORMAL:
                cells[name] = actual_cells[info.formal_index]
            elif info.is_array:
                cells[name] = [Cell() for _ in range(info.size)]
            else:
                cells[name] = Cell()
        frame = Frame(unit, syms, cells, ctx)
        if self.inputs is not None:
            self.inputs.on_activate(self, frame)
        return frame

    # entry

    def run(self) -> ConcreteState:
        exit_kind = ExitKind(NORMAL)
        try:
            main = self.p.main
            for u in self.p.units:
                for d in u.decls:
                    if isinstance(d, A.CommonDecl):
                        self._common_block(d.block)
            if self.inputs is not None:
                self.inputs.init_commons(self)
            frame = self._activate(main, None, self.monitor.enter(None, None))
            try:
                self.block(main.body, frame)
            except _Return:
                pass
        except _Stop:
            exit_kind = ExitKind(STOPPED)
        except Fault as f:
            exit_kind = ExitKind(FAULT, f.kind, f.prov)
        except RecursionError:
            exit_kind = ExitKind(FAULT, "depth")
        return ConcreteState(self.trace, self.final_commons(), exit_kind, self.steps)

    def final_commons(self) -> dict:
        out = {}
        for block in sorted(self.commons):
            layout = self.table.commons[block]
            for i, ((name, size), cell) in enumerate(zip(layout, self.commons[block])):
                typ = self._common_type(block, i)
                if isinstance(cell, list):
                    out[CommonCell(block, i)] = tuple(None if c.value is None else Known(typ, c.value)
                                                      for c in cell)
                else:
                    out[CommonCell(block, i)] = None if cell.value is None else Known(typ, cell.value)
        return out

    def _common_type(self, block: str, index: int) -> str:
        key = (block, index)
        if key not in self._types:
            for syms in self.table.units.values():
                for info in syms.vars.values():
                    if info.kind == COMMON and info.common == key:
                        self._types[key] = info.type
        return self._types[key]

    # statements

    def tick(self, prov):
        self.steps += 1
        if self.steps > self.fuel:
            raise Fault("timeout", prov, "fuel exhausted")

    def block(self, stmts, frame: Frame) -> None:
        for s in stmts:
            self.stmt(s, frame)

    def stmt(self, s: A.Stmt, frame: Frame) -> None:
        self.tick(s.prov)
        self.monitor.before(frame, s, self)
        if isinstance(s, A.Assign):
            self.assign(s, frame)
        elif isinstance(s, A.If):
            if self.cond(s.cond, frame, s.prov):
                self.block(s.then, frame)
            else:
                self.block(s.orelse, frame)
        elif isinstance(s, A.DoLoop):
            self.do_loop(s, frame)
        elif isinstance(s, A.DoWhile):
            while self.cond(s.cond, frame, s.prov):
                self.block(s.body, frame)
                self.tick(s.prov)
        elif isinstance(s, A.Call):
            self.call(s.name, s.args, frame, s.prov, ("call", s.prov))
        elif isinstance(s, A.Print):
            self.trace.append(tuple(self.known(a, frame, s.prov) for a in s.args))
        elif isinstance(s, A.Read):
            for t in s.targets:
                cell, typ = self.lvalue(t, frame, s.prov)
                if not self.stream:
                    raise Fault("input", s.prov, "READ past end of input")
                cell.value = self.inputs.coerce(self.stream.pop(0), typ)
        elif isinstance(s, A.Return):
            raise _Return()
        elif isinstance(s, A.Stop):
            raise _Stop()

    def assign(self, s: A.Assign, frame: Frame) -> None:
        cell, typ = self.lvalue(s.target, frame, s.prov)
        v, t = self.eval(s.value, frame, s.prov)
        cell.value = to_type(v, t, typ, s.prov)

    def lvalue(self, t, frame: Frame, prov):
        info = frame.syms.vars[t.name]
        if isinstance(t, A.ArrayRef):
            i, _ = self.eval(t.index, frame, prov)
            arr = frame.cells[t.name]
            if not 1 <= i <= len(arr):
                raise Fault("bounds", prov, f"{t.name}({i})")
            return arr[i - 1], info.type
        return frame.cells[t.name], info.type

    def do_loop(self, s: A.DoLoop, frame: Frame) -> None:
        lo, tl = self.eval(s.lo, frame, s.prov)
        hi, th = self.eval(s.hi, frame, s.prov)
        step = 1
        if s.step is not None:
            step, _ = self.eval(s.step, frame, s.prov)
        if step == 0:
            raise Fault("zero-step", s.prov, "DO step is zero")
        span = hi - lo + step
        q = abs(span) // abs(step)
        trip = max(0, q if (span >= 0) == (step > 0) else -q)
        var = frame.cells[s.var]
        for k in range(trip):
            var.value = wrap32(lo + k * step)
            self.block(s.body, frame)
            self.tick(s.prov)
        var.value = wrap32(lo + trip * step)

    def cond(self, e, frame: Frame, prov) -> bool:
        v, _ = self.eval(e, frame, prov)
        return bool(v)

    def known(self, e, frame: Frame, prov) -> Known:
        v, t = self.eval(e, frame, prov)
        return Known(t, v)

    # calls

    def call(self, name: str, args, frame: Frame, prov, site):
        callee = self.table.unit(name)
        csyms = self.table[name]
        actual_cells = []
        for i, a in enumerate(args):
            finfo = csyms.vars[callee.formals[i]]
            if isinstance(a, A.Var) and frame.syms.vars[a.name].kind != PARAM:
                actual_cells.append(frame.cells[a.name])
            elif isinstance(a, A.ArrayRef):
                actual_cells.append(self.lvalue(a, frame, prov)[0])
            else:
                v, t = self.eval(a, frame, prov)
                actual_cells.append(Cell(to_type(v, t, finfo.type, prov)))
        self.depth += 1
        if self.depth > MAX_DEPTH:
            raise Fault("depth", prov, "call depth limit")
        try:
            new = self._activate(callee, actual_cells, self.monitor.enter(frame, site))
            try:
                self.block(callee.body, new)
            except _Return:
                pass
        finally:
            self.depth -= 1
        if callee.kind == A.FUNCTION:
            cell = new.cells[callee.name]
            if cell.value is None:
                raise Fault("uninitialized", prov, f"result of {name}")
            return cell.value, callee.result_type
        return None

    # expressions

    def eval(self, e, frame: Frame, prov):
        if isinstance(e, A.LITERALS):
            return e.value, A.literal_type(e)
        if isinstance(e, A.Var):
            info = frame.syms.vars[e.name]
            if info.kind == PARAM:
                return info.value.value, info.type
            v = frame.cells[e.name].value
            if v is None:
                raise Fault("uninitialized", prov, e.name)
            return v, info.type
        if isinstance(e, A.ArrayRef):
            cell, typ = self.lvalue(e, frame, prov)
            if cell.value is None:
                raise Fault("uninitialized", prov, f"{e.name}(...)")
            return cell.value, typ
        if isinstance(e, A.FuncCall):
            return self.call(e.name, e.args, frame, prov, ("site", e.site))
        if isinstance(e, A.Unary):
            v, t = self.eval(e.operand, frame, prov)
            if e.op == ".NOT.":
                return (not v), A.LOGICAL
            return (wrap32(-v) if t == A.INTEGER else -v), t
        lv, lt = self.eval(e.left, frame, prov)
        rv, rt = self.eval(e.right, frame, prov)
        op = e.op
        if op in A.LOGIC_OPS:
            return ((lv and rv) if op == ".AND." else (lv or rv)), A.LOGICAL
        if op in A.REL_OPS:
            if A.REAL in (lt, rt):
                lv, rv = float(lv), float(rv)
            return compare(op, lv, rv), A.LOGICAL
        return arith(op, lv, lt, rv, rt, prov)


def run(p: A.Program, inputs=None, fuel: int = DEFAULT_FUEL, monitor: Monitor | None = None,
        table: SymbolTable | None = None) -> ConcreteState:
    """Execute ``p`` and return its observable final state."""
    return Machine(p, inputs, fuel, monitor, table).run()
