"""Input vectors for interpreter runs.

The designated inputs of a program are the scalar locals of its main
unit, every scalar COMMON cell, and a stream of raw integers consumed by
READ.  Locals named by UNIT-scoped constraints are also initialized each
time a unit of that origin is activated.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace

from ..analysis.domain import Known
from ..analysis.locations import CommonCell
from ..constraints import GLOBAL, ConstraintSet, resolve_global, resolve_unit, _typed
from ..frontend import ast as A
from ..frontend.symbols import COMMON, FORMAL, LOCAL, SymbolTable

STREAM_LENGTH = 64
INT_RANGE = (-100, 100)
REAL_DENOMINATOR = 8.0
CHAR_VALUES = ("A", "B", "XY", "")


def coerce(raw: int, typ: str):
    """Turn a raw stream integer into a value of ``typ``."""
    if typ == A.INTEGER:
        return raw
    if typ == A.REAL:
        return raw / REAL_DENOMINATOR
    if typ == A.LOGICAL:
        return raw % 2 == 1
    return CHAR_VALUES[raw % len(CHAR_VALUES)]


def _zero(k: Known) -> Known:
    return Known(k.type, {A.INTEGER: 0, A.REAL: 0.0, A.LOGICAL: False, A.CHARACTER: ""}[k.type])


@dataclass
class InputVector:
    main: dict = field(default_factory=dict)      # main local name -> Known
    commons: dict = field(default_factory=dict)   # CommonCell -> Known
    stream: tuple = ()
    # (unit origin, name) -> Known; pinned by UNIT constraints
    unit_values: dict = field(default_factory=dict)

    # hooks used by the machine

    def init_commons(self, machine) -> None:
        for cell, k in self.commons.items():
            block = machine.commons.get(cell.block)
            if block is not None and cell.index < len(block) and not isinstance(block[cell.index], list):
                block[cell.index].value = k.value

    def on_activate(self, machine, frame) -> None:
        u = frame.unit
        if u.kind == A.MAIN:
            for name, k in self.main.items():
                c = frame.cells.get(name)
                if c is not None and not isinstance(c, list) and frame.syms.vars[name].kind == LOCAL:
                    c.value = k.value
        origin = u.source_name
        for (unit, name), k in self.unit_values.items():
            if unit != origin or name not in frame.cells:
                continue
            info = frame.syms.vars[name]
            if info.kind == FORMAL:
                if frame.cells[name].value is None or Known(info.type, frame.cells[name].value) != k:
                    from .machine import ConstraintViolation
                    raise ConstraintViolation(f"{unit}.{name} entered with a different value")
            else:
                frame.cells[name].value = k.value

    def coerce(self, raw: int, typ: str):
        return coerce(raw, typ)

    # shrinking support

    def entries(self) -> list:
        keys = [("main", n) for n in sorted(self.main)]
        keys += [("common", c) for c in sorted(self.commons, key=lambda c: (c.block, c.index))]
        keys += [("stream", i) for i in range(len(self.stream))]
        return keys

    def zeroed(self, entry, pinned: set) -> "InputVector | None":
        kind, k = entry
        if (kind, k) in pinned:
            return None
        if kind == "main":
            if self.main[k] == _zero(self.main[k]):
                return None
            return replace(self, main={**self.main, k: _zero(self.main[k])})
        if kind == "common":
            if self.commons[k] == _zero(self.commons[k]):
                return None
            return replace(self, commons={**self.commons, k: _zero(self.commons[k])})
        if self.stream[k] == 0:
            return None
        s = list(self.stream)
        s[k] = 0
        return replace(self, stream=tuple(s))

    def to_json(self) -> dict:
        return {
            "main": {n: str(k) for n, k in sorted(self.main.items())},
            "commons": {str(c): str(k) for c, k in sorted(self.commons.items(),
                                                          key=lambda kv: (kv[0].block, kv[0].index))},
            "stream": list(self.stream),
        }


def _random_value(typ: str, rng: random.Random) -> Known:
    if typ == A.INTEGER:
        # small values dominate so that equality tests against constants fire
        if rng.random() < 0.5:
            return Known(typ, rng.randint(-3, 10))
        return Known(typ, rng.randint(*INT_RANGE))
    if typ == A.REAL:
        return Known(typ, rng.randint(-80, 80) / REAL_DENOMINATOR)
    if typ == A.LOGICAL:
        return Known(typ, rng.random() < 0.5)
    return Known(typ, rng.choice(CHAR_VALUES))


def designated(table: SymbolTable) -> tuple[dict, dict]:
    """Types of the designated scalar inputs: main locals and COMMON cells."""
    main = table.program.entry
    mains = {n: i.type for n, i in table[main].vars.items() if i.kind == LOCAL and not i.is_array}
    commons = {}
    for syms in table.units.values():
        for info in syms.vars.values():
            if info.kind == COMMON and not info.is_array:
                commons.setdefault(info.location, info.type)
    return mains, commons


def pinned_values(cs: ConstraintSet, table: SymbolTable) -> tuple[dict, dict, dict]:
    """Constraint values split into main locals, COMMON cells and unit values."""
    main, commons, units = {}, {}, {}
    for c in cs:
        if c.scope is GLOBAL:
            loc, typ = resolve_global(c, table, cs)
            k = _typed(c, typ, cs)
            if isinstance(loc, CommonCell):
                commons[loc] = k
            else:
                main[loc.name] = k
        else:
            loc, typ = resolve_unit(c, table, cs)
            units[(c.scope, c.name)] = _typed(c, typ, cs)
    return main, commons, units


def random_inputs(table: SymbolTable, cs: ConstraintSet, rng: random.Random) -> InputVector:
    mains, commons = designated(table)
    pm, pc, pu = pinned_values(cs, table)
    iv = InputVector()
    for n in sorted(mains):
        iv.main[n] = pm.get(n) or _random_value(mains[n], rng)
    for c in sorted(commons, key=lambda c: (c.block, c.index)):
        iv.commons[c] = pc.get(c) or _random_value(commons[c], rng)
    iv.stream = tuple(rng.randint(*INT_RANGE) for _ in range(STREAM_LENGTH))
    iv.unit_values = dict(pu)
    return iv


def pinned_entries(cs: ConstraintSet, table: SymbolTable) -> set:
    pm, pc, _ = pinned_values(cs, table)
    return {("main", n) for n in pm} | {("common", c) for c in pc}
