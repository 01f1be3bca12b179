"""Specialization keys and the variant cache."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..analysis.aliases import AliasPartition
from ..analysis.domain import AbstractEnv, Known
from ..analysis.locations import ArrayWhole, CommonCell
from ..frontend import ast as A
from ..frontend.symbols import UnitSymbols


def descriptor(loc, syms: UnitSymbols):
    """Unit-independent name for a location visible at procedure entry."""
    base = loc.base if isinstance(loc, ArrayWhole) else loc
    if isinstance(base, CommonCell):
        return loc
    if base.name in syms.unit.formals:
        return ("formal", syms.unit.formals.index(base.name))
    return ("local", base.name)


def desc_key(d) -> tuple:
    if isinstance(d, tuple):
        return (0, d[1], "") if d[0] == "formal" else (2, 0, d[1])
    if isinstance(d, ArrayWhole):
        return (1, d.base.block, d.base.index, 1)
    return (1, d.block, d.index, 0)


def desc_text(d, unit: A.Unit) -> str:
    if isinstance(d, tuple):
        return unit.formals[d[1]] if d[0] == "formal" else d[1]
    return str(d)


@dataclass(frozen=True)
class SpecializationKey:
    unit: str
    known: tuple = ()      # ((descriptor, Known), ...) in canonical order
    aliases: tuple = ()    # non-singleton classes, each a tuple of descriptors

    @classmethod
    def make(cls, unit: str, env: AbstractEnv, aliases: AliasPartition,
             syms: UnitSymbols) -> "SpecializationKey":
        known = sorted(((descriptor(l, syms), v) for l, v in env.bindings.items()),
                       key=lambda kv: desc_key(kv[0]))
        classes = sorted(tuple(sorted((descriptor(l, syms) for l in c), key=desc_key))
                         for c in aliases.nontrivial())
        classes.sort(key=lambda c: [desc_key(d) for d in c])
        return cls(unit, tuple(known), tuple(classes))

    def is_empty(self) -> bool:
        return not self.known and not self.aliases

    def describe(self, unit: A.Unit) -> str:
        parts = [f"{desc_text(d, unit)}={v}" for d, v in self.known]
        parts += ["alias(" + ",".join(desc_text(d, unit) for d in c) + ")" for c in self.aliases]
        return ", ".join(parts) if parts else "(none)"

    def to_json(self, unit: A.Unit) -> dict:
        return {
            "known": [{"name": desc_text(d, unit), "type": v.type, "value": _jsonable(v)}
                      for d, v in self.known],
            "aliases": [[desc_text(d, unit) for d in c] for c in self.aliases],
        }


def _jsonable(v: Known):
    if v.type == A.REAL:
        return str(v)
    return v.value


@dataclass(eq=False)
class VariantEntry:
    """One specialized version of a source unit."""

    id: int
    unit: A.Unit
    key: SpecializationKey
    entry_env: AbstractEnv
    aliases: AliasPartition
    residual: A.Unit | None = None
    mods: frozenset | None = None    # set once the body is finished
    record: object = None
    name: str | None = None

    @property
    def placeholder(self) -> str:
        return f"@{self.id}"

    @property
    def done(self) -> bool:
        return self.mods is not None


@dataclass
class VariantCache:
    entries: list = field(default_factory=list)
    by_key: dict = field(default_factory=dict)

    def get(self, key: SpecializationKey) -> VariantEntry | None:
        return self.by_key.get(key)

    def add(self, unit: A.Unit, key: SpecializationKey, env: AbstractEnv,
            aliases: AliasPartition) -> VariantEntry:
        e = VariantEntry(len(self.entries), unit, key, env, aliases)
        self.entries.append(e)
        self.by_key[key] = e
        return e

    def count(self, unit_name: str) -> int:
        return sum(1 for e in self.entries if e.unit.name == unit_name)

    def __getitem__(self, i: int) -> VariantEntry:
        return self.entries[i]

    def __len__(self) -> int:
        return len(self.entries)
