"""Two-level constant lattice and abstract environments."""

from __future__ import annotations

import math
import struct
from typing import Iterable, Union

from ..frontend import ast as A
from .locations import Location, sort_key


class Known:
    """A compile-time constant of a MiniF77 type.

    Equality is by type and bit pattern, so ``Known(REAL, 0.0)`` and
    ``Known(REAL, -0.0)`` differ and LOGICAL true never equals INTEGER 1.
    """

    __slots__ = ("type", "value", "_key")

    def __init__(self, typ: str, value):
        if typ == A.REAL:
            value = float(value)
            key = struct.pack("<d", value)
        elif typ == A.INTEGER:
            value = int(value)
            key = value
        elif typ == A.LOGICAL:
            value = bool(value)
            key = value
        else:
            value = str(value)
            key = value
        self.type = typ
        self.value = value
        self._key = (typ, key)

    @classmethod
    def of_literal(cls, lit: A.Literal) -> "Known":
        return cls(A.literal_type(lit), lit.value)

    def literal(self) -> A.Literal:
        return A.make_literal(self.type, self.value)

    def __eq__(self, other) -> bool:
        return isinstance(other, Known) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Known({self.type} {self.value!r})"

    def __str__(self) -> str:
        from ..frontend.printer import format_literal
        return format_literal(self.literal())


class _Unknown:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Unknown"

    def __reduce__(self):
        return (_Unknown, ())


UNKNOWN = _Unknown()
AbstractValue = Union[Known, _Unknown]


def join_value(a: AbstractValue, b: AbstractValue) -> AbstractValue:
    if isinstance(a, Known) and a == b:
        return a
    return UNKNOWN


def is_finite_value(k: Known) -> bool:
    return k.type != A.REAL or math.isfinite(k.value)


class AbstractEnv:
    """Known bindings over locations plus a set of disequality facts.

    Absent locations are Unknown.  Environments are treated as values: every
    update returns a new environment.
    """

    __slots__ = ("bindings", "facts")

    def __init__(self, bindings: dict | None = None, facts: Iterable = ()):
        self.bindings: dict[Location, Known] = dict(bindings or {})
        self.facts: frozenset[tuple[Location, Known]] = frozenset(facts)

    def get(self, loc: Location) -> AbstractValue:
        return self.bindings.get(loc, UNKNOWN)

    def has_fact(self, loc: Location, value: Known) -> bool:
        return (loc, value) in self.facts

    def set(self, loc: Location, value: AbstractValue) -> "AbstractEnv":
        b = dict(self.bindings)
        if isinstance(value, Known):
            b[loc] = value
        else:
            b.pop(loc, None)
        facts = self.facts
        if any(f[0] == loc for f in facts):
            facts = frozenset(f for f in facts if f[0] != loc)
        return AbstractEnv(b, facts)

    def kill(self, locs: Iterable[Location]) -> "AbstractEnv":
        locs = set(locs)
        if not locs:
            return self
        b = {k: v for k, v in self.bindings.items() if k not in locs}
        facts = frozenset(f for f in self.facts if f[0] not in locs)
        return AbstractEnv(b, facts)

    def add_fact(self, loc: Location, value: Known) -> "AbstractEnv":
        if self.bindings.get(loc) == value:
            raise ValueError(f"contradictory fact {loc} != {value}")
        return AbstractEnv(self.bindings, self.facts | {(loc, value)})

    def __eq__(self, other) -> bool:
        return (isinstance(other, AbstractEnv) and self.bindings == other.bindings
                and self.facts == other.facts)

    def __hash__(self):
        return hash((frozenset(self.bindings.items()), self.facts))

    def sorted_bindings(self) -> list[tuple[Location, Known]]:
        return sorted(self.bindings.items(), key=lambda kv: sort_key(kv[0]))

    def sorted_facts(self) -> list[tuple[Location, Known]]:
        return sorted(self.facts, key=lambda f: (sort_key(f[0]), repr(f[1])))

    def __repr__(self) -> str:
        parts = [f"{l}={v}" for l, v in self.sorted_bindings()]
        parts += [f"{l}!={v}" for l, v in self.sorted_facts()]
        return "Env{" + ", ".join(parts) + "}"


def join_env(a: AbstractEnv, b: AbstractEnv) -> AbstractEnv:
    """Pointwise join of bindings; facts are intersected."""
    if a is b:
        return a
    bindings = {k: v for k, v in a.bindings.items() if b.bindings.get(k) == v}
    return AbstractEnv(bindings, a.facts & b.facts)
