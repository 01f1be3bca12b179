"""By-reference argument binding and COMMON overlap.

Inside a specialized procedure, an :class:`AliasPartition` groups the
locations that may denote the same storage.  Writing one member of a
class leaves every other member Unknown.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

from ..frontend import ast as A
from ..frontend.symbols import SymbolTable, UnitSymbols, check_arguments
from .domain import UNKNOWN, AbstractEnv, Known
from .evaluate import eval_abstract, expr_type
from .locations import Location, is_common, sort_key
from .mods import actual_location, translate


class AliasPartition:
    """Disjoint may-alias classes.  Locations not listed are singletons."""

    def __init__(self, classes: Iterable[frozenset] = ()):
        self.classes: tuple[frozenset, ...] = tuple(
            sorted((frozenset(c) for c in classes), key=lambda c: min(sort_key(x) for x in c)))
        self._index: dict[Location, frozenset] = {}
        for c in self.classes:
            for loc in c:
                if loc in self._index:
                    raise ValueError(f"{loc} in two alias classes")
                self._index[loc] = c

    def class_of(self, loc: Location) -> frozenset:
        return self._index.get(loc) or frozenset((loc,))

    def aliased(self, loc: Location) -> bool:
        return len(self.class_of(loc)) > 1

    def closure(self, locs: Iterable[Location]) -> set[Location]:
        out: set[Location] = set()
        for l in locs:
            out |= self.class_of(l)
        return out

    def nontrivial(self) -> list[frozenset]:
        return [c for c in self.classes if len(c) > 1]

    def __repr__(self) -> str:
        return "Aliases[" + " ".join("{" + ",".join(map(str, sorted(c, key=sort_key))) + "}"
                                     for c in self.classes) + "]"


TRIVIAL = AliasPartition()


def write(env: AbstractEnv, loc: Location, value, aliases: AliasPartition) -> AbstractEnv:
    """Assign ``value`` to ``loc``; other members of its class become Unknown."""
    others = aliases.class_of(loc) - {loc}
    return env.kill(others).set(loc, value)


def kill(env: AbstractEnv, locs: Iterable[Location], aliases: AliasPartition) -> AbstractEnv:
    return env.kill(aliases.closure(locs))


@dataclass
class CallBinding:
    entry_env: AbstractEnv
    aliases: AliasPartition
    # formal position -> callee location, for translating keys
    formal_locs: tuple


def bind_call(actuals, caller_env: AbstractEnv, caller: UnitSymbols, caller_aliases: AliasPartition,
              callee: A.Unit, table: SymbolTable, reach: frozenset | None = None) -> CallBinding:
    """Bind actuals to the formals of ``callee`` by reference.

    Formals that receive the same caller storage share an alias class,
    which also picks up any COMMON location aliased with that storage in
    the caller.  COMMON values flow through unchanged for the blocks in
    ``reach`` (all blocks when None).
    """
    check_arguments(table, caller, callee, actuals,
                    lambda e: expr_type(e, caller, table))
    csyms = table[callee.name]
    formal_locs = tuple(csyms.vars[f].location for f in callee.formals)

    groups: dict[object, list[int]] = {}
    values = []
    for i, a in enumerate(actuals):
        ref = actual_location(a, caller)
        key = caller_aliases.class_of(ref) if ref is not None else ("expr", i)
        groups.setdefault(key, []).append(i)
        if csyms.vars[callee.formals[i]].is_array:
            values.append(UNKNOWN)
        else:
            values.append(eval_abstract(a, caller_env, caller))

    bindings: dict[Location, Known] = {}
    for loc, v in caller_env.bindings.items():
        base = getattr(loc, "base", loc)
        if is_common(loc) and (reach is None or base.block in reach):
            bindings[loc] = v

    classes = []
    for key, idxs in groups.items():
        members = {formal_locs[i] for i in idxs}
        commons = {l for l in key if is_common(l)} if isinstance(key, frozenset) else set()
        cls = members | commons
        classes.append(cls)
        vals = [values[i] for i in idxs] + [caller_env.get(c) for c in commons]
        agree = all(isinstance(v, Known) for v in vals) and len(set(vals)) == 1
        for i in idxs:
            if isinstance(values[i], Known) and (len(cls) == 1 or agree):
                bindings[formal_locs[i]] = values[i]
    return CallBinding(AbstractEnv(bindings), AliasPartition(classes), formal_locs)


def apply_call_effect(actuals, caller_env: AbstractEnv, callee_mods: Iterable,
                      caller: UnitSymbols, caller_aliases: AliasPartition) -> AbstractEnv:
    """Kill everything the callee may write, seen from the caller."""
    return kill(caller_env, translate(callee_mods, actuals, caller), caller_aliases)
