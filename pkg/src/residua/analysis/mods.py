"""MOD summaries: what a unit (and everything it calls) may write.

Summaries are expressed in the callee's own terms: ``("formal", i)`` for
the i-th formal parameter, or a COMMON location.  Locals never appear.
"""

from __future__ import annotations

from typing import Callable, Iterable

from ..errors import UnresolvedCallee
from ..frontend import ast as A
from ..frontend.symbols import PARAM, SymbolTable, UnitSymbols
from .locations import ArrayWhole, Local, Location, is_common

Atom = object  # ("formal", i) | CommonCell | ArrayWhole(CommonCell)
ModSummary = dict  # unit name -> frozenset[Atom]


def formal(i: int) -> tuple:
    return ("formal", i)


def actual_location(e, syms: UnitSymbols) -> Location | None:
    """Storage passed by reference for an actual argument, if any."""
    if isinstance(e, A.Var):
        info = syms.vars.get(e.name)
        if info is None or info.kind == PARAM:
            return None
        return info.location
    if isinstance(e, A.ArrayRef):
        return syms.vars[e.name].location
    return None


def target_location(t, syms: UnitSymbols) -> Location:
    return syms.vars[t.name].location


def unit_term(loc: Location, syms: UnitSymbols):
    """Express a location written inside ``syms.unit`` in summary terms."""
    if is_common(loc):
        return loc
    base = loc.base if isinstance(loc, ArrayWhole) else loc
    if isinstance(base, Local) and base.name in syms.unit.formals:
        return formal(syms.unit.formals.index(base.name))
    return None


def translate(atoms: Iterable, actuals, syms: UnitSymbols) -> set[Location]:
    """Map callee summary atoms to caller locations through the actuals."""
    out: set[Location] = set()
    for a in atoms:
        if isinstance(a, tuple):
            loc = actual_location(actuals[a[1]], syms)
            if loc is not None:
                out.add(loc)
        else:
            out.add(a)
    return out


def calls_of_stmt(s) -> list[tuple[str, tuple]]:
    """(callee, actuals) for every call made by ``s`` itself, in evaluation order."""
    out = []
    for e in A.stmt_exprs(s):
        out.extend((c.name, c.args) for c in A.calls_in(e))
    if isinstance(s, A.Call):
        out.append((s.name, s.args))
    return out


def body_writes(body, syms: UnitSymbols, summary_of: Callable[[str], Iterable]) -> set[Location]:
    """Locations of ``syms.unit`` possibly written by executing ``body``."""
    out: set[Location] = set()
    for s in A.walk_stmts(body):
        if isinstance(s, A.Assign):
            out.add(target_location(s.target, syms))
        elif isinstance(s, A.Read):
            out.update(target_location(t, syms) for t in s.targets)
        elif isinstance(s, A.DoLoop):
            out.add(syms.vars[s.var].location)
        for name, args in calls_of_stmt(s):
            out |= translate(summary_of(name), args, syms)
    return out


def summarize(body, syms: UnitSymbols, summary_of) -> frozenset:
    terms = (unit_term(l, syms) for l in body_writes(body, syms, summary_of))
    return frozenset(t for t in terms if t is not None)


def mod_summaries(p: A.Program, table: SymbolTable) -> ModSummary:
    """Least fixpoint of per-unit summaries over the call graph."""
    names = {u.name for u in p.units}
    for u in p.units:
        for s in A.walk_stmts(u.body):
            for callee, _ in calls_of_stmt(s):
                if callee not in names:
                    raise UnresolvedCallee(f"{u.name}: call to undefined unit {callee}", u.path)
    summaries: ModSummary = {u.name: frozenset() for u in p.units}
    changed = True
    while changed:
        changed = False
        for u in p.units:
            new = summarize(u.body, table[u.name], summaries.__getitem__)
            if new != summaries[u.name]:
                summaries[u.name] = new
                changed = True
    return summaries


def callees(u: A.Unit) -> list[str]:
    seen: dict[str, None] = {}
    for s in A.walk_stmts(u.body):
        for name, _ in calls_of_stmt(s):
            seen.setdefault(name)
    return list(seen)


def common_reach(p: A.Program) -> dict[str, frozenset[str]]:
    """COMMON blocks declared by each unit or by anything it transitively calls."""
    reach = {u.name: frozenset(d.block for d in u.decls if isinstance(d, A.CommonDecl))
             for u in p.units}
    graph = {u.name: callees(u) for u in p.units}
    changed = True
    while changed:
        changed = False
        for name, cs in graph.items():
            new = reach[name].union(*(reach[c] for c in cs if c in reach))
            if new != reach[name]:
                reach[name] = new
                changed = True
    return reach
