"""Whole-program specialization: walk, name variants, build the report."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from ..analysis.mods import callees
from ..constraints import ConstraintSet, validate
from ..frontend import ast as A
from ..frontend.printer import format_unit, stmt_header
from ..frontend.symbols import COMMON, FORMAL, RESULT, resolve_symbols
from .core import Specializer
from .key import VariantEntry
from .policy import ReplacementPolicy
from .record import KEPT, REMOVED, SIMPLIFIED

REPORT_SCHEMA = "residua-report/1"


@dataclass
class Report:
    """Everything the JSON report carries, as plain Python data."""

    units: list = field(default_factory=list)
    variants: list = field(default_factory=list)
    statements: list = field(default_factory=list)
    bindings: list = field(default_factory=list)
    facts_fired: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)
    policy: str = "all"

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "policy": self.policy,
            "units": self.units,
            "variants": self.variants,
            "statements": self.statements,
            "bindings": self.bindings,
            "facts_fired": self.facts_fired,
            "diagnostics": self.diagnostics,
        }

    def variant(self, name: str) -> list[dict]:
        return [v for v in self.variants if v["name"] == name]

    def dispositions(self, variant: str | None = None) -> dict:
        """(variant, prov) -> disposition string."""
        return {(s["variant"], s["prov"]): s["disposition"] for s in self.statements
                if variant is None or s["variant"] == variant}


@dataclass
class Trace:
    """Facts about the specialization used to monitor an original run.

    ``envs`` maps (entry id, prov) to the abstract state claimed at entry
    to that statement; ``targets`` maps (entry id, site) to the entry id of
    the callee variant, or None for a verbatim original.
    """

    main: int
    envs: dict
    targets: dict
    symbols: object


@dataclass
class SpecializationResult:
    program: A.Program
    report: Report
    trace: Trace
    entries: list          # reachable VariantEntry objects, main first
    names: dict            # entry id -> unit name in the residual program
    verbatim: list         # names of original units copied unchanged
    unreachable: list


def placeholders(body) -> list[int]:
    out = []
    for s in A.walk_stmts(body):
        if isinstance(s, A.Call) and s.name.startswith("@"):
            out.append(int(s.name[1:]))
        for e in A.stmt_exprs(s):
            out.extend(int(c.name[1:]) for c in A.calls_in(e) if c.name.startswith("@"))
    return out


def plain_calls(body) -> set[str]:
    out = set()
    for s in A.walk_stmts(body):
        if isinstance(s, A.Call) and not s.name.startswith("@"):
            out.add(s.name)
        for e in A.stmt_exprs(s):
            out.update(c.name for c in A.calls_in(e) if not c.name.startswith("@"))
    return out


# -- renaming ---------------------------------------------------------------

def _rename_expr(e, names: dict, result: dict):
    if isinstance(e, A.FuncCall):
        n = names[int(e.name[1:])] if e.name.startswith("@") else e.name
        return A.FuncCall(n, tuple(_rename_expr(a, names, result) for a in e.args), e.site)
    if isinstance(e, A.Var):
        return A.Var(result.get(e.name, e.name))
    if isinstance(e, A.ArrayRef):
        return A.ArrayRef(e.name, _rename_expr(e.index, names, result))
    if isinstance(e, A.Unary):
        return A.Unary(e.op, _rename_expr(e.operand, names, result))
    if isinstance(e, A.Binary):
        return A.Binary(e.op, _rename_expr(e.left, names, result),
                        _rename_expr(e.right, names, result))
    return e


def rename_stmt(s: A.Stmt, names: dict, deep: bool = True, result: dict | None = None) -> A.Stmt:
    """Resolve placeholder call names; ``result`` renames a function's result variable."""
    result = result or {}
    r = lambda e: _rename_expr(e, names, result)
    body = (lambda b: tuple(rename_stmt(x, names, True, result) for x in b)) if deep else (lambda b: b)
    if isinstance(s, A.Assign):
        return replace(s, target=r(s.target), value=r(s.value))
    if isinstance(s, A.If):
        return replace(s, cond=r(s.cond), then=body(s.then), orelse=body(s.orelse))
    if isinstance(s, A.DoLoop):
        return replace(s, var=result.get(s.var, s.var), lo=r(s.lo), hi=r(s.hi), step=None if s.step is None else r(s.step),
                       body=body(s.body))
    if isinstance(s, A.DoWhile):
        return replace(s, cond=r(s.cond), body=body(s.body))
    if isinstance(s, A.Call):
        n = names[int(s.name[1:])] if s.name.startswith("@") else s.name
        return replace(s, name=n, args=tuple(r(a) for a in s.args))
    if isinstance(s, A.Print):
        return replace(s, args=tuple(r(a) for a in s.args))
    if isinstance(s, A.Read):
        return replace(s, targets=tuple(r(t) for t in s.targets))
    return s


def rename_unit(u: A.Unit, name: str, names: dict) -> A.Unit:
    result = {u.name: name} if u.kind == A.FUNCTION and name != u.name else {}
    decls = tuple(replace(d, name=result[d.name])
                  if isinstance(d, A.TypeDecl) and d.name in result else d for d in u.decls)
    return replace(u, name=name, decls=decls, path=None,
                   body=tuple(rename_stmt(s, names, True, result) for s in u.body))


# -- naming -----------------------------------------------------------------

def _assign_names(groups: dict, collapsed: set, verbatim: set, existing: set,
                  main: VariantEntry) -> dict:
    names = {main.id: main.unit.name}
    taken = set(existing)
    for unit_name, entries in groups.items():
        claim = None
        if not any(e.id in collapsed for e in entries) and unit_name not in verbatim:
            claim = next((e for e in entries if e.key.is_empty()), None)
        k = 1
        for e in entries:
            if e.id in collapsed or e is claim:
                names[e.id] = unit_name
                continue
            while f"{unit_name}_{k}" in taken:
                k += 1
            names[e.id] = f"{unit_name}_{k}"
            taken.add(names[e.id])
            k += 1
    return names


def choose_names(p: A.Program, reachable: list, verbatim: set, main: VariantEntry) -> dict:
    """Variant names.

    A variant whose residual text is identical to its source unit keeps the
    source name (the largest such set, found by shrinking until stable);
    so does the empty-key variant when no verbatim copy claims the name.
    Other variants are numbered ``NAME_k`` in creation order.
    """
    original = {u.name: format_unit(u) for u in p.units}
    groups: dict[str, list] = {}
    for e in reachable:
        if e is not main:
            groups.setdefault(e.unit.name, []).append(e)
    collapsed = {e.id for es in groups.values() for e in es}
    existing = {u.name for u in p.units}
    by_id = {e.id: e for e in reachable}
    while True:
        names = _assign_names(groups, collapsed, verbatim, existing, main)
        keep = {i for i in collapsed
                if format_unit(rename_unit(by_id[i].residual, by_id[i].unit.name, names))
                == original[by_id[i].unit.name]}
        if keep == collapsed:
            return names
        collapsed = keep


# -- driver -----------------------------------------------------------------

def specialize_program(p: A.Program, cs: ConstraintSet | None = None,
                       policy: ReplacementPolicy | None = None, cap: int = 64) -> SpecializationResult:
    """Specialize ``p`` under ``cs``; returns the residual program and report."""
    table = resolve_symbols(p)
    cs = cs or ConstraintSet()
    validate(cs, table)
    policy = policy or ReplacementPolicy()
    sp = Specializer(p, table, cs, policy, cap)
    main = sp.run()

    reachable, seen, queue = [], {main.id}, [main]
    plain: set[str] = set()
    while queue:
        e = queue.pop(0)
        reachable.append(e)
        plain |= plain_calls(e.residual.body)
        for i in placeholders(e.residual.body):
            if i not in seen:
                seen.add(i)
                queue.append(sp.cache[i])
    reachable.sort(key=lambda e: e.id)

    reached_units = {e.unit.name for e in reachable} | plain
    unreachable = [u.name for u in p.units if u.name not in reached_units]
    verbatim, todo = set(), list(plain) + unreachable
    while todo:
        n = todo.pop()
        if n not in verbatim:
            verbatim.add(n)
            todo.extend(callees(p.unit(n)))

    names = choose_names(p, reachable, verbatim, main)
    emitted: dict[str, A.Unit] = {}
    for e in reachable:
        n = names[e.id]
        if n not in emitted:
            emitted[n] = replace(rename_unit(e.residual, n, names), origin=e.unit.source_name)
    for u in p.units:
        if u.name in verbatim and u.name not in emitted:
            emitted[u.name] = replace(u, origin=u.source_name, path=None)
    order = [main.unit.name] + sorted(n for n in emitted if n != main.unit.name)
    residual = A.Program(tuple(emitted[n] for n in order), main.unit.name,
                         {n: n.lower() + ".f" for n in order})

    report = build_report(p, table, sp, reachable, names, verbatim, unreachable, policy)
    trace = Trace(main.id, {}, {}, table)
    for e in reachable:
        for prov, env in e.record.envs.items():
            trace.envs[(e.id, prov)] = env
        for site, t in e.record.targets.items():
            trace.targets[(e.id, site)] = t.entry.id if t.entry is not None else None
    return SpecializationResult(residual, report, trace, reachable, names,
                                sorted(verbatim), unreachable)


def build_report(p, table, sp: Specializer, reachable, names, verbatim, unreachable,
                 policy) -> Report:
    rep = Report(policy=policy.describe())
    sites: dict[int, int] = {}
    for e in reachable:
        for t in e.record.targets.values():
            if t.entry is not None:
                sites[t.entry.id] = sites.get(t.entry.id, 0) + 1
    for u in p.units:
        rep.units.append({
            "name": u.name, "kind": u.kind, "path": u.path,
            "statements": A.count_stmts(u.body),
            "variants": sorted({names[e.id] for e in reachable if e.unit.name == u.name}),
            "verbatim": u.name in verbatim,
            "unreachable": u.name in unreachable,
        })
    for e in reachable:
        name = names[e.id]
        stmts = _statements(e, name, names)
        counts = {KEPT: 0, SIMPLIFIED: 0, REMOVED: 0}
        for s in stmts:
            counts[s["disposition"]] += 1
        rep.statements.extend(stmts)
        rep.variants.append({
            "id": e.id, "name": name, "unit": e.unit.name,
            "key": e.key.to_json(e.unit), "key_text": e.key.describe(e.unit),
            "call_sites": sites.get(e.id, 0),
            "cache_hits": max(0, sites.get(e.id, 0) - 1),
            "counts": counts,
            "unused_declarations": unused_declarations(e.residual, table[e.unit.name]),
        })
        for loc, v in e.entry_env.sorted_bindings():
            rep.bindings.append({"variant": name, "location": str(loc), "type": v.type,
                                 "value": str(v)})
        for f in e.record.facts:
            rep.facts_fired.append(dict(f, variant=name))
        for prov, msg in e.record.notes:
            rep.diagnostics.append({"variant": name, "stmt": prov, "message": msg})
    return rep


def _statements(e: VariantEntry, name: str, names: dict) -> list[dict]:
    out = []
    for s in A.walk_stmts(e.unit.body):
        d = e.record.disp.get(s.prov)
        original = stmt_header(s)
        row = {"variant": name, "variant_id": e.id, "unit": e.unit.name, "prov": s.prov,
               "original": original,
               "residual": None, "reason": None}
        if d is None or d.removed:
            row["disposition"] = REMOVED
            row["reason"] = d.reason if d is not None else "unreachable"
        else:
            text = stmt_header(rename_stmt(d.residual, names, deep=False))
            row["residual"] = text
            row["disposition"] = KEPT if text == original else SIMPLIFIED
        out.append(row)
    return out


def unused_declarations(u: A.Unit, syms) -> list[str]:
    used = set()
    for s in A.walk_stmts(u.body):
        for e in A.stmt_exprs(s):
            used |= A.names_in(e)
        if isinstance(s, A.Assign):
            used.add(s.target.name)
        elif isinstance(s, A.DoLoop):
            used.add(s.var)
        elif isinstance(s, A.Read):
            used |= {t.name for t in s.targets}
    out = []
    for d in u.decls:
        if isinstance(d, A.TypeDecl) and d.name not in used:
            info = syms.vars.get(d.name)
            if info is not None and info.kind not in (FORMAL, COMMON, RESULT):
                out.append(d.name)
    return out
