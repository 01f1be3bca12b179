"""Polyvariant specialization of procedure bodies.

The walk threads an :class:`AbstractEnv` through each body, folds what is
Known, prunes branches and loops that cannot execute, and specializes
every callee under the abstract state at its call site.  Calls in the
residual code name their variants by placeholder (``@<id>``); final names
are chosen once the whole program has been walked.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

from ..analysis.aliases import TRIVIAL, AliasPartition, CallBinding, apply_call_effect, bind_call, kill, write
from ..analysis.domain import UNKNOWN, AbstractEnv, Known, is_finite_value, join_env
from ..analysis.evaluate import convert, eval_abstract, expr_type, fact_operands, is_safe
from ..analysis.mods import body_writes, common_reach, mod_summaries, summarize, translate
from ..constraints import ConstraintSet, initial_env, unit_bindings
from ..errors import RecursionDepthExceeded
from ..frontend import ast as A
from ..frontend.symbols import PARAM, SymbolTable, UnitSymbols
from . import liveness
from .key import SpecializationKey, VariantCache, VariantEntry
from .policy import ReplacementPolicy
from .record import Recorder

# Refinement rounds for loop kill sets and for call effects inside
# expressions.  Each round can only shrink the sets involved, so the cap is
# a guard rather than a tuning knob.
MAX_ROUNDS = 8

ZERO = Known(A.INTEGER, 0)


@dataclass
class Target:
    """Where a call site went: a variant placeholder or a verbatim original."""

    name: str
    mods: frozenset
    entry: VariantEntry | None
    binding: CallBinding


@dataclass
class Frame:
    unit: A.Unit
    syms: UnitSymbols
    aliases: AliasPartition


def loop_trip(lo: int, hi: int, step: int) -> int:
    span = hi - lo + step
    q = abs(span) // abs(step)
    return max(0, q if (span >= 0) == (step > 0) else -q)


def recursive_units(p: A.Program) -> set[str]:
    """Units that can reach themselves through the call graph."""
    from ..analysis.mods import callees
    graph = {u.name: callees(u) for u in p.units}
    out = set()
    for start in graph:
        seen, stack = set(), list(graph[start])
        while stack:
            n = stack.pop()
            if n == start:
                out.add(start)
                break
            if n in seen or n not in graph:
                continue
            seen.add(n)
            stack.extend(graph[n])
    return out


class Specializer:
    def __init__(self, program: A.Program, table: SymbolTable, cs: ConstraintSet | None = None,
                 policy: ReplacementPolicy | None = None, cap: int = 64):
        self.p = program
        self.table = table
        self.cs = cs or ConstraintSet()
        self.policy = policy or ReplacementPolicy()
        self.cap = cap
        self.mods = mod_summaries(program, table)
        self.reach = common_reach(program)
        self.recursive = recursive_units(program)
        self.cache = VariantCache()
        self.stack: list[VariantEntry] = []
        self.main: VariantEntry | None = None

    # -- entry points -----------------------------------------------------

    def run(self) -> VariantEntry:
        main = self.p.main
        syms = self.table[main.name]
        env = initial_env(self.cs, main, self.table)
        key = SpecializationKey.make(main.name, env, TRIVIAL, syms)
        self.main = self.cache.add(main, key, env, TRIVIAL)
        self._specialize(self.main)
        return self.main

    def summary_of(self, name: str) -> frozenset:
        if name.startswith("@"):
            e = self.cache[int(name[1:])]
            return e.mods if e.done else self.mods[e.unit.name]
        return self.mods[name]

    def resolve_call(self, name: str, actuals, env: AbstractEnv, frame: Frame) -> Target:
        callee = self.table.unit(name)
        b = bind_call(actuals, env, frame.syms, frame.aliases, callee, self.table, self.reach[name])
        entry_env = b.entry_env
        if name in self.recursive:
            # recursive units are specialized on aliasing only, so that the
            # residual is stable under re-specialization
            entry_env = AbstractEnv()
        overlay = unit_bindings(self.cs, callee, self.table)
        if overlay:
            bindings = dict(entry_env.bindings)
            bindings.update(overlay)
            entry_env = AbstractEnv(bindings)
        key = SpecializationKey.make(name, entry_env, b.aliases, self.table[name])
        return self.specialize_procedure(callee, key, entry_env, b)

    def specialize_procedure(self, callee: A.Unit, key: SpecializationKey, env: AbstractEnv,
                             binding: CallBinding) -> Target:
        e = self.cache.get(key)
        if e is not None:
            return Target(e.placeholder, e.mods if e.done else self.mods[callee.name], e, binding)
        if any(x.unit.name == callee.name for x in self.stack):
            # recursive call under a different key: use the original unit
            return Target(callee.name, self.mods[callee.name], None, binding)
        if self.cache.count(callee.name) >= self.cap:
            raise RecursionDepthExceeded(
                f"more than {self.cap} variants of {callee.name}; raise the cap or add constraints",
                callee.path)
        e = self.cache.add(callee, key, env, binding.aliases)
        self._specialize(e)
        return Target(e.placeholder, e.mods, e, binding)

    def _specialize(self, entry: VariantEntry) -> None:
        unit = entry.unit
        syms = self.table[unit.name]
        frame = Frame(unit, syms, entry.aliases)
        rec = Recorder()
        self.stack.append(entry)
        try:
            body, _ = self.block(unit.body, entry.entry_env, frame, rec)
            body = liveness.cleanup(body, syms, self.policy, rec)
        finally:
            self.stack.pop()
        entry.residual = replace(unit, body=tuple(body), origin=unit.source_name)
        entry.record = rec
        entry.mods = summarize(body, syms, self.summary_of)

    # -- statements -------------------------------------------------------

    def block(self, stmts, env: AbstractEnv, frame: Frame, rec: Recorder):
        out: list[A.Stmt] = []
        for s in stmts:
            res, env = self.stmt(s, env, frame, rec)
            out.extend(res)
        return out, env

    def stmt(self, s: A.Stmt, env: AbstractEnv, frame: Frame, rec: Recorder):
        rec.envs[s.prov] = env
        handler = getattr(self, "_" + type(s).__name__.lower())
        return handler(s, env, frame, rec)

    def _assign(self, s: A.Assign, env, frame, rec):
        env, targets = self.settle(A.stmt_exprs(s), env, frame, rec)
        value, v = self.simplify(s.value, env, frame, targets, rec, s.prov)
        t = s.target
        loc = frame.syms.vars[t.name].location
        if isinstance(t, A.ArrayRef):
            index, _ = self.simplify(t.index, env, frame, targets, rec, s.prov)
            t = A.ArrayRef(t.name, index)
            env = kill(env, [loc], frame.aliases)
        else:
            env = write(env, loc, convert(v, frame.syms.vars[t.name].type), frame.aliases)
        res = replace(s, target=t, value=value)
        rec.keep(s, res)
        return [res], env

    def _if(self, s: A.If, env, frame, rec):
        env, targets = self.settle([s.cond], env, frame, rec)
        cond, cv = self.simplify(s.cond, env, frame, targets, rec, s.prov)
        if isinstance(cv, Known):
            taken, dead = (s.then, s.orelse) if cv.value else (s.orelse, s.then)
            rec.remove(s, "folded-if")
            for d in dead:
                rec.remove_tree(d, "dead-branch")
            body, env = self.block(taken, env, frame, rec)
            if body and s.comments:
                body[0] = replace(body[0], comments=s.comments + body[0].comments)
            return body, env
        then, t_env = self.block(s.then, self.branch_env(s, s.cond, True, env, frame, rec), frame, rec)
        orelse, e_env = self.block(s.orelse, self.branch_env(s, s.cond, False, env, frame, rec),
                                   frame, rec)
        env = join_env(t_env, e_env)
        if not then and not orelse and is_safe(cond):
            rec.remove(s, "empty-if")
            return [], env
        res = replace(s, cond=cond, then=tuple(then), orelse=tuple(orelse))
        rec.keep(s, res)
        return [res], env

    def _doloop(self, s: A.DoLoop, env, frame, rec):
        env, targets = self.settle(A.stmt_exprs(s), env, frame, rec)
        lo, lov = self.simplify(s.lo, env, frame, targets, rec, s.prov)
        hi, hiv = self.simplify(s.hi, env, frame, targets, rec, s.prov)
        if s.step is None:
            step, stv = None, Known(A.INTEGER, 1)
        else:
            step, stv = self.simplify(s.step, env, frame, targets, rec, s.prov)
        var = frame.syms.vars[s.var].location
        if all(isinstance(x, Known) for x in (lov, hiv, stv)) and stv.value != 0 \
                and loop_trip(lov.value, hiv.value, stv.value) == 0:
            # the index still receives its initial value
            rec.remove_tree(s, "zero-trip")
            init = A.Assign(A.Var(s.var), lov.literal(), prov=s.prov, comments=s.comments)
            return [init], write(env, var, lov, frame.aliases)

        def attempt(mset):
            k = kill(env, mset, frame.aliases)
            sub = Recorder()
            body, exit_env = self.block(s.body, k, frame, sub)
            return k, body, exit_env, sub

        mset = body_writes(s.body, frame.syms, self.mods.__getitem__) | {var}
        first = cur = attempt(mset)
        for _ in range(MAX_ROUNDS):
            w = body_writes(cur[1], frame.syms, self.summary_of) | {var}
            if w == mset:
                break
            if not w <= mset:
                cur = first
                break
            mset = w
            cur = attempt(mset)
        else:
            cur = first
        k, body, exit_env, sub = cur
        rec.absorb(sub)
        res = replace(s, lo=lo, hi=hi, step=step, body=tuple(body))
        rec.keep(s, res)
        return [res], join_env(k, exit_env)

    def _dowhile(self, s: A.DoWhile, env, frame, rec):
        def attempt(mset):
            k = kill(env, mset, frame.aliases)
            sub = Recorder()
            k_env, targets = self.settle([s.cond], k, frame, sub)
            cond, cv = self.simplify(s.cond, k_env, frame, targets, sub, s.prov)
            if isinstance(cv, Known) and not cv.value:
                return None, k_env, cond, [], sub
            body_env = self.branch_env(s, s.cond, True, k_env, frame, sub)
            body, _ = self.block(s.body, body_env, frame, sub)
            return k, k_env, cond, body, sub

        def writes(cond, body):
            w = body_writes(body, frame.syms, self.summary_of)
            for c in A.calls_in(cond):
                w |= translate(self.summary_of(c.name), c.args, frame.syms)
            return w

        mset = self._orig_loop_writes(s, frame)
        first = cur = attempt(mset)
        for _ in range(MAX_ROUNDS):
            if cur[0] is None:
                break
            w = writes(cur[2], cur[3])
            if w == mset:
                break
            if not w <= mset:
                cur = first
                break
            mset = w
            cur = attempt(mset)
        else:
            cur = first
        k, k_env, cond, body, sub = cur
        if k is None:
            rec.remove_tree(s, "never-entered")
            return [], env
        rec.absorb(sub)
        res = replace(s, cond=cond, body=tuple(body))
        rec.keep(s, res)
        return [res], self.branch_env(s, s.cond, False, k_env, frame, rec)

    def _orig_loop_writes(self, s: A.DoWhile, frame: Frame):
        w = body_writes(s.body, frame.syms, self.mods.__getitem__)
        for c in A.calls_in(s.cond):
            w |= translate(self.mods[c.name], c.args, frame.syms)
        return w

    def _call(self, s: A.Call, env, frame, rec):
        env, targets = self.settle(list(s.args), env, frame, rec)
        t = self.resolve_call(s.name, s.args, env, frame)
        rec.targets[("call", s.prov)] = t
        args = self.simplify_args(s.args, env, frame, targets, t, rec, s.prov)
        env = apply_call_effect(s.args, env, t.mods, frame.syms, frame.aliases)
        res = replace(s, name=t.name, args=args)
        rec.keep(s, res)
        return [res], env

    def _print(self, s: A.Print, env, frame, rec):
        env, targets = self.settle(list(s.args), env, frame, rec)
        args = tuple(self.simplify(a, env, frame, targets, rec, s.prov)[0] for a in s.args)
        res = replace(s, args=args)
        rec.keep(s, res)
        return [res], env

    def _read(self, s: A.Read, env, frame, rec):
        env, targets = self.settle(A.stmt_exprs(s), env, frame, rec)
        out = []
        for t in s.targets:
            if isinstance(t, A.ArrayRef):
                t = A.ArrayRef(t.name, self.simplify(t.index, env, frame, targets, rec, s.prov)[0])
            out.append(t)
        for t in s.targets:
            env = write(env, frame.syms.vars[t.name].location, UNKNOWN, frame.aliases)
        res = replace(s, targets=tuple(out))
        rec.keep(s, res)
        return [res], env

    def _simple(self, s, env, frame, rec):
        rec.keep(s, s)
        return [s], env

    _return = _stop = _continue = _simple

    # -- conditions -------------------------------------------------------

    def branch_env(self, s: A.Stmt, cond, truth: bool, env: AbstractEnv, frame: Frame,
                   rec: Recorder) -> AbstractEnv:
        """Refine ``env`` with what ``cond == truth`` says about one variable."""
        m = fact_operands(cond, frame.syms, env)
        if m is None:
            return env
        op, loc, val = m
        if isinstance(env.get(loc), Known):
            return env
        name = cond.left.name
        if (op == ".EQ.") == truth:
            if val.type == A.REAL and val.value == 0.0:
                return env  # -0.0 compares equal to 0.0
            rec.facts.append({"stmt": s.prov, "kind": "binding", "variable": name,
                              "value": str(val), "branch": "then" if truth else "else"})
            return env.set(loc, val)
        rec.facts.append({"stmt": s.prov, "kind": "disequality", "variable": name,
                          "value": str(val), "branch": "then" if truth else "else"})
        return env.add_fact(loc, val)

    # -- expressions ------------------------------------------------------

    def settle(self, exprs, env: AbstractEnv, frame: Frame, rec: Recorder):
        """Apply the effects of function calls in ``exprs`` and pick their variants.

        Returns the environment after all calls and a map from call-site id
        to :class:`Target`.  Effects start from the original summaries and
        are narrowed to the chosen variants' summaries while that stays
        consistent.
        """
        calls = [c for e in exprs for c in A.calls_in(e)]
        if not calls:
            return env, {}

        def attempt(summs):
            out = env
            for c, m in zip(calls, summs):
                out = apply_call_effect(c.args, out, m, frame.syms, frame.aliases)
            return out, {c.site: self.resolve_call(c.name, c.args, out, frame) for c in calls}

        summs = [self.mods[c.name] for c in calls]
        first = cur = attempt(summs)
        for _ in range(MAX_ROUNDS):
            new = [cur[1][c.site].mods for c in calls]
            if new == summs:
                break
            if not all(n <= o for n, o in zip(new, summs)):
                cur = first
                break
            summs = new
            cur = attempt(summs)
        else:
            cur = first
        for site, t in cur[1].items():
            rec.targets[("site", site)] = t
        return cur

    def simplify(self, e, env: AbstractEnv, frame: Frame, targets: dict, rec: Recorder,
                 prov: int | None = None):
        notes: list = []
        res, v = self._simplify(e, env, frame, targets, notes)
        for n in notes:
            if n[0] == "nofold":
                rec.notes.append((prov, f"not folded: {n[1]}"))
            elif n[0] == "fact":
                rec.facts.append({"stmt": prov, "kind": "used", "variable": str(n[1]),
                                  "value": str(n[2]), "branch": None})
        return res, v

    def _simplify(self, e, env, frame, targets, notes=None):
        syms = frame.syms
        v = eval_abstract(e, env, syms, notes)
        if isinstance(e, A.LITERALS):
            return e, v
        if isinstance(v, Known) and is_finite_value(v) and self.policy.may_fold(e, syms):
            return v.literal(), v
        if isinstance(e, A.Var):
            return e, v
        if isinstance(e, A.ArrayRef):
            return A.ArrayRef(e.name, self._simplify(e.index, env, frame, targets)[0]), v
        if isinstance(e, A.FuncCall):
            t = targets[e.site]
            return A.FuncCall(t.name, self._args(e.args, env, frame, targets, t), e.site), v
        if isinstance(e, A.Unary):
            return A.Unary(e.op, self._simplify(e.operand, env, frame, targets)[0]), v
        l, lv = self._simplify(e.left, env, frame, targets)
        r, rv = self._simplify(e.right, env, frame, targets)
        return self._neutral(e, l, lv, r, rv, v, syms), v

    def _neutral(self, e: A.Binary, l, lv, r, rv, v, syms):
        """Drop identity operands; ``x*0`` becomes ``0`` for integers."""
        op = e.op
        if op in A.LOGIC_OPS:
            ident = op == ".AND."
            if isinstance(lv, Known) and lv.value == ident:
                return r
            if isinstance(rv, Known) and rv.value == ident:
                return l
            return A.Binary(op, l, r)
        if op in A.ARITH_OPS:
            lt = expr_type(e.left, syms, self.table)
            rt = expr_type(e.right, syms, self.table)
            res_t = A.REAL if A.REAL in (lt, rt) else A.INTEGER
            if op == "*" and v == ZERO and A.IntLit(0) in (l, r):
                return A.IntLit(0)
            if op in ("+", "-") and rv == ZERO and lt == A.INTEGER:
                return l
            if op == "+" and lv == ZERO and rt == A.INTEGER:
                return r
            if op in ("*", "/") and _is_one(rv) and res_t == lt:
                return l
            if op == "*" and _is_one(lv) and res_t == rt:
                return r
        return A.Binary(op, l, r)

    def simplify_args(self, args, env, frame, targets, t: Target, rec, prov):
        notes: list = []
        out = self._args(args, env, frame, targets, t, notes)
        for n in notes:
            if n[0] == "nofold":
                rec.notes.append((prov, f"not folded: {n[1]}"))
        return out

    def _args(self, args, env, frame, targets, t: Target, notes=None) -> tuple:
        syms = frame.syms
        out = []
        for i, a in enumerate(args):
            if isinstance(a, A.Var) and syms.vars[a.name].kind != PARAM:
                info = syms.vars[a.name]
                v = env.get(info.location) if not info.is_array else UNKNOWN
                if isinstance(v, Known) and self._by_value_ok(t, i) and self.policy.may_fold(a, syms):
                    out.append(v.literal())
                else:
                    out.append(a)
            elif isinstance(a, A.ArrayRef):
                out.append(A.ArrayRef(a.name, self._simplify(a.index, env, frame, targets, notes)[0]))
            else:
                out.append(self._simplify(a, env, frame, targets, notes)[0])
        return tuple(out)

    @staticmethod
    def _by_value_ok(t: Target, i: int) -> bool:
        """A variable actual may become a literal when the callee cannot
        write that formal and nothing else there shares its storage."""
        loc = t.binding.formal_locs[i]
        return ("formal", i) not in t.mods and len(t.binding.aliases.class_of(loc)) == 1


def _is_one(v) -> bool:
    return isinstance(v, Known) and v.type in (A.INTEGER, A.REAL) and v.value == 1
