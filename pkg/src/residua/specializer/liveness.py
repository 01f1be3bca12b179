"""Backward cleanup of a residual body.

Removes assignments to locals whose value is never read, CONTINUE
statements, and IF statements left with two empty arms.  Only assignments
with fault-free, call-free right-hand sides are candidates, so removal
never changes what the program prints or how it terminates.
"""

from __future__ import annotations

from dataclasses import replace

from ..analysis.evaluate import is_safe
from ..frontend import ast as A
from ..frontend.symbols import LOCAL, UnitSymbols
from .record import Recorder


def _uses(exprs) -> frozenset:
    out = set()
    for e in exprs:
        out |= A.names_in(e)
    return frozenset(out)


class _Sweep:
    def __init__(self, syms: UnitSymbols, policy, rec: Recorder):
        self.syms = syms
        self.policy = policy
        self.rec = rec
        self.changed = False

    def candidate(self, name: str) -> bool:
        info = self.syms.vars.get(name)
        return (info is not None and info.kind == LOCAL and not info.is_array
                and not self.policy.keeps(name))

    def block(self, stmts, live: frozenset, apply: bool):
        out = []
        for s in reversed(stmts):
            s2, live = self.stmt(s, live, apply)
            if s2 is not None:
                out.append(s2)
        out.reverse()
        return out, live

    def _drop(self, s, reason, apply):
        if apply:
            d = self.rec.disp.get(s.prov)
            if d is None or not d.removed:   # keep the reason of a synthesized stand-in
                self.rec.remove(s, reason)
            self.changed = True
        return None

    def _loop_head(self, body, live, extra, apply_nested=False):
        head = live | extra
        while True:
            _, b = self.block(body, head, False)
            new = live | extra | b
            if new == head:
                return head
            head = new

    def stmt(self, s, live: frozenset, apply: bool):
        if isinstance(s, A.Assign):
            t = s.target
            if isinstance(t, A.Var) and self.candidate(t.name):
                if t.name not in live and is_safe(s.value):
                    return self._drop(s, "dead-assignment", apply), live
                return s, (live - {t.name}) | _uses([s.value])
            return s, live | _uses(A.stmt_exprs(s))
        if isinstance(s, A.If):
            then, lt = self.block(s.then, live, apply)
            orelse, le = self.block(s.orelse, live, apply)
            if not then and not orelse and is_safe(s.cond):
                return self._drop(s, "empty-if", apply), live
            return replace(s, then=tuple(then), orelse=tuple(orelse)), lt | le | _uses([s.cond])
        if isinstance(s, A.DoLoop):
            head = self._loop_head(s.body, live, frozenset())
            body, _ = self.block(s.body, head, apply)
            return replace(s, body=tuple(body)), (head - {s.var}) | _uses(A.stmt_exprs(s))
        if isinstance(s, A.DoWhile):
            head = self._loop_head(s.body, live, _uses([s.cond]))
            body, _ = self.block(s.body, head, apply)
            return replace(s, body=tuple(body)), head
        if isinstance(s, A.Continue):
            return self._drop(s, "no-op", apply), live
        if isinstance(s, (A.Return, A.Stop)):
            return s, frozenset()
        if isinstance(s, A.Read):
            defined = {t.name for t in s.targets if isinstance(t, A.Var)}
            return s, (live - defined) | _uses(A.stmt_exprs(s))
        return s, live | _uses(A.stmt_exprs(s))


def cleanup(body, syms: UnitSymbols, policy, rec: Recorder) -> list:
    """Remove dead code from ``body`` until nothing changes."""
    body = list(body)
    while True:
        sweep = _Sweep(syms, policy, rec)
        body, _ = sweep.block(body, frozenset(), True)
        if not sweep.changed:
            return body
