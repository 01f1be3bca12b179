"""Per-variant bookkeeping: dispositions, environments, call targets."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ast as A

KEPT, SIMPLIFIED, REMOVED = "kept", "simplified", "removed"


@dataclass
class Disposition:
    removed: bool = False
    reason: str | None = None
    residual: A.Stmt | None = None   # for statements that survive


@dataclass
class Recorder:
    disp: dict = field(default_factory=dict)       # prov -> Disposition
    envs: dict = field(default_factory=dict)       # prov -> AbstractEnv at entry
    targets: dict = field(default_factory=dict)    # ("call", prov) | ("site", id) -> Target
    facts: list = field(default_factory=list)      # dicts, see Specializer.branch_env
    notes: list = field(default_factory=list)      # (prov, message)

    def keep(self, orig: A.Stmt, residual: A.Stmt) -> None:
        self.disp[orig.prov] = Disposition(residual=residual)

    def remove(self, s: A.Stmt, reason: str) -> None:
        self.disp[s.prov] = Disposition(True, reason)

    def remove_tree(self, s: A.Stmt, reason: str, nested_reason: str | None = None) -> None:
        self.remove(s, reason)
        for t in A.walk_stmts(_children(s)):
            self.remove(t, nested_reason or reason)

    def absorb(self, other: "Recorder") -> None:
        self.disp.update(other.disp)
        self.envs.update(other.envs)
        self.targets.update(other.targets)
        self.facts.extend(other.facts)
        self.notes.extend(other.notes)


def _children(s: A.Stmt) -> tuple:
    if isinstance(s, A.If):
        return s.then + s.orelse
    if isinstance(s, (A.DoLoop, A.DoWhile)):
        return s.body
    return ()
