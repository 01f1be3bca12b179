"""Instrumented runs that check the specializer's claims concretely.

The original program is executed while tracking which variant each
activation corresponds to.  Before every statement the abstract state the
specializer recorded for that point is compared with the concrete store.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..analysis.domain import Known
from ..analysis.locations import CommonCell, Local
from ..constraints import ConstraintSet
from ..frontend.symbols import resolve_symbols
from .inputs import random_inputs
from .machine import DEFAULT_FUEL, ConstraintViolation, Monitor, run


@dataclass
class Violation:
    entry: int
    prov: int
    location: str
    claimed: str
    actual: str

    def __str__(self) -> str:
        return (f"variant #{self.entry}, statement {self.prov}: {self.location} claimed "
                f"{self.claimed}, observed {self.actual}")


class SoundnessMonitor(Monitor):
    def __init__(self, trace):
        self.trace = trace
        self.violations: list[Violation] = []
        self.checks = 0

    def enter(self, caller, site):
        if caller is None:
            return self.trace.main
        if caller.ctx is None:
            return None
        return self.trace.targets.get((caller.ctx, site))

    def _value(self, frame, machine, loc):
        if isinstance(loc, CommonCell):
            cell = machine.commons[loc.block][loc.index]
        elif isinstance(loc, Local) and loc.unit == frame.unit.name:
            cell = frame.cells.get(loc.name)
        else:
            return "skip"
        if cell is None or isinstance(cell, list):
            return "skip"
        return cell.value

    def before(self, frame, stmt, machine):
        if frame.ctx is None:
            return
        env = self.trace.envs.get((frame.ctx, stmt.prov))
        if env is None:
            return
        for loc, k in env.bindings.items():
            v = self._value(frame, machine, loc)
            if v == "skip":
                continue
            self.checks += 1
            if v is None or Known(k.type, v) != k:
                self.violations.append(Violation(frame.ctx, stmt.prov, str(loc), str(k), repr(v)))
        for loc, k in env.facts:
            v = self._value(frame, machine, loc)
            if v == "skip":
                continue
            self.checks += 1
            if v is None or Known(k.type, v) == k:
                self.violations.append(Violation(frame.ctx, stmt.prov, str(loc), f"!= {k}", repr(v)))


@dataclass
class SoundnessReport:
    runs: int
    checks: int
    violations: list = field(default_factory=list)


def check_soundness(result, original, cs: ConstraintSet | None = None, runs: int = 100,
                    seed: int = 0, fuel: int = DEFAULT_FUEL) -> SoundnessReport:
    """Sample ``runs`` inputs and check every recorded abstract state."""
    cs = cs or ConstraintSet()
    table = resolve_symbols(original)
    rng = random.Random(seed)
    rep = SoundnessReport(0, 0)
    for _ in range(runs):
        iv = random_inputs(table, cs, rng)
        mon = SoundnessMonitor(result.trace)
        try:
            run(original, iv, fuel, mon, table)
        except ConstraintViolation:
            continue
        rep.runs += 1
        rep.checks += mon.checks
        rep.violations.extend(mon.violations)
    return rep
