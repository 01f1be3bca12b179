"""Differential testing of a residual program against its original."""

from __future__ import annotations

import random
from dataclasses import dataclass, field

from ..constraints import ConstraintSet
from ..frontend import ast as A
from ..frontend.symbols import resolve_symbols
from .inputs import InputVector, pinned_entries, random_inputs
from .machine import DEFAULT_FUEL, ConcreteState, ConstraintViolation, run


@dataclass
class Mismatch:
    inputs: InputVector
    original: ConcreteState
    residual: ConcreteState
    trial: int

    def describe(self) -> str:
        o, r = self.original, self.residual
        parts = [f"trial {self.trial}: outputs differ"]
        if o.lines() != r.lines():
            parts.append(f"  original prints {o.lines()}")
            parts.append(f"  residual prints {r.lines()}")
        if o.commons != r.commons:
            diff = {str(k): (str(o.commons.get(k)), str(r.commons.get(k)))
                    for k in o.commons if o.commons.get(k) != r.commons.get(k)}
            parts.append(f"  COMMON differs: {diff}")
        if o.exit != r.exit:
            parts.append(f"  exit {o.exit} vs {r.exit}")
        parts.append(f"  inputs {self.inputs.to_json()}")
        return "\n".join(parts)


@dataclass
class Verdict:
    passed: bool
    trials: int
    skipped: int = 0
    counterexample: Mismatch | None = None
    notes: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.passed


def _outcome(p, table, iv, fuel):
    try:
        return run(p, iv, fuel, table=table)
    except ConstraintViolation:
        return None


def same(a: ConcreteState, b: ConcreteState) -> bool:
    return a.trace == b.trace and a.commons == b.commons and a.exit == b.exit


def shrink(original, residual, t_orig, t_res, iv: InputVector, pinned: set, fuel: int) -> InputVector:
    """Greedily zero entries of ``iv`` while the runs still disagree."""
    changed = True
    while changed:
        changed = False
        for entry in iv.entries():
            cand = iv.zeroed(entry, pinned)
            if cand is None:
                continue
            o = _outcome(original, t_orig, cand, fuel)
            r = _outcome(residual, t_res, cand, fuel)
            if o is not None and r is not None and not same(o, r):
                iv = cand
                changed = True
    return iv


def diff_test(original: A.Program, residual: A.Program, cs: ConstraintSet | None = None,
              trials: int = 200, seed: int = 0, fuel: int = DEFAULT_FUEL) -> Verdict:
    """Run both programs on ``trials`` random inputs consistent with ``cs``."""
    cs = cs or ConstraintSet()
    t_orig = resolve_symbols(original)
    t_res = resolve_symbols(residual)
    rng = random.Random(seed)
    pinned = pinned_entries(cs, t_orig)
    skipped = 0
    for i in range(trials):
        iv = random_inputs(t_orig, cs, rng)
        o = _outcome(original, t_orig, iv, fuel)
        r = _outcome(residual, t_res, iv, fuel)
        if o is None or r is None:
            skipped += 1
            continue
        if not same(o, r):
            small = shrink(original, residual, t_orig, t_res, iv, pinned, fuel)
            o2 = _outcome(original, t_orig, small, fuel)
            r2 = _outcome(residual, t_res, small, fuel)
            return Verdict(False, i + 1, skipped, Mismatch(small, o2, r2, i))
    return Verdict(True, trials, skipped)
