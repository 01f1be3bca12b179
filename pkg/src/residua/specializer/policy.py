"""Which Known expressions may be replaced by their literal value."""

from __future__ import annotations

from dataclasses import dataclass, field

from ..frontend import ast as A
from ..frontend.symbols import PARAM, UnitSymbols

ALL, NONE, KEEP = "all", "none", "keep"


@dataclass(frozen=True)
class ReplacementPolicy:
    """``all`` folds everything Known, ``none`` only identifier-free
    expressions, ``keep`` everything except expressions that mention a
    kept name (and PARAMETER names, unless ``keep_parameters`` is off).
    """

    mode: str = ALL
    keep: frozenset = field(default_factory=frozenset)
    keep_parameters: bool = True

    @classmethod
    def replace_all(cls) -> "ReplacementPolicy":
        return cls(ALL)

    @classmethod
    def replace_none(cls) -> "ReplacementPolicy":
        return cls(NONE)

    @classmethod
    def keep_list(cls, names, keep_parameters: bool = True) -> "ReplacementPolicy":
        return cls(KEEP, frozenset(n.upper() for n in names), keep_parameters)

    def may_fold(self, e, syms: UnitSymbols) -> bool:
        if self.mode == ALL:
            return True
        names = A.names_in(e)
        if self.mode == NONE:
            return not names
        for n in names:
            if n in self.keep:
                return False
            info = syms.vars.get(n)
            if self.keep_parameters and info is not None and info.kind == PARAM:
                return False
        return True

    def keeps(self, name: str) -> bool:
        """Kept names survive dead-assignment removal too."""
        return self.mode == KEEP and name in self.keep

    def describe(self) -> str:
        if self.mode != KEEP:
            return self.mode
        extra = "" if self.keep_parameters else " (parameters replaced)"
        return "keep:" + ",".join(sorted(self.keep)) + extra


def parse_keep_list(text: str) -> list[str]:
    """Names from a keep-list file: whitespace or comma separated, ``#`` comments."""
    names = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        names.extend(n for n in line.replace(",", " ").split() if n)
    return names
