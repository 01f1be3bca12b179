"""Storage locations.

COMMON cells are identified by block and index alone, so the same cell
seen from two units is the same Location.  Arrays are tracked only as a
whole.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union


@dataclass(frozen=True, order=True)
class Local:
    unit: str
    name: str

    def __str__(self) -> str:
        return f"{self.unit}.{self.name}"


@dataclass(frozen=True, order=True)
class CommonCell:
    block: str
    index: int

    def __str__(self) -> str:
        return f"/{self.block}/[{self.index}]"


@dataclass(frozen=True)
class ArrayWhole:
    base: Union[Local, CommonCell]

    def __str__(self) -> str:
        return f"{self.base}(*)"


Location = Union[Local, CommonCell, ArrayWhole]


def is_common(loc: Location) -> bool:
    if isinstance(loc, ArrayWhole):
        loc = loc.base
    return isinstance(loc, CommonCell)


def sort_key(loc) -> tuple:
    """Total order over locations and formal descriptors, for canonical output."""
    if isinstance(loc, tuple):  # ("formal", i)
        return (0, "", loc[1], 0)
    if isinstance(loc, ArrayWhole):
        k = sort_key(loc.base)
        return (k[0], k[1], k[2], 1)
    if isinstance(loc, CommonCell):
        return (1, loc.block, loc.index, 0)
    return (2, loc.unit + "." + loc.name, 0, 0)
