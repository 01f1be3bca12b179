"""Shared helpers for loading the fixture corpus."""

from __future__ import annotations

import glob
import os
from dataclasses import dataclass

from residua.constraints import ConstraintSet, load_constraints
from residua.frontend.parser import parse_program
from residua.specializer import ReplacementPolicy
from residua.specializer.policy import parse_keep_list

HERE = os.path.dirname(os.path.abspath(__file__))
FIXTURES = os.path.join(HERE, "fixtures")
MUTANTS = os.path.join(HERE, "mutants")

FIXTURE_NAMES = sorted(
    d for d in os.listdir(FIXTURES) if os.path.isdir(os.path.join(FIXTURES, d)))


@dataclass
class Fixture:
    name: str
    path: str
    program: object
    constraints: ConstraintSet
    keep: list

    def policies(self) -> dict:
        return {
            "all": ReplacementPolicy.replace_all(),
            "none": ReplacementPolicy.replace_none(),
            "keep": ReplacementPolicy.keep_list(self.keep),
        }


def read_sources(directory: str) -> list[tuple[str, str]]:
    out = []
    for f in sorted(glob.glob(os.path.join(directory, "*.f"))):
        with open(f, encoding="utf-8") as fh:
            out.append((f, fh.read()))
    return out


def load_fixture(name: str) -> Fixture:
    d = os.path.join(FIXTURES, name)
    pec = os.path.join(d, "constraints.pec")
    cs = load_constraints(pec) if os.path.exists(pec) else ConstraintSet()
    keep_path = os.path.join(d, "keep.txt")
    keep = []
    if os.path.exists(keep_path):
        with open(keep_path, encoding="utf-8") as fh:
            keep = parse_keep_list(fh.read())
    return Fixture(name, d, parse_program(read_sources(d)), cs, keep)


def load_mutant(name: str):
    return parse_program(read_sources(os.path.join(MUTANTS, name)))


def source(text: str, **more) -> object:
    """Parse a main unit given as text plus optional extra units (name=text)."""
    files = [("main.f", text)] + [(f"{k.lower()}.f", v) for k, v in more.items()]
    return parse_program(files)
