"""Lexing, parsing, symbol resolution and pretty-printing for MiniF77."""

from .ast import Program, Unit
from .lexer import Token, tokenize
from .parser import parse_program, parse_source, parse_unit
from .printer import format_unit, pretty_print
from .symbols import SymbolTable, resolve_symbols

__all__ = ["Program", "Unit", "Token", "tokenize", "parse_program", "parse_source",
           "parse_unit", "format_unit", "pretty_print", "SymbolTable", "resolve_symbols"]
