"""Tokenizer for free-form MiniF77 source.

Comment lines start with ``!`` or ``*`` as their first non-blank
character, or with ``C``/``c`` in column 1 followed by a blank or the end
of the line.  They become COMMENT tokens that the parser attaches to the
next statement.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import LexError

KEYWORDS = frozenset("""
    PROGRAM SUBROUTINE FUNCTION END INTEGER REAL LOGICAL CHARACTER PARAMETER
    COMMON IF THEN ELSE ENDIF DO WHILE ENDDO CALL RETURN STOP CONTINUE PRINT
    READ
""".split())

DOTTED = {
    ".EQ.": "OP_EQ", ".NE.": "OP_NE", ".LT.": "OP_LT", ".LE.": "OP_LE",
    ".GT.": "OP_GT", ".GE.": "OP_GE", ".AND.": "OP_AND", ".OR.": "OP_OR",
    ".NOT.": "OP_NOT",
}
SYMBOLIC_REL = {"==": "OP_EQ", "/=": "OP_NE", "<=": "OP_LE", ">=": "OP_GE",
                "<": "OP_LT", ">": "OP_GT"}
PUNCT = {"(": "LPAREN", ")": "RPAREN", ",": "COMMA", ":": "COLON",
         "=": "ASSIGN", "+": "PLUS", "-": "MINUS", "/": "SLASH", "*": "STAR"}

INT_MAX = 2**31 - 1

_NUMBER = re.compile(r"(\d+\.\d*|\.\d+|\d+)([EeDd][+-]?\d*)?")
_DOTWORD = re.compile(r"\.([A-Za-z]+)\.")
_DIGITS = frozenset("0123456789")
_LETTERS = frozenset("ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz")
_IDENT = re.compile(r"[A-Za-z][A-Za-z0-9_]*")


@dataclass(frozen=True)
class Token:
    kind: str
    value: object
    line: int
    col: int

    def __repr__(self) -> str:
        return f"{self.kind}({self.value!r})@{self.line}:{self.col}"


def _is_comment_line(raw: str) -> bool:
    stripped = raw.lstrip(" \t")
    if stripped[:1] in ("!", "*"):
        return True
    return raw[:1] in ("C", "c") and (len(raw) == 1 or raw[1] in " \t")


def _comment_text(raw: str) -> str:
    stripped = raw.lstrip(" \t")
    return stripped[1:].strip()


def tokenize(source: str, path: str | None = None) -> list[Token]:
    """Split ``source`` into tokens.

    A NEWLINE token terminates every line that produced at least one
    non-comment token.  Raises LexError with the offending position.
    """
    tokens: list[Token] = []
    for lineno, raw in enumerate(source.split("\n"), start=1):
        raw = raw.rstrip("\r")
        if not raw.strip():
            continue
        if _is_comment_line(raw):
            tokens.append(Token("COMMENT", _comment_text(raw), lineno, 1))
            continue
        before = len(tokens)
        _lex_line(raw, lineno, path, tokens)
        if len(tokens) > before:
            tokens.append(Token("NEWLINE", None, lineno, len(raw) + 1))
    if tokens and tokens[-1].kind == "NEWLINE" and not source.endswith("\n"):
        tokens.pop()
    return tokens


def _lex_line(text: str, lineno: int, path, out: list[Token]) -> None:
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        col = i + 1
        if ch in " \t":
            i += 1
            continue
        if ch in _DIGITS or (ch == "." and i + 1 < n and text[i + 1] in _DIGITS):
            i = _lex_number(text, i, lineno, path, out)
            continue
        if ch == ".":
            m = _DOTWORD.match(text, i)
            if not m:
                raise LexError("stray '.'", path, lineno, col)
            word = "." + m.group(1).upper() + "."
            if word in DOTTED:
                out.append(Token(DOTTED[word], word, lineno, col))
            elif word in (".TRUE.", ".FALSE."):
                out.append(Token("LOGICAL_LIT", word == ".TRUE.", lineno, col))
            else:
                raise LexError(f"unknown operator {word}", path, lineno, col)
            i = m.end()
            continue
        if ch in _LETTERS:
            m = _IDENT.match(text, i)
            word = m.group(0).upper()
            if word in KEYWORDS:
                out.append(Token("KEYWORD", word, lineno, col))
            else:
                out.append(Token("IDENT", word, lineno, col))
            i = m.end()
            continue
        if ch == "'":
            i = _lex_string(text, i, lineno, path, out)
            continue
        two = text[i:i + 2]
        if two == "**":
            out.append(Token("POWER", "**", lineno, col))
            i += 2
            continue
        if two in SYMBOLIC_REL:
            out.append(Token(SYMBOLIC_REL[two], two, lineno, col))
            i += 2
            continue
        if ch in SYMBOLIC_REL:
            out.append(Token(SYMBOLIC_REL[ch], ch, lineno, col))
            i += 1
            continue
        if ch in PUNCT:
            out.append(Token(PUNCT[ch], ch, lineno, col))
            i += 1
            continue
        raise LexError(f"illegal character {ch!r}", path, lineno, col)


def _lex_number(text, i, lineno, path, out) -> int:
    col = i + 1
    m = _NUMBER.match(text, i)
    mant, expo = m.group(1), m.group(2)
    end = m.end()
    # "1.EQ.2": the dot belongs to the operator, not the number
    if mant.endswith(".") and not expo:
        dm = _DOTWORD.match(text, end - 1)
        if dm and ("." + dm.group(1).upper() + ".") in (*DOTTED, ".TRUE.", ".FALSE."):
            mant = mant[:-1]
            end -= 1
    if expo is not None and len(expo.lstrip("EeDd+-")) == 0:
        raise LexError(f"malformed exponent in {text[i:end]!r}", path, lineno, col)
    if end < len(text) and (text[end] in _LETTERS or text[end] == "_"):
        raise LexError(f"malformed number {text[i:end + 1]!r}", path, lineno, col)
    if "." in mant or expo:
        literal = mant + (("E" + expo[1:]) if expo else "")
        value = float(literal)
        if value != value or value in (float("inf"), float("-inf")):
            raise LexError("real literal out of range", path, lineno, col)
        out.append(Token("REAL_LIT", value, lineno, col))
    else:
        value = int(mant)
        if value > INT_MAX:
            raise LexError("integer literal out of range", path, lineno, col)
        out.append(Token("INT_LIT", value, lineno, col))
    return end


def _lex_string(text, i, lineno, path, out) -> int:
    col = i + 1
    j = i + 1
    chars = []
    while True:
        if j >= len(text):
            raise LexError("unterminated character literal", path, lineno, col)
        if text[j] == "'":
            if j + 1 < len(text) and text[j + 1] == "'":
                chars.append("'")
                j += 2
                continue
            break
        chars.append(text[j])
        j += 1
    out.append(Token("STRING_LIT", "".join(chars), lineno, col))
    return j + 1
