"""Recursive-descent parser for MiniF77.

The grammar is line oriented: every statement occupies one logical line
and block constructs (IF/ELSE/END IF, DO/END DO) are delimited by their
own lines.  Expressions use the usual Fortran precedence, lowest first::

    .OR.  <  .AND.  <  .NOT.  <  relational  <  + -  <  * /  <  **

Array references and function calls share the ``NAME(args)`` syntax; a
name declared with a dimension in the current unit is an array, anything
else is a function call.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

from ..errors import DuplicateUnit, MissingMain, ParseError
from . import ast as A
from .lexer import Token, tokenize

REL_TOKENS = {"OP_EQ": ".EQ.", "OP_NE": ".NE.", "OP_LT": ".LT.",
              "OP_LE": ".LE.", "OP_GT": ".GT.", "OP_GE": ".GE."}
TYPE_KEYWORDS = set(A.TYPES)


@dataclass
class Line:
    tokens: list[Token]
    comments: tuple[str, ...]

    @property
    def lineno(self) -> int:
        return self.tokens[0].line


def _split_lines(tokens: Sequence[Token]) -> tuple[list[Line], tuple[str, ...]]:
    lines: list[Line] = []
    pending: list[str] = []
    current: list[Token] = []
    for tok in tokens:
        if tok.kind == "COMMENT":
            pending.append(tok.value)
        elif tok.kind == "NEWLINE":
            if current:
                lines.append(Line(current, tuple(pending)))
                pending, current = [], []
        else:
            current.append(tok)
    if current:
        lines.append(Line(current, tuple(pending)))
        pending = []
    return lines, tuple(pending)


class Counter:
    """Monotone id source shared by all files of one program."""

    def __init__(self, start: int = 1):
        self._it = itertools.count(start)

    def next(self) -> int:
        return next(self._it)


class LineCursor:
    """Token cursor over a single logical line."""

    def __init__(self, line: Line, path: str | None):
        self.toks = line.tokens
        self.pos = 0
        self.path = path
        self.line = line

    def peek(self, offset: int = 0) -> Token | None:
        i = self.pos + offset
        return self.toks[i] if i < len(self.toks) else None

    def at(self, kind: str, value=None, offset: int = 0) -> bool:
        t = self.peek(offset)
        return t is not None and t.kind == kind and (value is None or t.value == value)

    def next(self) -> Token:
        t = self.peek()
        if t is None:
            self.fail("unexpected end of line")
        self.pos += 1
        return t

    def expect(self, kind: str, value=None) -> Token:
        t = self.peek()
        if t is None or t.kind != kind or (value is not None and t.value != value):
            want = value if value is not None else kind
            self.fail(f"expected {want}")
        self.pos += 1
        return t

    def accept(self, kind: str, value=None) -> Token | None:
        if self.at(kind, value):
            return self.next()
        return None

    def done(self) -> bool:
        return self.pos >= len(self.toks)

    def finish(self) -> None:
        if not self.done():
            self.fail(f"unexpected {self.peek().value!r}")

    def fail(self, msg: str):
        t = self.peek()
        if t is None:
            last = self.toks[-1]
            raise ParseError(msg, self.path, last.line, last.col + 1)
        raise ParseError(msg, self.path, t.line, t.col)


class UnitParser:
    def __init__(self, lines: list[Line], trailing: tuple[str, ...], path: str | None,
                 provs: Counter, sites: Counter):
        self.lines = lines
        self.trailing = trailing
        self.idx = 0
        self.path = path
        self.provs = provs
        self.sites = sites
        self.arrays: set[str] = set()

    # -- line helpers ------------------------------------------------------

    def _cursor(self) -> LineCursor:
        if self.idx >= len(self.lines):
            raise ParseError("unexpected end of file (missing END?)", self.path)
        return LineCursor(self.lines[self.idx], self.path)

    def _first(self, offset: int = 0) -> Token | None:
        if self.idx >= len(self.lines):
            return None
        toks = self.lines[self.idx].tokens
        return toks[offset] if offset < len(toks) else None

    def _kw(self, offset: int = 0) -> str | None:
        t = self._first(offset)
        return t.value if t is not None and t.kind == "KEYWORD" else None

    # -- units -------------------------------------------------------------

    def parse_unit(self) -> A.Unit:
        cur = self._cursor()
        header_comments = cur.line.comments
        kind, name, formals, result_type = self._header(cur)
        self.idx += 1
        decls = self._decls()
        body, term = self._block({"END"})
        end_comments = term.comments
        self._unit_end(term, kind, name)
        self.idx += 1
        if self.idx < len(self.lines):
            t = self.lines[self.idx].tokens[0]
            raise ParseError("more than one program unit in file", self.path, t.line, t.col)
        return A.Unit(kind=kind, name=name, formals=formals, decls=tuple(decls),
                      body=tuple(body), result_type=result_type,
                      comments=header_comments,
                      end_comments=end_comments + self.trailing, path=self.path)

    def _header(self, cur: LineCursor):
        result_type = None
        if cur.at("KEYWORD", "PROGRAM"):
            cur.next()
            name = cur.expect("IDENT").value
            cur.finish()
            return A.MAIN, name, (), None
        if cur.peek() is not None and cur.peek().kind == "KEYWORD" and cur.peek().value in TYPE_KEYWORDS:
            result_type = cur.next().value
            cur.expect("KEYWORD", "FUNCTION")
            kind = A.FUNCTION
        elif cur.accept("KEYWORD", "FUNCTION"):
            cur.fail("FUNCTION needs an explicit result type")
        else:
            cur.expect("KEYWORD", "SUBROUTINE")
            kind = A.SUBROUTINE
        name = cur.expect("IDENT").value
        formals: list[str] = []
        if cur.accept("LPAREN"):
            if not cur.at("RPAREN"):
                formals.append(cur.expect("IDENT").value)
                while cur.accept("COMMA"):
                    formals.append(cur.expect("IDENT").value)
            cur.expect("RPAREN")
        elif kind == A.FUNCTION:
            cur.fail("expected '(' after function name")
        cur.finish()
        if len(set(formals)) != len(formals):
            raise ParseError(f"duplicate formal parameter in {name}", self.path,
                             cur.line.lineno)
        return kind, name, tuple(formals), result_type

    def _unit_end(self, term: Line, kind: str, name: str) -> None:
        cur = LineCursor(term, self.path)
        cur.expect("KEYWORD", "END")
        if not cur.done():
            word = cur.expect("KEYWORD").value
            if word not in ("PROGRAM", "SUBROUTINE", "FUNCTION") or word != kind:
                cur.fail(f"END {word} does not close a {kind}")
            if not cur.done():
                label = cur.expect("IDENT").value
                if label != name:
                    cur.fail(f"END {word} {label} does not match {name}")
        cur.finish()

    # -- declarations ------------------------------------------------------

    def _decls(self) -> list:
        decls: list = []
        while self.idx < len(self.lines):
            kw = self._kw()
            if kw in TYPE_KEYWORDS and self._kw(1) != "FUNCTION":
                decls.extend(self._type_decl())
            elif kw == "PARAMETER":
                decls.extend(self._param_decl())
            elif kw == "COMMON":
                decls.append(self._common_decl())
            else:
                break
            self.idx += 1
        return decls

    def _type_decl(self) -> list[A.TypeDecl]:
        cur = self._cursor()
        typ = cur.next().value
        out = []
        comments = cur.line.comments
        while True:
            name = cur.expect("IDENT").value
            size = None
            if cur.accept("LPAREN"):
                t = cur.next()
                if t.kind == "INT_LIT":
                    size = t.value
                elif t.kind == "IDENT":
                    size = t.value
                else:
                    raise ParseError("array bound must be an integer literal or PARAMETER",
                                     self.path, t.line, t.col)
                cur.expect("RPAREN")
                self.arrays.add(name)
            out.append(A.TypeDecl(name, typ, size, comments))
            comments = ()
            if not cur.accept("COMMA"):
                break
        cur.finish()
        return out

    def _param_decl(self) -> list[A.ParamDecl]:
        cur = self._cursor()
        cur.next()
        cur.expect("LPAREN")
        out = []
        comments = cur.line.comments
        while True:
            name = cur.expect("IDENT").value
            cur.expect("ASSIGN")
            out.append(A.ParamDecl(name, parse_signed_literal(cur), comments))
            comments = ()
            if not cur.accept("COMMA"):
                break
        cur.expect("RPAREN")
        cur.finish()
        return out

    def _common_decl(self) -> A.CommonDecl:
        cur = self._cursor()
        cur.next()
        cur.expect("SLASH")
        block = cur.expect("IDENT").value
        cur.expect("SLASH")
        names = [cur.expect("IDENT").value]
        while cur.accept("COMMA"):
            names.append(cur.expect("IDENT").value)
        cur.finish()
        return A.CommonDecl(block, tuple(names), cur.line.comments)

    # -- statements --------------------------------------------------------

    def _is_terminator(self, stops: set[str]) -> str | None:
        kw = self._kw()
        if kw == "END":
            nxt = self._kw(1)
            if nxt == "IF":
                key = "ENDIF"
            elif nxt == "DO":
                key = "ENDDO"
            else:
                key = "END"
        elif kw == "ELSE":
            key = "ELSEIF" if self._kw(1) == "IF" else "ELSE"
        elif kw in ("ENDIF", "ENDDO"):
            key = kw
        else:
            return None
        return key if key in stops else "?" + key

    def _block(self, stops: set[str]) -> tuple[list[A.Stmt], Line]:
        body: list[A.Stmt] = []
        while True:
            if self.idx >= len(self.lines):
                raise ParseError("unexpected end of file (missing END?)", self.path)
            term = self._is_terminator(stops)
            if term is not None:
                if term.startswith("?"):
                    t = self._first()
                    raise ParseError(f"unexpected {term[1:]}", self.path, t.line, t.col)
                return body, self.lines[self.idx]
            body.append(self._statement())

    def _statement(self) -> A.Stmt:
        cur = self._cursor()
        comments = cur.line.comments
        t = cur.peek()
        if t.kind == "KEYWORD" and t.value in TYPE_KEYWORDS | {"PARAMETER", "COMMON"}:
            cur.fail("declaration after executable statement")
        if t.kind == "KEYWORD" and t.value == "IF":
            return self._if(cur, comments)
        if t.kind == "KEYWORD" and t.value == "DO":
            return self._do(cur, comments)
        stmt = self._simple(cur, comments, self.provs.next())
        cur.finish()
        self.idx += 1
        return stmt

    def _simple(self, cur: LineCursor, comments, prov: int) -> A.Stmt:
        t = cur.next()
        kw = t.value if t.kind == "KEYWORD" else None
        if kw == "CALL":
            name = cur.expect("IDENT").value
            args: list = []
            if cur.accept("LPAREN"):
                if not cur.at("RPAREN"):
                    args = self._expr_list(cur)
                cur.expect("RPAREN")
            return A.Call(name, tuple(args), prov=prov, comments=comments)
        if kw == "RETURN":
            return A.Return(prov=prov, comments=comments)
        if kw == "STOP":
            return A.Stop(prov=prov, comments=comments)
        if kw == "CONTINUE":
            return A.Continue(prov=prov, comments=comments)
        if kw == "PRINT":
            cur.expect("STAR")
            args = []
            if cur.accept("COMMA"):
                args = self._expr_list(cur)
            return A.Print(tuple(args), prov=prov, comments=comments)
        if kw == "READ":
            cur.expect("STAR")
            cur.expect("COMMA")
            targets = [self._lvalue(cur)]
            while cur.accept("COMMA"):
                targets.append(self._lvalue(cur))
            return A.Read(tuple(targets), prov=prov, comments=comments)
        if t.kind == "IDENT":
            cur.pos -= 1
            target = self._lvalue(cur)
            cur.expect("ASSIGN")
            value = self._expr(cur)
            return A.Assign(target, value, prov=prov, comments=comments)
        cur.pos -= 1
        cur.fail(f"unexpected {t.value!r} at start of statement")

    def _lvalue(self, cur: LineCursor):
        tok = cur.expect("IDENT")
        name = tok.value
        if cur.at("LPAREN"):
            if name not in self.arrays:
                raise ParseError(f"{name} is not an array", self.path, tok.line, tok.col)
            cur.next()
            index = self._expr(cur)
            cur.expect("RPAREN")
            return A.ArrayRef(name, index)
        return A.Var(name)

    def _if(self, cur: LineCursor, comments) -> A.Stmt:
        prov = self.provs.next()
        cur.expect("KEYWORD", "IF")
        cur.expect("LPAREN")
        cond = self._expr(cur)
        cur.expect("RPAREN")
        if cur.accept("KEYWORD", "THEN"):
            cur.finish()
            self.idx += 1
            return self._if_chain(cond, prov, comments)
        # logical IF with a single simple statement
        if cur.done():
            cur.fail("expected THEN or a statement")
        inner = self._simple(cur, (), self.provs.next())
        cur.finish()
        self.idx += 1
        return A.If(cond, (inner,), (), prov=prov, comments=comments)

    def _if_chain(self, cond, prov, comments) -> A.If:
        then, term = self._block({"ELSE", "ELSEIF", "ENDIF"})
        key = self._is_terminator({"ELSE", "ELSEIF", "ENDIF"})
        if key == "ELSEIF":
            cur = LineCursor(term, self.path)
            cur.expect("KEYWORD", "ELSE")
            inner_prov = self.provs.next()
            cur.expect("KEYWORD", "IF")
            cur.expect("LPAREN")
            inner_cond = self._expr(cur)
            cur.expect("RPAREN")
            cur.expect("KEYWORD", "THEN")
            cur.finish()
            self.idx += 1
            inner = self._if_chain(inner_cond, inner_prov, term.comments)
            return A.If(cond, tuple(then), (inner,), prov=prov, comments=comments)
        orelse: list = []
        if key == "ELSE":
            cur = LineCursor(term, self.path)
            cur.expect("KEYWORD", "ELSE")
            cur.finish()
            if term.comments:
                raise ParseError("comments before ELSE are not supported; move them into a branch",
                                 self.path, term.lineno)
            self.idx += 1
            orelse, term = self._block({"ENDIF"})
        self._close(term, "IF")
        return A.If(cond, tuple(then), tuple(orelse), prov=prov, comments=comments)

    def _close(self, term: Line, what: str) -> None:
        if term.comments:
            raise ParseError(f"comments before END {what} are not supported; move them into the block",
                             self.path, term.lineno)
        cur = LineCursor(term, self.path)
        if not cur.accept("KEYWORD", "END" + what):
            cur.expect("KEYWORD", "END")
            cur.expect("KEYWORD", what)
        cur.finish()
        self.idx += 1

    def _do(self, cur: LineCursor, comments) -> A.Stmt:
        prov = self.provs.next()
        cur.expect("KEYWORD", "DO")
        if cur.accept("KEYWORD", "WHILE"):
            cur.expect("LPAREN")
            cond = self._expr(cur)
            cur.expect("RPAREN")
            cur.finish()
            self.idx += 1
            body, term = self._block({"ENDDO"})
            self._close(term, "DO")
            return A.DoWhile(cond, tuple(body), prov=prov, comments=comments)
        var = cur.expect("IDENT").value
        cur.expect("ASSIGN")
        lo = self._expr(cur)
        cur.expect("COMMA")
        hi = self._expr(cur)
        step = None
        if cur.accept("COMMA"):
            step = self._expr(cur)
        cur.finish()
        self.idx += 1
        body, term = self._block({"ENDDO"})
        self._close(term, "DO")
        return A.DoLoop(var, lo, hi, step, tuple(body), prov=prov, comments=comments)

    # -- expressions -------------------------------------------------------

    def _expr_list(self, cur: LineCursor) -> list:
        out = [self._expr(cur)]
        while cur.accept("COMMA"):
            out.append(self._expr(cur))
        return out

    def _expr(self, cur: LineCursor):
        left = self._and(cur)
        while cur.accept("OP_OR"):
            left = A.Binary(".OR.", left, self._and(cur))
        return left

    def _and(self, cur):
        left = self._not(cur)
        while cur.accept("OP_AND"):
            left = A.Binary(".AND.", left, self._not(cur))
        return left

    def _not(self, cur):
        if cur.accept("OP_NOT"):
            return A.Unary(".NOT.", self._not(cur))
        return self._rel(cur)

    def _rel(self, cur):
        left = self._add(cur)
        t = cur.peek()
        if t is not None and t.kind in REL_TOKENS:
            cur.next()
            right = self._add(cur)
            left = A.Binary(REL_TOKENS[t.kind], left, right)
            t2 = cur.peek()
            if t2 is not None and t2.kind in REL_TOKENS:
                cur.fail("relational operators do not chain")
        return left

    def _add(self, cur):
        if cur.accept("MINUS"):
            term = self._term(cur)
            if isinstance(term, A.IntLit):
                left = A.IntLit(-term.value)
            elif isinstance(term, A.RealLit):
                left = A.RealLit(-term.value)
            else:
                left = A.Unary("-", term)
        else:
            cur.accept("PLUS")
            left = self._term(cur)
        while True:
            if cur.accept("PLUS"):
                left = A.Binary("+", left, self._term(cur))
            elif cur.accept("MINUS"):
                left = A.Binary("-", left, self._term(cur))
            else:
                return left

    def _term(self, cur):
        left = self._factor(cur)
        while True:
            if cur.accept("STAR"):
                left = A.Binary("*", left, self._factor(cur))
            elif cur.accept("SLASH"):
                left = A.Binary("/", left, self._factor(cur))
            else:
                return left

    def _factor(self, cur):
        base = self._primary(cur)
        if cur.accept("POWER"):
            return A.Binary("**", base, self._factor(cur))
        return base

    def _primary(self, cur):
        t = cur.next()
        if t.kind == "INT_LIT":
            return A.IntLit(t.value)
        if t.kind == "REAL_LIT":
            return A.RealLit(t.value)
        if t.kind == "LOGICAL_LIT":
            return A.LogLit(t.value)
        if t.kind == "STRING_LIT":
            return A.StrLit(t.value)
        if t.kind == "LPAREN":
            e = self._expr(cur)
            cur.expect("RPAREN")
            return e
        if t.kind == "IDENT":
            if cur.accept("LPAREN"):
                if t.value in self.arrays:
                    index = self._expr(cur)
                    cur.expect("RPAREN")
                    return A.ArrayRef(t.value, index)
                args = [] if cur.at("RPAREN") else self._expr_list(cur)
                cur.expect("RPAREN")
                return A.FuncCall(t.value, tuple(args), self.sites.next())
            return A.Var(t.value)
        cur.pos -= 1
        cur.fail(f"unexpected {t.value!r} in expression")


def parse_signed_literal(cur: LineCursor) -> A.Literal:
    """``[+|-] literal`` as used by PARAMETER and the constraint language."""
    sign = -1 if cur.accept("MINUS") else 1
    if sign == 1:
        cur.accept("PLUS")
    t = cur.next()
    if t.kind == "INT_LIT":
        return A.IntLit(sign * t.value)
    if t.kind == "REAL_LIT":
        return A.RealLit(sign * t.value)
    if sign == 1 and t.kind == "LOGICAL_LIT":
        return A.LogLit(t.value)
    if sign == 1 and t.kind == "STRING_LIT":
        return A.StrLit(t.value)
    cur.pos -= 1
    cur.fail("expected a literal")


def parse_unit(text: str, path: str | None = None,
               provs: Counter | None = None, sites: Counter | None = None) -> A.Unit:
    lines, trailing = _split_lines(tokenize(text, path))
    if not lines:
        raise ParseError("file contains no program unit", path)
    return UnitParser(lines, trailing, path, provs or Counter(), sites or Counter()).parse_unit()


def parse_program(files: Iterable[tuple[str, str]]) -> A.Program:
    """Parse one unit per ``(path, text)`` pair into a Program.

    ProvIds are numbered from 1 in file order, then source order.
    """
    provs, sites = Counter(), Counter()
    units: list[A.Unit] = []
    seen: dict[str, str] = {}
    for path, text in files:
        unit = parse_unit(text, path, provs, sites)
        if unit.name in seen:
            raise DuplicateUnit(f"unit {unit.name} already defined in {seen[unit.name]}", path)
        seen[unit.name] = path
        units.append(unit)
    mains = [u for u in units if u.kind == A.MAIN]
    if not mains:
        raise MissingMain("no PROGRAM unit found")
    if len(mains) > 1:
        raise ParseError(f"more than one PROGRAM unit: {', '.join(u.name for u in mains)}",
                         mains[1].path)
    return A.Program(tuple(units), mains[0].name, {u.name: u.path for u in units})


def parse_source(text: str, path: str = "main.f") -> A.Program:
    """Convenience: a whole program in one string, units separated by END lines."""
    chunks, current = [], []
    for line in text.split("\n"):
        current.append(line)
        toks = line.split()
        if toks and toks[0].upper() == "END" and (
                len(toks) == 1 or toks[1].upper() in ("PROGRAM", "SUBROUTINE", "FUNCTION")):
            chunks.append("\n".join(current) + "\n")
            current = []
    if any(l.strip() for l in current):
        chunks.append("\n".join(current))
    return parse_program((f"{path}#{i}", c) for i, c in enumerate(chunks))
