"""Canonical source emission.

One statement per line, two spaces of indentation per nesting level,
comments on their own lines directly above the statement that owns them.
Parentheses are inserted only where precedence requires them, so printing
and reparsing yields an equal tree.
"""

from __future__ import annotations

import math

from . import ast as A

INDENT = "  "

# binding strength of each operator class; higher binds tighter
_PREC = {".OR.": 1, ".AND.": 2, ".NOT.": 3, "rel": 4, "+": 5, "-": 5, "neg": 5,
         "*": 6, "/": 6, "**": 7}


def format_real(x: float) -> str:
    """Shortest text that reads back as exactly ``x``."""
    text = repr(float(x))
    if "e" in text:
        mant, expo = text.split("e")
        if "." not in mant:
            mant += ".0"
        return f"{mant}E{int(expo)}"
    if "." not in text:
        text += ".0"
    return text


def format_literal(lit: A.Literal) -> str:
    if isinstance(lit, A.IntLit):
        return str(lit.value)
    if isinstance(lit, A.RealLit):
        return format_real(lit.value)
    if isinstance(lit, A.LogLit):
        return ".TRUE." if lit.value else ".FALSE."
    return "'" + lit.value.replace("'", "''") + "'"


def _negative(e) -> bool:
    if isinstance(e, A.IntLit):
        return e.value < 0
    if isinstance(e, A.RealLit):
        return math.copysign(1.0, e.value) < 0
    return False


def _prec(e) -> int:
    if isinstance(e, A.Binary):
        return _PREC["rel"] if e.op in A.REL_OPS else _PREC[e.op]
    if isinstance(e, A.Unary):
        return _PREC[".NOT."] if e.op == ".NOT." else _PREC["neg"]
    if _negative(e):
        return _PREC["neg"]
    return 8


def format_expr(e, min_prec: int = 0, leading: bool = True) -> str:
    """Render ``e``; wrap in parentheses if it binds looser than ``min_prec``.

    ``leading`` is false for operands that are not the first term of an
    additive expression, where a unary sign is not allowed.
    """
    p = _prec(e)
    text = _format_bare(e)
    needs = p < min_prec or (p == _PREC["neg"] and not leading and
                             (isinstance(e, A.Unary) or _negative(e)))
    return f"({text})" if needs else text


def _format_bare(e) -> str:
    if isinstance(e, A.LITERALS):
        return format_literal(e)
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.ArrayRef):
        return f"{e.name}({format_expr(e.index)})"
    if isinstance(e, A.FuncCall):
        return f"{e.name}({', '.join(format_expr(a) for a in e.args)})"
    if isinstance(e, A.Unary):
        if e.op == ".NOT.":
            return ".NOT. " + format_expr(e.operand, _PREC[".NOT."])
        return "-" + format_expr(e.operand, _PREC["*"], leading=False)
    op = e.op
    if op in A.REL_OPS:
        lp = rp = _PREC["+"]
        return f"{format_expr(e.left, lp)} {op} {format_expr(e.right, rp)}"
    p = _PREC[op]
    if op == "**":
        left = format_expr(e.left, p + 1, leading=False)
        right = format_expr(e.right, p, leading=False)
        return f"{left}**{right}"
    left = format_expr(e.left, p, leading=(p == _PREC["+"]))
    right = format_expr(e.right, p + 1, leading=False)
    return f"{left} {op} {right}"


def stmt_header(s: A.Stmt) -> str:
    """Single-line text of ``s``; compound statements give their opening line."""
    if isinstance(s, A.Assign):
        return f"{format_expr(s.target)} = {format_expr(s.value)}"
    if isinstance(s, A.If):
        return f"IF ({format_expr(s.cond)}) THEN"
    if isinstance(s, A.DoLoop):
        text = f"DO {s.var} = {format_expr(s.lo)}, {format_expr(s.hi)}"
        if s.step is not None:
            text += f", {format_expr(s.step)}"
        return text
    if isinstance(s, A.DoWhile):
        return f"DO WHILE ({format_expr(s.cond)})"
    if isinstance(s, A.Call):
        if s.args:
            return f"CALL {s.name}({', '.join(format_expr(a) for a in s.args)})"
        return f"CALL {s.name}"
    if isinstance(s, A.Return):
        return "RETURN"
    if isinstance(s, A.Stop):
        return "STOP"
    if isinstance(s, A.Continue):
        return "CONTINUE"
    if isinstance(s, A.Print):
        if s.args:
            return "PRINT *, " + ", ".join(format_expr(a) for a in s.args)
        return "PRINT *"
    if isinstance(s, A.Read):
        return "READ *, " + ", ".join(format_expr(t) for t in s.targets)
    raise TypeError(f"not a statement: {s!r}")


def _comment_lines(comments, depth: int) -> list[str]:
    pad = INDENT * depth
    return [f"{pad}! {c}".rstrip() for c in comments]


def format_block(body, depth: int, out: list[str], annotate=None) -> None:
    """Append the lines of ``body`` to ``out``.

    ``annotate(stmt, line)`` may rewrite each emitted statement line; the
    HTML report uses it to attach anchors.
    """
    pad = INDENT * depth
    for s in body:
        out.extend(_comment_lines(s.comments, depth))
        line = pad + stmt_header(s)
        out.append(annotate(s, line) if annotate else line)
        if isinstance(s, A.If):
            format_block(s.then, depth + 1, out, annotate)
            if s.orelse:
                out.append(pad + "ELSE")
                format_block(s.orelse, depth + 1, out, annotate)
            out.append(pad + "END IF")
        elif isinstance(s, (A.DoLoop, A.DoWhile)):
            format_block(s.body, depth + 1, out, annotate)
            out.append(pad + "END DO")


def format_decl(d) -> str:
    if isinstance(d, A.TypeDecl):
        if d.size is None:
            return f"{d.type} {d.name}"
        return f"{d.type} {d.name}({d.size})"
    if isinstance(d, A.ParamDecl):
        return f"PARAMETER ({d.name} = {format_expr(d.value)})"
    return f"COMMON /{d.block}/ " + ", ".join(d.names)


def unit_header(u: A.Unit) -> str:
    if u.kind == A.MAIN:
        return f"PROGRAM {u.name}"
    formals = "(" + ", ".join(u.formals) + ")"
    if u.kind == A.FUNCTION:
        return f"{u.result_type} FUNCTION {u.name}{formals}"
    return f"SUBROUTINE {u.name}" + (formals if u.formals else "")


def format_unit(u: A.Unit, annotate=None) -> str:
    out: list[str] = _comment_lines(u.comments, 0)
    out.append(unit_header(u))
    for d in u.decls:
        out.extend(_comment_lines(d.comments, 1))
        out.append(INDENT + format_decl(d))
    format_block(u.body, 1, out, annotate)
    out.extend(_comment_lines(u.end_comments, 1))
    out.append("END")
    return "\n".join(out) + "\n"


def unit_filename(u: A.Unit) -> str:
    return u.name.lower() + ".f"


def pretty_print(p: A.Program) -> list[tuple[str, str]]:
    """One ``(path, text)`` pair per unit, in program order."""
    return [(unit_filename(u), format_unit(u)) for u in p.units]
