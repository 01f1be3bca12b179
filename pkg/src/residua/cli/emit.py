"""Writers for residual sources and the JSON / HTML reports."""

from __future__ import annotations

import html
import json
import os
from functools import lru_cache
from importlib import resources

import jsonschema

from ..frontend import ast as A
from ..frontend.printer import format_unit, pretty_print
from ..specializer.program import SpecializationResult

_MARK = "\x00"


@lru_cache(maxsize=1)
def report_schema() -> dict:
    text = resources.files("residua.cli").joinpath("report.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def validate_report(doc: dict) -> None:
    """Raise ``jsonschema.ValidationError`` if ``doc`` does not match the schema."""
    jsonschema.validate(doc, report_schema())


def report_json(result: SpecializationResult) -> str:
    doc = result.report.to_json()
    validate_report(doc)
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


def program_files(result: SpecializationResult) -> list[tuple[str, str]]:
    return pretty_print(result.program)


def write_files(outdir: str, files: list[tuple[str, str]]) -> list[str]:
    os.makedirs(outdir, exist_ok=True)
    paths = []
    for name, text in files:
        path = os.path.join(outdir, name)
        os.makedirs(os.path.dirname(path), exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths.append(path)
    return paths


# -- HTML -------------------------------------------------------------------

_STYLE = """
body { font-family: sans-serif; margin: 1.5em; }
table.panes { border-collapse: collapse; width: 100%; }
table.panes td { vertical-align: top; width: 50%; padding: 0 1em; }
pre { font-family: monospace; line-height: 1.35; }
del { color: #a33; }
span.reason { color: #a33; font-style: italic; }
a.prov { color: inherit; text-decoration: none; }
a.prov:hover { text-decoration: underline; }
:target { background: #ffd; }
"""


def page_name(variant: str) -> str:
    return f"variant_{variant.lower()}.html"


def _page(title: str, body: str) -> str:
    return ("<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
            f"<title>{html.escape(title)}</title><style>{_STYLE}</style></head>\n"
            f"<body>\n{body}\n</body></html>\n")


def _marked(u: A.Unit) -> list[str]:
    return format_unit(u, lambda s, line: f"{_MARK}{s.prov}{_MARK}{line}").rstrip("\n").split("\n")


def _split(line: str):
    if line.startswith(_MARK):
        _, prov, text = line.split(_MARK, 2)
        return int(prov), text
    return None, line


def _original_pane(u: A.Unit, disp: dict) -> str:
    out = []
    for line in _marked(u):
        prov, text = _split(line)
        esc = html.escape(text)
        if prov is None:
            out.append(esc)
            continue
        row = disp.get(prov)
        if row is not None and row["disposition"] == "removed":
            out.append(f"<span id=\"o{prov}\"><del>{esc}</del></span>"
                       f"  <span class=\"reason\">! {html.escape(row['reason'])}</span>")
        else:
            out.append(f"<span id=\"o{prov}\">{esc}</span>")
    return "<pre>" + "\n".join(out) + "</pre>"


def _residual_pane(u: A.Unit, pages: dict) -> str:
    calls = {s.prov: s.name for s in A.walk_stmts(u.body) if isinstance(s, A.Call)}
    out = []
    for line in _marked(u):
        prov, text = _split(line)
        esc = html.escape(text)
        if prov is None:
            out.append(esc)
            continue
        link = f"<a class=\"prov\" href=\"#o{prov}\" title=\"statement {prov}\">{esc}</a>"
        target = calls.get(prov)
        if target in pages:
            link += f"  <a href=\"{pages[target]}\">[{html.escape(target)}]</a>"
        out.append(link)
    return "<pre>" + "\n".join(out) + "</pre>"


def html_pages(result: SpecializationResult, original: A.Program) -> list[tuple[str, str]]:
    """``report.html`` (the index) plus one page per residual unit."""
    rep = result.report
    residual = result.program.unit_map()
    pages = {name: page_name(name) for name in residual}
    by_name: dict[str, list] = {}
    for v in rep.variants:
        by_name.setdefault(v["name"], []).append(v)

    files = []
    for name, u in residual.items():
        variants = by_name.get(name, [])
        src = original.unit(variants[0]["unit"] if variants else name)
        disp = {}
        if variants:
            first = variants[0]["name"]
            disp = {s["prov"]: s for s in rep.statements if s["variant"] == first}
        keys = "".join(f"<li>{html.escape(v['key_text'])}</li>" for v in variants) or \
            "<li>copied verbatim</li>"
        removed = sum(1 for s in disp.values() if s["disposition"] == "removed")
        body = (f"<p><a href=\"report.html\">index</a></p>\n"
                f"<h1>{html.escape(name)} <small>from {html.escape(src.name)}</small></h1>\n"
                f"<h2>Specialization keys</h2><ul>{keys}</ul>\n"
                f"<p>{removed} statement(s) removed.</p>\n"
                "<table class=\"panes\"><tr><th>original</th><th>residual</th></tr><tr>"
                f"<td>{_original_pane(src, disp)}</td><td>{_residual_pane(u, pages)}</td>"
                "</tr></table>")
        files.append((pages[name], _page(name, body)))

    rows = []
    for v in rep.variants:
        c = v["counts"]
        rows.append(f"<tr><td><a href=\"{pages[v['name']]}\">{html.escape(v['name'])}</a></td>"
                    f"<td>{html.escape(v['unit'])}</td><td>{html.escape(v['key_text'])}</td>"
                    f"<td>{v['call_sites']}</td><td>{v['cache_hits']}</td>"
                    f"<td>{c['kept']}/{c['simplified']}/{c['removed']}</td></tr>")
    others = [u for u in rep.units if u["verbatim"] or u["unreachable"]]
    extra = ""
    if others:
        items = "".join(
            f"<li><a href=\"{pages[u['name']]}\">{html.escape(u['name'])}</a>"
            f"{' (unreachable)' if u['unreachable'] else ''}</li>"
            for u in others if u["name"] in pages)
        extra = f"<h2>Copied verbatim</h2><ul>{items}</ul>"
    index = ("<h1>Specialization report</h1>\n"
             f"<p>policy: {html.escape(rep.policy)}</p>\n"
             "<table border=\"1\" cellpadding=\"4\"><tr><th>variant</th><th>unit</th><th>key</th>"
             "<th>call sites</th><th>cache hits</th><th>kept/simplified/removed</th></tr>\n"
             + "\n".join(rows) + "</table>\n" + extra)
    files.insert(0, ("report.html", _page("Specialization report", index)))
    return files
