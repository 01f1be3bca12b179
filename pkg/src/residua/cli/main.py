"""``residua`` command-line driver.

Exit codes: 0 on success, 1 when the differential test rejects the
residual program, 2 on input errors.
"""

from __future__ import annotations

import argparse
import glob
import logging
import os
import sys
from dataclasses import dataclass

from ..constraints import ConstraintSet, load_constraints
from ..errors import ResiduaError
from ..frontend.parser import parse_program
from ..interp.difftest import diff_test
from ..specializer import ReplacementPolicy, specialize_program
from ..specializer.policy import parse_keep_list
from . import emit

log = logging.getLogger("residua")

EXIT_OK, EXIT_VERIFY, EXIT_INPUT = 0, 1, 2


@dataclass
class RunConfig:
    sources: list
    constraints: str | None = None
    policy: str = "all"
    replace_parameters: bool = False
    out: str = "out"
    formats: str = "both"
    cap: int = 64
    trials: int = 200
    seed: int = 0
    emit: str = "both"
    unchecked: bool = False


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="residua",
        description="Specialize a MiniF77 program under input constraints.")
    ap.add_argument("--src", nargs="+", required=True, metavar="PATH",
                    help="source files, or directories containing .f files")
    ap.add_argument("--constraints", metavar="FILE", help="constraint file (.pec)")
    ap.add_argument("--policy", default="all", metavar="POLICY",
                    help="identifier replacement: all, none, or keep:<file> (default: all)")
    ap.add_argument("--replace-parameters", action="store_true",
                    help="with keep:<file>, substitute PARAMETER names too")
    ap.add_argument("--emit", choices=("report", "program", "both"), default="both")
    ap.add_argument("--out", default="out", metavar="DIR")
    ap.add_argument("--format", dest="formats", choices=("json", "html", "both"), default="both",
                    help="report format(s)")
    ap.add_argument("--cap", type=int, default=64, help="variants allowed per unit")
    ap.add_argument("--trials", type=int, default=200, help="differential test trials")
    ap.add_argument("--seed", type=int, default=0,
                    help="differential test seed (RESIDUA_SEED overrides)")
    ap.add_argument("--unchecked", action="store_true",
                    help="write the residual program without differential testing")
    ap.add_argument("-v", "--verbose", action="store_true")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    seed = ns.seed
    env_seed = os.environ.get("RESIDUA_SEED")
    if env_seed:
        try:
            seed = int(env_seed)
        except ValueError:
            raise ResiduaError(f"RESIDUA_SEED must be an integer, got {env_seed!r}") from None
    return RunConfig(ns.src, ns.constraints, ns.policy, ns.replace_parameters, ns.out,
                     ns.formats, ns.cap, ns.trials, seed, ns.emit, ns.unchecked)


def collect_sources(paths) -> list[tuple[str, str]]:
    files = []
    for p in paths:
        if os.path.isdir(p):
            found = sorted(glob.glob(os.path.join(p, "*.f")))
            if not found:
                raise ResiduaError("no .f files in directory", p)
            files.extend(found)
        elif os.path.exists(p):
            files.append(p)
        else:
            raise ResiduaError("no such file or directory", p)
    out = []
    for f in files:
        with open(f, encoding="utf-8") as fh:
            out.append((f, fh.read()))
    return out


def load_policy(text: str, replace_parameters: bool = False) -> ReplacementPolicy:
    if text == "all":
        return ReplacementPolicy.replace_all()
    if text == "none":
        return ReplacementPolicy.replace_none()
    if text.startswith("keep:"):
        path = text[5:]
        if not os.path.exists(path):
            raise ResiduaError("keep-list file not found", path)
        with open(path, encoding="utf-8") as fh:
            names = parse_keep_list(fh.read())
        return ReplacementPolicy.keep_list(names, keep_parameters=not replace_parameters)
    raise ResiduaError(f"unknown policy {text!r}; expected all, none or keep:<file>")


def run(cfg: RunConfig) -> int:
    program = parse_program(collect_sources(cfg.sources))
    cs = ConstraintSet()
    if cfg.constraints:
        if not os.path.exists(cfg.constraints):
            raise ResiduaError("constraint file not found", cfg.constraints)
        cs = load_constraints(cfg.constraints)
    policy = load_policy(cfg.policy, cfg.replace_parameters)
    result = specialize_program(program, cs, policy, cfg.cap)

    files: list[tuple[str, str]] = []
    if cfg.emit in ("program", "both"):
        if not cfg.unchecked:
            verdict = diff_test(program, result.program, cs, cfg.trials, cfg.seed)
            if not verdict.passed:
                print("residua: differential test failed; nothing written", file=sys.stderr)
                print(verdict.counterexample.describe(), file=sys.stderr)
                return EXIT_VERIFY
            log.info("differential test passed (%d trials)", verdict.trials)
        files.extend(emit.program_files(result))
    if cfg.emit in ("report", "both"):
        if cfg.formats in ("json", "both"):
            files.append(("report.json", emit.report_json(result)))
        if cfg.formats in ("html", "both"):
            files.extend(emit.html_pages(result, program))
    for path in emit.write_files(cfg.out, files):
        log.info("wrote %s", path)
    for d in result.report.diagnostics:
        log.info("%s: %s", d["variant"], d["message"])
    return EXIT_OK


def main(argv=None) -> int:
    ns = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if ns.verbose else logging.WARNING,
                        format="residua: %(message)s", stream=sys.stderr)
    try:
        return run(config_from_args(ns))
    except ResiduaError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"{exc.filename or '<input>'}: {exc.strerror}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
