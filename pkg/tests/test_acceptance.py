"""End-to-end acceptance checks over the fixture corpus.

Each test carries a ``criterion`` marker; the conftest prints one
PASS/FAIL line per criterion in the terminal summary.
"""

from __future__ import annotations

import json
import time

import pytest

from residua.cli import emit
from residua.constraints import parse_constraints
from residua.frontend import ast as A
from residua.frontend.lexer import tokenize
from residua.frontend.parser import parse_program
from residua.frontend.printer import format_unit, pretty_print
from residua.interp import check_soundness, diff_test
from residua.specializer import ReplacementPolicy, specialize_program

from corpus import FIXTURE_NAMES, load_fixture, load_mutant
from generate import generate_program, statement_counts
from oracles import check_eval_agreement, check_join_laws

POLICIES = ("all", "none", "keep")


@pytest.fixture(scope="module")
def corpus():
    """Every (fixture, policy) specialization, computed once."""
    out = {}
    t0 = time.perf_counter()
    for name in FIXTURE_NAMES:
        fx = load_fixture(name)
        for pol_name, pol in fx.policies().items():
            out[name, pol_name] = (fx, pol, specialize_program(fx.program, fx.constraints, pol))
    out["_elapsed"] = time.perf_counter() - t0
    return out


def cases(corpus):
    return [(k, v) for k, v in corpus.items() if k != "_elapsed"]


def detail(request, text):
    request.node.user_properties.append(("detail", text))


@pytest.mark.criterion(1, "semantic equivalence")
def test_semantic_equivalence(corpus, request):
    assert len(FIXTURE_NAMES) >= 12
    t0 = time.perf_counter()
    failures = []
    for (name, pol), (fx, _, res) in cases(corpus):
        v = diff_test(fx.program, res.program, fx.constraints, trials=200, seed=0)
        assert v.trials == 200
        if not v.passed:
            failures.append(f"{name}/{pol}: {v.counterexample.describe()}")
    elapsed = time.perf_counter() - t0 + corpus["_elapsed"]
    detail(request, f"{len(cases(corpus))} combinations x 200 trials in {elapsed:.1f}s")
    assert not failures, "\n".join(failures)
    assert elapsed < 60


def _identifiers(u: A.Unit, rename: dict) -> set:
    """Identifiers in the printed unit, with variant names mapped to their source."""
    return {rename.get(t.value, t.value) for t in tokenize(format_unit(u)) if t.kind == "IDENT"}


@pytest.mark.criterion(2, "structure invariants")
def test_structure_invariants(corpus, request):
    violations = []
    checked = 0
    for (name, pol), (fx, _, res) in cases(corpus):
        original = fx.program.unit_map()
        provs_of = {n: {s.prov for s in A.walk_stmts(u.body)} for n, u in original.items()}
        origin_of = {v["name"]: v["unit"] for v in res.report.variants}
        for u in res.program.units:
            checked += 1
            src = origin_of.get(u.name, u.name)
            tag = f"{name}/{pol}/{u.name}"
            if src not in original:
                violations.append(f"{tag}: no source unit")
                continue
            if statement_counts(res.program)[u.name] > statement_counts(fx.program)[src]:
                violations.append(f"{tag}: more statements than {src}")
            stray = {s.prov for s in A.walk_stmts(u.body)} - provs_of[src]
            if stray:
                violations.append(f"{tag}: statements {sorted(stray)} come from another unit")
            # unit names may gain a suffix; variables may not change
            extra = _identifiers(u, origin_of) - _identifiers(original[src], {})
            if extra:
                violations.append(f"{tag}: new identifiers {sorted(extra)}")
            for s in A.walk_stmts(u.body):
                if isinstance(s, A.Call) and origin_of.get(s.name, s.name) not in original:
                    violations.append(f"{tag}: call to unknown unit {s.name}")
        verbatim = {r["name"] for r in res.report.units if r["verbatim"]}
        for v in res.report.variants:
            if v["unit"] in verbatim:
                continue
            seen = [s["prov"] for s in res.report.statements if s["variant_id"] == v["id"]]
            if sorted(seen) != sorted(provs_of[v["unit"]]):
                violations.append(f"{name}/{pol}/{v['name']}: report covers {len(seen)} of "
                                  f"{len(provs_of[v['unit']])} statements of {v['unit']}")
        covered = {v["unit"] for v in res.report.variants} | verbatim
        if covered != set(original):
            violations.append(f"{name}/{pol}: units {sorted(set(original) - covered)} unaccounted")
    detail(request, f"{checked} residual units, {len(violations)} violations")
    assert not violations, "\n".join(violations)


@pytest.mark.criterion(3, "corpus scale")
def test_corpus_scale(request, tmp_path):
    files = generate_program(n_units=10, stmts_per_unit=150, seed=0)
    cs = parse_constraints("GLOBAL: MODE = 2\nNLEV = 3")
    t0 = time.perf_counter()
    program = parse_program(files)
    res = specialize_program(program, cs, ReplacementPolicy.replace_all())
    out = [("report.json", emit.report_json(res))] + emit.html_pages(res, program) + \
        emit.program_files(res)
    emit.write_files(str(tmp_path), out)
    elapsed = time.perf_counter() - t0
    counts = statement_counts(program)
    detail(request, f"{len(counts)} units, {sum(counts.values())} statements, "
                    f"{len(res.report.variants)} variants in {elapsed:.2f}s")
    assert len(program.units) == 10
    assert all(140 <= c <= 160 for c in counts.values()), counts
    assert elapsed < 10
    assert diff_test(program, res.program, cs, trials=5, seed=0).passed


@pytest.mark.criterion(4, "polyvariance")
def test_polyvariance(corpus, request):
    _, _, res = corpus["solve_two_keys", "all"]
    doc = json.loads(emit.report_json(res))
    solve = [v for v in doc["variants"] if v["unit"] == "SOLVE"]
    bodies = {v["name"]: format_unit(res.program.unit(v["name"])).split("\n", 1)[1] for v in solve}
    hits = sum(v["cache_hits"] for v in solve)
    detail(request, f"{sorted(bodies)} with {hits} cache hit(s)")
    assert len(solve) == 2
    assert len(set(bodies.values())) == 2
    assert hits >= 1


@pytest.mark.criterion(5, "idempotence")
def test_idempotence(corpus, request):
    differ = []
    for (name, pol), (fx, policy, res) in cases(corpus):
        again = specialize_program(res.program, fx.constraints, policy)
        if pretty_print(again.program) != pretty_print(res.program):
            differ.append(f"{name}/{pol}")
        # the printed output reparses to the same program
        assert parse_program(pretty_print(res.program)) == res.program
    detail(request, f"{len(cases(corpus)) - len(differ)}/{len(cases(corpus))} byte-identical")
    assert not differ, differ


@pytest.mark.criterion(6, "soundness sampling")
def test_soundness_sampling(corpus, request):
    violations, checks = [], 0
    for (name, pol), (fx, _, res) in cases(corpus):
        rep = check_soundness(res, fx.program, fx.constraints, runs=100, seed=0)
        checks += rep.checks
        violations += [f"{name}/{pol}: {v}" for v in rep.violations]
    detail(request, f"{checks} observations, {len(violations)} contradictions")
    assert checks > 0
    assert not violations, "\n".join(violations[:20])


@pytest.mark.criterion(7, "oracle cross-checks")
def test_oracle_cross_checks(request):
    envs = check_join_laws(1200, seed=99)
    exprs, known = check_eval_agreement(1200, seed=5)
    fx = load_fixture("solve_two_keys")
    verdict = diff_test(fx.program, load_mutant("solve_flip"), fx.constraints, trials=200, seed=0)
    assert not verdict.passed
    shrunk = verdict.counterexample.inputs
    nonzero = sum(1 for x in shrunk.stream if x) + \
        sum(1 for k in shrunk.main.values() if k.value not in (0, 0.0, False, ""))
    detail(request, f"{envs} envs, {exprs} expressions ({known} folded), mutant caught "
                    f"with {nonzero} nonzero input(s) left")
    assert envs >= 1000 and exprs >= 1000
    assert nonzero == 0


@pytest.mark.criterion(8, "policy behavior")
def test_policy_behavior(corpus, request):
    fx, _, by_all = corpus["pi_area", "all"]
    _, _, by_keep = corpus["pi_area", "keep"]
    assert "PI" in fx.keep

    def area(res):
        [v] = [v for v in res.report.variants if v["unit"] == "AREA"]
        u = res.program.unit(v["name"])
        return [format_unit(A.Unit(u.kind, u.name, body=(s,))).split("\n")[1].strip()
                for s in u.body]

    assert area(by_all) == ["A = 3.14159 * R * R"]
    assert area(by_keep) == ["A = PI * R * R"]
    for res in (by_all, by_keep):
        assert diff_test(fx.program, res.program, fx.constraints, trials=200, seed=0).passed

    def dead(res):
        return {(s["unit"], s["prov"]) for s in res.report.statements
                if s["disposition"] == "removed" and s["reason"] == "dead-branch"}

    sets = {pol: dead(corpus["pi_area", pol][2]) for pol in POLICIES}
    others = [name for name in FIXTURE_NAMES
              if len({frozenset(dead(corpus[name, pol][2])) for pol in POLICIES}) != 1]
    detail(request, f"{len(sets['all'])} dead-branch removals on pi_area, same under all policies")
    assert sets["all"] and sets["all"] == sets["none"] == sets["keep"]
    assert not others, others
