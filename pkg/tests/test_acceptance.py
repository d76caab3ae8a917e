"""Exit criteria, one test each; a pass/fail line per criterion is printed
in the terminal summary."""
import math
import os
import random
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction
from itertools import product
from pathlib import Path

import pytest

from branchlab.algebra import ProbabilitySet, verify, violates
from branchlab.collapse import collapse_forced, collapse_random
from branchlab.dsl import ParseError, ScenarioError, parse, round_trip, tokenize
from branchlab.graph import BranchGraph, Vertex, distance, extend, transitive_possibility
from branchlab.modal import ContextFamily, Necessarily, Not, Possibly, eval_formula, is_necessary
from branchlab.relations import (
    Grade,
    PossibilityContext,
    check_relation_axioms,
    classify_deterministic,
    grade_ordering,
    more_possible,
)
from branchlab.state import WaveFunction, normalize

from gen import random_family, random_formula, random_scenario, random_state, random_tree

REPO = Path(__file__).resolve().parents[1]
RESULTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    number = request.node.get_closest_marker("criterion").args[0]
    info = {"detail": ""}
    yield info
    RESULTS[number] = (True, info["detail"])


def _mark(n):
    return pytest.mark.criterion(n)


def _fail(n, msg):
    RESULTS[n] = (False, msg)
    pytest.fail(msg)


@_mark(1)
def test_c01_born_frequency(criterion):
    wf = WaveFunction.from_probabilities("O", {"a": 0.5, "b": 0.3, "c": 0.2})
    start = time.perf_counter()
    counts = Counter(collapse_random(wf, seed).realized_label for seed in range(100_000))
    elapsed = time.perf_counter() - start
    freqs = {k: counts[k] / 100_000 for k in "abc"}
    worst = max(abs(freqs[k] - p) for k, p in zip("abc", (0.5, 0.3, 0.2)))
    criterion["detail"] = f"max |freq - p| = {worst:.4f}, {elapsed:.2f}s"
    if not (worst <= 0.01 and elapsed < 5.0):
        _fail(1, criterion["detail"])


@_mark(2)
def test_c02_example_reproduction(criterion):
    amps = [("phi1", 0.2), ("phi2", 0.5), ("phi3", 0.6), ("phi4", 0.3), ("phi5", 0.1)]
    wf = normalize(WaveFunction.from_amplitudes("O", amps))
    rec = collapse_forced(wf, "phi3")
    others = [lab for lab in wf.labels if lab != "phi3"]
    # brute-force sort oracle: rank = number of strictly larger probabilities
    rank = {a: sum(wf.probability(b) > wf.probability(a) for b in others) for a in others}
    oracle = sorted(others, key=lambda a: rank[a])
    ordering = grade_ordering(PossibilityContext(wf, "phi3"))
    got = [lab for cls in ordering.classes for lab in cls]
    criterion["detail"] = f"possible={list(rec.possible_labels)} ordered={got}"
    if not (sorted(rec.possible_labels) == sorted(others) and len(others) == 4 and got == oracle):
        _fail(2, criterion["detail"])


@_mark(3)
def test_c03_relation_axioms(criterion):
    rng = random.Random(20240601)
    irr = asym = trans = 0
    contexts = 0
    while contexts < 1000:
        wf = random_state(rng, "O", rng.randint(1, 12))
        realizable = [lab for lab in wf.labels if wf.probability(lab) > 1e-12]
        ctx = PossibilityContext(wf, rng.choice(realizable))
        contexts += 1
        report = check_relation_axioms([ctx])
        irr += len(report.irreflexivity.counterexamples)
        asym += len(report.asymmetry.counterexamples)
        labs = [lab for lab in wf.labels if lab != ctx.realized_label]
        cmp = {(a, b): more_possible(ctx, a, b) for a in labs for b in labs}
        for a, b, c in product(labs, repeat=3):
            ab, bc, ac = cmp[a, b], cmp[b, c], cmp[a, c]
            if ab is Grade.MORE_POSSIBLE and bc is Grade.MORE_POSSIBLE and ac is not Grade.MORE_POSSIBLE:
                trans += 1
            if ab is not Grade.LESS_POSSIBLE and bc is not Grade.LESS_POSSIBLE and ac is Grade.LESS_POSSIBLE:
                trans += 1
    criterion["detail"] = f"{contexts} contexts: irreflexivity {irr}, asymmetry {asym}, grade transitivity {trans} failures"
    if irr or asym or trans:
        _fail(3, criterion["detail"])


@_mark(4)
def test_c04_grade_comparison(criterion):
    wf = WaveFunction.from_amplitudes("O", [("r", math.sqrt(1 / 6)), ("a", math.sqrt(1 / 2)), ("b", math.sqrt(1 / 3))])
    result = more_possible(PossibilityContext(wf, "r"), "a", "b")
    criterion["detail"] = f"1/2 vs 1/3 -> {result.value}"
    if result is not Grade.MORE_POSSIBLE:
        _fail(4, criterion["detail"])


def _closure(g):
    reach = {(e.source, e.target) for e in g.edges if e.weight > 1e-12}
    for k in g.vertices:
        for i in g.vertices:
            if (i, k) in reach:
                for j in g.vertices:
                    if (k, j) in reach:
                        reach.add((i, j))
    return reach


@_mark(5)
def test_c05_graph_composition(criterion):
    g = extend(BranchGraph(), collapse_forced(WaveFunction.from_probabilities("A", {"i": 0.5, "j": 0.5}), "i", "m1"))
    g = extend(g, collapse_forced(WaveFunction.from_probabilities("B", {"k": 0.4, "l": 0.6}), "k", "m2"), Vertex("m1", "j"))
    d = distance(g, Vertex("m1", "*"), Vertex("m2", "k"))
    w1 = g.parent_edge(Vertex("m1", "j")).weight
    w2 = g.parent_edge(Vertex("m2", "k")).weight
    exact = float(Fraction(w1) * Fraction(w2))
    ulps = abs(d - 0.2) / math.ulp(0.2)
    rng = random.Random(7)
    mismatches = trees = 0
    for _ in range(200):
        t = random_tree(rng, 50)
        trees += 1
        reach = _closure(t)
        for a, b in product(t.vertices, repeat=2):
            mismatches += transitive_possibility(t, a, b) != ((a, b) in reach)
    criterion["detail"] = f"distance={d!r} ({ulps:.1f} ulp from 0.2); {trees} trees, {mismatches} closure mismatches"
    if not (ulps <= 4 and d == exact and mismatches == 0):
        _fail(5, criterion["detail"])


@_mark(6)
def test_c06_modal_duality(criterion):
    rng = random.Random(99)
    cases = mismatches = 0
    while cases < 200:
        family = random_family(rng)
        f = random_formula(rng, rng.randint(0, 5), vocab=family.vocabulary)
        cases += 1
        mismatches += eval_formula(family, Necessarily(f)) != eval_formula(family, Not(Possibly(Not(f))))
    criterion["detail"] = f"{cases} families/formulas, {mismatches} mismatches"
    if mismatches:
        _fail(6, criterion["detail"])


@_mark(7)
def test_c07_deterministic_not_necessary(criterion):
    here = WaveFunction.from_probabilities("here", {"rain": 1.0})
    desert = WaveFunction.from_probabilities("desert", {"dry": 1.0})
    family = ContextFamily("contexts", (here, desert))
    det = classify_deterministic(PossibilityContext(here, "rain"))
    nec = is_necessary(family, "rain")
    criterion["detail"] = f"deterministic={det}, necessary={nec}"
    if not (det and not nec):
        _fail(7, criterion["detail"])


@_mark(8)
def test_c08_algebra_verifier(criterion):
    two = verify(ProbabilitySet((0.0, 1.0)))
    all_hold = all(v.status == "holds" for _, v in two.items())
    three = verify(ProbabilitySet((0.5, 0.3, 0.2)))
    v = three.orthocomplemented
    replay = v.status == "fails" and violates(v.law, v.counterexample, three.carrier)
    criterion["detail"] = f"{{0,1}} all hold={all_hold}; {{0.5,0.3,0.2}} orthocomplement={v}, replay violates={replay}"
    if not (all_hold and str(v) == "fails(0.3)" and replay):
        _fail(8, criterion["detail"])


def _points_inside(text, err):
    tok = err.token
    lines = text.splitlines(keepends=True)
    offset = sum(len(l) for l in lines[: err.line - 1]) + err.column - 1
    if offset != tok.offset:
        return False
    if tok.kind == "EOF":
        return offset == len(text)
    return bool(tok.text) and text[offset : offset + len(tok.text)] == tok.text


@_mark(9)
def test_c09_dsl_round_trip(criterion):
    rng = random.Random(1234)
    unequal = errors = bad_positions = 0
    for _ in range(1000):
        sc = random_scenario(rng)
        first = parse(round_trip(sc))
        unequal += parse(round_trip(first)) != first or first != sc
        text = round_trip(sc)
        toks = [t for t in tokenize(text) if t.kind not in ("NEWLINE", "EOF")]
        victim = rng.choice(toks)
        replacement = rng.choice(["$", "}", "=", "42", "", "@", "zz"])
        mutated = text[: victim.offset] + replacement + text[victim.offset + len(victim.text) :]
        try:
            parse(mutated)
        except ScenarioError as err:
            errors += isinstance(err, ParseError)
            bad_positions += not _points_inside(mutated, err)
    criterion["detail"] = f"1000 scenarios: {unequal} round-trip mismatches; {errors} parse errors, {bad_positions} mislocated"
    if unequal or bad_positions:
        _fail(9, criterion["detail"])


@_mark(10)
def test_c10_cli_determinism(criterion, tmp_path):
    env = dict(os.environ, PYTHONPATH=str(REPO / "src"))
    paths = sorted((REPO / "scenarios").glob("*.qpd"))
    rng = random.Random(5)
    for i in range(5):
        p = tmp_path / f"gen{i}.qpd"
        p.write_text(round_trip(random_scenario(rng)))
        paths.append(p)
    differing = []
    for path in paths:
        for fmt in ("--json", "--table"):
            outs = [
                subprocess.run(
                    [sys.executable, "-m", "branchlab", "run", str(path), fmt],
                    env=env, capture_output=True, check=True,
                ).stdout
                for _ in range(2)
            ]
            if outs[0] != outs[1]:
                differing.append(f"{path.name}{fmt}")
    criterion["detail"] = f"{len(paths)} scenarios x 2 formats, {len(differing)} differing"
    if differing:
        _fail(10, criterion["detail"])
