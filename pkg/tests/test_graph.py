import json
import math
import random
from fractions import Fraction
from itertools import product

import pytest
from hypothesis import given, settings, strategies as st

from branchlab.collapse import collapse_forced
from branchlab.errors import CycleAttempt, UnknownVertex, Unreachable, VertexAlreadyExpanded
from branchlab.graph import (
    BranchGraph,
    Vertex,
    compose,
    distance,
    extend,
    to_dot,
    to_edge_list,
    transitive_possibility,
)
from branchlab.state import WaveFunction

from gen import random_tree


def record(mid, probs, realized):
    return collapse_forced(WaveFunction.from_probabilities(mid.upper(), probs), realized, mid)


def chain():
    g = extend(BranchGraph(), record("m1", {"i": 0.5, "j": 0.5}, "i"))
    g = extend(g, record("m2", {"k": 0.4, "l": 0.6}, "k"), Vertex("m1", "j"))
    return g


def test_first_record_seeds_root():
    g = extend(BranchGraph(), record("m1", {"a": 0.5, "b": 0.3, "c": 0.2}, "a"))
    root = Vertex("m1", "*")
    assert g.roots == (root,)
    layer = [v for v in g.vertices if v != root]
    assert len(layer) == 3
    assert len(g.edges) == 3 and all(e.source == root for e in g.edges)
    assert g.realized == {Vertex("m1", "a")}


def test_chain_attaches_at_possible_vertex():
    g = chain()
    assert {e.source for e in g.edges if e.target.measurement_id == "m2"} == {Vertex("m1", "j")}


def test_extend_errors():
    g = chain()
    with pytest.raises(UnknownVertex):
        extend(g, record("m3", {"x": 1.0}, "x"), Vertex("m9", "x"))
    with pytest.raises(VertexAlreadyExpanded):
        extend(g, record("m3", {"x": 1.0}, "x"), Vertex("m1", "j"))
    with pytest.raises(CycleAttempt):
        extend(g, record("m1", {"x": 1.0}, "x"), Vertex("m2", "k"))


@pytest.mark.parametrize("r, s, expected", [(0.5, 0.4, 0.2), (1.0, 0.37, 0.37)])
def test_compose(r, s, expected):
    assert compose(r, s) == pytest.approx(expected, abs=4 * math.ulp(expected))


def test_compose_matches_tree_enumeration():
    first = {"a": Fraction(1, 3), "b": Fraction(1, 3), "c": Fraction(1, 3)}
    second = {"x": Fraction(1, 2), "y": Fraction(1, 2)}
    outcomes = {(u, v): p * q for (u, p), (v, q) in product(first.items(), second.items())}
    assert sum(outcomes.values()) == 1
    exact = outcomes["a", "x"]
    assert exact == Fraction(1, 6)
    assert abs(compose(1 / 3, 1 / 2) - float(exact)) <= 4 * math.ulp(1 / 6)


def test_compose_range():
    with pytest.raises(ValueError):
        compose(1.2, 0.5)


def test_distance_examples():
    g = extend(BranchGraph(), record("m1", {"a": 0.3, "b": 0.7}, "b"))
    assert distance(g, Vertex("m1", "*"), Vertex("m1", "a")) == pytest.approx(0.3, abs=1e-15)
    g = chain()
    d = distance(g, Vertex("m1", "*"), Vertex("m2", "k"))
    assert abs(d - 0.2) <= 4 * math.ulp(0.2)
    with pytest.raises(Unreachable):
        distance(g, Vertex("m1", "i"), Vertex("m2", "k"))
    with pytest.raises(UnknownVertex):
        distance(g, Vertex("m1", "*"), Vertex("zz", "k"))


def test_zero_weight_path_is_not_unreachable():
    g = extend(BranchGraph(), record("m1", {"a": 1.0, "z": 0.0}, "a"))
    g = extend(g, record("m2", {"k": 1.0}, "k"), Vertex("m1", "z"))
    assert distance(g, Vertex("m1", "*"), Vertex("m2", "k")) == 0.0
    assert not transitive_possibility(g, Vertex("m1", "*"), Vertex("m2", "k"))


def test_transitive_possibility_examples():
    g = chain()
    assert transitive_possibility(g, Vertex("m1", "*"), Vertex("m2", "k"))
    assert not transitive_possibility(g, Vertex("m1", "j"), Vertex("m1", "j"))
    assert not transitive_possibility(g, Vertex("m2", "k"), Vertex("m1", "*"))
    with pytest.raises(UnknownVertex):
        transitive_possibility(g, Vertex("q", "q"), Vertex("q", "q"))


def test_exports():
    g = chain()
    data = to_edge_list(g)
    edge = data["edges"][0]
    assert (edge["from"], edge["to"]) == ("m1:*", "m1:i")
    assert edge["weight"] == pytest.approx(0.5)
    json.dumps(data)
    dot = to_dot(g)
    assert dot.startswith("digraph branches {") and '"m1:j" -> "m2:k"' in dot
    assert Vertex.parse("m2:k") == Vertex("m2", "k")


def brute_closure(g):
    verts = list(g.vertices)
    reach = {(e.source, e.target) for e in g.edges if e.weight > 1e-12}
    for k in verts:
        for i in verts:
            for j in verts:
                if (i, k) in reach and (k, j) in reach:
                    reach.add((i, j))
    return reach


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_transitive_possibility_is_closure(seed):
    g = random_tree(random.Random(seed), 50)
    assert len(g.vertices) <= 50
    reach = brute_closure(g)
    for a, b in product(g.vertices, repeat=2):
        assert transitive_possibility(g, a, b) == ((a, b) in reach)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_distance_composition_and_conservation(seed):
    g = random_tree(random.Random(seed), 50)
    parents = {e.target: e for e in g.edges}
    for root in g.roots:
        leaves = [v for v in g.vertices if not g.children(v) and _root_of(v, parents) == root]
        total = sum(distance(g, root, leaf) for leaf in leaves)
        assert total <= 1 + len(g.vertices) * 1e-9
    for v in g.vertices:
        path = []
        u = v
        while u in parents:
            path.append(parents[u])
            u = parents[u].source
        if len(path) < 2:
            continue
        top = path[-1].source
        mid = path[len(path) // 2].source
        whole = distance(g, top, v)
        assert whole <= min(e.weight for e in path) + 1e-15
        split = compose(distance(g, top, mid), distance(g, mid, v))
        assert abs(whole - split) <= 4 * math.ulp(max(whole, 2**-1022)) + 1e-300
        exact = math.prod(Fraction(e.weight) for e in path)
        assert abs(Fraction(whole) - exact) <= len(path) * Fraction(math.ulp(max(whole, 2**-1022)))


def _root_of(v, parents):
    while v in parents:
        v = parents[v].source
    return v
