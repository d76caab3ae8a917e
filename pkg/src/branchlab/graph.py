"""Branch graph of sequential measurements.

Vertices are ``(measurement_id, label)`` pairs; the pre-measurement
superposition of a root measurement is the vertex ``(measurement_id, "*")``.
Each measurement attaches one layer of children to a single vertex, so the
graph is a forest and every directed path is unique. Edge weights are Born
probabilities, read as P(child | parent realized).
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Any, NamedTuple, Optional

from .collapse import CollapseRecord
from .errors import CycleAttempt, UnknownVertex, Unreachable, VertexAlreadyExpanded
from .state import born_probability
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "Vertex",
    "Edge",
    "BranchGraph",
    "ROOT_LABEL",
    "extend",
    "compose",
    "distance",
    "transitive_possibility",
    "to_edge_list",
    "to_dot",
]

ROOT_LABEL = "*"


class Vertex(NamedTuple):
    measurement_id: str
    label: str

    def __str__(self) -> str:
        return f"{self.measurement_id}:{self.label}"

    @classmethod
    def parse(cls, text: str) -> "Vertex":
        mid, sep, label = text.partition(":")
        if not sep:
            raise ValueError(f"vertex id must look like '<measurement>:<label>', got {text!r}")
        return cls(mid, label)


class Edge(NamedTuple):
    source: Vertex
    target: Vertex
    weight: float


@dataclass(frozen=True)
class BranchGraph:
    vertices: tuple[Vertex, ...] = ()
    edges: tuple[Edge, ...] = ()
    roots: tuple[Vertex, ...] = ()
    realized: frozenset[Vertex] = frozenset()

    def __contains__(self, v: object) -> bool:
        return v in self._vertex_set

    @property
    def _vertex_set(self) -> frozenset[Vertex]:
        return frozenset(self.vertices)

    def parent_edge(self, v: Vertex) -> Optional[Edge]:
        for e in self.edges:
            if e.target == v:
                return e
        return None

    def children(self, v: Vertex) -> list[Edge]:
        return [e for e in self.edges if e.source == v]

    @property
    def measurement_ids(self) -> set[str]:
        return {v.measurement_id for v in self.vertices}


def extend(
    g: BranchGraph, record: CollapseRecord, attach_at: Optional[Vertex] = None
) -> BranchGraph:
    """Add the layer for ``record`` below ``attach_at``.

    With ``attach_at=None`` the measurement starts a new tree whose root is
    the superposition vertex ``(measurement_id, "*")``.
    """
    if record.source is None:
        raise ValueError("collapse record carries no source state")
    if attach_at is not None:
        attach_at = Vertex(*attach_at)
        if attach_at not in g:
            raise UnknownVertex(str(attach_at))
        if g.children(attach_at):
            raise VertexAlreadyExpanded(f"vertex {attach_at} already has a measurement attached")
    if record.measurement_id in g.measurement_ids:
        # Reusing an id could alias new vertices onto ancestors.
        raise CycleAttempt(f"measurement id {record.measurement_id!r} already present in graph")

    vertices = list(g.vertices)
    roots = list(g.roots)
    if attach_at is None:
        attach_at = Vertex(record.measurement_id, ROOT_LABEL)
        vertices.append(attach_at)
        roots.append(attach_at)
    edges = list(g.edges)
    realized = set(g.realized)
    for b in record.source.branches:
        v = Vertex(record.measurement_id, b.label)
        vertices.append(v)
        edges.append(Edge(attach_at, v, born_probability(b)))
        if b.label == record.realized_label:
            realized.add(v)
    return BranchGraph(tuple(vertices), tuple(edges), tuple(roots), frozenset(realized))


def compose(r: float, s: float) -> float:
    """Probability of following an edge of weight ``r`` then one of weight ``s``."""
    if not (0.0 <= r <= 1.0 and 0.0 <= s <= 1.0):
        raise ValueError(f"probabilities must lie in [0, 1], got {r!r}, {s!r}")
    return r * s


def _path(g: BranchGraph, start: Vertex, end: Vertex) -> list[Edge]:
    for v in (start, end):
        if v not in g:
            raise UnknownVertex(str(v))
    parents = {e.target: e for e in g.edges}
    path: list[Edge] = []
    v = end
    while v != start:
        e = parents.get(v)
        if e is None:
            raise Unreachable(f"no directed path from {start} to {end}")
        path.append(e)
        v = e.source
    path.reverse()
    return path


def distance(g: BranchGraph, start: Vertex, end: Vertex) -> float:
    """Composed probability along the unique directed path ``start -> end``.

    Raises :class:`Unreachable` when no such path exists; a path through a
    zero-weight edge yields 0.0 instead.
    """
    d = 1.0
    for e in _path(g, Vertex(*start), Vertex(*end)):
        d = compose(d, e.weight)
    return d


def transitive_possibility(
    g: BranchGraph, start: Vertex, end: Vertex, tol: Tolerances = DEFAULT_TOL
) -> bool:
    start, end = Vertex(*start), Vertex(*end)
    if start == end:
        if start not in g:
            raise UnknownVertex(str(start))
        return False
    try:
        path = _path(g, start, end)
    except Unreachable:
        return False
    return all(e.weight > tol.eps_zero for e in path)


def to_edge_list(g: BranchGraph) -> dict[str, Any]:
    return {
        "vertices": [
            {"id": str(v), "realized": v in g.realized, "root": v in g.roots} for v in g.vertices
        ],
        "edges": [{"from": str(e.source), "to": str(e.target), "weight": e.weight} for e in g.edges],
    }


def to_dot(g: BranchGraph) -> str:
    lines = ["digraph branches {"]
    for v in g.vertices:
        attrs = []
        if v in g.realized:
            attrs.append("style=filled")
        if v in g.roots:
            attrs.append("shape=box")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {json.dumps(str(v))}{suffix};")
    for e in g.edges:
        lines.append(f"  {json.dumps(str(e.source))} -> {json.dumps(str(e.target))} [label={json.dumps(repr(e.weight))}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
