"""Possibility relations among the eigen-branches of a measured state.

A branch is *possible for* the realized branch when it was not realized and
has non-zero Born probability. Possible branches are graded by probability;
zero-probability branches are *absurd* relative to the realized one.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Iterable, Sequence

from .collapse import CollapseRecord
from .errors import EmptyOrdering, RealizedOperand, UnknownLabel, ZeroProbabilityOutcome
from .state import WaveFunction
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "PossibilityContext",
    "Grade",
    "GradeOrdering",
    "AxiomCheck",
    "AxiomReport",
    "is_possible_for",
    "is_possible_tout_court",
    "check_relation_axioms",
    "classify_deterministic",
    "classify_absurd",
    "more_possible",
    "grade_ordering",
    "bounds",
    "relation_pairs",
]


@dataclass(frozen=True)
class PossibilityContext:
    source: WaveFunction
    realized_label: str
    tol: Tolerances = DEFAULT_TOL

    def __post_init__(self):
        if self.source.probability(self.realized_label) <= self.tol.eps_zero:
            raise ZeroProbabilityOutcome(
                f"realized branch {self.realized_label!r} has probability 0"
            )

    @classmethod
    def from_record(cls, record: CollapseRecord, tol: Tolerances = DEFAULT_TOL) -> "PossibilityContext":
        if record.source is None:
            raise ValueError("collapse record carries no source state")
        return cls(record.source, record.realized_label, tol)


class Grade(enum.Enum):
    MORE_POSSIBLE = "MorePossible"
    SAME_GRADE = "SameGrade"
    LESS_POSSIBLE = "LessPossible"


def is_possible_for(ctx: PossibilityContext, label: str) -> bool:
    p = ctx.source.probability(label)
    return label != ctx.realized_label and p > ctx.tol.eps_zero


def is_possible_tout_court(universe: Sequence[PossibilityContext], label: str) -> bool:
    """True when at least one context witnesses ``label`` as possible."""
    if not universe:
        raise ValueError("universe of contexts must be non-empty")
    if not any(label in ctx.source for ctx in universe):
        raise UnknownLabel(label)
    return any(label in ctx.source and is_possible_for(ctx, label) for ctx in universe)


def classify_deterministic(ctx: PossibilityContext) -> bool:
    return ctx.source.probability(ctx.realized_label) >= 1.0 - ctx.tol.eps_zero


def classify_absurd(ctx: PossibilityContext, label: str) -> bool:
    return ctx.source.probability(label) <= ctx.tol.eps_zero


# -- grading ----------------------------------------------------------------


@dataclass(frozen=True)
class GradeOrdering:
    """Same-grade classes of possible labels, most possible first.

    Adjacent members of the descending probability sequence share a class
    when they differ by at most ``eps_grade``; a gap larger than that starts
    a new class. Within a class, labels keep canonical branch order.
    """

    context: PossibilityContext
    classes: tuple[tuple[str, ...], ...]
    probabilities: tuple[float, ...]  # largest member probability of each class

    def grade_index(self, label: str) -> int:
        for i, cls in enumerate(self.classes):
            if label in cls:
                return i
        if label == self.context.realized_label:
            raise RealizedOperand(f"{label!r} is the realized branch")
        if label in self.context.source:
            raise ValueError(f"{label!r} is absurd in this context and has no grade")
        raise UnknownLabel(label)

    def to_dict(self) -> dict[str, Any]:
        return {
            "observable_name": self.context.source.observable_name,
            "realized_label": self.context.realized_label,
            "classes": [
                {"labels": list(c), "probability": p} for c, p in zip(self.classes, self.probabilities)
            ],
        }


def grade_ordering(ctx: PossibilityContext) -> GradeOrdering:
    src = ctx.source
    possible = [(src.probability(lab), i, lab) for i, lab in enumerate(src.labels) if is_possible_for(ctx, lab)]
    possible.sort(key=lambda t: (-t[0], t[1]))
    classes: list[list[tuple[float, int, str]]] = []
    for item in possible:
        if classes and classes[-1][-1][0] - item[0] <= ctx.tol.eps_grade:
            classes[-1].append(item)
        else:
            classes.append([item])
    return GradeOrdering(
        context=ctx,
        classes=tuple(tuple(lab for _, _, lab in sorted(c, key=lambda t: t[1])) for c in classes),
        probabilities=tuple(c[0][0] for c in classes),
    )


def more_possible(ctx: PossibilityContext, a: str, b: str) -> Grade:
    """Compare two possible branches by squared modulus of their amplitudes."""
    for lab in (a, b):
        if lab not in ctx.source:
            raise UnknownLabel(lab)
        if lab == ctx.realized_label:
            raise RealizedOperand(f"{lab!r} is the realized branch")
    ordering = grade_ordering(ctx)
    ia, ib = _grade_or_absurd(ordering, a), _grade_or_absurd(ordering, b)
    if ia == ib:
        return Grade.SAME_GRADE
    return Grade.MORE_POSSIBLE if ia < ib else Grade.LESS_POSSIBLE


def _grade_or_absurd(ordering: GradeOrdering, label: str) -> int:
    # Absurd branches sit below every possible one, together in one grade.
    try:
        return ordering.grade_index(label)
    except ValueError:
        return len(ordering.classes)


def bounds(ordering: GradeOrdering) -> tuple[frozenset[str], frozenset[str]]:
    """Return ``(lower, upper)``: least and most possible classes."""
    if not ordering.classes:
        raise EmptyOrdering(
            f"no possible branch for realized {ordering.context.realized_label!r} (deterministic context)"
        )
    return frozenset(ordering.classes[-1]), frozenset(ordering.classes[0])


# -- relation axioms ----------------------------------------------------------


def relation_pairs(ctx_family: Iterable[PossibilityContext]) -> set[tuple[str, str]]:
    """Pairs ``(x, y)`` with x possible for the realized branch y in some context."""
    pairs = set()
    for ctx in ctx_family:
        for lab in ctx.source.labels:
            if is_possible_for(ctx, lab):
                pairs.add((lab, ctx.realized_label))
    return pairs


@dataclass(frozen=True)
class AxiomCheck:
    name: str
    historical_label: str
    holds: bool
    counterexamples: tuple[tuple[str, ...], ...]

    def to_dict(self) -> dict[str, Any]:
        return {
            "axiom": self.name,
            "label": self.historical_label,
            "holds": self.holds,
            "counterexamples": [list(c) for c in self.counterexamples],
        }


@dataclass(frozen=True)
class AxiomReport:
    irreflexivity: AxiomCheck
    asymmetry: AxiomCheck
    transitivity: AxiomCheck

    @property
    def checks(self) -> tuple[AxiomCheck, ...]:
        return (self.irreflexivity, self.asymmetry, self.transitivity)

    @property
    def holds(self) -> bool:
        return all(c.holds for c in self.checks)

    def to_dict(self) -> dict[str, Any]:
        return {"holds": self.holds, "checks": [c.to_dict() for c in self.checks]}


def check_relation_axioms(ctx_family: Sequence[PossibilityContext]) -> AxiomReport:
    """Check the axioms on the relation induced by a family of contexts.

    Counterexamples are reported, not raised: across several contexts of one
    state, two labels may each be possible for the other.
    """
    rel = relation_pairs(ctx_family)
    labels = sorted({x for pair in rel for x in pair})
    irr = tuple((x, x) for x in labels if (x, x) in rel)
    asym = tuple(sorted((x, y) for (x, y) in rel if x < y and (y, x) in rel))
    succ: dict[str, set[str]] = {}
    for x, y in rel:
        succ.setdefault(x, set()).add(y)
    trans = tuple(
        (x, y, z)
        for x in labels
        for y in sorted(succ.get(x, ()))
        for z in sorted(succ.get(y, ()))
        if z not in succ[x]
    )
    return AxiomReport(
        irreflexivity=AxiomCheck("irreflexivity", "Anti-Simmetry", not irr, irr),
        asymmetry=AxiomCheck("asymmetry", "Not Reflexivity", not asym, asym),
        transitivity=AxiomCheck("transitivity", "Transitivity", not trans, trans),
    )
