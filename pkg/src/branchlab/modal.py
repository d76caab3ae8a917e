"""Context-quantified modality over a declared family of wavefunctions.

Each member of a :class:`ContextFamily` is one world. Every world sees every
other, so ``pos f`` holds when ``f`` holds in some member and ``nec f`` is
evaluated literally as ``not pos not f``. A formula's value is its truth at
the family's designated member (index ``actual``, default the first).

Atomic predicates, at a member ``w``:

* ``atom(l)`` -- ``l`` is realizable in ``w`` (probability above ``eps_zero``);
* ``det(l)``  -- ``l`` is deterministic in ``w`` (probability 1);
* ``abs(l)``  -- ``l`` is absurd in ``w`` (probability 0, or absent).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Union

from .errors import InvalidState, UnknownAtomLabel
from .relations import PossibilityContext, classify_absurd, classify_deterministic
from .state import WaveFunction, labels_of, validate
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "ContextFamily",
    "Atom",
    "Not",
    "Possibly",
    "Necessarily",
    "Det",
    "Abs",
    "Formula",
    "FormulaResult",
    "is_impossible",
    "is_necessary",
    "eval_formula",
    "eval_at",
    "evaluate",
    "formula_labels",
    "formula_depth",
]


@dataclass(frozen=True)
class ContextFamily:
    name: str
    wavefunctions: tuple[WaveFunction, ...]
    actual: int = 0

    def __post_init__(self):
        object.__setattr__(self, "wavefunctions", tuple(self.wavefunctions))
        if not self.wavefunctions:
            raise ValueError(f"family {self.name!r} is empty")
        if not 0 <= self.actual < len(self.wavefunctions):
            raise ValueError(f"designated member {self.actual} out of range")

    def check(self, tol: Tolerances = DEFAULT_TOL) -> None:
        for wf in self.wavefunctions:
            violations = validate(wf, tol)
            if violations:
                raise InvalidState(violations)

    @property
    def vocabulary(self) -> list[str]:
        return labels_of(self.wavefunctions)


# -- formula AST --------------------------------------------------------------


@dataclass(frozen=True)
class Atom:
    label: str

    def __str__(self) -> str:
        return f"atom({self.label})"


@dataclass(frozen=True)
class Det:
    label: str

    def __str__(self) -> str:
        return f"det({self.label})"


@dataclass(frozen=True)
class Abs:
    label: str

    def __str__(self) -> str:
        return f"abs({self.label})"


@dataclass(frozen=True)
class Not:
    body: "Formula"

    def __str__(self) -> str:
        return f"not {self.body}"


@dataclass(frozen=True)
class Possibly:
    body: "Formula"

    def __str__(self) -> str:
        return f"pos {self.body}"


@dataclass(frozen=True)
class Necessarily:
    body: "Formula"

    def __str__(self) -> str:
        return f"nec {self.body}"


Formula = Union[Atom, Det, Abs, Not, Possibly, Necessarily]
_LEAVES = (Atom, Det, Abs)


def formula_labels(f: Formula) -> list[str]:
    out = []
    while not isinstance(f, _LEAVES):
        f = f.body
    out.append(f.label)
    return out


def formula_depth(f: Formula) -> int:
    depth = 0
    while not isinstance(f, _LEAVES):
        f = f.body
        depth += 1
    return depth


# -- classification -------------------------------------------------------------


def _prob(wf: WaveFunction, label: str) -> float:
    # Absent labels count as probability 0.
    return wf.probability(label) if label in wf else 0.0


def is_impossible(family: ContextFamily, label: str, tol: Tolerances = DEFAULT_TOL) -> bool:
    return all(_prob(wf, label) <= tol.eps_zero for wf in family.wavefunctions)


def is_necessary(family: ContextFamily, label: str, tol: Tolerances = DEFAULT_TOL) -> bool:
    return all(_prob(wf, label) >= 1.0 - tol.eps_zero for wf in family.wavefunctions)


# -- evaluation ---------------------------------------------------------------


def _deterministic_at(wf: WaveFunction, label: str, tol: Tolerances) -> bool:
    if _prob(wf, label) <= tol.eps_zero:
        return False
    return classify_deterministic(PossibilityContext(wf, label, tol))


def _absurd_at(wf: WaveFunction, label: str, tol: Tolerances) -> bool:
    if label not in wf:
        return True
    realized = max(wf.labels, key=wf.probability)
    return classify_absurd(PossibilityContext(wf, realized, tol), label)


def _member_values(family: ContextFamily, f: Formula, tol: Tolerances) -> list[bool]:
    """Truth of ``f`` at every member, computed bottom-up without recursion."""
    chain = []
    while not isinstance(f, _LEAVES):
        chain.append(f)
        f = f.body
    members = family.wavefunctions
    if isinstance(f, Atom):
        values = [_prob(wf, f.label) > tol.eps_zero for wf in members]
    elif isinstance(f, Det):
        values = [_deterministic_at(wf, f.label, tol) for wf in members]
    else:
        values = [_absurd_at(wf, f.label, tol) for wf in members]
    for node in reversed(chain):
        if isinstance(node, Not):
            values = [not v for v in values]
        elif isinstance(node, Possibly):
            values = [any(values)] * len(values)
        elif isinstance(node, Necessarily):
            # nec f == not pos not f
            values = [not any(not v for v in values)] * len(values)
        else:
            raise TypeError(f"not a formula node: {node!r}")
    return values


def _check_vocabulary(family: ContextFamily, f: Formula) -> None:
    vocab = set(family.vocabulary)
    for label in formula_labels(f):
        if label not in vocab:
            raise UnknownAtomLabel(label)


def eval_at(family: ContextFamily, f: Formula, member: int, tol: Tolerances = DEFAULT_TOL) -> bool:
    _check_vocabulary(family, f)
    return _member_values(family, f, tol)[member]


def eval_formula(family: ContextFamily, f: Formula, tol: Tolerances = DEFAULT_TOL) -> bool:
    return eval_at(family, f, family.actual, tol)


@dataclass(frozen=True)
class FormulaResult:
    formula: str
    family: str
    value: bool
    witnesses: tuple[str, ...]  # members at which the formula holds

    def to_dict(self) -> dict[str, Any]:
        return {
            "formula": self.formula,
            "family": self.family,
            "value": self.value,
            "witnesses": list(self.witnesses),
        }


def evaluate(family: ContextFamily, f: Formula, tol: Tolerances = DEFAULT_TOL) -> FormulaResult:
    _check_vocabulary(family, f)
    values = _member_values(family, f, tol)
    names = [wf.observable_name for wf in family.wavefunctions]
    return FormulaResult(
        formula=str(f),
        family=family.name,
        value=values[family.actual],
        witnesses=tuple(n for n, v in zip(names, values) if v),
    )
