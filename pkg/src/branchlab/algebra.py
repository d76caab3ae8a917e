"""Exhaustive checker for order/lattice/Boolean claims on a probability set.

The carrier is the set of distinct Born probabilities of one state, with
values closer than ``eps_grade`` merged into one element. Operations are
read as: meet = min, join (``+``) = max, complement = ``1 - p``, bounds 0
and 1. Every claim gets exactly one verdict; counterexamples can be
replayed with :func:`violates`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product
from typing import Any, Callable, Optional, Sequence

from .errors import CarrierTooLarge
from .state import WaveFunction
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "ProbabilitySet",
    "Verdict",
    "AlgebraReport",
    "CLAIMS",
    "verify",
    "well_order_check",
    "violates",
]

HOLDS, FAILS, VACUOUS = "holds", "fails", "vacuous"

CLAIMS = (
    "well_order",
    "has_infimum",
    "has_supremum",
    "pairwise_min_sup",
    "lattice",
    "orthocomplemented",
    "distributive",
    "boolean_algebra",
)


@dataclass(frozen=True)
class ProbabilitySet:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(sorted((float(v) for v in self.values), reverse=True))
        for v in vals:
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"probability out of range: {v!r}")
        if vals and abs(math.fsum(vals) - 1.0) > DEFAULT_TOL.eps_norm:
            raise ValueError(f"probabilities sum to {math.fsum(vals)!r}, not 1")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_wavefunction(cls, wf: WaveFunction) -> "ProbabilitySet":
        return cls(wf.probabilities())

    def carrier(self, eps_grade: float = DEFAULT_TOL.eps_grade) -> tuple[float, ...]:
        """Distinct grades, descending; each represented by its largest member."""
        out: list[float] = []
        last = None
        for v in self.values:
            if last is None or last - v > eps_grade:
                out.append(v)
            last = v
        return tuple(out)


@dataclass(frozen=True)
class Verdict:
    status: str
    counterexample: Any = None
    law: Optional[str] = None
    note: Optional[str] = None

    def __str__(self) -> str:
        if self.status == FAILS:
            return f"fails({_fmt(self.counterexample)})"
        return self.status


def _fmt(x: Any) -> str:
    if isinstance(x, (tuple, list)):
        return ", ".join(repr(v) for v in x)
    return repr(x)


@dataclass(frozen=True)
class AlgebraReport:
    well_order: Verdict
    has_infimum: Verdict
    has_supremum: Verdict
    pairwise_min_sup: Verdict
    lattice: Verdict
    orthocomplemented: Verdict
    distributive: Verdict
    boolean_algebra: Verdict
    carrier: tuple[float, ...] = ()

    def items(self):
        return [(name, getattr(self, name)) for name in CLAIMS]

    def to_list(self) -> list[dict[str, Any]]:
        out = []
        for name, v in self.items():
            entry: dict[str, Any] = {"claim": name, "verdict": v.status}
            if v.status == FAILS:
                cx = v.counterexample
                entry["counterexample"] = list(cx) if isinstance(cx, tuple) else cx
                entry["law"] = v.law
            if v.note:
                entry["note"] = v.note
            out.append(entry)
        return out


# -- laws -----------------------------------------------------------------------


class _Ops:
    def __init__(self, carrier: Sequence[float], eps: float):
        self.carrier = tuple(carrier)
        self.eps = eps

    def member(self, x: float) -> Optional[float]:
        for c in self.carrier:
            if abs(c - x) <= self.eps:
                return c
        return None

    def comp(self, p: float) -> Optional[float]:
        return self.member(1.0 - p)

    def le(self, a: float, b: float) -> bool:
        return a <= b


# Each law returns True when it holds for the given carrier elements.
def _law_total(o, a, b):
    return o.le(a, b) or o.le(b, a)


def _law_antisym(o, a, b):
    return not (o.le(a, b) and o.le(b, a)) or a == b


def _law_trans(o, a, b, c):
    return not (o.le(a, b) and o.le(b, c)) or o.le(a, c)


def _law_glb(o, a, b):
    m = min(a, b)
    return o.member(m) == m and m <= a and m <= b and all(c <= m for c in o.carrier if c <= a and c <= b)


def _law_lub(o, a, b):
    s = max(a, b)
    return o.member(s) == s and s >= a and s >= b and all(c >= s for c in o.carrier if c >= a and c >= b)


_LATTICE_LAWS: dict[str, tuple[int, Callable[..., bool]]] = {
    "meet_idempotent": (1, lambda o, a: min(a, a) == a),
    "join_idempotent": (1, lambda o, a: max(a, a) == a),
    "meet_commutative": (2, lambda o, a, b: min(a, b) == min(b, a)),
    "join_commutative": (2, lambda o, a, b: max(a, b) == max(b, a)),
    "meet_absorption": (2, lambda o, a, b: min(a, max(a, b)) == a),
    "join_absorption": (2, lambda o, a, b: max(a, min(a, b)) == a),
    "meet_associative": (3, lambda o, a, b, c: min(a, min(b, c)) == min(min(a, b), c)),
    "join_associative": (3, lambda o, a, b, c: max(a, max(b, c)) == max(max(a, b), c)),
}

_DISTRIBUTIVE_LAWS = {
    "meet_over_join": (3, lambda o, a, b, c: min(a, max(b, c)) == max(min(a, b), min(a, c))),
    "join_over_meet": (3, lambda o, a, b, c: max(a, min(b, c)) == min(max(a, b), max(a, c))),
}


def _law_comp_closed(o, p):
    return o.comp(p) is not None


def _law_comp_involution(o, p):
    q = o.comp(p)
    return q is not None and o.comp(q) == p


def _law_comp_antitone(o, a, b):
    ca, cb = o.comp(a), o.comp(b)
    return ca is not None and cb is not None and (not a <= b or cb <= ca)


_ORTHO_LAWS = {
    "complement_closure": (1, _law_comp_closed),
    "complement_involution": (1, _law_comp_involution),
    "complement_antitone": (2, _law_comp_antitone),
}


def _law_has_zero(o):
    return o.member(0.0) is not None


def _law_has_one(o):
    return o.member(1.0) is not None


def _law_join_closed(o, a, b):
    return o.member(max(a, b)) is not None


def _law_complement_join(o, p):
    q, one = o.comp(p), o.member(1.0)
    return q is not None and one is not None and max(p, q) == one


def _law_complement_meet(o, p):
    q, zero = o.comp(p), o.member(0.0)
    return q is not None and zero is not None and min(p, q) == zero


_BOOLEAN_LAWS = {
    "has_zero": (0, _law_has_zero),
    "has_one": (0, _law_has_one),
    "join_closure": (2, _law_join_closed),
    "complement_join_is_one": (1, _law_complement_join),
    "complement_meet_is_zero": (1, _law_complement_meet),
}

_ORDER_LAWS = {
    "totality": (2, _law_total),
    "antisymmetry": (2, _law_antisym),
    "transitivity": (3, _law_trans),
}

LAWS: dict[str, tuple[int, Callable[..., bool]]] = {
    **_ORDER_LAWS,
    "greatest_lower_bound": (2, _law_glb),
    "least_upper_bound": (2, _law_lub),
    **_LATTICE_LAWS,
    **_DISTRIBUTIVE_LAWS,
    **_ORTHO_LAWS,
    **_BOOLEAN_LAWS,
}


def _first_failure(o: _Ops, laws: dict) -> Optional[tuple[str, tuple]]:
    for name, (arity, fn) in laws.items():
        for args in product(o.carrier, repeat=arity):
            if not fn(o, *args):
                return name, args
    return None


def _verdict_from(o: _Ops, laws: dict) -> Verdict:
    hit = _first_failure(o, laws)
    if hit is None:
        return Verdict(HOLDS)
    name, args = hit
    cx = None if not args else args[0] if len(args) == 1 else args
    return Verdict(FAILS, counterexample=cx, law=name)


def violates(law: str, counterexample: Any, carrier: Sequence[float], eps_grade: float = DEFAULT_TOL.eps_grade) -> bool:
    """Replay a counterexample: True iff ``law`` fails on those values."""
    arity, fn = LAWS[law]
    args = () if counterexample is None else (
        tuple(counterexample) if isinstance(counterexample, (tuple, list)) else (counterexample,)
    )
    if len(args) != arity:
        raise ValueError(f"law {law!r} takes {arity} values, got {len(args)}")
    return not fn(_Ops(carrier, eps_grade), *args)


# -- checks -------------------------------------------------------------------------


def _ops(ps: ProbabilitySet, tol: Tolerances) -> _Ops:
    carrier = ps.carrier(tol.eps_grade)
    if len(carrier) > tol.algebra_cap:
        raise CarrierTooLarge(f"carrier has {len(carrier)} elements, cap is {tol.algebra_cap}")
    return _Ops(carrier, tol.eps_grade)


def well_order_check(ps: ProbabilitySet, tol: Tolerances = DEFAULT_TOL) -> Verdict:
    """A finite total order is a well-order; ties are reported as same-grade classes."""
    if len(ps.values) < 2:
        return Verdict(VACUOUS, note="fewer than two branches: nothing to order")
    o = _ops(ps, tol)
    v = _verdict_from(o, _ORDER_LAWS)
    if v.status == HOLDS and len(o.carrier) < len(ps.values):
        return Verdict(HOLDS, note="well-ordered up to same-grade classes (ties present)")
    return v


def verify(ps: ProbabilitySet, tol: Tolerances = DEFAULT_TOL) -> AlgebraReport:
    o = _ops(ps, tol)
    carrier = o.carrier
    if carrier:
        has_inf = Verdict(HOLDS, note=f"infimum {carrier[-1]!r}")
        has_sup = Verdict(HOLDS, note=f"supremum {carrier[0]!r}")
    else:
        has_inf = has_sup = Verdict(VACUOUS)
    pairwise = _verdict_from(o, {k: LAWS[k] for k in ("greatest_lower_bound", "least_upper_bound")})
    lattice = _verdict_from(o, _LATTICE_LAWS)
    ortho = _verdict_from(o, _ORTHO_LAWS)
    distributive = _verdict_from(o, _DISTRIBUTIVE_LAWS)

    prerequisites = [("lattice", lattice), ("orthocomplemented", ortho), ("distributive", distributive)]
    boolean = _verdict_from(o, _BOOLEAN_LAWS)
    for name, v in prerequisites:
        if v.status == FAILS:
            boolean = Verdict(FAILS, counterexample=v.counterexample, law=v.law, note=f"{name} fails")
            break
    return AlgebraReport(
        well_order=well_order_check(ps, tol),
        has_infimum=has_inf,
        has_supremum=has_sup,
        pairwise_min_sup=pairwise,
        lattice=lattice,
        orthocomplemented=ortho,
        distributive=distributive,
        boolean_algebra=boolean,
        carrier=carrier,
    )
