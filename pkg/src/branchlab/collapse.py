"""Measurement collapse: Born-rule sampling or a forced outcome."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .errors import InvalidState, ZeroProbabilityOutcome
from .rng import Xoshiro256StarStar
from .state import WaveFunction, born_probability, validate
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = ["CollapseRecord", "collapse_random", "collapse_forced", "sample_index"]


@dataclass(frozen=True)
class CollapseRecord:
    measurement_id: str
    observable_name: str
    realized_label: str
    realized_eigenvalue: float
    realized_probability: float
    possible_labels: tuple[str, ...]
    seed_used: Optional[int] = None
    absurd_labels: tuple[str, ...] = ()
    # The measured state; kept so a branch graph can weight every edge.
    source: Optional[WaveFunction] = field(default=None, repr=False)

    def to_dict(self) -> dict[str, Any]:
        return {
            "measurement_id": self.measurement_id,
            "observable_name": self.observable_name,
            "realized_label": self.realized_label,
            "realized_eigenvalue": self.realized_eigenvalue,
            "realized_probability": self.realized_probability,
            "possible_labels": list(self.possible_labels),
            "seed_used": self.seed_used,
            "absurd_labels": list(self.absurd_labels),
        }


def _check(wf: WaveFunction, tol: Tolerances) -> None:
    violations = validate(wf, tol)
    if violations:
        raise InvalidState(violations)


def _record(wf, index, measurement_id, seed, tol) -> CollapseRecord:
    realized = wf.branches[index]
    possible, absurd = [], []
    for i, b in enumerate(wf.branches):
        if i == index:
            continue
        (possible if born_probability(b) > tol.eps_zero else absurd).append(b.label)
    return CollapseRecord(
        measurement_id=measurement_id,
        observable_name=wf.observable_name,
        realized_label=realized.label,
        realized_eigenvalue=realized.eigenvalue,
        realized_probability=born_probability(realized),
        possible_labels=tuple(possible),
        seed_used=seed,
        absurd_labels=tuple(absurd),
        source=wf,
    )


def sample_index(probs, u: float, eps_zero: float) -> int:
    """Inverse-CDF lookup of ``u`` in [0, 1) over ``probs`` in canonical order.

    Branches at or below ``eps_zero`` get no mass. The CDF is scaled by the
    total positive mass so rounding in the sum can never overshoot.
    """
    weights = [p if p > eps_zero else 0.0 for p in probs]
    total = sum(weights)
    if total <= 0.0:
        raise ZeroProbabilityOutcome("no branch has positive probability")
    target = u * total
    acc = 0.0
    last = -1
    for i, w in enumerate(weights):
        if w == 0.0:
            continue
        acc += w
        last = i
        if target < acc:
            return i
    return last


def collapse_random(
    wf: WaveFunction, seed: int, measurement_id: str = "m0", tol: Tolerances = DEFAULT_TOL
) -> CollapseRecord:
    _check(wf, tol)
    u = Xoshiro256StarStar(seed).random()
    index = sample_index(wf.probabilities(), u, tol.eps_zero)
    return _record(wf, index, measurement_id, seed, tol)


def collapse_forced(
    wf: WaveFunction, label: str, measurement_id: str = "m0", tol: Tolerances = DEFAULT_TOL
) -> CollapseRecord:
    _check(wf, tol)
    branch = wf.branch(label)
    if born_probability(branch) <= tol.eps_zero:
        raise ZeroProbabilityOutcome(f"branch {label!r} has probability 0 and cannot be realized")
    index = wf.labels.index(label)
    return _record(wf, index, measurement_id, None, tol)
