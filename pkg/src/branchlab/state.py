"""Wavefunctions over a finite set of labeled eigen-branches."""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Iterable, Iterator, Sequence

from .errors import UnknownLabel, ZeroState
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = [
    "Amplitude",
    "EigenBranch",
    "WaveFunction",
    "Violation",
    "DuplicateLabel",
    "NotNormalized",
    "EmptyState",
    "born_probability",
    "normalize",
    "validate",
]


@dataclass(frozen=True)
class Amplitude:
    re: float
    im: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.re) and math.isfinite(self.im)):
            raise ValueError(f"amplitude must be finite, got ({self.re!r}, {self.im!r})")

    @classmethod
    def from_complex(cls, z: complex) -> "Amplitude":
        z = complex(z)
        return cls(z.real, z.imag)

    def __complex__(self) -> complex:
        return complex(self.re, self.im)


@dataclass(frozen=True)
class EigenBranch:
    label: str
    amplitude: Amplitude
    eigenvalue: float = 0.0

    @property
    def probability(self) -> float:
        return born_probability(self)


@dataclass(frozen=True)
class WaveFunction:
    """A superposition ``sum_i c_i |label_i>`` in canonical branch order.

    Construction does not enforce normalization; use :func:`validate` to
    check invariants and :func:`normalize` to fix the norm.
    """

    observable_name: str
    branches: tuple[EigenBranch, ...]

    def __post_init__(self):
        object.__setattr__(self, "branches", tuple(self.branches))

    @classmethod
    def from_amplitudes(
        cls,
        observable_name: str,
        amplitudes: Iterable[tuple[str, complex] | tuple[str, complex, float]],
    ) -> "WaveFunction":
        """Build a state from ``(label, amplitude[, eigenvalue])`` tuples.

        Eigenvalues default to the branch index.
        """
        branches = []
        for i, item in enumerate(amplitudes):
            label, amp, *rest = item
            eigenvalue = float(rest[0]) if rest else float(i)
            branches.append(EigenBranch(label, Amplitude.from_complex(amp), eigenvalue))
        return cls(observable_name, tuple(branches))

    @classmethod
    def from_probabilities(cls, observable_name: str, probs: dict[str, float]) -> "WaveFunction":
        """Real non-negative amplitudes ``sqrt(p)``; no normalization applied."""
        return cls.from_amplitudes(observable_name, [(k, math.sqrt(p)) for k, p in probs.items()])

    def __iter__(self) -> Iterator[EigenBranch]:
        return iter(self.branches)

    def __len__(self) -> int:
        return len(self.branches)

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(b.label for b in self.branches)

    def branch(self, label: str) -> EigenBranch:
        for b in self.branches:
            if b.label == label:
                return b
        raise UnknownLabel(label)

    def __contains__(self, label: object) -> bool:
        return any(b.label == label for b in self.branches)

    def probability(self, label: str) -> float:
        return born_probability(self.branch(label))

    def probabilities(self) -> tuple[float, ...]:
        return tuple(born_probability(b) for b in self.branches)

    def total_probability(self) -> float:
        """Squared norm (unclamped sum of squared moduli)."""
        return math.fsum(b.amplitude.re**2 + b.amplitude.im**2 for b in self.branches)


def born_probability(branch: EigenBranch) -> float:
    a = branch.amplitude
    # Clamped: a normalized single amplitude can square to 1 + 1 ulp.
    return min(1.0, a.re * a.re + a.im * a.im)


# Violations reported by validate(); they are values, never raised.


@dataclass(frozen=True)
class Violation:
    def __str__(self) -> str:
        return repr(self)


@dataclass(frozen=True)
class DuplicateLabel(Violation):
    label: str


@dataclass(frozen=True)
class NotNormalized(Violation):
    total: float


@dataclass(frozen=True)
class EmptyState(Violation):
    pass


def validate(wf: WaveFunction, tol: Tolerances = DEFAULT_TOL) -> list[Violation]:
    violations: list[Violation] = []
    if not wf.branches:
        violations.append(EmptyState())
    seen: set[str] = set()
    for b in wf.branches:
        if b.label in seen:
            violations.append(DuplicateLabel(b.label))
        seen.add(b.label)
    if wf.branches:
        total = wf.total_probability()
        if abs(total - 1.0) > tol.eps_norm:
            violations.append(NotNormalized(total))
    return violations


def _rounding_slack(n: int) -> float:
    # Worst-case drift of the squared norm after one exact division pass.
    return 4.0 * (n + 2) * sys.float_info.epsilon


def normalize(wf: WaveFunction) -> WaveFunction:
    """Divide every amplitude by the norm.

    A state whose squared norm is already 1 up to floating-point rounding is
    returned unchanged, which makes the operation idempotent bit-for-bit.
    """
    total = wf.total_probability()
    if total <= 0.0:
        raise ZeroState(f"state {wf.observable_name!r} has no non-zero amplitude")
    if abs(total - 1.0) <= _rounding_slack(len(wf)):
        return wf
    norm = math.sqrt(total)
    return WaveFunction(
        wf.observable_name,
        tuple(
            EigenBranch(b.label, Amplitude(b.amplitude.re / norm, b.amplitude.im / norm), b.eigenvalue)
            for b in wf.branches
        ),
    )


def is_normalized(wf: WaveFunction, tol: Tolerances = DEFAULT_TOL) -> bool:
    return not validate(wf, tol)


def labels_of(states: Sequence[WaveFunction]) -> list[str]:
    """Union of labels over several states, in first-seen order."""
    out: dict[str, None] = {}
    for wf in states:
        for label in wf.labels:
            out.setdefault(label, None)
    return list(out)
