"""Numeric tolerance knobs.

All defaults can be overridden from ``.branchlab.toml`` or CLI flags.
"""
from __future__ import annotations

from dataclasses import dataclass

EPS_NORM = 1e-9
EPS_ZERO = 1e-12
EPS_GRADE = 1e-9
ALGEBRA_CAP = 64


@dataclass(frozen=True)
class Tolerances:
    eps_norm: float = EPS_NORM
    eps_zero: float = EPS_ZERO
    eps_grade: float = EPS_GRADE
    algebra_cap: int = ALGEBRA_CAP

    def __post_init__(self):
        for name in ("eps_norm", "eps_zero", "eps_grade"):
            value = getattr(self, name)
            if not (0.0 <= value < 1.0):
                raise ValueError(f"{name} must lie in [0, 1), got {value!r}")
        if self.algebra_cap < 1:
            raise ValueError("algebra_cap must be positive")


DEFAULT_TOL = Tolerances()
