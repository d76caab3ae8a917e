"""Exception hierarchy shared by every branchlab module."""
from __future__ import annotations


class BranchLabError(Exception):
    """Base class for all library errors."""


class ZeroState(BranchLabError, ValueError):
    """Every amplitude of a wavefunction is zero; it cannot be normalized."""


class InvalidState(BranchLabError, ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid wavefunction: " + "; ".join(str(v) for v in self.violations))


class UnknownLabel(BranchLabError, KeyError):
    def __init__(self, label):
        self.label = label
        super().__init__(label)

    def __str__(self) -> str:
        return f"unknown label {self.label!r}"


class ZeroProbabilityOutcome(BranchLabError, ValueError):
    """Attempt to realize a branch whose Born probability is zero."""


class RealizedOperand(BranchLabError, ValueError):
    """The realized branch was passed where only possible branches are allowed."""


class EmptyOrdering(BranchLabError, ValueError):
    """The context has no possible branches, so there are no bounds."""


class UnknownVertex(BranchLabError, KeyError):
    def __init__(self, vertex):
        self.vertex = vertex
        super().__init__(vertex)

    def __str__(self) -> str:
        return f"unknown vertex {self.vertex}"


class CycleAttempt(BranchLabError, ValueError):
    pass


class VertexAlreadyExpanded(BranchLabError, ValueError):
    pass


class Unreachable(BranchLabError):
    """No directed path joins the two vertices (distinct from a 0-weight path)."""


class UnknownAtomLabel(BranchLabError, KeyError):
    def __init__(self, label):
        self.label = label
        super().__init__(label)

    def __str__(self) -> str:
        return f"atom label {self.label!r} not in the family vocabulary"


class CarrierTooLarge(BranchLabError, ValueError):
    pass
