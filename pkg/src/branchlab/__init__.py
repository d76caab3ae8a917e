"""Measurement-collapse simulation with possibility relations, modal
classification, branch graphs and an order/lattice verifier."""
from .algebra import AlgebraReport, ProbabilitySet, Verdict, verify, well_order_check
from .collapse import CollapseRecord, collapse_forced, collapse_random
from .dsl import ParseError, ResolveError, Scenario, parse, round_trip
from .graph import BranchGraph, Vertex, compose, distance, extend, transitive_possibility
from .modal import ContextFamily, eval_formula, is_impossible, is_necessary
from .relations import (
    Grade,
    GradeOrdering,
    PossibilityContext,
    bounds,
    check_relation_axioms,
    classify_absurd,
    classify_deterministic,
    grade_ordering,
    is_possible_for,
    is_possible_tout_court,
    more_possible,
)
from .state import Amplitude, EigenBranch, WaveFunction, born_probability, normalize, validate
from .tolerances import DEFAULT_TOL, Tolerances

__version__ = "0.1.0"
