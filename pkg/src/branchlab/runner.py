"""Execute a parsed scenario and assemble the run report."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional

from .algebra import ProbabilitySet, verify
from .collapse import CollapseRecord, collapse_forced, collapse_random
from .dsl import AxiomsQuery, FormulaQuery, GradeQuery, Scenario, VerifyQuery, query_members
from .graph import BranchGraph, Vertex, extend
from .modal import ContextFamily, evaluate
from .relations import PossibilityContext, check_relation_axioms, grade_ordering
from .tolerances import DEFAULT_TOL, Tolerances

__all__ = ["RUN_SCHEMA", "VERIFY_SCHEMA", "Execution", "execute", "run_report", "verify_report", "grade_report"]

RUN_SCHEMA = "branchlab.run/1"
VERIFY_SCHEMA = "branchlab.verify/1"
GRADE_SCHEMA = "branchlab.grade/1"


@dataclass
class Execution:
    records: list[CollapseRecord] = field(default_factory=list)
    contexts: list[PossibilityContext] = field(default_factory=list)
    graph: BranchGraph = field(default_factory=BranchGraph)

    def context(self, measurement_id: str) -> PossibilityContext:
        for rec, ctx in zip(self.records, self.contexts):
            if rec.measurement_id == measurement_id:
                return ctx
        raise KeyError(measurement_id)


def execute(
    scenario: Scenario,
    tol: Tolerances = DEFAULT_TOL,
    seed_override: Optional[int] = None,
    until: Optional[str] = None,
) -> Execution:
    """Run the measurement script in order; stop after step ``until`` if given."""
    ex = Execution()
    for step in scenario.script:
        wf = scenario.state(step.state)
        if step.force is not None:
            rec = collapse_forced(wf, step.force, step.id, tol)
        else:
            seed = step.seed if seed_override is None else seed_override
            rec = collapse_random(wf, seed, step.id, tol)
        attach = Vertex(*step.attach) if step.attach is not None else None
        ex.graph = extend(ex.graph, rec, attach)
        ex.records.append(rec)
        ex.contexts.append(PossibilityContext.from_record(rec, tol))
        if step.id == until:
            break
    return ex


def _family(scenario: Scenario, q: FormulaQuery) -> ContextFamily:
    members = query_members(scenario, q)
    name = q.family or (scenario.families[0].name if scenario.families else "*")
    return ContextFamily(name, tuple(scenario.state(m) for m in members))


def verify_report(scenario: Scenario, state_name: str, tol: Tolerances = DEFAULT_TOL) -> dict[str, Any]:
    wf = scenario.state(state_name)
    report = verify(ProbabilitySet.from_wavefunction(wf), tol)
    return {
        "state": state_name,
        "carrier": list(report.carrier),
        "claims": report.to_list(),
    }


def grade_report(ex: Execution, measurement_id: str) -> dict[str, Any]:
    return {"measurement_id": measurement_id, **grade_ordering(ex.context(measurement_id)).to_dict()}


def run_report(
    scenario: Scenario,
    name: str,
    tol: Tolerances = DEFAULT_TOL,
    seed_override: Optional[int] = None,
) -> tuple[dict[str, Any], Execution]:
    ex = execute(scenario, tol, seed_override)
    steps = []
    for step, rec, ctx in zip(scenario.script, ex.records, ex.contexts):
        entry = rec.to_dict()
        entry["attach"] = f"{step.attach[0]}:{step.attach[1]}" if step.attach else None
        entry["grades"] = grade_ordering(ctx).to_dict()["classes"]
        steps.append(entry)

    grades, queries, algebra = [], [], []
    axioms = None
    for q in scenario.queries:
        if isinstance(q, FormulaQuery):
            res = evaluate(_family(scenario, q), q.formula, tol)
            queries.append({"name": q.name, **res.to_dict()})
        elif isinstance(q, GradeQuery):
            grades.append(grade_report(ex, q.measurement))
        elif isinstance(q, VerifyQuery):
            algebra.append(verify_report(scenario, q.state, tol))
        elif isinstance(q, AxiomsQuery):
            axioms = check_relation_axioms(ex.contexts).to_dict()

    report = {
        "schema": RUN_SCHEMA,
        "scenario": name,
        "steps": steps,
        "grades": grades,
        "queries": queries,
        "axioms": axioms,
        "algebra": algebra,
        "status": 0,
    }
    return report, ex
