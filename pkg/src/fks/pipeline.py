"""Shared command pipeline: documents in, reports out.

Both the HTTP service and the command-line client call these functions, so
the report structure and the classification verdicts are defined once here.
Condition failures are report content, never exceptions; only malformed
documents raise (ParseError / InvalidExtensionError).

Rejections name the first failing condition in the order
structural, (a), (d), (c), (b); conditions that cannot be evaluated
(e.g. (c) when the image is infinite) are reported with ``passed: null``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from . import catalog, cxstruct, extension, formats, manifold, matgroup
from .extension import ExtensionData
from .formats import InputDocument
from .manifold import Diagnostic, SolvmanifoldModel
from .matgroup import DEFAULT_CLOSURE_CAP

REPORT_FORMAT = "fks-report-1"

_CONDITION_ORDER = ("structural", "(a)", "(d)", "(c)", "(b)")


@dataclass
class Report:
    """Everything a run learned about one input document."""

    structural: list
    conditions: dict
    classification: str  # "accepted" | "rejected"
    rejection: Optional[dict]
    invariants: Optional[dict]
    certificates: Optional[dict]

    @property
    def accepted(self) -> bool:
        return self.classification == "accepted"

    def to_json_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "structural": self.structural,
            "conditions": self.conditions,
            "classification": self.classification,
            "rejection": self.rejection,
            "invariants": self.invariants,
            "certificates": self.certificates,
        }


def _structural_entries(report: extension.ValidationReport) -> list:
    return [
        {"check": c.name, "passed": c.passed, "witness": c.witness}
        for c in report.checks
        if c.name != "finite_image"
    ]


def _condition_entry(passed: Optional[bool], witness: Optional[str]) -> dict:
    return {"passed": passed, "witness": witness}


def evaluate_conditions(data: ExtensionData, cap: int = DEFAULT_CLOSURE_CAP):
    """Run the structural checks and all four conditions independently.

    Returns (structural_entries, conditions_dict, first_failure_or_None,
    validation_report).  Conditions that need a finite image are left
    unevaluated when (a) fails.
    """
    report = extension.validate(data, cap=cap)
    structural = _structural_entries(report)
    conditions = {}
    failures = []

    if not report.structural_ok:
        first = next(
            c for c in report.checks if not c.passed and c.name != "finite_image"
        )
        for name in ("a", "b", "c", "d"):
            conditions[name] = _condition_entry(None, "not evaluated: structural checks failed")
        return structural, conditions, ("structural", f"{first.name}: {first.witness}"), report

    a_check = next(c for c in report.checks if c.name == "finite_image")
    conditions["a"] = _condition_entry(a_check.passed, a_check.witness)
    if not a_check.passed:
        failures.append(("(a)", a_check.witness))

    torsion = extension.class_torsion(data)
    conditions["d"] = _condition_entry(
        torsion.torsion,
        None if torsion.torsion else "extension class has infinite order",
    )
    if not torsion.torsion:
        failures.append(("(d)", "extension class has infinite order"))

    if a_check.passed:
        decomposition = matgroup.isotypic(report.group)
        j0 = cxstruct.find_invariant_J0(data, decomposition=decomposition)
        conditions["c"] = _condition_entry(j0.passed, j0.obstruction)
        if not j0.passed:
            failures.append(("(c)", j0.obstruction))
        b_res = cxstruct.check_real_extension(data, decomposition=decomposition)
        conditions["b"] = _condition_entry(b_res.passed, b_res.obstruction)
        if not b_res.passed:
            failures.append(("(b)", b_res.obstruction))
    else:
        conditions["c"] = _condition_entry(None, "not evaluated: requires a finite image")
        conditions["b"] = _condition_entry(None, "not evaluated: requires a finite image")

    first = None
    if failures:
        failures.sort(key=lambda f: _CONDITION_ORDER.index(f[0]))
        first = failures[0]
    return structural, conditions, first, report


def run_validate(doc: InputDocument, cap: int = DEFAULT_CLOSURE_CAP) -> Report:
    """Condition checks only; no model assembly."""
    data = doc.to_extension_data()
    structural, conditions, first, _ = evaluate_conditions(data, cap=cap)
    if first is None:
        return Report(
            structural=structural,
            conditions=conditions,
            classification="accepted",
            rejection=None,
            invariants=None,
            certificates=None,
        )
    return Report(
        structural=structural,
        conditions=conditions,
        classification="rejected",
        rejection={"condition": first[0], "reason": first[1]},
        invariants=None,
        certificates=None,
    )


def run_build(
    doc: InputDocument,
    seed_metric=None,
    cap: int = DEFAULT_CLOSURE_CAP,
) -> tuple[Report, Optional[SolvmanifoldModel]]:
    """Full pipeline; the report carries invariants and certificates on
    success, and the model itself is returned for further interrogation."""
    data = doc.to_extension_data()
    structural, conditions, first, _ = evaluate_conditions(data, cap=cap)
    if first is not None:
        return (
            Report(
                structural=structural,
                conditions=conditions,
                classification="rejected",
                rejection={"condition": first[0], "reason": first[1]},
                invariants=None,
                certificates=None,
            ),
            None,
        )
    seed = seed_metric if seed_metric is not None else doc.seed
    result = manifold.build(
        data,
        seed_metric=seed,
        J0=doc.J0,
        J1=doc.J1,
        B=doc.B,
        cap=cap,
    )
    if isinstance(result, Diagnostic):
        # only reachable through invalid optional blocks (J0/J1/B/seed)
        return (
            Report(
                structural=structural,
                conditions=conditions,
                classification="rejected",
                rejection={"condition": result.condition, "reason": result.witness},
                invariants=None,
                certificates=None,
            ),
            None,
        )
    model = result
    fib = manifold.canonical_fibration(model)
    quotient = manifold.torus_quotient(model)
    invariants = {
        "b1": model.b1,
        "torsion": list(model.torsion_factors),
        "index": model.abelian.index,
        "fiber_rank": fib.fiber_rank,
        "base_rank": fib.base_rank,
        "deck_order": quotient.deck_order,
        "is_torus": manifold.is_torus(model),
        "completely_solvable": manifold.completely_solvable(model),
    }
    certificates = {
        "splitting_vectors": [formats.vector_json(u) for u in model.splitting],
        "J0": _structure_json(model.cxstructure.J0, model.cxstructure.J0_float),
        "J": _structure_json(model.cxstructure.J, model.cxstructure.J_float),
        "metric": _structure_json(model.metric.exact, model.metric.matrix_float),
    }
    report = Report(
        structural=structural,
        conditions=conditions,
        classification="accepted",
        rejection=None,
        invariants=invariants,
        certificates=certificates,
    )
    return report, model


def _structure_json(exact, float_view) -> dict:
    if exact is not None:
        return formats.sqrt_matrix_json(exact)
    return formats.float_matrix_json(float_view)


def classify_verdict(report: Report) -> str:
    """One-line classification used by the classify command."""
    if report.accepted:
        inv = report.invariants
        if inv is None:
            raise ValueError("classification needs a build report")
        if inv["is_torus"]:
            return "torus"
        return f"torus-quotient(order {inv['deck_order']})"
    rej = report.rejection
    return f"rejected({rej['condition']}: {rej['reason']})"


def run_classify(doc: InputDocument, cap: int = DEFAULT_CLOSURE_CAP) -> tuple[str, bool]:
    report, _ = run_build(doc, cap=cap)
    return classify_verdict(report), report.accepted


def run_abelianize(doc: InputDocument) -> tuple[int, list[int]]:
    data = doc.to_extension_data()
    return extension.abelianization(data)


def example_document(name: str) -> str:
    return formats.emit_document(catalog.get(name))


def example_names() -> list[str]:
    return catalog.names()
