"""Pydantic request/response models for the HTTP service.

Reports keep rationals as "p/q" strings end to end; the loose dict fields
(certificates) follow the JSON layout produced by the pipeline so that the
CLI, the service and file output all emit the same document.
"""

from __future__ import annotations

from typing import Optional

from pydantic import BaseModel, Field


class DocumentRequest(BaseModel):
    document: str = Field(description="fks-1 input document text")


class BuildRequest(BaseModel):
    document: str = Field(description="fks-1 input document text")
    seed_metric: Optional[list[list[str]]] = Field(
        default=None,
        description="optional seed metric, entries as 'p/q' strings",
    )


class StructuralCheck(BaseModel):
    check: str
    passed: bool
    witness: Optional[str] = None


class ConditionResult(BaseModel):
    passed: Optional[bool] = None  # None: not evaluated
    witness: Optional[str] = None


class Rejection(BaseModel):
    condition: str
    reason: str


class Invariants(BaseModel):
    b1: int
    torsion: list[int]
    index: int
    fiber_rank: int
    base_rank: int
    deck_order: int
    is_torus: bool
    completely_solvable: bool


class ReportModel(BaseModel):
    format: str
    structural: list[StructuralCheck]
    conditions: dict[str, ConditionResult]
    classification: str
    rejection: Optional[Rejection] = None
    invariants: Optional[Invariants] = None
    certificates: Optional[dict] = None


class ClassifyResponse(BaseModel):
    verdict: str
    accepted: bool


class AbelianizeResponse(BaseModel):
    b1: int
    torsion: list[int]


class ExampleListing(BaseModel):
    examples: list[str]


class ExampleResponse(BaseModel):
    name: str
    document: str


class HealthResponse(BaseModel):
    status: str
    version: str
