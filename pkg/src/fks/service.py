"""HTTP service exposing the classification pipeline.

The core is pure and reentrant, so one app instance serves concurrent
clients without coordination.  Malformed documents come back as 422 with the
parse location; rejected data is a normal 200 report (rejection is a result,
not an error).

The closure cap honors the FKS_CLOSURE_CAP environment variable, like the
command-line client.
"""

from __future__ import annotations

import os
from fractions import Fraction

from fastapi import FastAPI, HTTPException

from . import __version__, pipeline
from .extension import InvalidExtensionError
from .formats import ParseError, parse_document
from .matgroup import DEFAULT_CLOSURE_CAP
from .schemas import (
    AbelianizeResponse,
    BuildRequest,
    ClassifyResponse,
    DocumentRequest,
    ExampleListing,
    ExampleResponse,
    HealthResponse,
    ReportModel,
)

app = FastAPI(
    title="fks",
    description="Decides whether lattice extension data defines a flat Kähler "
    "solvmanifold and builds the discrete model when it does.",
    version=__version__,
)


def closure_cap() -> int:
    raw = os.environ.get("FKS_CLOSURE_CAP")
    if raw is None:
        return DEFAULT_CLOSURE_CAP
    try:
        cap = int(raw)
        if cap < 1:
            raise ValueError
    except ValueError:
        raise HTTPException(
            status_code=500, detail=f"invalid FKS_CLOSURE_CAP value {raw!r}"
        )
    return cap


def _parse_or_422(text: str):
    try:
        return parse_document(text)
    except ParseError as e:
        raise HTTPException(
            status_code=422,
            detail={"line": e.line, "token": e.token, "message": e.message},
        )


def _seed_or_422(seed):
    if seed is None:
        return None
    try:
        return [[Fraction(x) for x in row] for row in seed]
    except (ValueError, ZeroDivisionError) as e:
        raise HTTPException(status_code=422, detail=f"invalid seed metric: {e}")


@app.get("/health", response_model=HealthResponse)
def health() -> HealthResponse:
    return HealthResponse(status="ok", version=__version__)


@app.get("/examples", response_model=ExampleListing)
def examples() -> ExampleListing:
    return ExampleListing(examples=pipeline.example_names())


@app.get("/examples/{name}", response_model=ExampleResponse)
def example(name: str) -> ExampleResponse:
    try:
        document = pipeline.example_document(name)
    except KeyError as e:
        raise HTTPException(status_code=404, detail=str(e.args[0]))
    return ExampleResponse(name=name.upper(), document=document)


@app.post("/validate", response_model=ReportModel)
def validate(request: DocumentRequest) -> ReportModel:
    doc = _parse_or_422(request.document)
    try:
        report = pipeline.run_validate(doc, cap=closure_cap())
    except InvalidExtensionError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return ReportModel(**report.to_json_dict())


@app.post("/build", response_model=ReportModel)
def build(request: BuildRequest) -> ReportModel:
    doc = _parse_or_422(request.document)
    seed = _seed_or_422(request.seed_metric)
    try:
        report, _ = pipeline.run_build(doc, seed_metric=seed, cap=closure_cap())
    except InvalidExtensionError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except ValueError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return ReportModel(**report.to_json_dict())


@app.post("/classify", response_model=ClassifyResponse)
def classify(request: DocumentRequest) -> ClassifyResponse:
    doc = _parse_or_422(request.document)
    try:
        verdict, accepted = pipeline.run_classify(doc, cap=closure_cap())
    except InvalidExtensionError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return ClassifyResponse(verdict=verdict, accepted=accepted)


@app.post("/abelianize", response_model=AbelianizeResponse)
def abelianize(request: DocumentRequest) -> AbelianizeResponse:
    doc = _parse_or_422(request.document)
    try:
        b1, torsion = pipeline.run_abelianize(doc)
    except InvalidExtensionError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return AbelianizeResponse(b1=b1, torsion=torsion)
