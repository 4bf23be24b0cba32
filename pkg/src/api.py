from contextlib import asynccontextmanager
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, HTTPException
from fastapi.middleware.cors import CORSMiddleware
from pydantic import BaseModel, ValidationError

from .config import get_settings
from .credal import detect_dilation, equals_hull, hull
from .errors import CredalError, SizeBoundExceededError, UnknownScenarioError
from .game import (certify_equilibrium, certify_posterior, check_ignore_optimal,
                   detect_time_inconsistency, ignore_rule_value, solve_aposteriori,
                   solve_apriori)
from .oracle import certify_solution
from .scenario_io import (BUILTIN_NAMES, Scenario, ScenarioDocument, build_report,
                          builtin, exact, scenario_document, scenario_from_document,
                          to_document)
from .updates import (c_conditioning, calibration_violations, range_decomposition,
                      sharp_partitions)


# Pydantic models for request/response
class ScenarioRequest(BaseModel):
    builtin: Optional[str] = None
    scenario: Optional[Dict[str, Any]] = None
    certify: bool = False


class AposterioriRequest(ScenarioRequest):
    observation: str


class CalibrationRequest(ScenarioRequest):
    partition: str


class SharpPartitionsRequest(ScenarioRequest):
    max_partition_size: Optional[int] = None
    compare_marginals: bool = False


@asynccontextmanager
async def lifespan(app: FastAPI):
    # Fail at startup on bad CREDAL_* settings rather than on the first request
    get_settings()
    yield


app = FastAPI(
    title="Credal Minimax API",
    description="Exact minimax decision rules, conditioning checks and calibration for credal sets",
    version="1.0.0",
    lifespan=lifespan
)

# Add CORS middleware
app.add_middleware(
    CORSMiddleware,
    allow_origins=["*"],
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


def _http_error(e: Exception) -> HTTPException:
    if isinstance(e, UnknownScenarioError):
        return HTTPException(status_code=404, detail=str(e))
    if isinstance(e, SizeBoundExceededError):
        return HTTPException(status_code=413, detail=str(e))
    return HTTPException(status_code=422, detail=str(e))


def _resolve(request: ScenarioRequest) -> Scenario:
    if request.builtin and request.scenario:
        raise HTTPException(status_code=422, detail="Give either 'builtin' or 'scenario', not both")
    try:
        if request.builtin:
            return builtin(request.builtin)
        if request.scenario is not None:
            return scenario_from_document(ScenarioDocument.model_validate(request.scenario))
    except (CredalError, ValidationError) as e:
        raise _http_error(e)
    raise HTTPException(status_code=422, detail="Request needs a 'builtin' name or a 'scenario' document")


@app.get("/health")
def health_check():
    """Health check endpoint."""
    settings = get_settings()
    return {
        "status": "healthy",
        "builtins": len(BUILTIN_NAMES),
        "max_partition_size": settings.max_partition_size,
    }


@app.get("/builtins")
def list_builtins() -> List[str]:
    """List the builtin scenarios."""
    return list(BUILTIN_NAMES)


@app.get("/builtins/{name}")
def get_builtin(name: str):
    """Return one builtin scenario document."""
    try:
        return scenario_document(builtin(name))
    except CredalError as e:
        raise _http_error(e)


@app.post("/solve/apriori")
def solve_apriori_endpoint(request: ScenarioRequest):
    """Minimax rule before the observation, with the bookie's mixture."""
    scenario = _resolve(request)
    try:
        solution = solve_apriori(scenario.credal, scenario.loss)
        certificate = oracle = None
        if request.certify:
            certificate = certify_equilibrium(scenario.credal, scenario.loss, solution)
            oracle = certify_solution(scenario.credal, scenario.loss, solution)
        return build_report(solution, scenario, operation="solve apriori",
                            certificate=certificate, oracle=oracle)
    except CredalError as e:
        raise _http_error(e)


@app.post("/solve/aposteriori")
def solve_aposteriori_endpoint(request: AposterioriRequest):
    """Minimax act after observing one value of X."""
    scenario = _resolve(request)
    try:
        solution = solve_aposteriori(scenario.credal, scenario.loss, request.observation)
        certificate = None
        if request.certify:
            certificate = certify_posterior(scenario.credal, scenario.loss, request.observation)
        return build_report(solution, scenario, operation="solve aposteriori",
                            certificate=certificate)
    except CredalError as e:
        raise _http_error(e)


@app.post("/check/hull")
def check_hull_endpoint(request: ScenarioRequest):
    scenario = _resolve(request)
    try:
        recombined = hull(scenario.credal)
        document = {
            "equals_hull": equals_hull(scenario.credal),
            "vertex_count": len(scenario.credal.vertices),
            "hull_vertex_count": len(recombined.vertices),
            "boundary_approximation": recombined.boundary_approximation,
        }
        return build_report(document, scenario, operation="check hull")
    except CredalError as e:
        raise _http_error(e)


@app.post("/check/ignore")
def check_ignore_endpoint(request: ScenarioRequest):
    scenario = _resolve(request)
    try:
        document = dict(to_document(check_ignore_optimal(scenario.credal), scenario.space))
        value, act = ignore_rule_value(scenario.credal, scenario.loss)
        document["ignore_rule_value"] = exact(value)
        document["ignore_rule_act"] = {a: exact(w) for a, w in zip(scenario.space.a_labels, act)}
        return build_report(document, scenario, operation="check ignore")
    except CredalError as e:
        raise _http_error(e)


@app.post("/check/calibration")
def check_calibration_endpoint(request: CalibrationRequest):
    scenario = _resolve(request)
    try:
        partition = scenario.partition(request.partition)
        rule = c_conditioning(scenario.credal, partition)
        violations = calibration_violations(scenario.credal, rule)
        document = {
            "partition": request.partition,
            "cells": [list(c) for c in partition.cells],
            "calibrated": not violations,
            "violations": violations,
        }
        document.update(to_document(range_decomposition(rule), scenario.space))
        return build_report(document, scenario, operation="check calibration")
    except CredalError as e:
        raise _http_error(e)


@app.post("/check/dilation")
def check_dilation_endpoint(request: ScenarioRequest):
    scenario = _resolve(request)
    try:
        return build_report(detect_dilation(scenario.credal), scenario, operation="check dilation")
    except CredalError as e:
        raise _http_error(e)


@app.post("/detect/inconsistency")
def detect_inconsistency_endpoint(request: ScenarioRequest):
    scenario = _resolve(request)
    try:
        report = detect_time_inconsistency(scenario.credal, scenario.loss)
        certificate = None
        if request.certify:
            certificate = certify_equilibrium(scenario.credal, scenario.loss, report.prior)
        return build_report(report, scenario, operation="detect inconsistency",
                            certificate=certificate)
    except CredalError as e:
        raise _http_error(e)


@app.post("/sharp-partitions")
def sharp_partitions_endpoint(request: SharpPartitionsRequest):
    scenario = _resolve(request)
    try:
        found = sharp_partitions(scenario.credal, request.max_partition_size,
                                 request.compare_marginals)
        document = {
            "count": len(found),
            "compare_marginals": request.compare_marginals,
            "partitions": [{"cells": str(p)} for p in found],
        }
        return build_report(document, scenario, operation="sharp-partitions")
    except CredalError as e:
        raise _http_error(e)


if __name__ == "__main__":
    import uvicorn
    uvicorn.run(app, host="0.0.0.0", port=8000)
