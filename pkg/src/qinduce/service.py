"""HTTP service wrapping the induction pipeline.

Endpoints mirror the CLI: POST /induce runs the full pipeline on a spec
object and returns the report; POST /verify runs certificate suites;
POST /oracle evaluates the classical induction oracle; GET /catalog lists
the presets.  All computations are pure, so concurrent requests are safe.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .algebra import AlgebraError
from .catalog import classical_induction_oracle, group_preset, rep_preset, subgroup_preset
from .specfile import SpecError, parse_spec, run_induce
from .suites import (
    CATALOG,
    QG_FIXTURES,
    build_from_spec,
    catalog_spec,
    run_qg_fixture_suite,
    run_suite,
)

app = FastAPI(
    title="qinduce",
    description="Induced corepresentations of finite quantum groups, "
                "with numerical certificates.",
)


class InduceRequest(BaseModel):
    spec: dict | None = Field(default=None, description="spec-file JSON object")
    preset: str | None = Field(default=None, description="catalog preset name")
    tol: float | None = None
    seed: int | None = None


class ResidualReport(BaseModel):
    isometry: float
    corep: float
    unitarity: float
    impl1: float
    impl2: float
    dense_span_deficit: int
    K0_deficit: int
    weight_change: float


class InduceResponse(BaseModel):
    dim_P: int
    dim_carrier: int
    gram_rank: int
    residuals: ResidualReport
    character: list
    spec_hash: str
    versions: dict
    wall_time_ms: float
    passed: bool


class VerifyRequest(BaseModel):
    spec: dict | None = None
    preset: str | None = None
    suite: str = "all"


class CheckResult(BaseModel):
    name: str
    value: float
    threshold: float
    passed: bool


class VerifyResponse(BaseModel):
    preset: str | None
    suite: str
    checks: list[CheckResult]
    passed: bool


class OracleRequest(BaseModel):
    group: str
    subgroup: str
    rep: str


class OracleResponse(BaseModel):
    group: str
    subgroup_order: int
    induced_dimension: int
    elements: list[str]
    character: list


class CatalogEntry(BaseModel):
    name: str
    kind: str
    detail: dict


def _spec_of(spec: dict | None, preset: str | None):
    if preset is not None:
        try:
            return catalog_spec(preset)
        except KeyError as e:
            raise HTTPException(status_code=404, detail=str(e))
    if spec is None:
        raise HTTPException(status_code=422, detail="provide 'spec' or 'preset'")
    try:
        return parse_spec(spec)
    except SpecError as e:
        raise HTTPException(status_code=422, detail=str(e))


@app.get("/health")
def health():
    return {"status": "ok"}


@app.get("/catalog", response_model=list[CatalogEntry])
def catalog():
    out = [CatalogEntry(name=name, kind="action", detail=data)
           for name, data in CATALOG.items()]
    out += [CatalogEntry(name=fx, kind="qg_fixture", detail={}) for fx in QG_FIXTURES]
    return out


@app.post("/induce", response_model=InduceResponse)
def induce(req: InduceRequest):
    spec = _spec_of(req.spec, req.preset)
    if req.tol is not None:
        spec.tol = req.tol
        spec.raw["tol"] = req.tol
    if req.seed is not None:
        spec.seed = req.seed
        spec.raw["seed"] = req.seed
    try:
        report = run_induce(spec)
    except (SpecError, AlgebraError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    return InduceResponse(**report)


@app.post("/verify", response_model=VerifyResponse)
def verify(req: VerifyRequest):
    spec = _spec_of(req.spec, req.preset)
    try:
        built = build_from_spec(spec)
        checks = run_suite(built, req.suite)
    except KeyError as e:
        raise HTTPException(status_code=422, detail=str(e))
    except (SpecError, AlgebraError) as e:
        raise HTTPException(status_code=422, detail=str(e))
    results = [CheckResult(name=c.name, value=float(c.value),
                           threshold=float(c.threshold), passed=c.passed)
               for c in checks]
    return VerifyResponse(preset=req.preset, suite=req.suite, checks=results,
                          passed=all(c.passed for c in results))


@app.post("/oracle", response_model=OracleResponse)
def oracle(req: OracleRequest):
    try:
        G = group_preset(req.group)
        sub = subgroup_preset(G, req.subgroup)
        mats = rep_preset(G, req.rep, sub)
        chi = classical_induction_oracle(G, sub, mats)
    except AlgebraError as e:
        raise HTTPException(status_code=422, detail=str(e))
    return OracleResponse(
        group=G.name,
        subgroup_order=len(sub),
        induced_dimension=(G.order // len(sub)) * mats[0].shape[0],
        elements=list(G.labels),
        character=[[float(z.real), float(z.imag)] for z in chi],
    )
