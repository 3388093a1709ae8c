"""HTTP service exposing the toolkit operations, plus the shared handlers.

Every operation is a plain function from a pydantic request model to a
pydantic response model; the FastAPI routes and the CLI both dispatch through
these handlers, so in-process and remote use produce identical results.

Run with::

    uvicorn impulsecert.service:app
"""

from __future__ import annotations

from typing import List, Optional, Tuple

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import acceptance
from . import certify as ct
from . import gains as gn
from . import simulator as sim
from .config import (CertificateSpec, EnvelopesSpec, EstimateSpecModel,
                     FamilyMemberSpec, GainGridSpecModel, GammaSpec,
                     GronwallProblemSpec, InputSpec, IntegratorSpec, KFnSpec,
                     ScenarioSetSpec, SystemSpec, serialize_k)
from .errors import ImpulseCertError
from .gronwall import h_bound
from .signals import energy_norm, exceedance, sup_norm, truncate

TRAJECTORY_SCHEMA = "impulsecert/trajectory/1"
BOUND_SCHEMA = "impulsecert/bound/1"
MARGIN_SCHEMA = "impulsecert/margins/1"


# -- simulate -----------------------------------------------------------------


class SimulateRequest(BaseModel):
    system: SystemSpec
    gamma: GammaSpec
    x0: List[float]
    t0: float = 0.0
    horizon: float
    input: Optional[InputSpec] = None
    integrator: IntegratorSpec = Field(default_factory=IntegratorSpec)
    grid: int = 1001


class JumpRow(BaseModel):
    time: float
    left: List[float]
    post: List[float]
    u: List[float]


class SimulateResponse(BaseModel):
    schema_tag: str = TRAJECTORY_SCHEMA
    columns: List[str]
    rows: List[List[float]]
    jumps: List[JumpRow]
    blown_up: bool
    escape_time: Optional[float]


def handle_simulate(req: SimulateRequest) -> SimulateResponse:
    system = req.system.build()
    gamma = req.gamma.build(req.horizon)
    u = req.input.build() if req.input else None
    traj = sim.simulate(system, gamma, req.t0, np.asarray(req.x0), u,
                        req.horizon, req.integrator.build())
    base = np.linspace(req.t0, traj.t_end, req.grid)
    jump_ts = [r.time for r in traj.jump_records]
    ts = np.unique(np.concatenate(
        [base, np.asarray(jump_ts), np.nextafter(np.asarray(jump_ts), -np.inf)])) \
        if jump_ts else base
    ts = ts[(ts >= req.t0) & (ts <= traj.t_end)]
    xs = traj.eval_many(ts)
    jump_set = set(jump_ts)
    rows = [[float(t), *(float(v) for v in xs[i]),
             1.0 if float(t) in jump_set else 0.0]
            for i, t in enumerate(ts)]
    columns = ["t", *(f"x{i+1}" for i in range(system.n)), "jump_flag"]
    jumps = [JumpRow(time=r.time, left=[float(v) for v in r.left_limit],
                     post=[float(v) for v in r.post_value],
                     u=[float(v) for v in r.u_value])
             for r in traj.jump_records]
    return SimulateResponse(columns=columns, rows=rows, jumps=jumps,
                            blown_up=traj.blown_up, escape_time=traj.escape_time)


# -- norms --------------------------------------------------------------------


class NormsRequest(BaseModel):
    input: InputSpec
    gamma: GammaSpec
    interval: Tuple[float, float]
    rho1: Optional[KFnSpec] = None
    rho2: Optional[KFnSpec] = None
    truncate_level: Optional[float] = None
    exceedance_level: Optional[float] = None


class NormsResponse(BaseModel):
    sup: float
    energy: Optional[float]
    truncated_sup: Optional[float]
    exceedance_measure: Optional[float]
    exceedance_count: Optional[int]


def handle_norms(req: NormsRequest) -> NormsResponse:
    u = req.input.build()
    a, b = req.interval
    gamma = req.gamma.build(u.horizon)
    sup = sup_norm(u, a, b, gamma)
    energy = None
    if req.rho1 and req.rho2:
        energy = energy_norm(u, a, b, gamma, req.rho1.build(), req.rho2.build())
    tr = None
    if req.truncate_level is not None:
        tr = sup_norm(truncate(u, req.truncate_level), a, b, gamma)
    meas = cnt = None
    if req.exceedance_level is not None:
        meas, cnt = exceedance(u, req.exceedance_level, gamma)
    return NormsResponse(sup=sup, energy=energy, truncated_sup=tr,
                         exceedance_measure=meas, exceedance_count=cnt)


# -- bound --------------------------------------------------------------------


class BoundRequest(BaseModel):
    problem: GronwallProblemSpec
    ts: Optional[List[float]] = None
    count: int = 101


class BoundResponse(BaseModel):
    schema_tag: str = BOUND_SCHEMA
    rows: List[Tuple[float, float]]  # (t, h_k(t))


def handle_bound(req: BoundRequest) -> BoundResponse:
    prob = req.problem.build()
    ts = np.asarray(req.ts, dtype=float) if req.ts else \
        np.linspace(prob.t0, prob.T, req.count)
    vals = h_bound(prob, ts)
    return BoundResponse(rows=[(float(t), float(v)) for t, v in zip(ts, vals)])


# -- gains --------------------------------------------------------------------


class GainsRequest(BaseModel):
    certificate: CertificateSpec
    envelopes: EnvelopesSpec
    grid: GainGridSpecModel = Field(default_factory=GainGridSpecModel)


class GainsResponse(BaseModel):
    alpha: KFnSpec
    chi1: KFnSpec
    chi2: KFnSpec
    kappa: KFnSpec
    alpha_estimate: KFnSpec      # estimate-form gain
    offset: float                # estimate-form additive constant
    ell_table: List[Tuple[float, float]]
    report: str


def handle_gains(req: GainsRequest) -> GainsResponse:
    cert = req.certificate.build()
    env = req.envelopes.build()
    env.validate()
    res = gn.synthesize_ubebs_gain(env, cert, req.grid.build())
    alpha_u, c = gn.ubebs_estimate_form(res)
    report = "\n".join([
        "bounded-energy gain synthesis",
        f"  ell sampled on [1, {req.grid.r_max:g}] with {req.grid.n_r} points; "
        f"ell(r_max) = {res.ell_table[-1, 1]:.6g}",
        f"  kappa: K-infinity majorant of ell ({len(res.kappa.knots)} knots)",
        "  alpha(b) = kappa(3 rho(b)); chi_i >= max{phi, phi_tilde^2, alpha^2}",
        f"  estimate form: alpha_u(|x|) <= |x0| + E + c with c = {c:.6g}",
        f"  Psi(0) = {res.psi_zero:.6g}",
    ])
    return GainsResponse(
        alpha=serialize_k(res.alpha), chi1=serialize_k(res.chi1),
        chi2=serialize_k(res.chi2), kappa=serialize_k(res.kappa),
        alpha_estimate=serialize_k(alpha_u), offset=c,
        ell_table=[(float(a), float(b)) for a, b in res.ell_table],
        report=report)


# -- certify ------------------------------------------------------------------


class CertifyRequest(BaseModel):
    mode: str = "estimate"       # "estimate" | "pipeline"
    family: List[FamilyMemberSpec]
    horizon: float = 10.0
    scenarios: ScenarioSetSpec = Field(default_factory=ScenarioSetSpec)
    estimate: Optional[EstimateSpecModel] = None
    certificate: Optional[CertificateSpec] = None
    envelopes: Optional[EnvelopesSpec] = None
    budget: int = 12
    slack: float = 1e-7


class WitnessModel(BaseModel):
    family_index: int
    scenario_index: int
    t0: float
    x0_norm: float
    input_label: str
    t: float
    lhs: float
    rhs: float


class StageModel(BaseModel):
    name: str
    passed: bool
    worst_margin: float
    witness: Optional[WitnessModel]
    detail: str = ""


class CertifyResponse(BaseModel):
    passed: bool
    mode: str
    stages: List[StageModel]
    checks: int
    note: str
    scenario_margins: List[Tuple[int, int, str, float]] = Field(
        default_factory=list)


def _witness_model(w) -> Optional[WitnessModel]:
    if w is None:
        return None
    return WitnessModel(family_index=w.family_index,
                        scenario_index=w.scenario_index, t0=w.t0,
                        x0_norm=w.x0_norm, input_label=w.input_label,
                        t=w.t, lhs=w.lhs, rhs=w.rhs)


def handle_certify(req: CertifyRequest) -> CertifyResponse:
    family = [m.build(req.horizon) for m in req.family]
    if req.mode == "estimate":
        if req.estimate is None:
            raise ImpulseCertError("estimate mode needs an 'estimate' section")
        spec = req.estimate.build()
        first = family[0][0]
        gamma_hint = family[0][1]
        scenarios = ct.make_scenarios(
            req.scenarios.seed, req.scenarios.count, first.n, first.m,
            req.horizon, t0_range=req.scenarios.t0_range,
            x0_scale=req.scenarios.x0_scale, amplitude=req.scenarios.amplitude,
            kinds=tuple(req.scenarios.kinds), gamma_hint=gamma_hint)
        runs = ct.simulate_runs(family, scenarios, req.horizon,
                                zero_input=(spec.kind == "0-guas"))
        rep = ct.report_from_runs(runs, spec, req.slack)
        margins = ct.per_run_margins(runs, spec)
        stage = StageModel(name=f"{spec.kind}-{spec.mode}", passed=rep.passed,
                           worst_margin=rep.worst_margin,
                           witness=_witness_model(rep.witness))
        return CertifyResponse(passed=rep.passed, mode="estimate",
                               stages=[stage], checks=rep.checks, note=rep.note,
                               scenario_margins=margins)
    if req.mode == "pipeline":
        if req.certificate is None or req.envelopes is None:
            raise ImpulseCertError(
                "pipeline mode needs 'certificate' and 'envelopes' sections")
        cert = req.certificate.build()
        env = req.envelopes.build()
        env.validate()
        rep = ct.pipeline_iss_to_iiss(family, cert, env, req.budget,
                                      horizon=req.horizon,
                                      seed=req.scenarios.seed,
                                      slack=req.slack,
                                      t0_range=req.scenarios.t0_range,
                                      x0_scale=req.scenarios.x0_scale)
        stages = [StageModel(name=s.name, passed=s.report.passed,
                             worst_margin=s.report.worst_margin,
                             witness=_witness_model(s.report.witness),
                             detail=s.detail)
                  for s in rep.stages]
        checks = sum(s.report.checks for s in rep.stages)
        return CertifyResponse(passed=rep.passed, mode="pipeline",
                               stages=stages, checks=checks, note=rep.note)
    raise ImpulseCertError(f"unknown certify mode {req.mode!r}")


# -- probe --------------------------------------------------------------------


class ProbeRequest(BaseModel):
    family: List[FamilyMemberSpec]
    rho1: KFnSpec
    rho2: KFnSpec
    alpha: Optional[KFnSpec] = None
    eps_grid: List[float]
    r_grid: List[float]
    T_search: List[float]
    budget: int = 200
    horizon: float = 10.0
    seed: int = 0


class ProbeResponse(BaseModel):
    cells: List[dict]
    deltas: List[dict]
    attractivity: List[dict]
    sims_used: int
    budget: int
    note: str


def handle_probe(req: ProbeRequest) -> ProbeResponse:
    family = [m.build(req.horizon) for m in req.family]
    rep = ct.probe_eps_delta(
        family, req.rho1.build(), req.rho2.build(), req.eps_grid, req.r_grid,
        req.T_search, req.budget,
        alpha=req.alpha.build() if req.alpha else None,
        horizon=req.horizon, seed=req.seed)
    return ProbeResponse(
        cells=[vars(c) for c in rep.cells],
        deltas=[{"eps": d.eps, "delta": d.delta, "status": d.status,
                 "trace": list(d.trace)} for d in rep.deltas],
        attractivity=[{"r": a.r, "eps": a.eps, "T": a.T, "status": a.status,
                       "worst": a.worst} for a in rep.attractivity],
        sims_used=rep.sims_used, budget=rep.budget, note=rep.note)


# -- suite --------------------------------------------------------------------


class SuiteRequest(BaseModel):
    only: Optional[str] = None
    seed: int = 0


class SuiteRow(BaseModel):
    name: str
    passed: bool
    detail: str
    seconds: float


class SuiteResponse(BaseModel):
    rows: List[SuiteRow]
    all_passed: bool
    seconds: float


def handle_suite(req: SuiteRequest) -> SuiteResponse:
    res = acceptance.run_suite(only=req.only, seed=req.seed)
    return SuiteResponse(rows=[SuiteRow(name=r.name, passed=r.passed,
                                        detail=r.detail, seconds=r.seconds)
                               for r in res.rows],
                         all_passed=res.all_passed, seconds=res.seconds)


# -- app ----------------------------------------------------------------------


def create_app() -> FastAPI:
    app = FastAPI(title="impulsecert",
                  description="simulation and stability certification for "
                              "impulsive systems with inputs")

    def wrap(handler, req):
        try:
            return handler(req)
        except ImpulseCertError as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate_route(req: SimulateRequest):
        return wrap(handle_simulate, req)

    @app.post("/norms", response_model=NormsResponse)
    def norms_route(req: NormsRequest):
        return wrap(handle_norms, req)

    @app.post("/bound", response_model=BoundResponse)
    def bound_route(req: BoundRequest):
        return wrap(handle_bound, req)

    @app.post("/gains", response_model=GainsResponse)
    def gains_route(req: GainsRequest):
        return wrap(handle_gains, req)

    @app.post("/certify", response_model=CertifyResponse)
    def certify_route(req: CertifyRequest):
        return wrap(handle_certify, req)

    @app.post("/probe", response_model=ProbeResponse)
    def probe_route(req: ProbeRequest):
        return wrap(handle_probe, req)

    @app.post("/suite", response_model=SuiteResponse)
    def suite_route(req: SuiteRequest):
        return wrap(handle_suite, req)

    @app.get("/health")
    def health():
        return {"status": "ok"}

    return app


app = create_app()
