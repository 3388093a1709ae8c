"""Estimate checking, epsilon-delta probes, and the gain-synthesis pipeline.

Every universal quantifier (over family members, initial times, initial
states, inputs, and time) is sampled, never exhausted: reports carry the
sample counts and the worst witness, so a failure is actionable and a pass
means "no counterexample found", nothing stronger.  Time grids always
include each impulse time and its one-ulp left neighbour so both sides of
every jump are probed.  Blow-up inside the horizon does not auto-fail an
estimate (the estimates quantify over the maximal interval of existence);
it is reported separately, and a blow-up under an otherwise passing
estimate is flagged as an inconsistency.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from . import compfun as cf
from .compfun import (ComparisonFunction, KLFunction, compose_k, eval_k,
                      eval_kl, inverse_of, linear)
from .errors import ConfigError
from .gains import (AssumptionEnvelopes, GainGridSpec, IssCertificateData,
                    UbebsGainResult, kinf_majorant, psi_from_iiss, rho_tilde,
                    synthesize_ubebs_gain, ubebs_estimate_form)
from .hybrid_time import ImpulseSequence, hybrid_elapsed
from .signals import (InputSignal, cumulative_energy_fast, cumulative_sup,
                      scale_signal, zero_signal)
from .simulator import IntegratorOptions, SystemModel, Trajectory, simulate

ESTIMATE_KINDS = ("0-guas", "iss", "iiss", "ubebs")
DEFAULT_SLACK = 1e-7
DEFAULT_GRID_POINTS = 161


# -- specifications and reports -------------------------------------------------


@dataclass(frozen=True)
class EstimateSpec:
    """Which estimate to check and with which comparison functions.

    ``full_window`` switches the input-norm windows from ``(t0, t]`` to the
    whole simulated window; by causality the two variants certify the same
    property, and windowed norms are the default.
    """

    kind: str                       # "0-guas" | "iss" | "iiss" | "ubebs"
    mode: str = "strong"            # "strong" (hybrid elapsed time) | "weak" (t - t0)
    beta: Optional[object] = None   # KLFunction or any object with .eval(r, t)
    rho: Optional[ComparisonFunction] = None
    alpha: Optional[ComparisonFunction] = None
    rho1: Optional[ComparisonFunction] = None
    rho2: Optional[ComparisonFunction] = None
    offset: float = 0.0
    full_window: bool = False

    def validate(self, check_classes: bool = False) -> None:
        if self.kind not in ESTIMATE_KINDS:
            raise ConfigError(f"unknown estimate kind {self.kind!r}")
        if self.mode not in ("strong", "weak"):
            raise ConfigError(f"unknown estimate mode {self.mode!r}")
        need = {"0-guas": ("beta",),
                "iss": ("beta", "rho"),
                "iiss": ("beta", "alpha", "rho1", "rho2"),
                "ubebs": ("alpha", "rho1", "rho2")}[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ConfigError(f"estimate kind {self.kind!r} needs {name!r}")
        if self.offset < 0:
            raise ConfigError("offset must be nonnegative")
        if self.kind != "ubebs" and self.offset != 0.0:
            raise ConfigError("only bounded-energy estimates take an offset")
        if check_classes:
            for name in need:
                fn = getattr(self, name)
                if isinstance(fn, (ComparisonFunction, KLFunction)):
                    cf.require_class(fn, name, domain=100.0)


@dataclass(frozen=True)
class Scenario:
    t0: float
    x0: np.ndarray
    u: Optional[InputSignal]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)))


@dataclass(frozen=True)
class Witness:
    family_index: int
    scenario_index: int
    t0: float
    x0_norm: float
    input_label: str
    t: float
    lhs: float
    rhs: float


@dataclass(frozen=True)
class CertificateReport:
    passed: bool
    worst_margin: float
    witness: Optional[Witness]
    checks: int
    slack: float
    escapes: tuple = ()
    escape_inconsistency: bool = False
    note: str = ("sampled check: a pass means no counterexample was found at the "
                 "sampled points; the computed solution only is certified")

    def __bool__(self):
        return self.passed


# -- scenario generation -----------------------------------------------------------


def make_scenarios(seed: int, n: int, state_dim: int, input_dim: int,
                   horizon: float, t0_range: tuple = (0.0, 3.0),
                   x0_scale: float = 10.0, amplitude: float = 2.0,
                   kinds: Sequence[str] = ("zero", "step", "sine", "pulse",
                                           "impulse-points"),
                   gamma_hint: Optional[ImpulseSequence] = None) -> list:
    """Deterministic scenario batch: initial times, states, and input shapes."""
    rng = np.random.default_rng(seed)
    out = []
    point_times = list(gamma_hint.times) if gamma_hint is not None else \
        [float(k) for k in range(1, int(horizon))]
    for i in range(n):
        t0 = float(rng.uniform(*t0_range))
        direction = rng.normal(size=state_dim)
        direction /= max(np.linalg.norm(direction), 1e-30)
        x0 = direction * rng.uniform(0.0, x0_scale)
        kind = kinds[i % len(kinds)]
        u = _make_input(rng, kind, input_dim, horizon, amplitude, point_times)
        out.append(Scenario(t0=t0, x0=x0, u=u, label=f"{kind}-{i}"))
    return out


def _make_input(rng, kind: str, m: int, horizon: float, amp: float,
                point_times: Sequence[float]) -> InputSignal:
    from .signals import Segment

    direction = rng.normal(size=m)
    direction /= max(np.linalg.norm(direction), 1e-30)
    a = float(rng.uniform(0.2, amp))
    vec = a * direction
    if kind == "zero":
        return zero_signal(m, horizon)
    if kind == "step":
        ts = float(rng.uniform(0.0, horizon / 2))
        z = np.zeros(m)
        segs = []
        if ts > 0:
            segs.append(Segment(0.0, ts, lambda t, z=z: _tile(z, t)))
        segs.append(Segment(ts if ts > 0 else 0.0, horizon, lambda t, v=vec: _tile(v, t)))
        return InputSignal(tuple(segs), m)
    if kind == "sine":
        w = float(rng.uniform(0.5, 3.0))
        ph = float(rng.uniform(0.0, 2 * np.pi))
        fn = lambda t, v=vec, w=w, ph=ph: np.outer(v, np.sin(w * np.asarray(t) + ph)) \
            if np.ndim(t) else v * np.sin(w * t + ph)
        return InputSignal((Segment(0.0, horizon, fn),), m)
    if kind == "pulse":
        ts = float(rng.uniform(0.0, horizon * 0.6))
        w = float(rng.uniform(0.2, horizon * 0.3))
        te = min(ts + w, horizon * 0.95)
        z = np.zeros(m)
        segs = []
        if ts > 0:
            segs.append(Segment(0.0, ts, lambda t, z=z: _tile(z, t)))
        segs.append(Segment(max(ts, 0.0), te, lambda t, v=vec: _tile(v, t)))
        segs.append(Segment(te, horizon, lambda t, z=z: _tile(z, t)))
        return InputSignal(tuple(segs), m)
    if kind == "impulse-points":
        pts = {float(tau): a * _unit(rng, m) for tau in point_times
               if 0.0 < tau <= horizon}
        z = np.zeros(m)
        return InputSignal((Segment(0.0, horizon, lambda t, z=z: _tile(z, t)),), m,
                           point_values=pts)
    raise ConfigError(f"unknown input kind {kind!r}")


def _tile(v: np.ndarray, t):
    if np.ndim(t):
        return np.tile(v[:, None], (1, np.size(t)))
    return v


def _unit(rng, m: int) -> np.ndarray:
    d = rng.normal(size=m)
    return d / max(np.linalg.norm(d), 1e-30)


# -- simulation runs ----------------------------------------------------------------


@dataclass
class _Run:
    family_index: int
    scenario_index: int
    sys: SystemModel
    gamma: ImpulseSequence
    scn: Scenario
    traj: Trajectory
    ts: np.ndarray
    norms: np.ndarray
    u: InputSignal


def _time_grid(traj: Trajectory, gamma: ImpulseSequence, t0: float,
               grid_points: int, extra=None) -> np.ndarray:
    t_hi = traj.t_end
    pts = [np.linspace(t0, t_hi, grid_points)]
    for tau in gamma.times:
        if t0 < tau <= t_hi:
            pts.append(np.asarray([np.nextafter(tau, -np.inf), tau]))
    if extra is not None:
        e = np.asarray(extra, dtype=float)
        pts.append(e[(e >= t0) & (e <= t_hi)])
    grid = np.unique(np.concatenate(pts))
    if traj.blown_up:
        grid = grid[grid < traj.escape_time]
    return grid


def simulate_runs(family: Sequence[tuple], scenarios: Sequence[Scenario],
                  horizon: float, opts: Optional[IntegratorOptions] = None,
                  zero_input: bool = False,
                  grid_points: int = DEFAULT_GRID_POINTS,
                  t_grid=None) -> list:
    """Simulate every (family member, scenario) pair once and cache the data
    the estimate checks need (evaluation grid and state norms).

    Scenario runs are independent; IMPULSECERT_THREADS > 1 evaluates them on
    a thread pool.  Results are collected in submission order, so reports are
    identical regardless of scheduling.
    """
    import os

    def one(args):
        li, si, sys, gamma, scn = args
        u = zero_signal(sys.m, horizon) if zero_input or scn.u is None else scn.u
        traj = simulate(sys, gamma, scn.t0, scn.x0, u, horizon, opts)
        ts = _time_grid(traj, gamma, scn.t0, grid_points, t_grid)
        return _Run(li, si, sys, gamma, scn, traj, ts, traj.norms(ts), u)

    work = [(li, si, sys, gamma, scn)
            for li, (sys, gamma) in enumerate(family)
            for si, scn in enumerate(scenarios)]
    threads = int(os.environ.get("IMPULSECERT_THREADS", "1") or "1")
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(one, work))
    return [one(w) for w in work]


def margins_for(run: _Run, spec: EstimateSpec) -> np.ndarray:
    """Signed margins bound - observed at the run's grid times."""
    x0n = float(np.linalg.norm(run.scn.x0))
    if spec.mode == "strong":
        eh = hybrid_elapsed(run.gamma, run.scn.t0, run.ts)
    else:
        eh = run.ts - run.scn.t0
    if spec.kind == "0-guas":
        rhs = _beta_vals(spec.beta, x0n, eh)
        lhs = run.norms
    elif spec.kind == "iss":
        sup = cumulative_sup(run.u, run.scn.t0, run.ts, run.gamma)
        if spec.full_window and len(sup):
            sup = np.full_like(sup, sup[-1])
        rhs = _beta_vals(spec.beta, x0n, eh) + eval_k(spec.rho, sup)
        lhs = run.norms
    elif spec.kind in ("iiss", "ubebs"):
        en = cumulative_energy_fast(run.u, run.scn.t0, run.ts, run.gamma,
                                    spec.rho1, spec.rho2)
        if spec.full_window and len(en):
            en = np.full_like(en, en[-1])
        if spec.kind == "iiss":
            rhs = _beta_vals(spec.beta, x0n, eh) + en
        else:
            rhs = x0n + en + spec.offset
        lhs = eval_k(spec.alpha, run.norms)
    else:
        raise ConfigError(f"unknown estimate kind {spec.kind!r}")
    return np.asarray(rhs, dtype=float) - np.asarray(lhs, dtype=float)


def _beta_vals(beta, r: float, eh: np.ndarray) -> np.ndarray:
    if isinstance(beta, KLFunction):
        return np.asarray(eval_kl(beta, r, eh), dtype=float)
    return np.asarray(beta.eval(r, eh), dtype=float)


def report_from_runs(runs: Sequence[_Run], spec: EstimateSpec,
                     slack: float = DEFAULT_SLACK) -> CertificateReport:
    worst = np.inf
    witness = None
    checks = 0
    escapes = []
    for run in runs:
        m = margins_for(run, spec)
        checks += len(m)
        if run.traj.blown_up:
            escapes.append((run.family_index, run.scenario_index,
                            run.traj.escape_time))
        if len(m) == 0:
            continue
        k = int(np.argmin(m))
        if m[k] < worst:
            worst = float(m[k])
            witness = Witness(run.family_index, run.scenario_index, run.scn.t0,
                              float(np.linalg.norm(run.scn.x0)), run.scn.label,
                              float(run.ts[k]), float(run.norms[k]),
                              float(run.norms[k] + m[k]))
    if not np.isfinite(worst):
        worst = 0.0
    passed = worst >= -slack
    return CertificateReport(passed=passed, worst_margin=worst, witness=witness,
                             checks=checks, slack=slack, escapes=tuple(escapes),
                             escape_inconsistency=bool(passed and escapes))


def per_run_margins(runs: Sequence[_Run], spec: EstimateSpec) -> list:
    """(family index, scenario index, label, worst margin) per simulated run."""
    out = []
    for run in runs:
        m = margins_for(run, spec)
        worst = float(np.min(m)) if len(m) else 0.0
        out.append((run.family_index, run.scenario_index, run.scn.label, worst))
    return out


def check_estimate(ensemble: Sequence[tuple], spec: EstimateSpec,
                   scenarios: Sequence[Scenario], horizon: float,
                   t_grid=None, opts: Optional[IntegratorOptions] = None,
                   slack: float = DEFAULT_SLACK,
                   grid_points: int = DEFAULT_GRID_POINTS) -> CertificateReport:
    """Check one estimate over a family x scenario ensemble.

    Zero-state-stability checks force the input to zero; for every other
    kind the scenario inputs are used as given.  Deterministic given the
    inputs: reports reproduce bit-identically.
    """
    spec.validate()
    if not scenarios:
        raise ConfigError("no scenarios supplied; refusing a vacuous pass")
    runs = simulate_runs(ensemble, scenarios, horizon, opts,
                         zero_input=(spec.kind == "0-guas"),
                         grid_points=grid_points, t_grid=t_grid)
    return report_from_runs(runs, spec, slack)


# -- derived estimates (integral estimate => decay + bounded energy) ------------------


def derive_guas_from_iiss(spec: EstimateSpec) -> EstimateSpec:
    """Decay estimate implied by an integral estimate: beta~ = alpha^-1 o beta."""
    if spec.kind != "iiss":
        raise ConfigError("expected an integral-estimate spec")
    inv = inverse_of(spec.alpha)
    beta = spec.beta
    outer = compose_k(inv, beta.outer) if beta.outer is not None else inv
    return EstimateSpec(kind="0-guas", mode=spec.mode,
                        beta=KLFunction(beta.amplitude, beta.decay, outer=outer,
                                        scale=beta.scale))


def derive_ubebs_from_iiss(spec: EstimateSpec) -> EstimateSpec:
    """Zero-offset bounded-energy estimate implied by an integral estimate,
    with the conversion gain alpha~ = psi o alpha."""
    if spec.kind != "iiss":
        raise ConfigError("expected an integral-estimate spec")
    psi = psi_from_iiss(spec.beta)
    return EstimateSpec(kind="ubebs", mode=spec.mode,
                        alpha=compose_k(psi, spec.alpha),
                        rho1=spec.rho1, rho2=spec.rho2, offset=0.0)


# -- empirical reach majorant ----------------------------------------------------------


def empirical_alpha_majorant(runs: Sequence[_Run], rho1: ComparisonFunction,
                             rho2: ComparisonFunction,
                             eps_slope: float = 1e-6) -> ComparisonFunction:
    """K-infinity majorant of the sampled reach map r -> sup |x(t)| over
    scenarios with max(|x0|, input energy) <= r.

    The identity floor is sound: a scenario with initial norm r and zero
    input witnesses a reach of at least r at the initial time.
    """
    points, values = [], []
    for run in runs:
        en = float(cumulative_energy_fast(run.u, run.scn.t0,
                                          np.asarray([run.traj.t_end]),
                                          run.gamma, rho1, rho2)[-1])
        m = max(float(np.linalg.norm(run.scn.x0)), en)
        points.append(m)
        values.append(float(run.norms.max()) if len(run.norms) else m)
    return kinf_majorant(points, values, eps_slope, floor_identity=True)


# -- pipeline ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StageReport:
    name: str
    report: CertificateReport
    detail: str = ""


@dataclass(frozen=True)
class PipelineReport:
    passed: bool
    stages: tuple
    halted_at: Optional[str]
    gains: Optional[UbebsGainResult]
    note: str = ("numerical implication chain on sampled scenarios; the input "
                 "decay/gain certificate is assumed to have passed its own check")

    def stage(self, name: str) -> StageReport:
        for s in self.stages:
            if s.name == name:
                return s
        raise KeyError(name)


def _family_nu(family: Sequence[tuple], tag: str) -> ComparisonFunction:
    """Pointwise max of the per-system input-growth gains across the family."""
    acc = None
    for sys, _ in family:
        nu = sys.assumption_data.get(f"nu_{tag}")
        if nu is None:
            raise ConfigError(
                f"every family member needs nu_{tag} in assumption_data "
                "for the zero-offset gain derivation")
        if not isinstance(nu, ComparisonFunction):
            raise ConfigError(f"nu_{tag} must be a ComparisonFunction")
        acc = nu if acc is None else cf.maximum(acc, nu)
    return acc


def pipeline_iss_to_iiss(family: Sequence[tuple], iss_cert: IssCertificateData,
                         env: AssumptionEnvelopes, scenario_budget: int,
                         horizon: float = 10.0, seed: int = 0,
                         grid_spec: Optional[GainGridSpec] = None,
                         opts: Optional[IntegratorOptions] = None,
                         slack: float = DEFAULT_SLACK,
                         t0_range: tuple = (0.0, 3.0),
                         x0_scale: float = 10.0) -> PipelineReport:
    """Numerical implication chain from a sup-norm certificate to an
    integral certificate, mirroring the constructive proof route:

    1. decay of the zero-input family with the certificate's KL envelope;
    2. bounded-energy estimate with synthesized gains and a derived offset;
    3. zero-offset bounded-energy estimate with majorized gains and an
       empirically majorized reach map;
    4. a candidate integral estimate assembled from stages 1-3.

    The caller is responsible for having checked the sup-norm estimate
    itself (it is a precondition, not a stage).  Halts at the first failing
    stage with that stage's witness.
    """
    if scenario_budget <= 0:
        raise ConfigError("scenario budget must be positive; refusing a vacuous pass")
    if not family:
        raise ConfigError("empty family")
    state_dim = family[0][0].n
    input_dim = family[0][0].m
    gamma_hint = family[0][1]
    scenarios = make_scenarios(seed, scenario_budget, state_dim, input_dim,
                               horizon, t0_range=t0_range, x0_scale=x0_scale,
                               gamma_hint=gamma_hint)
    stages = []

    # stage 1: zero-input decay with the certificate envelope
    spec1 = EstimateSpec(kind="0-guas", mode="strong", beta=iss_cert.beta)
    runs_zero = simulate_runs(family, scenarios, horizon, opts, zero_input=True)
    rep1 = report_from_runs(runs_zero, spec1, slack)
    stages.append(StageReport("zero-input-decay", rep1))
    if not rep1.passed:
        return PipelineReport(False, tuple(stages), "zero-input-decay", None)

    gains = synthesize_ubebs_gain(env, iss_cert, grid_spec)
    alpha_u, c_offset = ubebs_estimate_form(gains)
    runs = simulate_runs(family, scenarios, horizon, opts)

    # stage 2: bounded-energy estimate with synthesized gains and offset
    spec2 = EstimateSpec(kind="ubebs", mode="strong", alpha=alpha_u,
                         rho1=gains.chi1, rho2=gains.chi2, offset=c_offset)
    rep2 = report_from_runs(runs, spec2, slack)
    stages.append(StageReport("bounded-energy-offset", rep2,
                              detail=f"offset c = {c_offset:.6g}"))
    if not rep2.passed:
        return PipelineReport(False, tuple(stages), "bounded-energy-offset", gains)

    # stage 3: zero-offset bounded-energy estimate with majorized gains
    nu_f = _family_nu(family, "f")
    nu_g = _family_nu(family, "g")
    r1t, r2t = rho_tilde(gains.chi1, gains.chi2, nu_f, nu_g)
    alpha_hat = empirical_alpha_majorant(runs, r1t, r2t)
    alpha_l3 = compose_k(inverse_of(alpha_hat), linear(0.5))
    spec3 = EstimateSpec(kind="ubebs", mode="strong", alpha=alpha_l3,
                         rho1=r1t, rho2=r2t, offset=0.0)
    rep3 = report_from_runs(runs, spec3, slack)
    stages.append(StageReport("bounded-energy-zero-offset", rep3))
    if not rep3.passed:
        return PipelineReport(False, tuple(stages), "bounded-energy-zero-offset", gains)

    # stage 4: candidate integral estimate assembled from the stages
    beta = iss_cert.beta
    double = linear(2.0)
    outer = compose_k(alpha_l3, compose_k(double, beta.outer)) \
        if beta.outer is not None else compose_k(alpha_l3, double)
    beta_c = KLFunction(beta.amplitude, beta.decay, outer=outer, scale=beta.scale)
    alpha_c = compose_k(linear(0.5), alpha_l3)
    spec4 = EstimateSpec(kind="iiss", mode="strong", beta=beta_c, alpha=alpha_c,
                         rho1=r1t, rho2=r2t)
    rep4 = report_from_runs(runs, spec4, slack)
    stages.append(StageReport("integral-estimate-candidate", rep4))
    passed = rep4.passed
    return PipelineReport(passed, tuple(stages),
                          None if passed else "integral-estimate-candidate", gains)


# -- epsilon-delta probes -----------------------------------------------------------------


@dataclass(frozen=True)
class BoundednessCell:
    T: float
    r: float
    s: float
    C: float
    samples: int


@dataclass(frozen=True)
class DeltaResult:
    eps: float
    delta: Optional[float]
    status: str              # "found" | "inconclusive"
    trace: tuple             # (delta tried, worst |x|) pairs


@dataclass(frozen=True)
class AttractivityResult:
    r: float
    eps: float
    T: Optional[float]
    status: str              # "found" | "inconclusive"
    worst: float


@dataclass(frozen=True)
class ProbeReport:
    cells: tuple
    deltas: tuple
    attractivity: tuple
    sims_used: int
    budget: int
    note: str = ("sampled witnesses only; 'inconclusive' means the search "
                 "budget ran out, not a disproof")


def probe_eps_delta(family: Sequence[tuple], rho1: ComparisonFunction,
                    rho2: ComparisonFunction, eps_grid: Sequence[float],
                    r_grid: Sequence[float], T_search: Sequence[float],
                    budget: int, alpha: Optional[ComparisonFunction] = None,
                    horizon: float = 10.0, seed: int = 0,
                    scenarios_per_case: int = 4,
                    opts: Optional[IntegratorOptions] = None) -> ProbeReport:
    """Empirical probes of the three-part integral-estimate characterization:
    (i) per-(T, r, s) boundedness constants, (ii) a delta for each epsilon,
    (iii) a hybrid-time horizon T for each (r, epsilon)."""
    alpha = alpha or cf.identity()
    rng = np.random.default_rng(seed)
    sims = 0

    def sample_runs(x0_bound: float, u_bound: float):
        nonlocal sims
        out = []
        for li, (sys, gamma) in enumerate(family):
            for k in range(scenarios_per_case):
                frac = 1.0 if k % 2 == 0 else 0.5
                x0 = _unit(rng, sys.n) * x0_bound * frac
                base = _make_input(rng, ("sine", "step", "pulse")[k % 3], sys.m,
                                   horizon, 1.0, list(gamma.times))
                u = _with_energy_at_most(base, u_bound * frac, gamma, rho1, rho2)
                traj = simulate(sys, gamma, 0.0, x0, u, horizon, opts)
                sims += 1
                ts = _time_grid(traj, gamma, 0.0, 81)
                out.append((gamma, u, traj, ts, traj.norms(ts)))
        return out

    cells = []
    for T in T_search:
        for r in r_grid:
            runs = sample_runs(r, r)
            C = 0.0
            for gamma, u, traj, ts, norms in runs:
                eh = hybrid_elapsed(gamma, 0.0, ts)
                mask = eh <= T
                if np.any(mask):
                    C = max(C, float(norms[mask].max()))
            cells.append(BoundednessCell(T=float(T), r=float(r), s=float(r),
                                         C=C, samples=len(runs)))
            if sims > budget:
                break
        if sims > budget:
            break

    deltas = []
    for eps in eps_grid:
        delta = float(eps)
        found = None
        trace = []
        for _ in range(12):
            if sims > budget:
                break
            runs = sample_runs(delta, delta)
            worst = max((float(n.max()) if len(n) else 0.0)
                        for *_, n in runs)
            trace.append((delta, worst))
            if worst <= eps:
                found = delta
                break
            delta /= 2.0
        deltas.append(DeltaResult(eps=float(eps), delta=found,
                                  status="found" if found is not None else
                                  "inconclusive", trace=tuple(trace)))

    attract = []
    for r in r_grid:
        for eps in eps_grid:
            if sims > budget:
                attract.append(AttractivityResult(float(r), float(eps), None,
                                                  "inconclusive", np.nan))
                continue
            runs = sample_runs(r, r)
            T_found = None
            worst_last = np.inf
            for T in sorted(T_search):
                ok = True
                worst_last = -np.inf
                for gamma, u, traj, ts, norms in runs:
                    eh = hybrid_elapsed(gamma, 0.0, ts)
                    mask = eh >= T
                    if not np.any(mask):
                        continue
                    full = float(cumulative_energy_fast(
                        u, 0.0, np.asarray([traj.t_end]), gamma, rho1, rho2)[-1])
                    gap = eval_k(alpha, norms[mask]) - (eps + full)
                    worst_last = max(worst_last, float(np.max(gap)))
                    if np.any(gap > 0):
                        ok = False
                        break
                if ok:
                    T_found = float(T)
                    break
            attract.append(AttractivityResult(
                float(r), float(eps), T_found,
                "found" if T_found is not None else "inconclusive",
                float(worst_last)))
    return ProbeReport(cells=tuple(cells), deltas=tuple(deltas),
                       attractivity=tuple(attract), sims_used=sims, budget=budget)


def _with_energy_at_most(u: InputSignal, target: float, gamma: ImpulseSequence,
                         rho1: ComparisonFunction, rho2: ComparisonFunction,
                         tol: float = 0.05) -> InputSignal:
    """Scale a base input so its hybrid energy norm is at most ``target``
    (and within a factor of the target when possible)."""
    if target <= 0:
        return zero_signal(u.dimension, u.horizon)
    full = _full_energy(u, gamma, rho1, rho2)
    if full <= target:
        return u
    lo, hi = 0.0, 1.0
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        e = _full_energy(scale_signal(u, mid), gamma, rho1, rho2)
        if e > target:
            hi = mid
        else:
            lo = mid
        if target * (1 - tol) <= e <= target:
            return scale_signal(u, mid)
    return scale_signal(u, lo)


def _full_energy(u: InputSignal, gamma: ImpulseSequence,
                 rho1: ComparisonFunction, rho2: ComparisonFunction) -> float:
    return float(cumulative_energy_fast(u, 0.0, np.asarray([u.horizon]), gamma,
                                        rho1, rho2)[-1])


# -- weak/strong equivalence under incremental boundedness ---------------------------------


class WeakToStrongSurrogate:
    """Bound built from a weak-mode envelope for a family with a jump-count
    bound phi: sigma -> beta(r, max(0, sigma - phi(sigma))).

    Not a KL function (the decay argument saturates); only its pointwise
    evaluation is used by the checks.
    """

    def __init__(self, beta: KLFunction, phi: Callable):
        self.beta = beta
        self.phi = phi

    def eval(self, r, sigma):
        s = np.asarray(sigma, dtype=float)
        phiv = np.asarray(self.phi(s), dtype=float)
        if phiv.shape != s.shape:
            phiv = np.vectorize(lambda q: float(self.phi(q)))(s)
        return eval_kl(self.beta, r, np.maximum(0.0, s - phiv))


@dataclass(frozen=True)
class EquivReport:
    uib_ok: bool
    strong: CertificateReport
    weak: CertificateReport
    pointwise_ok: bool       # strong margin <= weak margin at every sampled point
    surrogate: CertificateReport
    passed: bool


def check_weak_strong_equiv(family: Sequence[tuple], phi: Callable,
                            spec: EstimateSpec, scenarios: Sequence[Scenario],
                            horizon: float, slack: float = DEFAULT_SLACK,
                            opts: Optional[IntegratorOptions] = None) -> EquivReport:
    """Under a verified jump-count bound: strong-pass implies weak-pass
    pointwise, and a strong-form bound built from the weak envelope holds.
    """
    from .hybrid_time import check_uib

    uib = check_uib([gamma for _, gamma in family], phi)
    if not uib.ok:
        raise ConfigError("the family is not uniformly incrementally bounded; "
                          f"worst excess {uib.worst_excess:.3g}")
    spec.validate()
    zero = spec.kind == "0-guas"
    runs = simulate_runs(family, scenarios, horizon, opts, zero_input=zero)
    strong = report_from_runs(runs, replace(spec, mode="strong"), slack)
    weak = report_from_runs(runs, replace(spec, mode="weak"), slack)
    pointwise_ok = True
    for run in runs:
        ms = margins_for(run, replace(spec, mode="strong"))
        mw = margins_for(run, replace(spec, mode="weak"))
        if np.any(mw < ms - 1e-9):
            pointwise_ok = False
            break
    surrogate_beta = WeakToStrongSurrogate(spec.beta, phi)
    surrogate = report_from_runs(runs, replace(spec, mode="strong",
                                               beta=surrogate_beta), slack)
    passed = bool(uib.ok and pointwise_ok and surrogate.passed
                  and (weak.passed or not strong.passed))
    return EquivReport(uib_ok=uib.ok, strong=strong, weak=weak,
                       pointwise_ok=pointwise_ok, surrogate=surrogate,
                       passed=passed)
