"""Config descriptors (pydantic models) and their core-object builders.

These models double as the request schemas of the HTTP service and as the
on-disk YAML config format of the CLI.  The function-descriptor grammar is
shared everywhere a scalar gain, decay envelope, or scalar envelope appears:

Class-K comparison functions::

    {form: identity}
    {form: affine-power, params: [c, p]}        # c * r**p (+ optional d*r)
    {form: exp-decay, params: [a, lam]}         # a * (1 - exp(-lam r)), class K
    {form: log1p, params: [a, b, c]}            # a*log(1 + b r) + c r
    {form: min-of-two | max-of-two | composition | sum-of-two, children: [f, g]}
    {form: tabulated, knots: [[r, v], ...], tail_slope: s}
    {form: inverse, children: [f], params: [tol]}

KL decay envelopes::

    {amplitude: <K fn>, decay: {form: exp|power, params: [lam|p]},
     scale: 1.0, outer: <K fn, optional>}

Nondecreasing scalar envelopes (need not vanish at zero)::

    {form: constant, params: [c]} | {form: affine, params: [a, b]}
    | {form: power, params: [c, p, d]} | {form: tabulated, knots: [[s, v], ...]}
"""

from __future__ import annotations

from typing import List, Literal, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from . import compfun as cf
from .compfun import ComparisonFunction, DecayFunction, KLFunction, ScalarFn
from .errors import ConfigError
from .gains import AssumptionEnvelopes, GainGridSpec, IssCertificateData
from .gronwall import GronwallProblem, RateFunction
from .hybrid_time import ImpulseSequence, gen_dwell
from .signals import InputSignal, Segment
from .simulator import IntegratorOptions
from .systems import build_system

KNOWN_K_FORMS = ("identity", "affine-power", "exp-decay", "log1p", "min-of-two",
                 "max-of-two", "composition", "sum-of-two", "tabulated", "inverse")


class KFnSpec(BaseModel):
    """Descriptor for a class-K / K-infinity comparison function."""

    form: str
    params: List[float] = Field(default_factory=list)
    children: List["KFnSpec"] = Field(default_factory=list)
    knots: List[Tuple[float, float]] = Field(default_factory=list)
    tail_slope: Optional[float] = None
    kind: Optional[str] = None
    domain_hint: float = cf.DEFAULT_DOMAIN_HINT

    def build(self) -> ComparisonFunction:
        f = self.form
        try:
            if f == "identity":
                return cf.identity(self.domain_hint)
            if f == "affine-power":
                c, p = self.params[0], self.params[1]
                lin = self.params[2] if len(self.params) > 2 else 0.0
                return cf.power(c, p, lin, self.domain_hint)
            if f == "exp-decay":
                return cf.exp_saturation(self.params[0], self.params[1],
                                         self.domain_hint)
            if f == "log1p":
                a, b = self.params[0], self.params[1]
                lin = self.params[2] if len(self.params) > 2 else 0.0
                return cf.log_growth(a, b, lin, self.domain_hint)
            if f in ("min-of-two", "max-of-two", "composition", "sum-of-two"):
                if len(self.children) != 2:
                    raise ConfigError(f"form {f!r} needs exactly two children")
                a, b = (c.build() for c in self.children)
                return {"min-of-two": cf.minimum, "max-of-two": cf.maximum,
                        "composition": cf.compose_k, "sum-of-two": cf.add}[f](a, b)
            if f == "tabulated":
                return cf.tabulated(self.knots, self.tail_slope,
                                    kind=self.kind or "KInf",
                                    domain_hint=self.domain_hint)
            if f == "inverse":
                if len(self.children) != 1:
                    raise ConfigError("form 'inverse' needs exactly one child")
                tol = self.params[0] if self.params else cf.DEFAULT_INVERT_TOL
                return cf.inverse_of(self.children[0].build(), tol)
        except IndexError:
            raise ConfigError(f"form {f!r} is missing required params "
                              f"(got {self.params})") from None
        raise ConfigError(
            f"unknown comparison-function form {f!r}; supported: "
            + ", ".join(KNOWN_K_FORMS))


class DecaySpec(BaseModel):
    form: Literal["exp", "power"]
    params: List[float]

    def build(self) -> DecayFunction:
        if self.form == "exp":
            return cf.exp_decay(self.params[0])
        return cf.power_decay(self.params[0])


class KLSpec(BaseModel):
    amplitude: KFnSpec
    decay: DecaySpec
    scale: float = 1.0
    outer: Optional[KFnSpec] = None

    def build(self) -> KLFunction:
        return KLFunction(self.amplitude.build(), self.decay.build(),
                          outer=self.outer.build() if self.outer else None,
                          scale=self.scale)


class ScalarFnSpec(BaseModel):
    form: Literal["constant", "affine", "power", "tabulated"]
    params: List[float] = Field(default_factory=list)
    knots: List[Tuple[float, float]] = Field(default_factory=list)

    def build(self) -> ScalarFn:
        if self.form == "tabulated":
            return ScalarFn("tabulated", knots=tuple((float(a), float(b))
                                                     for a, b in self.knots))
        return ScalarFn(self.form, tuple(self.params))


# -- serialization back to descriptors (tabulating what has no closed form) ------


def serialize_k(fn: ComparisonFunction, sample_domain: float = 50.0,
                sample_count: int = 65) -> KFnSpec:
    """Descriptor for a comparison function; nodes without a descriptor form
    (callables) are tabulated on a sample grid."""
    form = fn.form
    if form in ("min-of-two", "max-of-two", "composition", "sum-of-two"):
        return KFnSpec(form=form, children=[serialize_k(c, sample_domain,
                                                        sample_count)
                                            for c in fn.children],
                       kind=fn.kind, domain_hint=fn.domain_hint)
    if form == "inverse":
        return KFnSpec(form="inverse", params=list(fn.params),
                       children=[serialize_k(fn.children[0], sample_domain,
                                             sample_count)],
                       kind=fn.kind, domain_hint=fn.domain_hint)
    if form == "tabulated":
        return KFnSpec(form="tabulated", knots=[(a, b) for a, b in fn.knots],
                       tail_slope=fn.params[0] if fn.params else None,
                       kind=fn.kind, domain_hint=fn.domain_hint)
    if form == "callable":
        grid = np.linspace(0.0, sample_domain, sample_count)
        vals = cf.eval_k(fn, grid)
        return KFnSpec(form="tabulated",
                       knots=[(float(a), float(b)) for a, b in zip(grid, vals)],
                       kind=fn.kind, domain_hint=fn.domain_hint)
    return KFnSpec(form=form, params=list(fn.params), kind=fn.kind,
                   domain_hint=fn.domain_hint)


def serialize_kl(beta: KLFunction) -> KLSpec:
    return KLSpec(amplitude=serialize_k(beta.amplitude),
                  decay=DecaySpec(form=beta.decay.form,
                                  params=list(beta.decay.params)),
                  scale=beta.scale,
                  outer=serialize_k(beta.outer) if beta.outer else None)


# -- sequences, signals, systems ---------------------------------------------------


class GammaSpec(BaseModel):
    """Either an explicit sorted time list or a dwell-time generator spec."""

    times: Optional[List[float]] = None
    kind: Optional[Literal["dwell"]] = None
    delta: Optional[float] = None
    horizon: Optional[float] = None
    seed: Optional[int] = None

    @model_validator(mode="after")
    def _one_of(self):
        if self.times is None and self.kind is None:
            raise ValueError("gamma needs either 'times' or a generator 'kind'")
        return self

    def build(self, default_horizon: float) -> ImpulseSequence:
        if self.times is not None:
            return ImpulseSequence(tuple(self.times),
                                   self.horizon or default_horizon)
        if self.delta is None:
            raise ConfigError("dwell generator needs 'delta'")
        return gen_dwell(self.delta, self.horizon or default_horizon, self.seed)


class InputPiece(BaseModel):
    t0: float
    t1: float
    kind: Literal["constant", "polynomial", "sine", "table-hold", "table-linear"]
    values: List[float] = Field(default_factory=list)   # constant vector
    coeffs: List[float] = Field(default_factory=list)   # polynomial in t (scalar)
    amplitude: Optional[float] = None                   # sine
    frequency: float = 1.0
    phase: float = 0.0
    offset: float = 0.0
    samples: List[Tuple[float, float]] = Field(default_factory=list)  # tables

    def build_fn(self, m: int):
        if self.kind == "constant":
            v = np.broadcast_to(np.asarray(self.values, dtype=float), (m,)).astype(float)
            return lambda t, v=v: np.tile(v[:, None], (1, np.size(t))) if np.ndim(t) else v
        if self.kind == "polynomial":
            c = np.asarray(self.coeffs, dtype=float)
            def poly(t, c=c):
                tt = np.asarray(t, dtype=float)
                val = sum(ck * tt ** k for k, ck in enumerate(c))
                return val[None, :] if np.ndim(t) else np.atleast_1d(val)
            return poly
        if self.kind == "sine":
            a = self.amplitude if self.amplitude is not None else 1.0
            def sine(t, a=a, w=self.frequency, p=self.phase, c=self.offset):
                tt = np.asarray(t, dtype=float)
                val = a * np.sin(w * tt + p) + c
                return val[None, :] if np.ndim(t) else np.atleast_1d(val)
            return sine
        xs = np.asarray([s[0] for s in self.samples], dtype=float)
        ys = np.asarray([s[1] for s in self.samples], dtype=float)
        if self.kind == "table-hold":
            def hold(t, xs=xs, ys=ys):
                tt = np.asarray(t, dtype=float)
                idx = np.clip(np.searchsorted(xs, tt, side="right") - 1, 0, len(xs) - 1)
                val = ys[idx]
                return val[None, :] if np.ndim(t) else np.atleast_1d(val)
            return hold
        def lin(t, xs=xs, ys=ys):
            val = np.interp(np.asarray(t, dtype=float), xs, ys)
            return val[None, :] if np.ndim(t) else np.atleast_1d(val)
        return lin


class InputSpec(BaseModel):
    dimension: int = 1
    pieces: List[InputPiece]
    point_values: List[Tuple[float, List[float]]] = Field(default_factory=list)

    def build(self) -> InputSignal:
        segs = tuple(Segment(p.t0, p.t1, p.build_fn(self.dimension))
                     for p in self.pieces)
        pv = {t: np.asarray(v, dtype=float) for t, v in self.point_values}
        return InputSignal(segs, self.dimension, pv)


class SystemAssumptionsSpec(BaseModel):
    """Declared envelope data attached to a system (all optional)."""

    nu_f: Optional[KFnSpec] = None
    nu_g: Optional[KFnSpec] = None
    N_f: Optional[ScalarFnSpec] = None
    N_g: Optional[ScalarFnSpec] = None
    L_R: Optional[float] = None
    omega_R: Optional[KFnSpec] = None

    def build(self) -> dict:
        out = {}
        for name in ("nu_f", "nu_g", "omega_R"):
            spec = getattr(self, name)
            if spec is not None:
                out[name] = spec.build()
        for name in ("N_f", "N_g"):
            spec = getattr(self, name)
            if spec is not None:
                out[name] = spec.build()
        if self.L_R is not None:
            out["L_R"] = self.L_R
        return out


class SystemSpec(BaseModel):
    name: str
    params: dict = Field(default_factory=dict)
    assumptions: Optional[SystemAssumptionsSpec] = None

    def build(self):
        system = build_system(self.name, self.params)
        if self.assumptions is not None:
            system.assumption_data.update(self.assumptions.build())
        return system


class IntegratorSpec(BaseModel):
    method: Literal["rk45", "rk4"] = "rk45"
    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = float("inf")
    fixed_step: float = 1e-3
    blowup_threshold: float = 1e12

    def build(self) -> IntegratorOptions:
        return IntegratorOptions(method=self.method, rtol=self.rtol,
                                 atol=self.atol, max_step=self.max_step,
                                 fixed_step=self.fixed_step,
                                 blowup_threshold=self.blowup_threshold)


class RateSpec(BaseModel):
    kind: Literal["const", "pwc"] = "const"
    value: float = 0.0
    breakpoints: List[float] = Field(default_factory=list)
    values: List[float] = Field(default_factory=list)

    def build(self) -> RateFunction:
        if self.kind == "const":
            return RateFunction.constant(self.value)
        return RateFunction.piecewise(self.breakpoints, self.values)


class GronwallProblemSpec(BaseModel):
    p: float
    rate: RateSpec
    c_seq: List[float]
    omega: KFnSpec
    sigma: List[float]
    t0: float = 0.0
    T: float

    def build(self) -> GronwallProblem:
        return GronwallProblem(self.p, self.rate.build(), tuple(self.c_seq),
                               self.omega.build(),
                               ImpulseSequence(tuple(self.sigma), self.T),
                               self.t0, self.T)


class EnvelopesSpec(BaseModel):
    phi_tilde_f: KFnSpec
    eta_f: KFnSpec
    phi_f: KFnSpec
    N_f: ScalarFnSpec
    O_f: ScalarFnSpec
    P_f: ScalarFnSpec
    phi_tilde_g: KFnSpec
    eta_g: KFnSpec
    phi_g: KFnSpec
    N_g: ScalarFnSpec
    O_g: ScalarFnSpec
    P_g: ScalarFnSpec
    L_f: ScalarFnSpec

    def build(self) -> AssumptionEnvelopes:
        return AssumptionEnvelopes(
            phi_tilde_f=self.phi_tilde_f.build(), eta_f=self.eta_f.build(),
            phi_f=self.phi_f.build(), N_f=self.N_f.build(),
            O_f=self.O_f.build(), P_f=self.P_f.build(),
            phi_tilde_g=self.phi_tilde_g.build(), eta_g=self.eta_g.build(),
            phi_g=self.phi_g.build(), N_g=self.N_g.build(),
            O_g=self.O_g.build(), P_g=self.P_g.build(),
            L_f=self.L_f.build())


class CertificateSpec(BaseModel):
    beta: KLSpec
    rho: KFnSpec

    def build(self) -> IssCertificateData:
        return IssCertificateData(self.beta.build(), self.rho.build())


class EstimateSpecModel(BaseModel):
    kind: Literal["0-guas", "iss", "iiss", "ubebs"]
    mode: Literal["strong", "weak"] = "strong"
    beta: Optional[KLSpec] = None
    rho: Optional[KFnSpec] = None
    alpha: Optional[KFnSpec] = None
    rho1: Optional[KFnSpec] = None
    rho2: Optional[KFnSpec] = None
    offset: float = 0.0
    full_window: bool = False

    def build(self):
        from .certify import EstimateSpec
        spec = EstimateSpec(
            kind=self.kind, mode=self.mode,
            beta=self.beta.build() if self.beta else None,
            rho=self.rho.build() if self.rho else None,
            alpha=self.alpha.build() if self.alpha else None,
            rho1=self.rho1.build() if self.rho1 else None,
            rho2=self.rho2.build() if self.rho2 else None,
            offset=self.offset, full_window=self.full_window)
        spec.validate()
        return spec


class ScenarioSetSpec(BaseModel):
    seed: int = 0
    count: int = 25
    t0_range: Tuple[float, float] = (0.0, 3.0)
    x0_scale: float = 10.0
    amplitude: float = 2.0
    kinds: List[str] = Field(default_factory=lambda: ["zero", "step", "sine",
                                                      "pulse", "impulse-points"])


class FamilyMemberSpec(BaseModel):
    system: SystemSpec
    gamma: GammaSpec

    def build(self, horizon: float):
        return self.system.build(), self.gamma.build(horizon)


class GainGridSpecModel(BaseModel):
    r_max: float = 20.0
    n_r: int = 48
    eps_slope: float = 1e-6
    p_tol: float = 1e-6

    def build(self) -> GainGridSpec:
        return GainGridSpec(r_max=self.r_max, n_r=self.n_r,
                            eps_slope=self.eps_slope, p_tol=self.p_tol)
