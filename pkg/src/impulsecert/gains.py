"""Constructive gain synthesis from an ISS certificate and envelope data.

Given a decay/gain certificate (a KL envelope plus a K-infinity input gain)
and two-point envelope data for the flow and jump maps, this module follows
the constructive bounded-energy argument step by step: the state/input
envelope pair (h1, h2), the decay period T_r with its companion radii
(b_r, M_r) and Lipschitz constant, the nondecreasing comparison recursion
h-tilde, the feasibility supremum p-tilde (reduced to finitely many corner
pairs by monotonicity and certified by bisection), the ratio supremum ell,
its K-infinity majorant kappa, and the synthesized energy gains
(alpha, chi1, chi2) with the offset machinery (Psi, alpha-tilde).

Every supremum over a continuum is replaced by a grid or a corner reduction
and re-certified a posteriori; results are sample-certified, never proofs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from . import compfun as cf
from .compfun import (ComparisonFunction, KLFunction, ScalarFn, compose_k,
                      eval_k, eval_kl, invert_k, inverse_of, linear, maximum,
                      minimum, power, require_class, tabulated)
from .errors import ConfigError, DomainError, EnvelopeError, HorizonError
from .simulator import SystemModel

KAPPA_SLOPE = 1e-6  # strict-increase term added to sampled majorants


@dataclass(frozen=True)
class IssCertificateData:
    """A KL decay envelope plus a K-infinity sup-norm input gain."""

    beta: KLFunction
    rho: ComparisonFunction

    def validate(self) -> None:
        require_class(self.beta, "beta", domain=100.0)
        require_class(self.rho, "rho", domain=100.0)
        if self.rho.kind != "KInf":
            raise ConfigError("rho must be class K-infinity")


def _as_scalar_env(x) -> Callable:
    if isinstance(x, (int, float)):
        return ScalarFn("constant", (float(x),))
    return x


@dataclass(frozen=True)
class AssumptionEnvelopes:
    """Two-point envelope data for the flow (f) and jump (g) maps.

    ``phi_tilde_*``, ``eta_*``, ``phi_*`` are class K-infinity; ``N_*``,
    ``O_*``, ``P_*`` are nondecreasing continuous scalar functions; ``L_f``
    maps a radius M to a Lipschitz constant valid for ``eta_f`` on [0, M].
    """

    phi_tilde_f: ComparisonFunction
    eta_f: ComparisonFunction
    phi_f: ComparisonFunction
    N_f: Callable
    O_f: Callable
    P_f: Callable
    phi_tilde_g: ComparisonFunction
    eta_g: ComparisonFunction
    phi_g: ComparisonFunction
    N_g: Callable
    O_g: Callable
    P_g: Callable
    L_f: Callable

    def __post_init__(self):
        for name in ("N_f", "O_f", "P_f", "N_g", "O_g", "P_g", "L_f"):
            object.__setattr__(self, name, _as_scalar_env(getattr(self, name)))

    def validate(self, M_grid: Optional[np.ndarray] = None, tol: float = 1e-9) -> None:
        """Check the K-infinity claims and the eta_f(s) <= L_f(M) s envelope."""
        for name in ("phi_tilde_f", "eta_f", "phi_f", "phi_tilde_g", "eta_g", "phi_g"):
            fn = getattr(self, name)
            require_class(fn, name, domain=min(fn.domain_hint, 100.0))
        Ms = M_grid if M_grid is not None else np.linspace(0.25, 10.0, 16)
        for M in Ms:
            L = float(self.L_f(float(M)))
            ss = np.linspace(0.0, float(M), 64)
            gap = eval_k(self.eta_f, ss) - L * ss
            if np.any(gap > tol):
                i = int(np.argmax(gap))
                raise EnvelopeError(
                    f"eta_f(s) <= L_f(M)*s fails at M={M:g}, s={ss[i]:g} "
                    f"by {gap[i]:.3e}")

    def pick(self, tag: str):
        if tag not in ("f", "g"):
            raise DomainError("envelope tag must be 'f' or 'g'")
        return (getattr(self, f"phi_tilde_{tag}"), getattr(self, f"eta_{tag}"),
                getattr(self, f"phi_{tag}"), getattr(self, f"N_{tag}"),
                getattr(self, f"O_{tag}"), getattr(self, f"P_{tag}"))


# -- elementary constructions ----------------------------------------------------


def h12(a_tag: str, r: float, b: float, env: AssumptionEnvelopes,
        cert: IssCertificateData) -> tuple:
    """State/input envelope pair at radius r and input level b:
    h1 = N(beta(r,0) + rho(b)) + O(b),  h2 = P(beta(r,0) + rho(b))."""
    if r < 0 or b < 0:
        raise DomainError("h12 needs r, b >= 0")
    _, _, _, N, O, P = env.pick(a_tag)
    reach = eval_kl(cert.beta, r, 0.0) + eval_k(cert.rho, b)
    return float(N(reach)) + float(O(b)), float(P(reach))


def T_r(cert: IssCertificateData, r: float, tol: float = 1e-8,
        search_horizon: float = 1e9) -> float:
    """Smallest decay period T > 1 with beta(r, T - 1) <= r/3.

    Bisection on t against beta(r, t) = r/3 with upper-bracket doubling;
    for strictly decaying envelopes the result is continuous in r.  Flat
    decay regions make the leftmost crossing ambiguous at tolerance level.
    """
    if r <= 0:
        raise DomainError("T_r needs r > 0")
    target = r / 3.0
    if eval_kl(cert.beta, r, 0.0) <= target:
        return 1.0 + tol
    hi = 1.0
    while eval_kl(cert.beta, r, hi) > target:
        hi *= 2.0
        if hi > search_horizon:
            raise HorizonError(
                f"beta({r:g}, t) does not decay below r/3 within t <= {search_horizon:g}")
    lo = 0.0
    while hi - lo > tol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if eval_kl(cert.beta, r, mid) > target:
            lo = mid
        else:
            hi = mid
    t_star = hi  # beta(r, hi) <= r/3 certified
    return max(1.0 + tol, 1.0 + t_star)


def _radii(r: float, env: AssumptionEnvelopes, cert: IssCertificateData,
           rho_tol: float = 1e-12) -> tuple:
    """(b_r, M_r, L_r^f) for a given radius r."""
    M_r = r / 3.0
    b_r = invert_k(cert.rho, M_r, rho_tol)
    L_rf = float(env.L_f(M_r))
    return b_r, M_r, L_rf


@dataclass(frozen=True)
class _TildeCtx:
    """Radius-dependent constants of the comparison recursion."""

    M_r: float
    L_rf: float
    h2f: float
    h2g: float
    eta_g: ComparisonFunction


def _tilde_ctx(r: float, env: AssumptionEnvelopes,
               cert: IssCertificateData) -> _TildeCtx:
    b_r, M_r, L_rf = _radii(r, env, cert)
    _, h2f = h12("f", r, b_r, env, cert)
    _, h2g = h12("g", r, b_r, env, cert)
    return _TildeCtx(M_r, L_rf, h2f, h2g, env.eta_g)


def _tilde_val(j: int, p: float, T: float, s: float, ctx: _TildeCtx) -> float:
    with np.errstate(over="ignore"):
        growth = float(np.exp((ctx.h2f * T + s) * ctx.L_rf))
    val = p * growth
    for _ in range(j):
        val = val + (ctx.h2g + s) * growth * float(eval_k(ctx.eta_g,
                                                          min(val, 1e300)))
    return val


def tilde_h(j: int, p: float, T: float, r: float, s: float,
            env: AssumptionEnvelopes, cert: IssCertificateData) -> float:
    """The comparison recursion: nondecreasing in each of j, p, T, r, s.

    tilde_h_0 = p * exp([h2_f T + s] L_r^f); each level adds
    [h2_g + s] * exp([h2_f T + s] L_r^f) * eta_g(previous level).
    """
    if min(j, p, T, r, s) < 0:
        raise DomainError("tilde_h needs nonnegative arguments")
    return _tilde_val(j, p, T, s, _tilde_ctx(r, env, cert))


def tilde_p(r: float, s: float, env: AssumptionEnvelopes,
            cert: IssCertificateData, tol: float = 1e-6,
            T_r_value: Optional[float] = None) -> float:
    """Certified supremum of p with tilde_h_j(p, T, r, s) <= M_r / 2 on the
    feasible cone {T >= 0, T + j <= T_r}.

    Monotonicity of tilde_h in T reduces the cone to the corner pairs
    (j, T_r - j); the returned value is feasible while scaling it by
    (1 + tol) is certified infeasible.
    """
    if r <= 0 or s < 0:
        raise DomainError("tilde_p needs r > 0 and s >= 0")
    Tr = T_r_value if T_r_value is not None else T_r(cert, r)
    ctx = _tilde_ctx(r, env, cert)
    corners = [(j, Tr - j) for j in range(int(np.floor(Tr)) + 1)]
    bound = ctx.M_r / 2.0

    def feasible(p: float) -> bool:
        return all(_tilde_val(j, p, T, s, ctx) <= bound for j, T in corners)

    hi = 1.0
    doublings = 0
    while feasible(hi):
        hi *= 2.0
        doublings += 1
        if doublings > 1000:
            raise HorizonError("tilde_p appears unbounded")
    lo = hi / 2.0
    while not feasible(lo):
        lo /= 2.0
        if lo < 1e-300:
            raise HorizonError("tilde_p underflowed; envelopes are degenerate")
    while hi - lo > tol * lo:
        mid = 0.5 * (lo + hi)
        if feasible(mid):
            lo = mid
        else:
            hi = mid
    return lo


def ell(r_bar: float, env: AssumptionEnvelopes, cert: IssCertificateData,
        grid: int = 64, p_tol: float = 1e-6) -> float:
    """sup over [1, r_bar] of h1bar(r) (r - 1) / tilde_p(r, r - 1), on a
    log-spaced grid.  Finite for every r_bar >= 1; zero at r_bar = 1."""
    if r_bar < 1.0:
        raise DomainError("ell is defined for r_bar >= 1")
    rs = np.geomspace(1.0, r_bar, grid) if r_bar > 1 else np.array([1.0])
    return float(np.max(_ell_values(rs, env, cert, p_tol)))


def _ell_values(rs: np.ndarray, env: AssumptionEnvelopes,
                cert: IssCertificateData, p_tol: float = 1e-6) -> np.ndarray:
    out = np.zeros_like(rs)
    for i, r in enumerate(rs):
        if r <= 1.0:
            out[i] = 0.0
            continue
        b_r, _, _ = _radii(float(r), env, cert)
        h1f, _ = h12("f", float(r), b_r, env, cert)
        h1g, _ = h12("g", float(r), b_r, env, cert)
        out[i] = (h1f + h1g) * (r - 1.0) / tilde_p(float(r), float(r - 1.0),
                                                   env, cert, p_tol)
    return out


# -- majorants --------------------------------------------------------------------


def kinf_majorant(points: Sequence[float], values: Sequence[float],
                  eps_slope: float = KAPPA_SLOPE,
                  floor_identity: bool = False) -> ComparisonFunction:
    """K-infinity majorant of a sampled nondecreasing step envelope.

    Knot i carries the running max shifted one sample to the right, so the
    piecewise-linear interpolant dominates the step function everywhere on
    the sampled range; a small linear term forces strict increase and
    unbounded growth.
    """
    pts = np.asarray(points, dtype=float)
    vals = np.asarray(values, dtype=float)
    order = np.argsort(pts)
    pts, vals = pts[order], vals[order]
    runmax = np.maximum.accumulate(vals)
    shifted = np.append(runmax[1:], runmax[-1])
    knots = [(0.0, 0.0)]
    last_x = 0.0
    for x, v in zip(pts, shifted):
        # relative + absolute strictness terms: the relative one keeps the
        # increase visible in float even when the envelope values are huge
        base = float(max(v, 0.0))
        y = base * (1.0 + eps_slope * float(x)) + eps_slope * float(x)
        if x <= last_x:
            if x == last_x and knots and y > knots[-1][1] and last_x > 0:
                knots[-1] = (float(x), y)
            continue
        knots.append((float(x), y))
        last_x = float(x)
    if len(knots) < 2:
        knots.append((1.0, eps_slope))
    xs = [k[0] for k in knots]
    ys = [k[1] for k in knots]
    tail = max((ys[-1] - ys[-2]) / (xs[-1] - xs[-2]), eps_slope)
    tab = tabulated(knots, tail_slope=tail, kind="KInf")
    if floor_identity:
        return maximum(tab, cf.identity())
    return tab


# -- synthesis --------------------------------------------------------------------


@dataclass(frozen=True)
class GainGridSpec:
    r_max: float = 20.0
    n_r: int = 48
    eps_slope: float = KAPPA_SLOPE
    p_tol: float = 1e-6


@dataclass(frozen=True)
class UbebsGainResult:
    """Synthesized bounded-energy gains with their construction data."""

    alpha: ComparisonFunction       # energy gain alpha(b) = kappa(3 rho(b))
    chi1: ComparisonFunction        # flow energy gain >= max{phi_f, phi_tilde_f^2, alpha^2}
    chi2: ComparisonFunction        # jump energy gain >= max{phi_g, phi_tilde_g^2, alpha^2}
    kappa: ComparisonFunction       # K-infinity majorant of the sampled ell
    ell_table: np.ndarray           # sampled (r, ell(r)) pairs
    psi_big: Callable               # nondecreasing offset envelope Psi(E)
    alpha_tilde: ComparisonFunction  # reach bound alpha_tilde(r) = beta(r,0) + 2r/3
    psi_tilde: ComparisonFunction   # K-infinity part of Psi: Psi(E) - Psi(0)
    psi_zero: float                 # Psi(0)


def synthesize_ubebs_gain(env: AssumptionEnvelopes, cert: IssCertificateData,
                          grid_spec: Optional[GainGridSpec] = None) -> UbebsGainResult:
    """Build the bounded-energy gain set from the certificate and envelopes.

    kappa is a K-infinity majorant of the sampled ratio supremum; the energy
    gains take pointwise maxima with the squared two-point envelopes so the
    Cauchy-Schwarz and Chebyshev steps of the bounded-energy argument apply.
    """
    spec = grid_spec or GainGridSpec()
    rs = np.geomspace(1.0, spec.r_max, spec.n_r)
    ratio = _ell_values(rs, env, cert, spec.p_tol)
    ell_running = np.maximum.accumulate(ratio)
    if not np.all(np.isfinite(ell_running)):
        raise DomainError("ell diverged on the requested grid; shrink r_max")
    kappa = kinf_majorant(rs, ell_running, spec.eps_slope)
    alpha = compose_k(kappa, compose_k(linear(3.0), cert.rho))
    square = power(1.0, 2.0)
    alpha_sq = compose_k(square, alpha)
    chi1 = maximum(env.phi_f, maximum(compose_k(square, env.phi_tilde_f), alpha_sq))
    chi2 = maximum(env.phi_g, maximum(compose_k(square, env.phi_tilde_g), alpha_sq))

    N_g, O_g, P_g, eta_g = env.N_g, env.O_g, env.P_g, env.eta_g
    O_g0 = float(O_g(0.0))
    P_g0 = float(P_g(0.0))

    def psi_big(E):
        e = np.asarray(E, dtype=float)
        val = (1.0 + e) * (1.0 + np.asarray(N_g(1.0 + e), dtype=float) + O_g0) \
            + eval_k(eta_g, 1.0 + e) * P_g0
        return float(val) if e.ndim == 0 else val

    psi_zero = float(psi_big(0.0))
    psi_tilde = cf.from_callable(lambda E: psi_big(E) - psi_zero, kind="KInf",
                                 label="psi_big - psi_big(0)")
    alpha_tilde = cf.add(cert.beta.beta_zero(), linear(2.0 / 3.0))
    ell_table = np.column_stack([rs, ell_running])
    return UbebsGainResult(alpha=alpha, chi1=chi1, chi2=chi2, kappa=kappa,
                           ell_table=ell_table, psi_big=psi_big,
                           alpha_tilde=alpha_tilde, psi_tilde=psi_tilde,
                           psi_zero=psi_zero)


def ubebs_estimate_form(result: UbebsGainResult,
                        invert_tol: float = 1e-10) -> tuple:
    """Convert the reach chain |x| <= at(|x0|) + at(2 pt(E)) + at(2 Psi(0))
    into the estimate form alpha_u(|x|) <= |x0| + E + c.

    alpha_u(v) = min{ at^-1(v/3), pt^-1(at^-1(v/3)/2), v/3 } and the offset
    is c = alpha_u(3 at(2 Psi(0))).  Returns ``(alpha_u, c)``.
    """
    at = result.alpha_tilde
    pt = result.psi_tilde
    third = linear(1.0 / 3.0)
    half = linear(0.5)
    term1 = compose_k(inverse_of(at, invert_tol), third)
    term2 = compose_k(inverse_of(pt, invert_tol), compose_k(half, term1))
    alpha_u = minimum(term1, minimum(term2, third))
    c = float(eval_k(alpha_u, 3.0 * eval_k(at, 2.0 * result.psi_zero)))
    return alpha_u, c


# -- derived gains ------------------------------------------------------------------


def psi_from_iiss(beta: KLFunction, tol: float = 1e-10) -> ComparisonFunction:
    """The zero-offset conversion gain psi(r) = min{beta_0^-1(r/2), r/2}.

    Composing it with an integral-estimate gain turns the estimate into a
    zero-offset bounded-energy estimate; by construction
    psi(2 beta_0(a)) + psi(2 b) <= a + b.
    """
    beta0 = beta.beta_zero()
    half = linear(0.5)
    return minimum(compose_k(inverse_of(beta0, tol), half), half)


def rho_tilde(rho1: ComparisonFunction, rho2: ComparisonFunction,
              nu_f: ComparisonFunction, nu_g: ComparisonFunction) -> tuple:
    """Pointwise maxima (max{rho1, nu_f}, max{rho2, nu_g}), validated K-infinity."""
    r1 = maximum(rho1, nu_f)
    r2 = maximum(rho2, nu_g)
    for name, fn in (("rho1~", r1), ("rho2~", r2)):
        if fn.kind != "KInf":
            raise ConfigError(f"{name} is not K-infinity; use K-infinity base gains")
    return r1, r2


# -- sampled input-continuity gain ---------------------------------------------------


@dataclass(frozen=True)
class KappaSampleSpec:
    seed: int = 0
    n_t: int = 64
    n_x: int = 64
    n_u: int = 64
    t_max: float = 10.0
    mu_max: float = 10.0
    mu_min: float = 1e-4
    cap: float = 1e12


@dataclass(frozen=True)
class KappaEstimate:
    value: float
    samples: int
    note: str = ("sample-based lower estimate of the input-continuity gain; "
                 "not a proof")


def estimate_kappa(sys: SystemModel, r_star: float, eta: float,
                   sample_spec: Optional[KappaSampleSpec] = None) -> KappaEstimate:
    """Smallest sampled gain kappa with
    |f(t, xi, mu) - f(t, xi, 0)| <= eta + kappa nu_f(|mu|) (and likewise g)
    over a randomized grid of (t, xi, mu) with |xi| <= r_star.
    """
    if r_star <= 0 or eta <= 0:
        raise DomainError("estimate_kappa needs r_star > 0 and eta > 0")
    spec = sample_spec or KappaSampleSpec()
    if "nu_f" not in sys.assumption_data or "nu_g" not in sys.assumption_data:
        raise ConfigError("estimate_kappa needs nu_f and nu_g in assumption_data")
    nu_f = sys.assumption_data["nu_f"]
    nu_g = sys.assumption_data["nu_g"]
    rng = np.random.default_rng(spec.seed)
    ts = np.linspace(0.0, spec.t_max, spec.n_t)
    dirs = rng.normal(size=(spec.n_x, sys.n))
    dirs /= np.maximum(np.linalg.norm(dirs, axis=1, keepdims=True), 1e-30)
    radii = r_star * rng.uniform(0, 1, size=(spec.n_x, 1)) ** (1.0 / sys.n)
    xs = dirs * radii
    mags = np.geomspace(spec.mu_min, spec.mu_max, spec.n_u)
    udirs = rng.normal(size=(spec.n_u, sys.m))
    udirs /= np.maximum(np.linalg.norm(udirs, axis=1, keepdims=True), 1e-30)
    us = udirs * mags[:, None]

    kappa_hat = 0.0
    count = 0
    zu = np.zeros(sys.m)
    for t in ts:
        for x in xs:
            f0 = sys.f(t, x, zu)
            g0 = sys.g(t, x, zu)
            for uu, mag in zip(us, mags):
                for call, base, nu in ((sys.f, f0, nu_f), (sys.g, g0, nu_g)):
                    delta = float(np.linalg.norm(call(t, x, uu) - base))
                    count += 1
                    excess = delta - eta
                    if excess <= 0:
                        continue
                    denom = float(nu(float(mag)))
                    if denom <= 0 or excess / denom > spec.cap:
                        raise EnvelopeError(
                            "input-continuity inequality unsatisfiable at the "
                            f"given eta near mu magnitude {mag:g}")
                    kappa_hat = max(kappa_hat, excess / denom)
    return KappaEstimate(value=kappa_hat, samples=count)
