"""Event-exact trajectory engine for impulsive systems with inputs.

Between impulse times the state flows along an ODE; at each impulse time the
integrator is clipped to land exactly on the impulse, the accepted solution
there is recorded as the left limit, and the jump map adds its increment.
Trajectories are right-continuous with dense interpolants per flow segment;
finite escape is reported, never raised, so certification can treat blow-up
as a separate verdict.

The jump map is an increment: ``x(tau) = x(tau^-) + g(tau, x(tau^-), u(tau))``.
A reset map ``r`` must be encoded as ``g = r(xi) - xi``.

Uniqueness of solutions is not assumed under nonzero inputs; the engine
returns the one Caratheodory solution its deterministic stepper constructs.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from .compfun import ComparisonFunction, ScalarFn
from .errors import ConfigError, DomainError, NumericalError
from .hybrid_time import ImpulseSequence
from .signals import InputSignal, zero_signal

BLOWUP_THRESHOLD = 1e12


@dataclass(frozen=True)
class SystemModel:
    """Flow map, jump map, dimensions, and declared assumption envelopes.

    ``assumption_data`` holds whichever envelope functions the caller intends
    to validate (growth bounds, Lipschitz constants, continuity moduli, and
    the two-point envelope data); each entry is a comparison function, a
    nondecreasing scalar function, or a plain constant.
    """

    flow: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    jump: Callable[[float, np.ndarray, np.ndarray], np.ndarray]
    n: int
    m: int
    assumption_data: dict = field(default_factory=dict)
    name: str = ""

    def f(self, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.flow(t, x, u), dtype=float))

    def g(self, t: float, x: np.ndarray, u: np.ndarray) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.jump(t, x, u), dtype=float))


@dataclass(frozen=True)
class IntegratorOptions:
    method: str = "rk45"          # "rk45" (adaptive) or "rk4" (fixed step)
    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = np.inf
    fixed_step: float = 1e-3
    blowup_threshold: float = BLOWUP_THRESHOLD


@dataclass(frozen=True)
class JumpRecord:
    time: float
    left_limit: np.ndarray
    post_value: np.ndarray
    u_value: np.ndarray


class _FlowSegment:
    """Dense solution on [a, b); the value at b is the pre-jump left limit."""

    __slots__ = ("a", "b", "_dense", "_const")

    def __init__(self, a: float, b: float, dense=None, const=None):
        self.a = a
        self.b = b
        self._dense = dense
        self._const = const

    def __call__(self, t):
        ts = np.asarray(t, dtype=float)
        if self._const is not None:
            if ts.ndim == 0:
                return np.array(self._const, dtype=float)
            return np.tile(self._const, (len(ts), 1)).T
        return np.atleast_1d(self._dense(ts))


@dataclass
class Trajectory:
    """Right-continuous piecewise state path with recorded jumps."""

    t0: float
    t_end: float
    segments: list
    jump_records: list
    blown_up: bool = False
    escape_time: Optional[float] = None
    note: str = ("certified pointwise on the computed solution only; uniqueness "
                 "under nonzero inputs is not assumed")

    @property
    def x0(self) -> np.ndarray:
        return np.atleast_1d(self.segments[0](self.t0))

    @property
    def n_jumps(self) -> int:
        return len(self.jump_records)

    def _starts(self):
        return [s.a for s in self.segments]

    def eval(self, t: float) -> np.ndarray:
        """Right-continuous value at ``t``."""
        if t < self.t0 - 1e-12 or t > self.t_end + 1e-12:
            raise DomainError(f"time {t} outside trajectory domain [{self.t0}, {self.t_end}]")
        starts = self._starts()
        i = min(max(bisect.bisect_right(starts, t) - 1, 0), len(self.segments) - 1)
        return np.atleast_1d(self.segments[i](min(max(t, self.t0), self.t_end)))

    def eval_left(self, t: float) -> np.ndarray:
        """Left limit at ``t``; differs from ``eval`` exactly at jump times."""
        if t <= self.t0:
            raise DomainError("left limits require t > t0")
        starts = self._starts()
        i = min(max(bisect.bisect_left(starts, t) - 1, 0), len(self.segments) - 1)
        return np.atleast_1d(self.segments[i](min(t, self.segments[i].b)))

    def eval_many(self, ts) -> np.ndarray:
        """Vectorized right-continuous evaluation; shape (len(ts), n)."""
        arr = np.asarray(ts, dtype=float)
        n = len(self.x0)
        out = np.empty((len(arr), n))
        starts = np.asarray(self._starts())
        idx = np.clip(np.searchsorted(starts, arr, side="right") - 1, 0,
                      len(self.segments) - 1)
        for i in np.unique(idx):
            mask = idx == i
            vals = self.segments[int(i)](arr[mask])  # shape (n, k)
            out[mask] = np.atleast_2d(vals).reshape(n, -1).T
        return out

    def norms(self, ts) -> np.ndarray:
        return np.linalg.norm(self.eval_many(ts), axis=1)

    @property
    def jump_times(self) -> list:
        return [r.time for r in self.jump_records]


def _integrate_piece(sys: SystemModel, u: InputSignal, a: float, b: float,
                     x0: np.ndarray, opts: IntegratorOptions):
    """Integrate the flow on [a, b]; returns (dense segment, status, t_hit)."""

    # within a flow piece the active input branch is the one on (a, b); clamp
    # the right endpoint so a right-continuous lookup at t = b cannot leak the
    # next branch into this piece's integration
    t_in = np.nextafter(b, a)

    def rhs(t, x):
        return sys.f(t, x, u.value(min(t, t_in)))

    if opts.method == "rk4":
        return _integrate_rk4(rhs, a, b, x0, opts)

    def blowup(t, x):
        return float(np.linalg.norm(x)) - opts.blowup_threshold

    blowup.terminal = True
    blowup.direction = 1.0
    sol = solve_ivp(rhs, (a, b), x0, method="RK45", dense_output=True,
                    rtol=opts.rtol, atol=opts.atol, max_step=opts.max_step,
                    events=blowup)
    if sol.status == -1:
        raise NumericalError(f"integrator step failure on [{a}, {b}]: {sol.message}")
    if sol.status == 1:  # blow-up event
        t_hit = float(sol.t_events[0][0])
        return _FlowSegment(a, t_hit, dense=sol.sol), "escape", t_hit
    return _FlowSegment(a, b, dense=sol.sol), "ok", None


def _integrate_rk4(rhs, a: float, b: float, x0: np.ndarray,
                   opts: IntegratorOptions):
    n_steps = max(int(np.ceil((b - a) / opts.fixed_step)), 1)
    ts = np.linspace(a, b, n_steps + 1)
    xs = [np.asarray(x0, dtype=float)]
    fs = [rhs(a, xs[0])]
    for i in range(n_steps):
        t, x = ts[i], xs[-1]
        h = ts[i + 1] - t
        k1 = fs[-1]
        k2 = rhs(t + h / 2, x + h / 2 * k1)
        k3 = rhs(t + h / 2, x + h / 2 * k2)
        k4 = rhs(t + h, x + h * k3)
        x_new = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        xs.append(x_new)
        fs.append(rhs(ts[i + 1], x_new))
        if float(np.linalg.norm(x_new)) >= opts.blowup_threshold:
            spline = CubicHermiteSpline(ts[: i + 2], np.array(xs), np.array(fs), axis=0)
            return _FlowSegment(a, ts[i + 1], dense=lambda t, s=spline: s(t).T), \
                "escape", float(ts[i + 1])
    spline = CubicHermiteSpline(ts, np.array(xs), np.array(fs), axis=0)
    return _FlowSegment(a, b, dense=lambda t, s=spline: s(t).T), "ok", None


def simulate(sys: SystemModel, gamma: ImpulseSequence, t0: float, x0,
             u: Optional[InputSignal], horizon: float,
             opts: Optional[IntegratorOptions] = None) -> Trajectory:
    """Simulate from ``(t0, x0)`` to ``horizon`` under input ``u``.

    Impulse times and input-segment boundaries are hard integration
    breakpoints; the trajectory flows first even when ``t0`` itself is an
    impulse time (jumps happen only at impulses strictly after ``t0``).
    """
    if t0 < 0 or horizon <= t0:
        raise DomainError("need 0 <= t0 < horizon")
    opts = opts or IntegratorOptions()
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if x0.shape != (sys.n,):
        raise DomainError(f"x0 must have dimension {sys.n}")
    u = u if u is not None else zero_signal(sys.m, horizon)
    if u.horizon < horizon - 1e-12:
        raise DomainError("input signal horizon is shorter than the simulation horizon")

    taus = [tau for tau in gamma.times if t0 < tau <= horizon]
    soft = [c for c in u.boundaries if t0 < c < horizon]
    breaks = sorted(set([*taus, *soft, horizon]))
    tau_set = set(taus)

    segments = []
    jumps = []
    x_cur = x0
    t_cur = t0
    blown = False
    t_escape = None
    for b in breaks:
        if b > t_cur:
            seg, status, t_hit = _integrate_piece(sys, u, t_cur, b, x_cur, opts)
            segments.append(seg)
            if status == "escape":
                blown = True
                t_escape = t_hit
                break
            x_cur = np.atleast_1d(seg(b))
            t_cur = b
        if b in tau_set and not blown:
            u_tau = u.value_at_impulse(b)
            left = x_cur.copy()
            x_cur = left + sys.g(b, left, u_tau)
            jumps.append(JumpRecord(b, left, x_cur, np.atleast_1d(u_tau)))
            if b >= horizon:
                segments.append(_FlowSegment(b, b, const=x_cur.copy()))
    if not segments:
        segments.append(_FlowSegment(t0, horizon, const=x_cur.copy()))
    t_end = t_escape if blown else horizon
    return Trajectory(t0=t0, t_end=t_end, segments=segments, jump_records=jumps,
                      blown_up=blown, escape_time=t_escape)


def residual(traj: Trajectory, sys: SystemModel, gamma: ImpulseSequence,
             u: Optional[InputSignal], grid_per_segment: int = 201) -> float:
    """Max deviation from the integral identity (flow integral plus jump sum).

    The flow integral is recomputed with composite Simpson on a fresh dense
    grid per segment, and the jump sum uses the *given* impulse sequence with
    the jump map evaluated at the trajectory's left limits — so a trajectory
    with a skipped jump shows a residual of exactly that jump's size.
    """
    u = u if u is not None else zero_signal(sys.m, traj.t_end)
    x0 = traj.x0
    taus = np.asarray([tau for tau in gamma.times
                       if traj.t0 < tau <= traj.t_end])
    increments = np.zeros((len(taus), len(x0)))
    for k, tau in enumerate(taus):
        increments[k] = sys.g(float(tau), traj.eval_left(float(tau)),
                              u.value_at_impulse(float(tau)))
    prefix = np.cumsum(increments, axis=0) if len(taus) else increments
    worst = 0.0
    acc = np.zeros_like(x0)
    for seg in traj.segments:
        if seg.b <= seg.a:
            continue
        npts = grid_per_segment + (grid_per_segment + 1) % 2  # odd count
        ts = np.linspace(seg.a, seg.b, npts)
        xs = np.atleast_2d(seg(ts))
        if xs.shape[0] != len(ts):
            xs = xs.T
        fs = np.array([sys.f(t, xs[i], u.value(min(t, u.horizon)))
                       for i, t in enumerate(ts)])
        h = ts[1] - ts[0]
        # cumulative composite Simpson on pairs of intervals
        cum = np.zeros_like(fs)
        for i in range(2, npts, 2):
            cum[i] = cum[i - 2] + h / 3.0 * (fs[i - 2] + 4 * fs[i - 1] + fs[i])
        for i in range(1, npts, 2):
            cum[i] = cum[i - 1] + h / 12.0 * (5 * fs[i - 1] + 8 * fs[i] - fs[min(i + 1, npts - 1)])
        # jump contributions over (t0, t] for every grid point in this segment;
        # segment interiors are open at the right, so exclude t = seg.b itself
        # unless it is truly covered (right-continuity puts it in the next
        # segment when a jump sits there)
        if len(taus):
            idx = np.searchsorted(taus, ts, side="right")
            if np.any(np.abs(taus - seg.b) < 1e-12):
                idx[-1] = np.searchsorted(taus, seg.b, side="left")
            jumps = np.where((idx > 0)[:, None],
                             prefix[np.maximum(idx - 1, 0)], 0.0)
        else:
            jumps = np.zeros((len(ts), len(x0)))
        vals = xs - (x0 + acc + cum + jumps)
        worst = max(worst, float(np.max(np.linalg.norm(vals, axis=1))))
        acc = acc + cum[-1]
    return worst


# -- sampled assumption validation ---------------------------------------------


@dataclass(frozen=True)
class AssumptionSampleSpec:
    seed: int = 0
    n_t: int = 12
    n_points: int = 200
    radius_x: float = 5.0
    radius_u: float = 5.0
    t_max: float = 10.0
    tol: float = 1e-9
    checks: tuple = ("zero_equilibrium", "a1_bound", "a2_bound", "claim4",
                     "a1_lipschitz", "a2_modulus", "b1", "b2", "b3")
    # data consumed by individual checks
    lipschitz_radius: float = 2.0
    claim4_eta: float = 0.1
    claim4_kappa: float = 1.0
    claim4_radius: float = 2.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    ok: bool
    worst_violation: float
    witness: Optional[tuple]
    samples: int
    skipped: bool = False


@dataclass(frozen=True)
class AssumptionReport:
    ok: bool
    results: tuple

    def __bool__(self):
        return self.ok

    def result(self, name: str) -> CheckResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)


def _get_env(sys: SystemModel, key: str):
    if key not in sys.assumption_data:
        raise ConfigError(f"assumption check needs envelope {key!r} in assumption_data")
    return sys.assumption_data[key]


def _call_env(env, x):
    if isinstance(env, (int, float)):
        return float(env)
    return float(env(x))


def _ball(rng, n, radius, count):
    pts = rng.normal(size=(count, n))
    norms = np.linalg.norm(pts, axis=1, keepdims=True)
    norms[norms == 0] = 1.0
    radii = radius * rng.uniform(0, 1, size=(count, 1)) ** (1.0 / n)
    return pts / norms * radii


def validate_assumptions(sys: SystemModel,
                         spec: Optional[AssumptionSampleSpec] = None
                         ) -> AssumptionReport:
    """Randomized sampled validation of the declared envelope inequalities.

    Every check reports its worst signed violation (positive means the
    inequality failed by that amount beyond the tolerance allowance); a pass
    means no counterexample was found at the sampled points, nothing more.
    """
    spec = spec or AssumptionSampleSpec()
    rng = np.random.default_rng(spec.seed)
    ts = np.linspace(0.0, spec.t_max, spec.n_t)
    results = []
    for name in spec.checks:
        fn = _CHECKS.get(name)
        if fn is None:
            raise ConfigError(f"unknown assumption check {name!r}")
        results.append(fn(sys, spec, rng, ts))
    ok = all(r.ok for r in results)
    return AssumptionReport(ok=ok, results=tuple(results))


def _check_zero_equilibrium(sys, spec, rng, ts):
    worst, witness = -np.inf, None
    for t in ts:
        z = np.zeros(sys.n)
        zu = np.zeros(sys.m)
        for tag, val in (("f", sys.f(t, z, zu)), ("g", sys.g(t, z, zu))):
            v = float(np.linalg.norm(val)) - spec.tol
            if v > worst:
                worst, witness = v, (tag, float(t))
    return CheckResult("zero_equilibrium", worst <= 0, worst, witness, 2 * len(ts))


def _growth_check(name, call, N_env, nu_env, sys, spec, rng, ts):
    xs = _ball(rng, sys.n, spec.radius_x, spec.n_points)
    us = _ball(rng, sys.m, spec.radius_u, spec.n_points)
    worst, witness = -np.inf, None
    count = 0
    for t in ts:
        for x, uu in zip(xs, us):
            lhs = float(np.linalg.norm(call(t, x, uu)))
            rhs = _call_env(N_env, float(np.linalg.norm(x))) * \
                (1.0 + float(nu_env(float(np.linalg.norm(uu)))))
            v = lhs - rhs - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (float(t), x.copy(), uu.copy())
    return CheckResult(name, worst <= 0, worst, witness, count)


def _check_a1_bound(sys, spec, rng, ts):
    return _growth_check("a1_bound", sys.f, _get_env(sys, "N_f"),
                         _get_env(sys, "nu_f"), sys, spec, rng, ts)


def _check_a2_bound(sys, spec, rng, ts):
    return _growth_check("a2_bound", sys.g, _get_env(sys, "N_g"),
                         _get_env(sys, "nu_g"), sys, spec, rng, ts)


def _check_claim4(sys, spec, rng, ts):
    """Input-continuity surrogate with an explicit offset and gain."""
    nu_f = _get_env(sys, "nu_f")
    nu_g = _get_env(sys, "nu_g")
    xs = _ball(rng, sys.n, spec.claim4_radius, spec.n_points)
    us = _ball(rng, sys.m, spec.radius_u, spec.n_points)
    worst, witness = -np.inf, None
    count = 0
    for t in ts[:: max(len(ts) // 4, 1)]:
        for x, uu in zip(xs, us):
            zu = np.zeros(sys.m)
            mu = float(np.linalg.norm(uu))
            for tag, call, nu in (("f", sys.f, nu_f), ("g", sys.g, nu_g)):
                lhs = float(np.linalg.norm(call(t, x, uu) - call(t, x, zu)))
                rhs = spec.claim4_eta + spec.claim4_kappa * float(nu(mu))
                v = lhs - rhs - spec.tol
                count += 1
                if v > worst:
                    worst, witness = v, (tag, float(t), x.copy(), uu.copy())
    return CheckResult("claim4", worst <= 0, worst, witness, count)


def _check_a1_lipschitz(sys, spec, rng, ts):
    L = _get_env(sys, "L_R")
    R = spec.lipschitz_radius
    Lval = _call_env(L, R)
    xs1 = _ball(rng, sys.n, R, spec.n_points)
    xs2 = _ball(rng, sys.n, R, spec.n_points)
    zu = np.zeros(sys.m)
    worst, witness = -np.inf, None
    count = 0
    for t in ts:
        for x1, x2 in zip(xs1, xs2):
            lhs = float(np.linalg.norm(sys.f(t, x1, zu) - sys.f(t, x2, zu)))
            rhs = Lval * float(np.linalg.norm(x1 - x2))
            v = lhs - rhs - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (float(t), x1.copy(), x2.copy())
    return CheckResult("a1_lipschitz", worst <= 0, worst, witness, count)


def _check_a2_modulus(sys, spec, rng, ts):
    omega = _get_env(sys, "omega_R")
    R = spec.lipschitz_radius
    if not callable(omega):
        raise ConfigError("omega_R must be a comparison function")
    # omega_R may be one modulus or a factory radius -> modulus
    mod = omega
    if not isinstance(omega, (ComparisonFunction, ScalarFn)):
        try:
            probe = omega(R)
        except TypeError:
            probe = None
        if callable(probe):
            mod = probe
    xs1 = _ball(rng, sys.n, R, spec.n_points)
    xs2 = _ball(rng, sys.n, R, spec.n_points)
    zu = np.zeros(sys.m)
    worst, witness = -np.inf, None
    count = 0
    for t in ts:
        for x1, x2 in zip(xs1, xs2):
            lhs = float(np.linalg.norm(sys.g(t, x1, zu) - sys.g(t, x2, zu)))
            rhs = float(mod(float(np.linalg.norm(x1 - x2))))
            v = lhs - rhs - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (float(t), x1.copy(), x2.copy())
    return CheckResult("a2_modulus", worst <= 0, worst, witness, count)


def _two_point_b1(tag, call, m, env, spec, rng, ts, n):
    phit = env[f"phi_tilde_{tag}"]
    N = env[f"N_{tag}"]
    O = env[f"O_{tag}"]
    xs = _ball(rng, n, spec.radius_x, spec.n_points)
    u1 = _ball(rng, m, spec.radius_u, spec.n_points)
    u2 = _ball(rng, m, spec.radius_u, spec.n_points)
    worst, witness = -np.inf, None
    count = 0
    for t in ts:
        for x, a, b in zip(xs, u1, u2):
            lhs = float(np.linalg.norm(call(t, x, a) - call(t, x, b)))
            rhs = float(phit(float(np.linalg.norm(a - b)))) * (
                _call_env(N, float(np.linalg.norm(x)))
                + _call_env(O, min(float(np.linalg.norm(a)), float(np.linalg.norm(b)))))
            v = lhs - rhs - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (tag, float(t))
    return worst, witness, count


def _check_b1(sys, spec, rng, ts):
    env = {k: _get_env(sys, k) for k in
           ("phi_tilde_f", "N_f_B", "O_f", "phi_tilde_g", "N_g_B", "O_g")}
    env = {"phi_tilde_f": env["phi_tilde_f"], "N_f": env["N_f_B"], "O_f": env["O_f"],
           "phi_tilde_g": env["phi_tilde_g"], "N_g": env["N_g_B"], "O_g": env["O_g"]}
    w1, wit1, c1 = _two_point_b1("f", sys.f, sys.m, env, spec, rng, ts, sys.n)
    w2, wit2, c2 = _two_point_b1("g", sys.g, sys.m, env, spec, rng, ts, sys.n)
    worst, witness = (w1, wit1) if w1 >= w2 else (w2, wit2)
    return CheckResult("b1", worst <= 0, worst, witness, c1 + c2)


def _two_point_b2(tag, call, m, eta, P, phi, spec, rng, ts, n):
    xs1 = _ball(rng, n, spec.radius_x, spec.n_points)
    xs2 = _ball(rng, n, spec.radius_x, spec.n_points)
    us = _ball(rng, m, spec.radius_u, spec.n_points)
    worst, witness = -np.inf, None
    count = 0
    for t in ts:
        for x1, x2, uu in zip(xs1, xs2, us):
            lhs = float(np.linalg.norm(call(t, x1, uu) - call(t, x2, uu)))
            rhs = float(eta(float(np.linalg.norm(x1 - x2)))) * (
                _call_env(P, min(float(np.linalg.norm(x1)), float(np.linalg.norm(x2))))
                + float(phi(float(np.linalg.norm(uu)))))
            v = lhs - rhs - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (tag, float(t))
    return worst, witness, count


def _check_b2(sys, spec, rng, ts):
    w1, wit1, c1 = _two_point_b2("f", sys.f, sys.m, _get_env(sys, "eta_f"),
                                 _get_env(sys, "P_f"), _get_env(sys, "phi_f"),
                                 spec, rng, ts, sys.n)
    w2, wit2, c2 = _two_point_b2("g", sys.g, sys.m, _get_env(sys, "eta_g"),
                                 _get_env(sys, "P_g"), _get_env(sys, "phi_g"),
                                 spec, rng, ts, sys.n)
    worst, witness = (w1, wit1) if w1 >= w2 else (w2, wit2)
    return CheckResult("b2", worst <= 0, worst, witness, c1 + c2)


def _check_b3(sys, spec, rng, ts):
    """eta_f(s) <= L^f(M) * s on a sampled grid of (s, M) pairs."""
    eta_f = _get_env(sys, "eta_f")
    Lf = _get_env(sys, "L_f")
    worst, witness = -np.inf, None
    count = 0
    for M in np.linspace(0.25, 2 * spec.radius_x, 8):
        Lval = _call_env(Lf, float(M))
        for s in np.linspace(0.0, M, 64):
            v = float(eta_f(float(s))) - Lval * float(s) - spec.tol
            count += 1
            if v > worst:
                worst, witness = v, (float(M), float(s))
    return CheckResult("b3", worst <= 0, worst, witness, count)


_CHECKS = {
    "zero_equilibrium": _check_zero_equilibrium,
    "a1_bound": _check_a1_bound,
    "a2_bound": _check_a2_bound,
    "claim4": _check_claim4,
    "a1_lipschitz": _check_a1_lipschitz,
    "a2_modulus": _check_a2_modulus,
    "b1": _check_b1,
    "b2": _check_b2,
    "b3": _check_b3,
}
