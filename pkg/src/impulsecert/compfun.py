"""Comparison functions of class K / K-infinity and KL decay envelopes.

Scalar gains are represented as small expression trees (``ComparisonFunction``)
so that pointwise minima/maxima, compositions, numerical inverses, and
tabulated majorants are all first-class values that can be evaluated on numpy
grids, validated by dense sampling, and serialized to config descriptors.

Class membership is never proved symbolically: ``validate_class`` samples a
dense grid on ``[0, domain_hint]`` and reports every monotonicity or
zero-at-zero violation it finds.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import ClassValidationError, DomainError, RangeError

DEFAULT_DOMAIN_HINT = 1.0e6
DEFAULT_INVERT_TOL = 1.0e-10

# Forms accepted in config descriptors.  "inverse", "sum-of-two" and
# "callable" are internal extensions needed to represent derived gains
# (numerical inverses, beta(.,0) + linear terms, sampled envelopes).
K_FORMS = (
    "affine-power",
    "exp-decay",
    "log1p",
    "min-of-two",
    "max-of-two",
    "composition",
    "sum-of-two",
    "tabulated",
    "inverse",
    "callable",
)


def _as_array(r) -> np.ndarray:
    arr = np.asarray(r, dtype=float)
    return arr


@dataclass(frozen=True)
class ComparisonFunction:
    """A scalar comparison function with a declared class tag.

    ``kind`` is one of ``"K"``, ``"KInf"`` or ``"KL-section"``; it is a claim
    checked by :func:`validate_class`, not a guarantee.  Values are immutable
    and safe to share between workers.
    """

    kind: str
    form: str
    params: tuple = ()
    children: tuple = ()
    knots: tuple = ()
    fn: Optional[Callable] = None
    domain_hint: float = DEFAULT_DOMAIN_HINT
    label: str = ""

    def __post_init__(self):
        if self.form not in K_FORMS:
            raise DomainError(f"unknown comparison-function form {self.form!r}")
        if self.domain_hint <= 0:
            raise DomainError("domain_hint must be positive")

    # -- evaluation ---------------------------------------------------------

    def __call__(self, r):
        return eval_k(self, r)

    def _eval(self, r: np.ndarray) -> np.ndarray:
        form = self.form
        if form == "affine-power":
            c, p = self.params[0], self.params[1]
            d = self.params[2] if len(self.params) > 2 else 0.0
            with np.errstate(invalid="ignore"):
                out = c * np.power(r, p) + d * r
            return out
        if form == "exp-decay":
            a, lam = self.params
            return a * (-np.expm1(-lam * r))
        if form == "log1p":
            a, b = self.params[0], self.params[1]
            c = self.params[2] if len(self.params) > 2 else 0.0
            return a * np.log1p(b * r) + c * r
        if form == "min-of-two":
            f, g = self.children
            return np.minimum(f._eval(r), g._eval(r))
        if form == "max-of-two":
            f, g = self.children
            return np.maximum(f._eval(r), g._eval(r))
        if form == "composition":
            f, g = self.children
            return f._eval(g._eval(r))
        if form == "sum-of-two":
            f, g = self.children
            return f._eval(r) + g._eval(r)
        if form == "tabulated":
            return self._eval_tabulated(r)
        if form == "inverse":
            return self._eval_inverse(r)
        if form == "callable":
            out = self.fn(r)
            return np.asarray(out, dtype=float)
        raise DomainError(f"unhandled form {form!r}")

    def _eval_tabulated(self, r: np.ndarray) -> np.ndarray:
        xs = np.array([k[0] for k in self.knots])
        ys = np.array([k[1] for k in self.knots])
        tail = self.params[0] if self.params else None
        if tail is None:
            if len(xs) >= 2 and xs[-1] > xs[-2]:
                tail = (ys[-1] - ys[-2]) / (xs[-1] - xs[-2])
            else:
                tail = 1.0
        out = np.interp(r, xs, ys)
        beyond = r > xs[-1]
        if np.any(beyond):
            out = np.where(beyond, ys[-1] + tail * (r - xs[-1]), out)
        return out

    def _eval_inverse(self, y: np.ndarray) -> np.ndarray:
        child = self.children[0]
        tol = self.params[0] if self.params else DEFAULT_INVERT_TOL
        return _invert_array(child, y, tol)

    # -- structure helpers --------------------------------------------------

    def with_domain(self, domain_hint: float) -> "ComparisonFunction":
        return replace(self, domain_hint=domain_hint)


def _invert_array(f: ComparisonFunction, y: np.ndarray, tol: float) -> np.ndarray:
    """Vectorized bracketing bisection for a (validated) increasing ``f``."""
    y = np.asarray(y, dtype=float)
    scalar = y.ndim == 0
    yv = np.atleast_1d(y).astype(float)
    if np.any(yv < 0):
        raise DomainError("inversion target must be nonnegative")
    out = np.zeros_like(yv)
    pos = yv > 0
    if np.any(pos):
        target = yv[pos]
        hi = np.ones_like(target)
        # expand the upper bracket by doubling, capped at the validated domain
        for _ in range(80):
            need = f._eval(hi) < target
            if not np.any(need):
                break
            hi = np.where(need, np.minimum(hi * 2.0, f.domain_hint), hi)
            if np.all(hi >= f.domain_hint):
                break
        short = f._eval(hi) < target - tol
        if np.any(short):
            bad = float(target[short].max())
            raise RangeError(
                f"inversion target {bad:g} exceeds value at domain_hint "
                f"({f.domain_hint:g})"
            )
        lo = np.zeros_like(target)
        mid = 0.5 * (lo + hi)
        for _ in range(200):
            fm = f._eval(mid)
            if np.all(np.abs(fm - target) <= tol):
                break
            go_up = fm < target
            lo = np.where(go_up, mid, lo)
            hi = np.where(go_up, hi, mid)
            if np.all((hi - lo) <= 1e-16 * np.maximum(1.0, hi)):
                mid = 0.5 * (lo + hi)
                break
            mid = 0.5 * (lo + hi)
        out[pos] = mid
    return float(out[0]) if scalar else out.reshape(y.shape)


# -- constructors -----------------------------------------------------------


def identity(domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    return ComparisonFunction("KInf", "affine-power", (1.0, 1.0), domain_hint=domain_hint, label="id")


def linear(c: float, domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    if c <= 0:
        raise DomainError("linear gain must be positive")
    return ComparisonFunction("KInf", "affine-power", (c, 1.0), domain_hint=domain_hint)


def power(c: float, p: float, lin: float = 0.0,
          domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    """c*r**p + lin*r; class K-infinity for c>0, p>0, lin>=0."""
    if c < 0 or lin < 0 or (c == 0 and lin == 0):
        raise DomainError("power form needs nonnegative coefficients, not both zero")
    if p <= 0:
        raise DomainError("exponent must be positive")
    return ComparisonFunction("KInf", "affine-power", (c, p, lin), domain_hint=domain_hint)


def exp_saturation(a: float, lam: float,
                   domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    """a*(1 - exp(-lam*r)); bounded, hence class K but not K-infinity."""
    if a <= 0 or lam <= 0:
        raise DomainError("exp-decay form needs positive parameters")
    return ComparisonFunction("K", "exp-decay", (a, lam), domain_hint=domain_hint)


def log_growth(a: float, b: float, lin: float = 0.0,
               domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    """a*log(1+b*r) + lin*r."""
    if a < 0 or b <= 0 or lin < 0 or (a == 0 and lin == 0):
        raise DomainError("log1p form needs a,lin >= 0 (not both 0) and b > 0")
    return ComparisonFunction("KInf", "log1p", (a, b, lin), domain_hint=domain_hint)


def _join_kind(form: str, f: ComparisonFunction, g: ComparisonFunction) -> str:
    both_inf = f.kind == "KInf" and g.kind == "KInf"
    any_inf = f.kind == "KInf" or g.kind == "KInf"
    if form in ("min-of-two", "composition"):
        return "KInf" if both_inf else "K"
    if form in ("max-of-two", "sum-of-two"):
        return "KInf" if any_inf else "K"
    return "K"


def minimum(f: ComparisonFunction, g: ComparisonFunction) -> ComparisonFunction:
    return ComparisonFunction(_join_kind("min-of-two", f, g), "min-of-two",
                              children=(f, g),
                              domain_hint=min(f.domain_hint, g.domain_hint))


def maximum(f: ComparisonFunction, g: ComparisonFunction) -> ComparisonFunction:
    return ComparisonFunction(_join_kind("max-of-two", f, g), "max-of-two",
                              children=(f, g),
                              domain_hint=min(f.domain_hint, g.domain_hint))


def add(f: ComparisonFunction, g: ComparisonFunction) -> ComparisonFunction:
    return ComparisonFunction(_join_kind("sum-of-two", f, g), "sum-of-two",
                              children=(f, g),
                              domain_hint=min(f.domain_hint, g.domain_hint))


def scale(f: ComparisonFunction, c: float) -> ComparisonFunction:
    """c * f(r) as a composition with a linear outer function."""
    return compose_k(linear(c, domain_hint=DEFAULT_DOMAIN_HINT), f)


def tabulated(knots: Sequence[tuple], tail_slope: Optional[float] = None,
              kind: str = "KInf",
              domain_hint: float = DEFAULT_DOMAIN_HINT) -> ComparisonFunction:
    ks = tuple((float(a), float(b)) for a, b in knots)
    if len(ks) < 2:
        raise DomainError("tabulated form needs at least two knots")
    xs = [k[0] for k in ks]
    if any(b <= a for a, b in zip(xs, xs[1:])):
        raise DomainError("tabulated knots must have strictly increasing abscissae")
    params = (float(tail_slope),) if tail_slope is not None else ()
    return ComparisonFunction(kind, "tabulated", params, knots=ks, domain_hint=domain_hint)


def from_callable(fn: Callable, kind: str = "KInf",
                  domain_hint: float = DEFAULT_DOMAIN_HINT,
                  label: str = "") -> ComparisonFunction:
    return ComparisonFunction(kind, "callable", fn=fn, domain_hint=domain_hint, label=label)


def inverse_of(f: ComparisonFunction, tol: float = DEFAULT_INVERT_TOL) -> ComparisonFunction:
    """The numerical inverse of an increasing ``f`` as a first-class function."""
    hint = f._eval(np.asarray(f.domain_hint, dtype=float))
    hint = float(hint) if np.isfinite(hint) else DEFAULT_DOMAIN_HINT
    return ComparisonFunction(f.kind, "inverse", (tol,), children=(f,),
                              domain_hint=max(hint, 1.0))


# -- core operations ---------------------------------------------------------


def eval_k(f: ComparisonFunction, r):
    """Evaluate ``f`` at nonnegative ``r`` (scalar or array)."""
    arr = _as_array(r)
    if np.any(arr < 0):
        raise DomainError("comparison functions are defined on r >= 0 only")
    out = f._eval(arr)
    if arr.ndim == 0:
        return float(out)
    return out


def invert_k(f: ComparisonFunction, y, tol: float = DEFAULT_INVERT_TOL):
    """Solve f(r) = y by bracketing bisection with upper-bracket doubling."""
    return _invert_array(f, np.asarray(y, dtype=float), tol)


def compose_k(f: ComparisonFunction, g: ComparisonFunction) -> ComparisonFunction:
    """(f o g)(r) = f(g(r)).  Kind is KInf only when both factors are."""
    return ComparisonFunction(_join_kind("composition", f, g), "composition",
                              children=(f, g), domain_hint=g.domain_hint)


# -- KL functions -----------------------------------------------------------


@dataclass(frozen=True)
class DecayFunction:
    """Continuous nonincreasing t -> decay factor, tending to zero."""

    form: str  # "exp" | "power" | "callable"
    params: tuple = ()
    fn: Optional[Callable] = None

    def __call__(self, t):
        arr = _as_array(t)
        if np.any(arr < 0):
            raise DomainError("decay is defined on t >= 0 only")
        if self.form == "exp":
            (lam,) = self.params
            out = np.exp(-lam * arr)
        elif self.form == "power":
            (p,) = self.params
            out = np.power(1.0 + arr, -p)
        elif self.form == "callable":
            out = np.asarray(self.fn(arr), dtype=float)
        else:
            raise DomainError(f"unknown decay form {self.form!r}")
        return float(out) if arr.ndim == 0 else out


def exp_decay(lam: float) -> DecayFunction:
    if lam <= 0:
        raise DomainError("decay rate must be positive")
    return DecayFunction("exp", (lam,))


def power_decay(p: float) -> DecayFunction:
    if p <= 0:
        raise DomainError("decay exponent must be positive")
    return DecayFunction("power", (p,))


@dataclass(frozen=True)
class KLFunction:
    """beta(r, t) = outer(scale * amplitude(r) * decay(t)).

    The separable product covers every decay envelope used by the estimate
    checks; the optional K-infinity ``outer`` composition covers derived
    envelopes such as an inverse gain applied to a known KL bound.
    """

    amplitude: ComparisonFunction
    decay: DecayFunction
    outer: Optional[ComparisonFunction] = None
    scale: float = 1.0

    def eval(self, r, t):
        return eval_kl(self, r, t)

    def beta_zero(self) -> ComparisonFunction:
        """beta(., 0) as a class-K function of r."""
        c = self.scale * self.decay(0.0)
        inner = compose_k(linear(c), self.amplitude) if c != 1.0 else self.amplitude
        if self.outer is not None:
            return compose_k(self.outer, inner)
        return inner


def eval_kl(beta: KLFunction, r, t):
    """Evaluate beta(r, t); broadcasting over numpy arguments."""
    ra = _as_array(r)
    ta = _as_array(t)
    if np.any(ra < 0) or np.any(ta < 0):
        raise DomainError("KL functions are defined for r, t >= 0")
    core = beta.scale * beta.amplitude._eval(ra) * beta.decay(ta)
    if beta.outer is not None:
        core = beta.outer._eval(np.asarray(core, dtype=float))
    if np.ndim(core) == 0:
        return float(core)
    return core


# -- validation -------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    check: str
    at: tuple
    detail: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    kind: str
    grid_size: int
    domain: float
    violations: tuple = ()

    def __bool__(self):
        return self.ok


ZERO_AT_ZERO_TOL = 1e-12


def validate_class(f, grid_size: int = 1024, domain: Optional[float] = None,
                   kl_decay_horizon: float = 1e4, kl_decay_tol: float = 1e-2,
                   max_violations: int = 16) -> ValidationReport:
    """Dense-grid validation of the declared class of ``f``.

    Violations are reported, never raised.  For KL functions the decay-to-zero
    requirement is only checkable at a finite horizon: we require
    ``beta(r, T) < kl_decay_tol * beta(r, 0)`` at ``T = kl_decay_horizon``.
    """
    if grid_size < 2:
        raise DomainError("grid_size must be at least 2")
    if isinstance(f, KLFunction):
        return _validate_kl(f, grid_size, domain, kl_decay_horizon, kl_decay_tol,
                            max_violations)
    dom = domain if domain is not None else f.domain_hint
    grid = np.linspace(0.0, dom, grid_size)
    vals = eval_k(f, grid)
    violations = []
    if abs(vals[0]) > ZERO_AT_ZERO_TOL:
        violations.append(Violation("zero-at-zero", (0.0,), f"f(0) = {vals[0]:.3e}"))
    diffs = np.diff(vals)
    bad = np.nonzero(diffs <= 0)[0]
    for i in bad[:max_violations]:
        violations.append(Violation(
            "strictly-increasing", (float(grid[i]), float(grid[i + 1])),
            f"f({grid[i]:.6g}) = {vals[i]:.6g} >= f({grid[i+1]:.6g}) = {vals[i+1]:.6g}"))
    return ValidationReport(ok=not violations, kind=f.kind, grid_size=grid_size,
                            domain=dom, violations=tuple(violations))


def _validate_kl(beta: KLFunction, grid_size, domain, horizon, tol,
                 max_violations) -> ValidationReport:
    dom = domain if domain is not None else beta.amplitude.domain_hint
    rgrid = np.linspace(0.0, dom, grid_size)
    violations = []
    for t in (0.0, 1.0, 10.0):
        vals = eval_kl(beta, rgrid, t)
        bad = np.nonzero(np.diff(vals) <= 0)[0]
        for i in bad[:max_violations]:
            violations.append(Violation(
                "r-strictly-increasing", (float(rgrid[i]), t),
                f"beta(., {t}) not increasing near r = {rgrid[i]:.6g}"))
        if bad.size:
            break
    tgrid = np.linspace(0.0, horizon, grid_size)
    for r in (1.0, max(dom / 2, 1.0)):
        vals = eval_kl(beta, r, tgrid)
        bad = np.nonzero(np.diff(vals) > 1e-12 * max(1.0, vals[0]))[0]
        for i in bad[:max_violations]:
            violations.append(Violation(
                "t-nonincreasing", (r, float(tgrid[i])),
                f"beta({r}, .) increases near t = {tgrid[i]:.6g}"))
        v0 = eval_kl(beta, r, 0.0)
        vT = eval_kl(beta, r, horizon)
        if v0 > 0 and vT >= tol * v0:
            violations.append(Violation(
                "t-decay-to-zero", (r, horizon),
                f"beta({r}, {horizon:g}) = {vT:.3e} >= {tol:g} * beta({r}, 0)"))
    return ValidationReport(ok=not violations, kind="KL", grid_size=grid_size,
                            domain=dom, violations=tuple(violations))


def require_class(f, what: str = "function", **kw) -> None:
    """Raise ClassValidationError when validation fails (used as a guard)."""
    rep = validate_class(f, **kw)
    if not rep.ok:
        first = rep.violations[0]
        raise ClassValidationError(
            f"{what} failed class validation: {first.check} at {first.at}: {first.detail}")


# -- plain nondecreasing scalar functions ------------------------------------


@dataclass(frozen=True)
class ScalarFn:
    """Nondecreasing scalar function (envelope data, UIB bounds, ...).

    Unlike class-K functions these need not vanish at zero.
    """

    form: str  # "constant" | "affine" | "power" | "tabulated" | "callable"
    params: tuple = ()
    knots: tuple = ()
    fn: Optional[Callable] = None

    def __call__(self, s):
        arr = _as_array(s)
        if self.form == "constant":
            out = np.full_like(arr, self.params[0], dtype=float)
        elif self.form == "affine":
            a, b = self.params
            out = a * arr + b
        elif self.form == "power":
            c, p = self.params[0], self.params[1]
            d = self.params[2] if len(self.params) > 2 else 0.0
            out = c * np.power(arr, p) + d
        elif self.form == "tabulated":
            xs = np.array([k[0] for k in self.knots])
            ys = np.array([k[1] for k in self.knots])
            out = np.interp(arr, xs, ys)
        elif self.form == "callable":
            out = np.asarray(self.fn(arr), dtype=float)
        else:
            raise DomainError(f"unknown scalar-function form {self.form!r}")
        return float(out) if arr.ndim == 0 else out


def const_fn(c: float) -> ScalarFn:
    return ScalarFn("constant", (float(c),))


def affine_fn(a: float, b: float) -> ScalarFn:
    return ScalarFn("affine", (float(a), float(b)))
