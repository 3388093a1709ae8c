"""Built-in parametric system library selectable by name + parameters.

Families
--------
scalar_linear        dx = (a + a1*sin(w*t)) x + b u,   jump increment  c*x + d*u
planar_linear        dx = A x + B u,                   jump increment  (J - I) x
scalar_poly          dx = sum_k p_k x^k + b u,         jump increment  c*x + d*u
bounded_nonlinearity dx = a x + s*sin(x) + b u,        jump increment  c*sin(x) + e*x

All jump maps are increments added to the pre-jump state; a reset map
``x -> r(x)`` must be written as the increment ``r(x) - x`` (for example a
halving jump is ``c = -0.5``).
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError
from .simulator import SystemModel


def _p(params: dict, key: str, default=None):
    if key in params:
        return params[key]
    if default is None:
        raise ConfigError(f"system parameter {key!r} is required")
    return default


def scalar_linear(params: dict) -> SystemModel:
    a = float(_p(params, "a"))
    b = float(params.get("b", 0.0))
    a1 = float(params.get("a1", 0.0))
    w = float(params.get("w", 1.0))
    c = float(params.get("jump_scale", 0.0))
    d = float(params.get("jump_input_gain", 0.0))

    def flow(t, x, u):
        return (a + a1 * np.sin(w * t)) * x + b * u

    def jump(t, x, u):
        return c * x + d * u

    return SystemModel(flow, jump, 1, 1, name="scalar_linear",
                       assumption_data=dict(params.get("assumption_data", {})))


def planar_linear(params: dict) -> SystemModel:
    A = np.asarray(_p(params, "A"), dtype=float).reshape(2, 2)
    B = np.asarray(params.get("B", [0.0, 0.0]), dtype=float).reshape(2, -1)
    m = B.shape[1]
    J = np.asarray(params.get("J", np.eye(2)), dtype=float).reshape(2, 2)
    JmI = J - np.eye(2)

    def flow(t, x, u):
        return A @ x + B @ u

    def jump(t, x, u):
        return JmI @ x

    return SystemModel(flow, jump, 2, m, name="planar_linear",
                       assumption_data=dict(params.get("assumption_data", {})))


def scalar_poly(params: dict) -> SystemModel:
    coeffs = [float(c) for c in _p(params, "coeffs")]  # coeffs[k] multiplies x^(k+1)
    b = float(params.get("b", 0.0))
    c = float(params.get("jump_scale", 0.0))
    d = float(params.get("jump_input_gain", 0.0))

    def flow(t, x, u):
        acc = np.zeros_like(x)
        for k, ck in enumerate(coeffs):
            acc = acc + ck * x ** (k + 1)
        return acc + b * u

    def jump(t, x, u):
        return c * x + d * u

    return SystemModel(flow, jump, 1, 1, name="scalar_poly",
                       assumption_data=dict(params.get("assumption_data", {})))


def bounded_nonlinearity(params: dict) -> SystemModel:
    a = float(_p(params, "a"))
    s = float(params.get("s", 0.0))
    b = float(params.get("b", 0.0))
    c = float(params.get("jump_sin_gain", 0.0))
    e = float(params.get("jump_scale", 0.0))
    a1 = float(params.get("a1", 0.0))
    w = float(params.get("w", 1.0))

    def flow(t, x, u):
        return (a + a1 * np.sin(w * t)) * x + s * np.sin(x) + b * u

    def jump(t, x, u):
        return c * np.sin(x) + e * x

    return SystemModel(flow, jump, 1, 1, name="bounded_nonlinearity",
                       assumption_data=dict(params.get("assumption_data", {})))


_REGISTRY = {
    "scalar_linear": scalar_linear,
    "planar_linear": planar_linear,
    "scalar_poly": scalar_poly,
    "bounded_nonlinearity": bounded_nonlinearity,
}


def build_system(name: str, params: dict) -> SystemModel:
    try:
        builder = _REGISTRY[name]
    except KeyError:
        known = ", ".join(sorted(_REGISTRY))
        raise ConfigError(f"unknown system family {name!r}; known: {known}") from None
    return builder(params or {})


# Canonical desk-scale test systems: exponential flow decay with halving jumps,
# without and with an additive input channel.

def s1_system() -> SystemModel:
    return scalar_linear({"a": -1.0, "jump_scale": -0.5})


def s2_system() -> SystemModel:
    return scalar_linear({"a": -1.0, "b": 1.0, "jump_scale": -0.5})


def unstable_system() -> SystemModel:
    return scalar_linear({"a": 1.0, "jump_scale": 0.0})
