import numpy as np
import pytest

from impulsecert import compfun as cf
from impulsecert import hybrid_time as ht
from impulsecert import signals as sg
from impulsecert.errors import DomainError


def _ramp(horizon=2.0):
    return sg.piecewise_signal([(0.0, horizon,
                                 lambda t: np.atleast_1d(np.asarray(t, dtype=float)))], 1)


def test_sup_constant():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    assert sg.sup_norm(sg.constant_signal(3.0, 2.0), 0.0, 2.0, gam) == 3.0


def test_sup_point_value_dominates():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    u = sg.piecewise_signal([(0.0, 2.0, lambda t: np.atleast_1d(np.asarray(t, dtype=float)))],
                            1, {1.0: [5.0]})
    assert sg.sup_norm(u, 0.0, 2.0, gam) == 5.0


def test_sup_zero_signal():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    assert sg.sup_norm(sg.zero_signal(1, 2.0), 0.0, 2.0, gam) == 0.0


def test_sup_empty_interval_convention():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    assert sg.sup_norm(sg.constant_signal(3.0, 2.0), 1.5, 1.5, gam) == 0.0


def test_energy_worked_value():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    ident = cf.identity()
    val = sg.energy_norm(sg.constant_signal(3.0, 2.0), 0.0, 2.0, gam, ident, ident)
    assert abs(val - 9.0) <= 1e-10


def test_energy_zero():
    gam = ht.ImpulseSequence((1.0,), 2.0)
    ident = cf.identity()
    assert sg.energy_norm(sg.zero_signal(1, 2.0), 0.0, 2.0, gam, ident, ident) == 0.0


def test_energy_quadratic_integral():
    # integral of t^2 over (0, 1] is 1/3
    u = _ramp(1.0)
    val = sg.energy_norm(u, 0.0, 1.0, ht.ImpulseSequence.empty(1.0),
                         cf.power(1.0, 2.0), cf.identity())
    assert abs(val - 1.0 / 3.0) <= 1e-10


def test_energy_additivity_and_monotonicity_random():
    rng = np.random.default_rng(0)
    ident = cf.identity()
    square = cf.power(1.0, 2.0)
    for _ in range(20):
        a1, w1 = rng.uniform(0.3, 2.0), rng.uniform(0.5, 3.0)
        u = sg.piecewise_signal(
            [(0.0, 4.0, lambda t, a=a1, w=w1: np.atleast_1d(a * np.sin(w * np.asarray(t))))],
            1, {1.5: [rng.uniform(-2, 2)]})
        gam = ht.ImpulseSequence((0.7, 1.5, 2.9), 4.0)
        a, b, c = np.sort(rng.uniform(0, 4, 3))
        e_ab = sg.energy_norm(u, a, b, gam, ident, square)
        e_bc = sg.energy_norm(u, b, c, gam, ident, square)
        e_ac = sg.energy_norm(u, a, c, gam, ident, square)
        assert abs(e_ab + e_bc - e_ac) <= 1e-9
        assert e_ab <= e_ac + 1e-12 and e_bc <= e_ac + 1e-12
        assert sg.sup_norm(u, a, b, gam) <= sg.sup_norm(u, a, c, gam) + 1e-9


def test_truncate_constant():
    u = sg.truncate(sg.constant_signal(3.0, 2.0), 1.0)
    assert u.magnitude(0.5) == 1.0


def test_truncate_pointwise_formula():
    ub = sg.truncate(_ramp(), 1.0)
    for t in (0.2, 0.8, 1.0, 1.7):
        assert abs(ub.magnitude(t) - min(t, 1.0)) <= 1e-12


def test_truncate_to_zero():
    ub = sg.truncate(_ramp(), 0.0)
    assert sg.sup_norm(ub, 0.0, 2.0, ht.ImpulseSequence.empty(2.0)) == 0.0


def test_truncate_negative_rejected():
    with pytest.raises(DomainError):
        sg.truncate(_ramp(), -1.0)


def test_truncation_sup_bound_random():
    rng = np.random.default_rng(1)
    for _ in range(100):
        a1, w1 = rng.uniform(0.3, 3.0), rng.uniform(0.5, 4.0)
        u = sg.piecewise_signal(
            [(0.0, 3.0, lambda t, a=a1, w=w1: np.atleast_1d(a * np.sin(w * np.asarray(t))))],
            1, {1.0: [rng.uniform(-4, 4)]})
        gam = ht.ImpulseSequence((1.0, 2.0), 3.0)
        b = float(rng.uniform(0.0, 2.0))
        assert sg.sup_norm(sg.truncate(u, b), 0.0, 3.0, gam) <= b + 1e-12


def test_exceedance_ramp():
    measure, count = sg.exceedance(_ramp(), 1.0, ht.ImpulseSequence.empty(2.0))
    assert abs(measure - 1.0) <= 1e-9
    assert count == 0


def test_exceedance_zero_signal():
    measure, count = sg.exceedance(sg.zero_signal(1, 2.0), 0.0,
                                   ht.ImpulseSequence.empty(2.0))
    assert measure == 0.0 and count == 0


def test_exceedance_everywhere():
    gam = ht.ImpulseSequence((1.0, 2.0), 2.0)
    measure, count = sg.exceedance(sg.constant_signal(3.0, 2.0), 1.0, gam)
    assert abs(measure - 2.0) <= 1e-12 and count == 2


def test_chebyshev_bounds_random():
    # measure(|u| > b) * chi1(b) <= energy and impulse count * chi2(b) <= energy
    rng = np.random.default_rng(2)
    square = cf.power(1.0, 2.0)
    ident = cf.identity()
    for _ in range(50):
        a1, w1 = rng.uniform(0.3, 2.5), rng.uniform(0.5, 4.0)
        u = sg.piecewise_signal(
            [(0.0, 3.0, lambda t, a=a1, w=w1: np.atleast_1d(a * np.sin(w * np.asarray(t))))],
            1, {1.0: [rng.uniform(-3, 3)], 2.0: [rng.uniform(-3, 3)]})
        gam = ht.ImpulseSequence((1.0, 2.0), 3.0)
        b = float(rng.uniform(0.05, 2.0))
        E = sg.energy_norm(u, 0.0, 3.0, gam, square, ident)
        measure, count = sg.exceedance(u, b, gam)
        assert measure * float(square(b)) <= E + 1e-7 * (1 + E)
        assert count * float(ident(b)) <= E + 1e-7 * (1 + E)


def test_cumulative_energy_fast_matches_adaptive():
    gam = ht.ImpulseSequence((1.0, 2.5), 4.0)
    u = sg.piecewise_signal(
        [(0.0, 4.0, lambda t: np.atleast_1d(1.3 * np.sin(2.1 * np.asarray(t))))],
        1, {1.0: [0.7]})
    ident = cf.identity()
    square = cf.power(1.0, 2.0)
    ts = np.linspace(0.0, 4.0, 23)
    fast = sg.cumulative_energy_fast(u, 0.0, ts, gam, square, ident)
    slow = np.array([sg.energy_norm(u, 0.0, float(t), gam, square, ident)
                     if t > 0 else 0.0 for t in ts])
    np.testing.assert_allclose(fast, slow, atol=5e-9)


def test_cumulative_sup_matches_direct():
    gam = ht.ImpulseSequence((1.0,), 3.0)
    u = sg.piecewise_signal(
        [(0.0, 3.0, lambda t: np.atleast_1d(np.sin(np.asarray(t))))], 1,
        {1.0: [2.0]})
    ts = np.linspace(0.0, 3.0, 31)
    fast = sg.cumulative_sup(u, 0.0, ts, gam)
    slow = np.array([sg.sup_norm(u, 0.0, float(t), gam) if t > 0 else 0.0
                     for t in ts])
    np.testing.assert_allclose(fast, slow, atol=1e-3)


def test_scale_signal():
    u = sg.constant_signal(3.0, 2.0)
    half = sg.scale_signal(u, 0.5)
    assert half.magnitude(1.0) == 1.5


def test_point_value_defaults_to_segment():
    u = _ramp()
    np.testing.assert_allclose(u.value_at_impulse(0.5), [0.5])


def test_interval_validation():
    u = sg.constant_signal(1.0, 2.0)
    gam = ht.ImpulseSequence.empty(2.0)
    with pytest.raises(DomainError):
        sg.sup_norm(u, 0.0, 3.0, gam)
