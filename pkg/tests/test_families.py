"""Certification machinery on a heterogeneous family: time-invariant and
time-varying linear flows, a bounded nonlinearity, and mixed impulse
sequences, sharing one certificate and one envelope set."""

import numpy as np
import pytest

from impulsecert import certify as ct
from impulsecert import compfun as cf
from impulsecert import gronwall as gw
from impulsecert import hybrid_time as ht
from impulsecert import systems as sl
from impulsecert.gains import AssumptionEnvelopes, IssCertificateData


def _with_nu(system):
    system.assumption_data.update({"nu_f": cf.identity(), "nu_g": cf.identity()})
    return system


@pytest.fixture
def four_member_family():
    def nine():
        return ht.ImpulseSequence(tuple(float(k) for k in range(1, 10)), 10.0)

    s3 = sl.build_system("scalar_linear", {"a": -1.0, "a1": -0.3, "w": 1.0,
                                           "b": 1.0, "jump_scale": -0.5})
    s4 = sl.build_system("bounded_nonlinearity", {"a": -2.0, "s": 0.5,
                                                  "b": 1.0, "jump_scale": -0.5})
    return [(_with_nu(sl.s1_system()), nine()),
            (_with_nu(sl.s2_system()), nine()),
            (_with_nu(s3), ht.gen_dwell(0.7, 10.0, jitter_seed=11)),
            (_with_nu(s4), nine())]


@pytest.fixture
def family_cert():
    # amplitude absorbs the worst transient of the time-varying member
    beta = cf.KLFunction(cf.linear(1.9), cf.exp_decay(np.log(2.0)))
    return IssCertificateData(beta, cf.linear(4.0))


@pytest.fixture
def family_envelopes():
    ident = cf.identity()
    # eta_f must cover the steepest flow map in the family (rate 2.5)
    return AssumptionEnvelopes(
        phi_tilde_f=ident, eta_f=cf.linear(2.5), phi_f=ident,
        N_f=1.0, O_f=0.0, P_f=1.0,
        phi_tilde_g=ident, eta_g=ident, phi_g=ident,
        N_g=1.0, O_g=0.0, P_g=1.0, L_f=2.5)


def test_family_sup_norm_certificate(four_member_family, family_cert):
    spec = ct.EstimateSpec(kind="iss", beta=family_cert.beta,
                           rho=family_cert.rho)
    scenarios = ct.make_scenarios(21, 25, 1, 1, 10.0)
    rep = ct.check_estimate(four_member_family, spec, scenarios, 10.0)
    assert rep.passed, rep.witness


def test_family_pipeline(four_member_family, family_cert, family_envelopes):
    family_envelopes.validate()
    rep = ct.pipeline_iss_to_iiss(four_member_family, family_cert,
                                  family_envelopes, scenario_budget=8,
                                  horizon=10.0, seed=13)
    assert rep.passed, [(s.name, s.report.worst_margin) for s in rep.stages]


def test_h_bound_agrees_with_dense_reference():
    # the polished 1k grid matches a raw 16k reference on random problems
    rng = np.random.default_rng(42)
    sqrt = cf.power(1.0, 0.5)
    omegas = [cf.identity(), sqrt, cf.minimum(sqrt, cf.linear(0.5))]
    for _ in range(8):
        t0 = rng.uniform(0, 1)
        T = t0 + rng.uniform(1, 3)
        raw = np.sort(rng.uniform(t0 + 0.1, T, int(rng.integers(1, 5))))
        ss, last = [], t0
        for s in raw:
            if s - last >= 0.1:
                ss.append(float(s))
                last = float(s)
        c = tuple(rng.uniform(0, 2, len(ss)))
        npieces = int(rng.integers(1, 4))
        if npieces > 1:
            a = gw.RateFunction.piecewise(np.sort(rng.uniform(t0, T, npieces - 1)),
                                          rng.uniform(0, 2, npieces))
        else:
            a = gw.RateFunction.constant(float(rng.uniform(0, 2)))
        prob = gw.GronwallProblem(float(rng.uniform(0.1, 3)), a, c,
                                  omegas[int(rng.integers(0, 3))],
                                  ht.ImpulseSequence(tuple(ss), T), t0, T)
        t = float(rng.uniform((t0 + T) / 2, T))
        std = gw.h_bound(prob, t, grid=1025, polish=True)
        dense = gw.h_bound(prob, t, grid=16385, polish=False)
        assert abs(std - dense) <= 1e-7 * max(abs(dense), 1e-30)
