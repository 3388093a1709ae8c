import numpy as np
import pytest

from impulsecert import certify as ct
from impulsecert import compfun as cf
from impulsecert import hybrid_time as ht
from impulsecert import systems as sl
from impulsecert.errors import ConfigError


def _with_nu(system):
    system.assumption_data.update({"nu_f": cf.identity(), "nu_g": cf.identity()})
    return system


@pytest.fixture
def fam_s1(nine_jumps, s1):
    return [(s1, nine_jumps)]


@pytest.fixture
def scenarios():
    return ct.make_scenarios(5, 15, 1, 1, 10.0)


def test_guas_pass_and_fail(fam_s1, scenarios, halving_beta):
    good = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    rep = ct.check_estimate(fam_s1, good, scenarios, 10.0)
    assert rep.passed and rep.worst_margin >= -1e-7
    bad = ct.EstimateSpec(kind="0-guas",
                          beta=cf.KLFunction(cf.identity(), cf.exp_decay(2.0)))
    rep_bad = ct.check_estimate(fam_s1, bad, scenarios, 10.0)
    assert not rep_bad.passed
    w = rep_bad.witness
    assert w is not None and w.lhs > w.rhs


def test_zero_scenarios_pass_trivially(fam_s1, halving_beta):
    zero = [ct.Scenario(t0=0.0, x0=np.zeros(1), u=None, label="origin")]
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    rep = ct.check_estimate(fam_s1, spec, zero, 10.0)
    assert rep.passed and rep.worst_margin >= 0.0


def test_empty_scenarios_rejected(fam_s1, halving_beta):
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    with pytest.raises(ConfigError):
        ct.check_estimate(fam_s1, spec, [], 10.0)


def test_reports_reproduce_bit_identically(fam_s1, scenarios, halving_beta):
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    a = ct.check_estimate(fam_s1, spec, scenarios, 10.0)
    b = ct.check_estimate(fam_s1, spec, scenarios, 10.0)
    assert a == b


def test_iss_on_input_system(nine_jumps, s2, scenarios, halving_beta):
    spec = ct.EstimateSpec(kind="iss", beta=halving_beta, rho=cf.linear(2.0))
    rep = ct.check_estimate([(s2, nine_jumps)], spec, scenarios, 10.0)
    assert rep.passed


def test_iiss_and_ubebs_kinds(fam_s1, scenarios, halving_beta, ident):
    spec = ct.EstimateSpec(kind="iiss", beta=halving_beta, alpha=ident,
                           rho1=ident, rho2=ident)
    assert ct.check_estimate(fam_s1, spec, scenarios, 10.0).passed
    ub = ct.EstimateSpec(kind="ubebs", alpha=cf.linear(0.5), rho1=ident,
                         rho2=ident, offset=0.0)
    assert ct.check_estimate(fam_s1, ub, scenarios, 10.0).passed


def test_spec_validation_guards(halving_beta, ident):
    with pytest.raises(ConfigError):
        ct.EstimateSpec(kind="iss", beta=halving_beta).validate()  # missing rho
    with pytest.raises(ConfigError):
        ct.EstimateSpec(kind="0-guas", beta=halving_beta, offset=1.0).validate()
    with pytest.raises(ConfigError):
        ct.EstimateSpec(kind="nope", beta=halving_beta).validate()


def test_weak_mode_differs_from_strong(fam_s1, halving_beta):
    # envelope decaying only in elapsed time is easier to satisfy: a strong
    # pass implies a weak pass at every sampled point
    scenarios = ct.make_scenarios(6, 8, 1, 1, 10.0)
    runs = ct.simulate_runs(fam_s1, scenarios, 10.0, zero_input=True)
    spec_s = ct.EstimateSpec(kind="0-guas", mode="strong", beta=halving_beta)
    spec_w = ct.EstimateSpec(kind="0-guas", mode="weak", beta=halving_beta)
    for run in runs:
        ms = ct.margins_for(run, spec_s)
        mw = ct.margins_for(run, spec_w)
        assert np.all(mw >= ms - 1e-12)


def test_escape_reported_not_failed():
    # enormous envelope: the estimate holds on the maximal interval, and the
    # blow-up is reported separately as an inconsistency flag
    fam = [(_with_nu(sl.unstable_system()), ht.ImpulseSequence.empty(40.0))]
    beta = cf.KLFunction(cf.linear(1e14), cf.exp_decay(1e-6))
    spec = ct.EstimateSpec(kind="0-guas", beta=beta)
    scenarios = [ct.Scenario(t0=0.0, x0=np.array([1.0]), u=None, label="x")]
    rep = ct.check_estimate(fam, spec, scenarios, 40.0)
    assert rep.passed
    assert rep.escapes and rep.escape_inconsistency


def test_derive_guas_and_ubebs_from_iiss(fam_s1, scenarios, halving_beta, ident):
    spec = ct.EstimateSpec(kind="iiss", beta=halving_beta, alpha=ident,
                           rho1=ident, rho2=ident)
    assert ct.check_estimate(fam_s1, spec, scenarios, 10.0).passed
    g = ct.derive_guas_from_iiss(spec)
    assert g.kind == "0-guas"
    assert ct.check_estimate(fam_s1, g, scenarios, 10.0).passed
    ub = ct.derive_ubebs_from_iiss(spec)
    assert ub.kind == "ubebs" and ub.offset == 0.0
    assert ct.check_estimate(fam_s1, ub, scenarios, 10.0).passed


def test_pipeline_family_and_unstable(nine_jumps, halving_cert, unit_envelopes):
    fam = [(_with_nu(sl.s1_system()), nine_jumps),
           (_with_nu(sl.s2_system()), nine_jumps)]
    rep = ct.pipeline_iss_to_iiss(fam, halving_cert, unit_envelopes,
                                  scenario_budget=8, horizon=10.0, seed=2)
    assert rep.passed and [s.name for s in rep.stages] == [
        "zero-input-decay", "bounded-energy-offset",
        "bounded-energy-zero-offset", "integral-estimate-candidate"]
    fam_u = [(_with_nu(sl.unstable_system()), ht.ImpulseSequence.empty(10.0))]
    rep_u = ct.pipeline_iss_to_iiss(fam_u, halving_cert, unit_envelopes,
                                    scenario_budget=4, horizon=10.0, seed=2)
    assert not rep_u.passed and rep_u.halted_at == "zero-input-decay"
    assert len(rep_u.stages) == 1


def test_pipeline_empty_budget_rejected(nine_jumps, halving_cert, unit_envelopes):
    fam = [(_with_nu(sl.s1_system()), nine_jumps)]
    with pytest.raises(ConfigError):
        ct.pipeline_iss_to_iiss(fam, halving_cert, unit_envelopes,
                                scenario_budget=0)


def test_pipeline_missing_nu_rejected(nine_jumps, halving_cert, unit_envelopes):
    fam = [(sl.s1_system(), nine_jumps)]  # no nu_f / nu_g attached
    with pytest.raises(ConfigError):
        ct.pipeline_iss_to_iiss(fam, halving_cert, unit_envelopes,
                                scenario_budget=4)


def test_probe_finds_deltas(nine_jumps, ident):
    fam = [(_with_nu(sl.s1_system()), nine_jumps)]
    rep = ct.probe_eps_delta(fam, ident, ident, eps_grid=[0.5],
                             r_grid=[1.0], T_search=[2.0, 5.0], budget=120,
                             seed=4)
    assert all(d.status == "found" for d in rep.deltas)
    assert all(a.status == "found" for a in rep.attractivity)
    assert rep.cells and rep.cells[0].C <= 1.0 + 1e-9


def test_probe_unstable_inconclusive(ident):
    fam = [(_with_nu(sl.unstable_system()), ht.ImpulseSequence.empty(10.0))]
    rep = ct.probe_eps_delta(fam, ident, ident, eps_grid=[0.5], r_grid=[1.0],
                             T_search=[2.0, 5.0], budget=80, seed=4)
    assert rep.attractivity[0].status == "inconclusive"


def test_weak_strong_equiv_requires_uib(halving_beta):
    packed = ht.ImpulseSequence(tuple((i + 1) / 10 for i in range(10)), 10.0)
    fam = [(sl.s1_system(), packed)]
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    scenario = [ct.Scenario(t0=0.0, x0=np.array([1.0]), u=None)]
    with pytest.raises(ConfigError):
        ct.check_weak_strong_equiv(fam, lambda s: np.asarray(s) + 1.0,
                                   spec, scenario, 10.0)


def test_weak_strong_equiv_passes_on_dwell_family(halving_beta):
    fam = [(sl.s1_system(), ht.gen_dwell(0.5, 10.0))]
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    scenarios = ct.make_scenarios(8, 6, 1, 1, 10.0)
    rep = ct.check_weak_strong_equiv(fam, lambda s: 2 * np.asarray(s) + 1.0,
                                     spec, scenarios, 10.0)
    assert rep.passed and rep.pointwise_ok and rep.surrogate.passed


def test_make_scenarios_deterministic():
    a = ct.make_scenarios(3, 10, 1, 1, 10.0)
    b = ct.make_scenarios(3, 10, 1, 1, 10.0)
    for x, y in zip(a, b):
        assert x.t0 == y.t0 and np.array_equal(x.x0, y.x0)
        assert x.label == y.label


def test_per_run_margins_shape(fam_s1, halving_beta):
    scenarios = ct.make_scenarios(9, 4, 1, 1, 10.0)
    runs = ct.simulate_runs(fam_s1, scenarios, 10.0, zero_input=True)
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    rows = ct.per_run_margins(runs, spec)
    assert len(rows) == 4
    assert all(len(r) == 4 for r in rows)


def test_empirical_alpha_majorant_floors_identity(fam_s1, ident):
    scenarios = ct.make_scenarios(11, 6, 1, 1, 10.0)
    runs = ct.simulate_runs(fam_s1, scenarios, 10.0)
    hat = ct.empirical_alpha_majorant(runs, ident, ident)
    for r in (0.5, 3.0, 50.0):
        assert cf.eval_k(hat, r) >= r


def test_full_window_norm_flag(nine_jumps, s2, halving_beta, ident):
    scenarios = ct.make_scenarios(13, 6, 1, 1, 10.0)
    runs = ct.simulate_runs([(s2, nine_jumps)], scenarios, 10.0)
    windowed = ct.EstimateSpec(kind="iiss", beta=halving_beta, alpha=ident,
                               rho1=ident, rho2=ident)
    full = ct.EstimateSpec(kind="iiss", beta=halving_beta, alpha=ident,
                           rho1=ident, rho2=ident, full_window=True)
    for run in runs:
        # the full-window energy dominates every windowed value pointwise
        assert np.all(ct.margins_for(run, full)
                      >= ct.margins_for(run, windowed) - 1e-12)
    assert ct.report_from_runs(runs, full).passed


def test_threaded_runs_match_sequential(fam_s1, halving_beta, monkeypatch):
    scenarios = ct.make_scenarios(15, 6, 1, 1, 10.0)
    seq = ct.simulate_runs(fam_s1, scenarios, 10.0, zero_input=True)
    monkeypatch.setenv("IMPULSECERT_THREADS", "4")
    par = ct.simulate_runs(fam_s1, scenarios, 10.0, zero_input=True)
    spec = ct.EstimateSpec(kind="0-guas", beta=halving_beta)
    assert ct.report_from_runs(seq, spec) == ct.report_from_runs(par, spec)
