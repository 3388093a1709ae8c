import numpy as np
import pytest

from impulsecert import compfun as cf
from impulsecert import gains as gn
from impulsecert import systems as sl
from impulsecert.errors import ConfigError, EnvelopeError, HorizonError


@pytest.fixture
def exp_cert():
    return gn.IssCertificateData(
        cf.KLFunction(cf.identity(), cf.exp_decay(1.0)), cf.identity())


def _envelopes(**overrides):
    ident = cf.identity()
    data = dict(phi_tilde_f=ident, eta_f=ident, phi_f=ident,
                N_f=1.0, O_f=0.0, P_f=1.0,
                phi_tilde_g=ident, eta_g=ident, phi_g=ident,
                N_g=1.0, O_g=0.0, P_g=1.0, L_f=1.0)
    data.update(overrides)
    return gn.AssumptionEnvelopes(**data)


def test_h12_constant_envelopes(exp_cert):
    env = _envelopes(O_f=1.0)
    h1, h2 = gn.h12("f", 5.0, 2.0, env, exp_cert)
    assert (h1, h2) == (2.0, 1.0)


def test_h12_linear_state_envelope(exp_cert):
    env = _envelopes(N_f=cf.ScalarFn("affine", (1.0, 0.0)))
    h1, h2 = gn.h12("f", 1.0, 2.0, env, exp_cert)
    # N(beta(1,0) + rho(2)) = 1 + 2 = 3
    assert h1 == pytest.approx(3.0) and h2 == 1.0


def test_h12_zero_point(exp_cert):
    lin = cf.ScalarFn("affine", (1.0, 0.0))
    env = _envelopes(N_f=lin, O_f=lin, P_f=lin)
    assert gn.h12("f", 0.0, 0.0, env, exp_cert) == (0.0, 0.0)


def test_T_r_exponential(exp_cert):
    want = 1.0 + np.log(3.0)
    assert abs(gn.T_r(exp_cert, 3.0) - want) <= 1e-6
    # the scale cancels for this envelope: same value at any radius
    assert abs(gn.T_r(exp_cert, 0.17) - want) <= 1e-6
    assert abs(gn.T_r(exp_cert, 41.0) - want) <= 1e-6


def test_T_r_power_decay():
    cert = gn.IssCertificateData(
        cf.KLFunction(cf.identity(), cf.power_decay(1.0)), cf.identity())
    assert abs(gn.T_r(cert, 1.0) - 3.0) <= 1e-6


def test_T_r_certified_inequality(exp_cert):
    for r in (0.5, 2.0, 9.0):
        Tr = gn.T_r(exp_cert, r)
        assert Tr > 1.0
        assert cf.eval_kl(exp_cert.beta, r, Tr - 1.0) <= r / 3.0 + 1e-12


def test_T_r_horizon_error():
    slow = gn.IssCertificateData(
        cf.KLFunction(cf.identity(), cf.power_decay(0.1)), cf.identity())
    with pytest.raises(HorizonError):
        gn.T_r(slow, 1.0, search_horizon=2.0)


def test_tilde_h_examples(exp_cert):
    env = _envelopes()
    assert gn.tilde_h(3, 0.0, 1.0, 2.0, 0.5, env, exp_cert) == 0.0
    assert abs(gn.tilde_h(0, 1.0, 1.0, 3.0, 0.0, env, exp_cert) - np.e) <= 1e-12
    val = gn.tilde_h(1, 1.0, 1.0, 3.0, 0.0, env, exp_cert)
    assert abs(val - (np.e + np.e ** 2)) <= 1e-10


def test_tilde_h_monotone_random(exp_cert):
    rng = np.random.default_rng(0)
    env = _envelopes()
    for _ in range(40):
        j = int(rng.integers(0, 3))
        p, T, r, s = rng.uniform(0.1, 3.0, 4)
        base = gn.tilde_h(j, p, T, r, s, env, exp_cert)
        assert gn.tilde_h(j + 1, p, T, r, s, env, exp_cert) >= base
        assert gn.tilde_h(j, p * 1.1, T, r, s, env, exp_cert) >= base
        assert gn.tilde_h(j, p, T + 0.3, r, s, env, exp_cert) >= base
        assert gn.tilde_h(j, p, T, r + 0.3, s, env, exp_cert) >= base - 1e-12
        assert gn.tilde_h(j, p, T, r, s + 0.3, env, exp_cert) >= base


def test_tilde_p_certified_pair(exp_cert):
    env = _envelopes()
    tol = 1e-6
    r, s = 3.0, 0.5
    p_hat = gn.tilde_p(r, s, env, exp_cert, tol)
    assert p_hat > 0
    Tr = gn.T_r(exp_cert, r)
    corners = [(j, Tr - j) for j in range(int(np.floor(Tr)) + 1)]
    assert all(gn.tilde_h(j, p_hat, T, r, s, env, exp_cert) <= r / 6.0
               for j, T in corners)
    assert not all(gn.tilde_h(j, p_hat * (1 + tol), T, r, s, env, exp_cert)
                   <= r / 6.0 for j, T in corners)


def test_tilde_p_nonincreasing_in_s(exp_cert):
    env = _envelopes()
    vals = [gn.tilde_p(2.0, s, env, exp_cert) for s in (0.0, 0.5, 1.0, 2.0)]
    assert all(a >= b - 1e-12 for a, b in zip(vals, vals[1:]))


def test_ell_at_one_is_zero(exp_cert):
    assert gn.ell(1.0, _envelopes(), exp_cert) == 0.0


def test_ell_nondecreasing(exp_cert):
    env = _envelopes()
    vals = [gn.ell(rb, env, exp_cert, grid=12) for rb in (1.5, 2.0, 3.0)]
    assert all(a <= b + 1e-12 for a, b in zip(vals, vals[1:]))


def test_ell_grid_refinement_stable(exp_cert):
    env = _envelopes()
    coarse = gn.ell(2.0, env, exp_cert, grid=12)
    fine = gn.ell(2.0, env, exp_cert, grid=120)
    assert abs(fine - coarse) <= 0.02 * max(fine, 1e-30)


def test_synthesize_worked_offset(exp_cert):
    res = gn.synthesize_ubebs_gain(_envelopes(), exp_cert,
                                   gn.GainGridSpec(r_max=6.0, n_r=12))
    # Psi(0) = 1*(1 + 1 + 0) + 1*1 = 3 for unit envelopes
    assert res.psi_zero == pytest.approx(3.0)
    assert cf.eval_k(res.alpha, 0.0) == 0.0
    bs = np.linspace(0.0, 4.0, 33)
    a2 = cf.eval_k(res.alpha, bs) ** 2
    assert np.all(cf.eval_k(res.chi1, bs) >= a2 - 1e-12)
    assert np.all(cf.eval_k(res.chi2, bs) >= a2 - 1e-12)
    assert np.all(cf.eval_k(res.kappa, res.ell_table[:, 0])
                  >= res.ell_table[:, 1] - 1e-12)
    for f in (res.alpha, res.chi1, res.chi2, res.kappa):
        assert cf.validate_class(f, domain=30.0).ok


def test_psi_big_nondecreasing_and_continuous(exp_cert):
    res = gn.synthesize_ubebs_gain(_envelopes(), exp_cert,
                                   gn.GainGridSpec(r_max=4.0, n_r=8))
    grid = np.linspace(0.0, 20.0, 257)
    vals = res.psi_big(grid)
    assert np.all(np.diff(vals) >= -1e-12)
    assert np.max(np.abs(np.diff(vals))) < 10.0  # no jumps at this resolution


def test_ubebs_estimate_form_chain(exp_cert):
    # alpha_u(at(a) + at(2 pt(E)) + at(2 Psi0)) <= a + E + c on samples
    res = gn.synthesize_ubebs_gain(_envelopes(), exp_cert,
                                   gn.GainGridSpec(r_max=6.0, n_r=12))
    alpha_u, c = gn.ubebs_estimate_form(res)
    assert cf.validate_class(alpha_u, domain=20.0).ok
    rng = np.random.default_rng(1)
    at, pt = res.alpha_tilde, res.psi_tilde
    for _ in range(60):
        a_val = float(rng.uniform(0, 10))
        E = float(rng.uniform(0, 10))
        reach = cf.eval_k(at, a_val) + cf.eval_k(at, 2 * cf.eval_k(pt, E)) \
            + cf.eval_k(at, 2 * res.psi_zero)
        assert cf.eval_k(alpha_u, reach) <= a_val + E + c + 1e-7


def test_psi_from_iiss_examples():
    beta = cf.KLFunction(cf.identity(), cf.exp_decay(1.0))
    psi = gn.psi_from_iiss(beta)
    assert cf.eval_k(psi, 0.0) == 0.0
    assert abs(cf.eval_k(psi, 1.0) - 0.5) <= 1e-9
    beta2 = cf.KLFunction(cf.linear(2.0), cf.exp_decay(1.0))
    psi2 = gn.psi_from_iiss(beta2)
    assert abs(cf.eval_k(psi2, 1.0) - 0.25) <= 1e-9


def test_psi_chain_inequality():
    # psi(2 beta0(a)) + psi(2 b) <= a + b
    rng = np.random.default_rng(2)
    for beta in (cf.KLFunction(cf.identity(), cf.exp_decay(1.0)),
                 cf.KLFunction(cf.linear(3.0), cf.power_decay(1.0))):
        psi = gn.psi_from_iiss(beta)
        b0 = beta.beta_zero()
        for _ in range(50):
            a_val, b_val = rng.uniform(0, 30, 2)
            lhs = cf.eval_k(psi, 2 * cf.eval_k(b0, a_val)) \
                + cf.eval_k(psi, 2 * b_val)
            assert lhs <= a_val + b_val + 1e-8


def test_rho_tilde_dominance_and_crossover():
    r1, r2 = gn.rho_tilde(cf.identity(), cf.power(1.0, 2.0),
                          cf.linear(0.5), cf.identity())
    assert cf.eval_k(r1, 2.0) == 2.0  # identity dominates nu = r/2
    # r^2 vs id crosses at 1
    assert cf.eval_k(r2, 0.5) == 0.5
    assert cf.eval_k(r2, 2.0) == 4.0
    rng = np.random.default_rng(3)
    for _ in range(30):
        q = float(rng.uniform(0, 5))
        assert cf.eval_k(r1, q) >= max(q, 0.5 * q) - 1e-12
        assert cf.eval_k(r2, q) >= max(q * q, q) - 1e-12


def test_rho_tilde_requires_kinf():
    bounded = cf.exp_saturation(1.0, 1.0)
    with pytest.raises(ConfigError):
        gn.rho_tilde(bounded, bounded, bounded, bounded)


def test_estimate_kappa_linear_input():
    system = sl.s2_system()
    system.assumption_data.update({"nu_f": cf.identity(), "nu_g": cf.identity()})
    est = gn.estimate_kappa(system, 2.0, 0.1,
                            gn.KappaSampleSpec(n_t=8, n_x=16, n_u=16))
    assert est.value <= 1.0 + 1e-9
    assert "lower estimate" in est.note


def test_estimate_kappa_input_independent():
    system = sl.s1_system()
    system.assumption_data.update({"nu_f": cf.identity(), "nu_g": cf.identity()})
    est = gn.estimate_kappa(system, 2.0, 0.1,
                            gn.KappaSampleSpec(n_t=4, n_x=8, n_u=8))
    assert est.value == 0.0


def test_estimate_kappa_cubic_envelope():
    system = sl.s2_system()
    cube = cf.power(1.0, 3.0)
    system.assumption_data.update({"nu_f": cube, "nu_g": cube})

    def flow(t, x, u):
        return -x + u ** 3

    cubic = type(system)(flow, system.jump, 1, 1, system.assumption_data)
    est = gn.estimate_kappa(cubic, 2.0, 0.1,
                            gn.KappaSampleSpec(n_t=4, n_x=8, n_u=24))
    assert est.value <= 1.0 + 1e-9


def test_estimate_kappa_inconsistent_envelope():
    import numpy as np
    from impulsecert.simulator import SystemModel

    def flow(t, x, u):  # sqrt growth cannot be dominated by eta + kappa * u^3
        return -x + 10.0 * np.sqrt(np.abs(u)) * np.sign(u)

    system = SystemModel(flow, lambda t, x, u: 0.0 * x, 1, 1,
                         {"nu_f": cf.power(1.0, 3.0), "nu_g": cf.power(1.0, 3.0)})
    with pytest.raises(EnvelopeError):
        gn.estimate_kappa(system, 1.0, 0.01,
                          gn.KappaSampleSpec(n_t=4, n_x=4, n_u=32,
                                             mu_min=1e-6))


def test_envelope_b3_validation():
    bad = _envelopes(eta_f=cf.power(1.0, 0.5))  # sqrt violates eta <= L s near 0
    with pytest.raises(EnvelopeError):
        bad.validate()


def test_kinf_majorant_dominates_samples():
    rng = np.random.default_rng(4)
    pts = rng.uniform(0.1, 10, 40)
    vals = np.maximum.accumulate(rng.uniform(0, 5, 40)[np.argsort(pts)])
    maj = gn.kinf_majorant(np.sort(pts), vals)
    assert cf.validate_class(maj, domain=20.0).ok
    for x, v in zip(np.sort(pts), vals):
        assert cf.eval_k(maj, x) >= v - 1e-12
    floor = gn.kinf_majorant(np.sort(pts), vals, floor_identity=True)
    assert cf.eval_k(floor, 1000.0) >= 1000.0
