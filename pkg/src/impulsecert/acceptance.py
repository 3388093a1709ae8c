"""Desk-scale acceptance battery: one function per criterion.

Each criterion is deterministic for a fixed seed, prints nothing, and returns
a ``CriterionResult``; the CLI ``suite`` subcommand and the pytest acceptance
module both dispatch through ``run_suite``.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import compfun as cf
from . import certify as ct
from . import gains as gn
from . import gronwall as gw
from . import hybrid_time as ht
from . import signals as sg
from . import simulator as sim
from . import systems as sl


@dataclass(frozen=True)
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0


def _result(name: str, passed: bool, detail: str) -> CriterionResult:
    return CriterionResult(name, bool(passed), detail)


def _nine_jumps(horizon: float = 10.0) -> ht.ImpulseSequence:
    return ht.ImpulseSequence(tuple(float(k) for k in range(1, 10)), horizon)


def _with_nu(system: sim.SystemModel) -> sim.SystemModel:
    system.assumption_data.update({"nu_f": cf.identity(), "nu_g": cf.identity()})
    return system


def _halving_cert() -> gn.IssCertificateData:
    beta = cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0)))
    return gn.IssCertificateData(beta, cf.linear(2.0))


def _unit_envelopes() -> gn.AssumptionEnvelopes:
    ident = cf.identity()
    return gn.AssumptionEnvelopes(
        phi_tilde_f=ident, eta_f=ident, phi_f=ident, N_f=1.0, O_f=0.0, P_f=1.0,
        phi_tilde_g=ident, eta_g=ident, phi_g=ident, N_g=1.0, O_g=0.0, P_g=1.0,
        L_f=1.0)


# -- 1: closed-form trajectory ---------------------------------------------------


def criterion_01_closed_form(seed: int = 0) -> CriterionResult:
    """Exponential flow with halving jumps matches its closed form, and the
    integral identity residual stays below tolerance."""
    gamma = _nine_jumps()
    traj = sim.simulate(sl.s1_system(), gamma, 0.0, [1.0], None, 10.0)
    ts = np.unique(np.concatenate([
        np.linspace(0.0, 10.0, 4001), gamma.arr(),
        np.nextafter(gamma.arr(), -np.inf)]))
    xs = traj.eval_many(ts)[:, 0]
    n = ht.count_impulses_many(gamma, 0.0, ts)
    ref = np.exp(-ts) * np.power(2.0, -n.astype(float))
    err = float(np.max(np.abs(xs - ref)))
    res = sim.residual(traj, sl.s1_system(), gamma, None)
    ok = err <= 1e-8 and res <= 1e-6
    return _result("closed-form-trajectory", ok,
                   f"max traj error {err:.2e} (tol 1e-8), residual {res:.2e} (tol 1e-6)")


# -- 2-4: generalized Gronwall machinery -------------------------------------------


_SQRT = cf.power(1.0, 0.5)
_OMEGAS = (cf.identity(), _SQRT, cf.minimum(_SQRT, cf.linear(0.5)),
           cf.minimum(cf.identity(), cf.compose_k(cf.linear(2.0), _SQRT)))


def _random_gronwall(rng, force_p_zero: bool = False,
                     constant_rate: bool = False) -> gw.GronwallProblem:
    t0 = float(rng.uniform(0.0, 1.0))
    T = t0 + float(rng.uniform(1.0, 4.0))
    k = int(rng.integers(0, 6))
    raw = np.sort(rng.uniform(t0 + 0.05, T, k))
    ss, last = [], t0
    for s in raw:  # keep jumps separated so oracle grids resolve them
        if s - last >= 0.05:
            ss.append(float(s))
            last = float(s)
    c = tuple(float(x) for x in rng.uniform(0.0, 2.0, len(ss)))
    if constant_rate:
        a = gw.RateFunction.constant(float(rng.uniform(0.0, 2.0)))
    else:
        npieces = int(rng.integers(1, 4))
        if npieces == 1:
            a = gw.RateFunction.constant(float(rng.uniform(0.0, 2.0)))
        else:
            bps = np.sort(rng.uniform(t0, T, npieces - 1))
            a = gw.RateFunction.piecewise(bps, rng.uniform(0.0, 2.0, npieces))
    p = 0.0 if force_p_zero else float(rng.uniform(0.0, 3.0))
    omega = _OMEGAS[int(rng.integers(0, len(_OMEGAS)))]
    return gw.GronwallProblem(p, a, c, omega,
                              ht.ImpulseSequence(tuple(ss), T), t0, T)


def criterion_02_gronwall_domination(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = -np.inf
    n_fail = 0
    for i in range(200):
        prob = _random_gronwall(rng, force_p_zero=(i % 40 == 7))
        rep = gw.domination_oracle(prob, grid=801, trials=1, seed=seed + i)
        worst = max(worst, rep.extremal_margin, rep.trials_margin)
        if not rep.ok:
            n_fail += 1
        if prob.p == 0.0:
            h = gw.h_bound(prob, prob.T)
            if h != 0.0:
                n_fail += 1
    ok = n_fail == 0
    return _result("gronwall-domination", ok,
                   f"200 problems, failures {n_fail}, worst margin {worst:.3g} "
                   "(rel slack 1e-7); p=0 exact zero")


def criterion_03_gronwall_semigroup(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 1)
    violations = 0
    worst_ratio = 0.0
    for _ in range(100):
        prob = _random_gronwall(rng)
        k = len(prob.c_seq)
        pts = np.sort(rng.uniform(prob.t0, prob.T, 20))
        h = gw.h_bound(prob, pts, level=k)
        for j in range(10):
            r, t = sorted((pts[2 * j], pts[2 * j + 1]))
            hr = h[np.searchsorted(pts, r)]
            htv = h[np.searchsorted(pts, t)]
            lhs = hr * np.exp(prob.a.integral(r, t))
            if htv > 0:
                worst_ratio = max(worst_ratio, lhs / htv)
            if lhs > htv * (1.0 + 1e-9):
                violations += 1
    ok = violations == 0
    return _result("gronwall-semigroup", ok,
                   f"100 instances x 10 pairs, violations {violations}, "
                   f"worst ratio {worst_ratio:.12f} (tol 1+1e-9)")


def criterion_04_shift_invariance(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 2)
    worst = 0.0
    for _ in range(50):
        prob = _random_gronwall(rng, constant_rate=True)
        L = prob.a.value
        j = len(prob.c_seq)
        t = float(rng.uniform(prob.t0, prob.T))
        a_val = gw.h_bound(prob, t, level=j)
        b_val = gw.h_bound_const(prob.p, L, prob.c_seq, prob.omega, j, t - prob.t0)
        denom = max(abs(a_val), abs(b_val), 1e-30)
        worst = max(worst, abs(a_val - b_val) / denom)
    ok = worst <= 1e-9
    return _result("gronwall-shift-invariance", ok,
                   f"50 instances, worst relative gap {worst:.3g} (tol 1e-9)")


# -- 5-6: decay and sup-norm certificates ---------------------------------------------


def criterion_05_guas_certificates(seed: int = 0) -> CriterionResult:
    fam = [(sl.s1_system(), _nine_jumps())]
    scenarios = ct.make_scenarios(seed + 3, 50, 1, 1, 10.0, t0_range=(0.0, 3.0),
                                  x0_scale=10.0)
    good = ct.EstimateSpec(kind="0-guas",
                           beta=cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0))))
    rep_good = ct.check_estimate(fam, good, scenarios, 10.0)
    bad = ct.EstimateSpec(kind="0-guas",
                          beta=cf.KLFunction(cf.identity(), cf.exp_decay(2.0)))
    rep_bad = ct.check_estimate(fam, bad, scenarios, 10.0)
    # canonical scenario: worst margin falls strictly between impulse times
    canon = [ct.Scenario(t0=0.0, x0=np.array([1.0]), u=None, label="canonical")]
    rep_canon = ct.check_estimate(fam, bad, canon, 10.0)
    w = rep_canon.witness
    gamma = fam[0][1]
    interior = (w is not None
                and all(abs(w.t - tau) > 1e-9 for tau in gamma.times)
                and 0.0 < w.t < 10.0)
    ok = rep_good.passed and (not rep_bad.passed) and (not rep_canon.passed) \
        and interior
    if w is None:
        return _result("guas-certificates", False, "no witness produced")
    return _result(
        "guas-certificates", ok,
        f"valid envelope margin {rep_good.worst_margin:.3g} (pass), wrong envelope "
        f"margin {rep_bad.worst_margin:.3g} (fail), canonical witness t = "
        f"{w.t:.6f} strictly between impulses")


def criterion_06_iss_certificate(seed: int = 0) -> CriterionResult:
    gamma = _nine_jumps()
    fam = [(sl.s2_system(), gamma)]
    scenarios = ct.make_scenarios(seed + 4, 100, 1, 1, 10.0,
                                  kinds=("step", "sine", "impulse-points",
                                         "pulse", "zero"),
                                  gamma_hint=gamma)
    beta = cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0)))
    rho = cf.linear(2.0)
    spec = ct.EstimateSpec(kind="iss", beta=beta, rho=rho)
    rep = ct.check_estimate(fam, spec, scenarios, 10.0)
    # independent dense-grid margin check, written out directly
    worst = np.inf
    s2 = sl.s2_system()
    for scn in scenarios[::5]:
        u = scn.u
        traj = sim.simulate(s2, gamma, scn.t0, scn.x0, u, 10.0)
        ts = np.linspace(scn.t0, 10.0, 1500)
        xs = np.abs(traj.eval_many(ts)[:, 0])
        n = ht.count_impulses_many(gamma, scn.t0, ts)
        bound = abs(scn.x0[0]) * np.exp(-np.log(2.0) * ((ts - scn.t0) + n))
        sup = np.maximum.accumulate(u.magnitudes(ts))
        sup[0] = 0.0  # window (t0, t0] is empty
        for tau in gamma.times:
            if scn.t0 < tau <= ts[-1]:
                j = int(np.searchsorted(ts, tau, side="left"))
                sup[j:] = np.maximum(sup[j:],
                                     float(np.linalg.norm(u.value_at_impulse(tau))))
        worst = min(worst, float(np.min(bound + 2.0 * sup - xs)))
    ok = rep.passed and worst >= -1e-7
    return _result("iss-certificate", ok,
                   f"100 scenarios, check margin {rep.worst_margin:.3g}, "
                   f"independent dense-grid margin {worst:.3g} (tol -1e-7)")


# -- 7: norm identities ------------------------------------------------------------


def criterion_07_norm_identities(seed: int = 0) -> CriterionResult:
    rng = np.random.default_rng(seed + 5)
    ident = cf.identity()
    horizon = 4.0
    details = []
    ok = True

    # worked value: constant 3 with one impulse, identity gains
    gam1 = ht.ImpulseSequence((1.0,), 2.0)
    u3 = sg.constant_signal(3.0, 2.0)
    worked = sg.energy_norm(u3, 0.0, 2.0, gam1, ident, ident)
    ok &= abs(worked - 9.0) <= 1e-9
    details.append(f"worked energy {worked:.12g} (expect 9)")

    def random_signal(rng):
        a1, w1, ph = rng.uniform(0.3, 2.0), rng.uniform(0.5, 3.0), rng.uniform(0, 6)
        c = rng.uniform(-1.0, 1.0)
        split = float(rng.uniform(1.0, 3.0))
        segs = [(0.0, split, lambda t, a=a1, w=w1, p=ph: np.atleast_1d(a * np.sin(w * np.asarray(t) + p))),
                (split, horizon, lambda t, c=c: np.atleast_1d(c * np.ones_like(np.asarray(t, dtype=float))))]
        pts = {float(tau): np.array([rng.uniform(-2, 2)])
               for tau in rng.uniform(0.2, horizon, rng.integers(0, 3))}
        return sg.piecewise_signal(segs, 1, pts)

    worst_add = 0.0
    worst_trunc = -np.inf
    worst_cheb = -np.inf
    square = cf.power(1.0, 2.0)
    for i in range(100):
        u = random_signal(rng)
        gam = ht.gen_dwell(float(rng.uniform(0.4, 1.2)), horizon,
                           jitter_seed=int(rng.integers(0, 999)))
        a, b_mid, c_end = np.sort(rng.uniform(0.0, horizon, 3))
        e1 = sg.energy_norm(u, a, b_mid, gam, ident, square)
        e2 = sg.energy_norm(u, b_mid, c_end, gam, ident, square)
        e12 = sg.energy_norm(u, a, c_end, gam, ident, square)
        worst_add = max(worst_add, abs(e1 + e2 - e12))
        level = float(rng.uniform(0.0, 2.0))
        ub = sg.truncate(u, level)
        worst_trunc = max(worst_trunc,
                          sg.sup_norm(ub, 0.0, horizon, gam) - level)
        measure, count = sg.exceedance(u, level, gam)
        E = sg.energy_norm(u, 0.0, horizon, gam, square, ident)
        if level > 0:
            chi1b = float(square(level))
            chi2b = float(ident(level))
            worst_cheb = max(worst_cheb,
                             measure * chi1b - E, count * chi2b - E)
    ok &= worst_add <= 1e-9
    ok &= worst_trunc <= 1e-9
    ok &= worst_cheb <= 1e-6  # quadrature plus root-finding allowance
    details.append(f"additivity gap {worst_add:.2e} (tol 1e-9)")
    details.append(f"truncation excess {worst_trunc:.2e}")
    details.append(f"Chebyshev excess {worst_cheb:.2e}")
    return _result("norm-identities", ok, "; ".join(details))


# -- 8: gain synthesis ----------------------------------------------------------------


def criterion_08_gain_synthesis(seed: int = 0) -> CriterionResult:
    details = []
    ok = True
    cert_exp = gn.IssCertificateData(
        cf.KLFunction(cf.identity(), cf.exp_decay(1.0)), cf.identity())
    env = _unit_envelopes()

    tr = gn.T_r(cert_exp, 3.0)
    ok &= abs(tr - (1.0 + np.log(3.0))) <= 1e-6
    details.append(f"T_r = {tr:.8f} (expect 1+ln3, tol 1e-6)")

    th0 = gn.tilde_h(0, 1.0, 1.0, 3.0, 0.0, env, cert_exp)
    ok &= abs(th0 - np.e) <= 1e-12
    details.append(f"tilde_h0 = {th0:.15f} (expect e, tol 1e-12)")

    tol = 1e-6
    cert_pair = True
    for r in np.geomspace(0.6, 6.0, 5):
        Tr = gn.T_r(cert_exp, float(r))
        corners = [(j, Tr - j) for j in range(int(np.floor(Tr)) + 1)]
        bound = r / 6.0
        for s in np.linspace(0.0, 3.0, 5):
            p_hat = gn.tilde_p(float(r), float(s), env, cert_exp, tol)
            feas = all(gn.tilde_h(j, p_hat, T, float(r), float(s), env, cert_exp)
                       <= bound for j, T in corners)
            infeas = not all(gn.tilde_h(j, p_hat * (1 + tol), T, float(r),
                                        float(s), env, cert_exp) <= bound
                             for j, T in corners)
            cert_pair &= feas and infeas and p_hat > 0
    ok &= cert_pair
    details.append(f"tilde_p certified pairs on 5x5 grid: {cert_pair}")

    e_coarse = gn.ell(4.0, env, cert_exp, grid=16)
    e_fine = gn.ell(4.0, env, cert_exp, grid=160)
    rel = abs(e_fine - e_coarse) / max(e_fine, 1e-30)
    ok &= rel <= 0.02
    details.append(f"ell grid stability {rel:.3%} (tol 2%)")

    res = gn.synthesize_ubebs_gain(env, cert_exp, gn.GainGridSpec(r_max=10.0, n_r=24))
    classes_ok = all(cf.validate_class(f, domain=50.0).ok
                     for f in (res.alpha, res.chi1, res.chi2, res.kappa))
    bs = np.linspace(0.0, 5.0, 64)
    a2 = cf.eval_k(res.alpha, bs) ** 2
    dom = np.all(cf.eval_k(res.chi1, bs) >= a2 - 1e-12) and \
        np.all(cf.eval_k(res.chi2, bs) >= a2 - 1e-12)
    kap_dom = np.all(cf.eval_k(res.kappa, res.ell_table[:, 0])
                     >= res.ell_table[:, 1] - 1e-12)
    ok &= classes_ok and bool(dom) and bool(kap_dom)
    details.append(f"class validation {classes_ok}, chi >= alpha^2 {bool(dom)}, "
                   f"kappa >= ell {bool(kap_dom)}")
    return _result("gain-synthesis", ok, "; ".join(details))


# -- 9: pipeline -------------------------------------------------------------------------


def criterion_09_pipeline(seed: int = 0) -> CriterionResult:
    cert = _halving_cert()
    env = _unit_envelopes()
    gamma = _nine_jumps
    fam = [(_with_nu(sl.s1_system()), gamma()), (_with_nu(sl.s2_system()), gamma())]
    rep = ct.pipeline_iss_to_iiss(fam, cert, env, scenario_budget=12,
                                  horizon=10.0, seed=seed + 6)
    stages_ok = rep.passed and len(rep.stages) == 4
    fam_u = [(_with_nu(sl.unstable_system()), ht.ImpulseSequence.empty(10.0))]
    rep_u = ct.pipeline_iss_to_iiss(fam_u, cert, env, scenario_budget=6,
                                    horizon=10.0, seed=seed + 6)
    w = rep_u.stages[0].report.witness
    growth = (rep_u.halted_at == "zero-input-decay" and w is not None
              and w.lhs > w.rhs)
    ok = stages_ok and growth
    margins = ", ".join(f"{s.name}: {s.report.worst_margin:.3g}"
                        for s in rep.stages)
    return _result("pipeline-end-to-end", ok,
                   f"four stages pass ({margins}); unstable family halts at "
                   f"stage 1 with growth witness |x| = {w.lhs:.3g} > bound = "
                   f"{w.rhs:.3g}")


# -- 10: epsilon-delta probes and the characterization meta-test ---------------------------


def criterion_10_probes(seed: int = 0) -> CriterionResult:
    ident = cf.identity()
    fam = [(_with_nu(sl.s1_system()), _nine_jumps())]
    probe = ct.probe_eps_delta(fam, ident, ident, eps_grid=[0.1, 0.5, 1.0],
                               r_grid=[1.0, 5.0], T_search=[2.0, 5.0, 10.0],
                               budget=400, seed=seed + 7)
    deltas_ok = all(d.status == "found" for d in probe.deltas)

    beta = cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0)))
    spec_iiss = ct.EstimateSpec(kind="iiss", beta=beta, alpha=ident,
                                rho1=ident, rho2=ident)
    scenarios = ct.make_scenarios(seed + 8, 20, 1, 1, 10.0)
    rep_iiss = ct.check_estimate(fam, spec_iiss, scenarios, 10.0)
    rep_guas = ct.check_estimate(fam, ct.derive_guas_from_iiss(spec_iiss),
                                 scenarios, 10.0)
    rep_ub = ct.check_estimate(fam, ct.derive_ubebs_from_iiss(spec_iiss),
                               scenarios, 10.0)
    meta = rep_iiss.passed and rep_guas.passed and rep_ub.passed
    ok = deltas_ok and meta
    ds = ", ".join(f"eps {d.eps:g} -> delta {d.delta:g}" for d in probe.deltas)
    return _result("eps-delta-probes", ok,
                   f"{ds}; meta-test integral-pass => derived decay margin "
                   f"{rep_guas.worst_margin:.3g} and derived bounded-energy margin "
                   f"{rep_ub.worst_margin:.3g} both pass: {meta}")


# -- 11: incremental boundedness and weak/strong ---------------------------------------------


def criterion_11_uib(seed: int = 0) -> CriterionResult:
    phi = lambda s: 2.0 * np.asarray(s, dtype=float) + 1.0
    dwell = [ht.gen_dwell(0.5, 10.0),
             ht.gen_dwell(0.5, 10.0, jitter_seed=seed + 9)]
    rep_dwell = ht.check_uib(dwell, phi)
    packed = [ht.ImpulseSequence(tuple((i + 1) / k for i in range(k)), 10.0)
              for k in range(1, 51)]
    phi_packed = lambda s: np.asarray(s, dtype=float) + 1.0
    rep_packed = ht.check_uib(packed, phi_packed)
    small = [ht.ImpulseSequence(tuple((i + 1) / k for i in range(k)), 10.0)
             for k in range(1, 4)]
    rep_small = ht.check_uib(small, phi_packed)

    fam = [(_with_nu(sl.s1_system()), g) for g in dwell]
    spec = ct.EstimateSpec(
        kind="0-guas", beta=cf.KLFunction(cf.identity(), cf.exp_decay(np.log(2.0))))
    scenarios = ct.make_scenarios(seed + 10, 12, 1, 1, 10.0)
    eq = ct.check_weak_strong_equiv(fam, phi, spec, scenarios, 10.0)
    ok = (rep_dwell.ok and not rep_packed.ok and not rep_small.ok
          and eq.pointwise_ok and eq.surrogate.passed and eq.passed)
    return _result(
        "uib-weak-strong", ok,
        f"dwell family bound excess {rep_dwell.worst_excess:.2g} (pass); packed "
        f"family excess {rep_packed.worst_excess:.3g} at sequence "
        f"{rep_packed.witness.sequence_index} (fail as expected, already at 3 "
        f"impulses: {not rep_small.ok}); strong=>weak pointwise {eq.pointwise_ok}; "
        f"weak-to-strong surrogate margin {eq.surrogate.worst_margin:.3g}")


CRITERIA = (
    criterion_01_closed_form,
    criterion_02_gronwall_domination,
    criterion_03_gronwall_semigroup,
    criterion_04_shift_invariance,
    criterion_05_guas_certificates,
    criterion_06_iss_certificate,
    criterion_07_norm_identities,
    criterion_08_gain_synthesis,
    criterion_09_pipeline,
    criterion_10_probes,
    criterion_11_uib,
)


@dataclass(frozen=True)
class SuiteResult:
    rows: tuple
    all_passed: bool
    seconds: float


def run_suite(only: Optional[str] = None, seed: int = 0) -> SuiteResult:
    """Run the acceptance criteria (optionally filtered by substring)."""
    rows = []
    start = time.time()
    for fn in CRITERIA:
        probe_name = fn.__name__.replace("criterion_", "")
        if only and only not in probe_name:
            continue
        t0 = time.time()
        res = fn(seed)
        rows.append(CriterionResult(res.name, res.passed, res.detail,
                                    time.time() - t0))
    all_passed = all(r.passed for r in rows) and bool(rows)
    return SuiteResult(tuple(rows), all_passed, time.time() - start)


def format_table(result: SuiteResult) -> str:
    lines = []
    for r in result.rows:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"[{status}] {r.name:28s} ({r.seconds:5.1f}s)  {r.detail}")
    lines.append(f"{'ALL PASS' if result.all_passed else 'FAILURES PRESENT'} "
                 f"({len(result.rows)} criteria, {result.seconds:.1f}s)")
    return "\n".join(lines)
