"""Acceptance suite: one test per shipping requirement.

Each requirement gets exactly one test function, so ``pytest
tests/test_acceptance.py -v`` prints a single pass/fail line per
requirement.  Stated runtime budgets are asserted alongside the
numerical tolerances.
"""

import math
import time

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from fractalheat.analysis import (HolderParams, check_moment_bound,
                                  check_weighted_integrals, classify_regime,
                                  contraction_feasibility, envelope_check,
                                  harnack_constants, holder_estimate,
                                  measure_smalldata_constants, verify_harnack)
from fractalheat.kernel import (CauchyPoisson, GaussWeierstrass,
                                NormalizedKernel, estimate_holder_kernel,
                                two_sided_bounds, verify_kernel_axioms)
from fractalheat.profiles import (CauchyType, ConditionWitness,
                                  ProfilePredicateReport,
                                  check_profile_conditions, profile_eval)
from fractalheat.semigroup import TimeGrid
from fractalheat.solver import (ProblemSpec, local_horizon,
                                nonexistence_witness, picard_solve)
from fractalheat.space import (build_lattice_space, constant_field,
                               gaussian_bump_field, power_decay_field)


@pytest.fixture(scope="module")
def line481():
    return build_lattice_space(dim=1, radius=12.0, points_per_axis=481)


def _constant_problem(space, kernel, phi_value, f_value, p):
    return ProblemSpec(kernel=kernel, space=space,
                       phi=constant_field(space, phi_value),
                       f=constant_field(space, f_value), p=p)


def test_criterion_1_horizon_closed_form_oracles(line481):
    """T0 for u' = u^2 + f with constant data matches 1/C and pi/2 to 1%."""
    kernel = NormalizedKernel(GaussWeierstrass(1), line481)
    for C in (0.5, 1.0, 2.0):
        start = time.perf_counter()
        rep = local_horizon(_constant_problem(line481, kernel, C, 0.0, 2.0))
        assert time.perf_counter() - start < 5.0
        assert rep.blow_up
        assert rep.T0_estimate == pytest.approx(1.0 / C, rel=0.01)
    start = time.perf_counter()
    rep = local_horizon(_constant_problem(line481, kernel, 0.0, 1.0, 2.0))
    assert time.perf_counter() - start < 5.0
    assert rep.T0_estimate == pytest.approx(math.pi / 2.0, rel=0.01)


def test_criterion_2_solver_matches_scalar_ode():
    """Constant-data runs agree with independently integrated u' = u^p + f."""
    start = time.perf_counter()
    space = build_lattice_space(dim=1, radius=8.0, points_per_axis=321)
    kernel = NormalizedKernel(GaussWeierstrass(1), space)
    # (phi, f, T0): u = 1/(1-t) and u = tan t, compared at t = 0.5 T0
    for phi0, f0, T0 in ((1.0, 0.0, 1.0), (0.0, 1.0, math.pi / 2.0)):
        prob = _constant_problem(space, kernel, phi0, f0, 2.0)
        tgrid = TimeGrid.uniform(0.5 * T0, 101)
        rep = picard_solve(prob, tgrid)
        assert rep.status == "converged"
        ode = solve_ivp(lambda t, u: u**2 + f0, (0.0, 0.5 * T0), [phi0],
                        rtol=1e-10, atol=1e-12)
        want = ode.y[0, -1]
        err = np.max(np.abs(rep.trajectory.values[-1] - want)) / abs(want)
        assert err < 0.02
    assert time.perf_counter() - start < 60.0


def test_criterion_3_harnack_inequalities(line481):
    """All three transported-mass inequalities hold pointwise, margin >= -1e-6."""
    start = time.perf_counter()
    kernel = GaussWeierstrass(1)
    hc = harnack_constants(1.0, 2.0, alpha=1.0, beta=2.0)
    rng = np.random.default_rng(42)
    worst = math.inf
    for _ in range(100):
        g = rng.uniform(0.0, 1.0, size=line481.n)
        for t in (0.25, 1.0, 4.0):
            rep = verify_harnack(kernel, line481, g, t, hc)
            worst = min(worst, rep.margin_time, rep.margin_integral,
                        rep.margin_combined)
            assert rep.passed
    assert worst >= -1e-6
    assert time.perf_counter() - start < 60.0


def test_criterion_4_kernel_axioms(line481):
    """Mass, symmetry and two-time composition audits on [-12, 12]."""
    start = time.perf_counter()
    rep = verify_kernel_axioms(GaussWeierstrass(1), line481,
                               t_samples=(0.25, 0.5, 1.0))
    assert rep.conservative_deficit < 1e-4
    assert rep.semigroup_residual < 1e-3
    assert rep.symmetry_residual == 0.0
    assert time.perf_counter() - start < 30.0


def test_criterion_5_witness_growth_exponent():
    """Fitted witness slope tracks 1/(p-1) - 1/2, changing sign at p = 3."""
    start = time.perf_counter()
    space = build_lattice_space(dim=1, radius=20.0, points_per_axis=801)
    kernel = GaussWeierstrass(1)
    hc = harnack_constants(1.0, 2.0, 1.0, 2.0)
    phi = gaussian_bump_field(space, 1.0, 0.3)
    f = constant_field(space, 0.0)
    ts = np.geomspace(5.0, 80.0, 9)

    slopes = {}
    for p in (1.5, 2.0, 2.5, 3.0, 4.0):
        prob = ProblemSpec(kernel=kernel, space=space, phi=phi, f=f, p=p)
        slopes[p] = nonexistence_witness(prob, hc, ts).growth_exponent

    for p in (1.5, 2.0, 2.5, 4.0):
        assert slopes[p] == pytest.approx(1.0 / (p - 1.0) - 0.5, abs=0.05), p
    # sign change is pinned to the fujita exponent 1 + beta/alpha = 3
    assert slopes[1.5] > 0 and slopes[2.0] > 0 and slopes[2.5] > 0
    assert slopes[4.0] < 0
    assert abs(slopes[3.0]) <= 0.05
    assert time.perf_counter() - start < 120.0


def test_criterion_6_classifier_truth_table():
    """Reference verdicts match exactly; random inputs follow the table."""
    gauss = two_sided_bounds(GaussWeierstrass(1))

    def conds(p, alpha):
        return check_profile_conditions(gauss[0], gauss[1], p=p, alpha=alpha)

    cases = [
        ((1.0, 2.0, 2.0, True, False), "NonexistenceSubcritical", "thm2.3(i)"),
        ((1.0, 2.0, 5.0, False, True), "NonexistenceAlphaLeBeta", "thm2.3(ii)"),
        ((3.0, 2.0, 2.0, False, True), "NonexistenceIntermediate", "thm2.3(iii)"),
        ((1.0, 2.0, 3.0, True, False), "NonexistenceCritical", "thm2.4"),
        ((3.0, 2.0, 4.0, True, False), "GlobalExistenceSmallData", "thm3.4"),
        ((3.0, 2.0, 3.0, False, True), "Indeterminate", "open"),
    ]
    for (alpha, beta, p, phi_nz, f_nz), verdict, tag in cases:
        out = classify_regime(alpha, beta, p, phi_nz, f_nz,
                              conds(p, alpha), conservative=True)
        assert out.verdict == verdict, (alpha, beta, p)
        assert out.cited_case == tag
        assert out.conditional == (verdict == "GlobalExistenceSmallData")

    # independent restatement of the decision table used as fuzz oracle
    def expected(alpha, beta, p, phi_nz, f_nz, m, fc, pm, vol, cons):
        def eq(x, y):
            return abs(x - y) <= 1e-12 * max(abs(x), abs(y), 1.0)

        data = phi_nz or f_nz
        fujita = 1.0 + beta / alpha
        steady = alpha / (alpha - beta) if alpha > beta else math.inf
        if f_nz and alpha <= beta:
            return "NonexistenceAlphaLeBeta", "thm2.3(ii)"
        if f_nz and alpha > beta and p < steady and not eq(p, steady):
            return "NonexistenceIntermediate", "thm2.3(iii)"
        if data and p < fujita and not eq(p, fujita):
            return "NonexistenceSubcritical", "thm2.3(i)"
        if data and eq(p, fujita) and m and fc and pm and cons:
            return "NonexistenceCritical", "thm2.4"
        if alpha > beta and p > steady and not eq(p, steady) and vol and cons:
            return "GlobalExistenceSmallData", "thm3.4"
        return "Indeterminate", "open"

    rng = np.random.default_rng(0)
    for i in range(1000):
        alpha = float(10.0 ** rng.uniform(-0.5, 1.0))
        beta = float(10.0 ** rng.uniform(-0.5, 1.0))
        p = float(1.0 + 10.0 ** rng.uniform(-2.0, 1.0))
        if i % 5 == 0:
            p = 1.0 + beta / alpha                       # exact fujita exponent
        elif i % 7 == 0 and alpha > beta:
            p = alpha / (alpha - beta)                   # exact steady exponent
        if p <= 1.0:
            continue
        phi_nz, f_nz, m, fc, pm, vol, cons = (bool(b) for b in
                                              rng.integers(0, 2, size=7))
        report = ProfilePredicateReport(
            minorization=ConditionWitness(m, (1.0, 1.0), "closed-form"),
            factorization=ConditionWitness(fc, (1.0, 1.0, 1.0), "closed-form"),
            power_minorization=ConditionWitness(pm, (1.0, 1.0), "closed-form"),
            volume_integrable=vol, volume_integral=1.0,
            moment_integrable=vol, moment_integral=1.0,
            alpha=alpha, p=p)
        out = classify_regime(alpha, beta, p, phi_nz, f_nz, report, cons)
        again = classify_regime(alpha, beta, p, phi_nz, f_nz, report, cons)
        assert out == again                              # single, stable verdict
        want = expected(alpha, beta, p, phi_nz, f_nz, m, fc, pm, vol, cons)
        assert (out.verdict, out.cited_case) == want, (alpha, beta, p)


def test_criterion_7_weighted_integrals_and_moment():
    """Finiteness matches exponent arithmetic; moment ratio flat within 5%."""
    start = time.perf_counter()
    coarse = build_lattice_space(dim=1, radius=50.0, points_per_axis=1001)
    fine = build_lattice_space(dim=1, radius=50.0, points_per_axis=2001)

    finite = check_weighted_integrals(coarse, 1.0, 0.5, 1.0)
    assert not finite.diverges                      # lambda1 + lambda2 = 1.5 > 1
    refined = check_weighted_integrals(fine, 1.0, 0.5, 1.0)
    assert not refined.diverges
    assert refined.sup_value == pytest.approx(finite.sup_value, rel=0.10)

    normed = check_weighted_integrals(coarse, 1.0, 0.5, 2.0)
    assert normed.sup_normalized is not None        # lambda2 = 2 > alpha
    normed_fine = check_weighted_integrals(fine, 1.0, 0.5, 2.0)
    assert normed_fine.sup_normalized == pytest.approx(normed.sup_normalized,
                                                       rel=0.10)

    divergent = check_weighted_integrals(coarse, 1.0, 0.5, 0.4)
    assert divergent.diverges                       # lambda1 + lambda2 = 0.9 < 1

    plane = build_lattice_space(dim=2, radius=12.0, points_per_axis=49)
    assert not check_weighted_integrals(plane, 2.0, 1.0, 3.0).diverges
    assert check_weighted_integrals(plane, 2.0, 1.0, 0.5).diverges

    lineM = build_lattice_space(dim=1, radius=30.0, points_per_axis=1201)
    _, phi2 = two_sided_bounds(GaussWeierstrass(1))
    moment = check_moment_bound(lineM, phi2, 1.0, 2.0, 1.0,
                                t_values=np.geomspace(0.05, 5.0, 9),
                                spread_tol=0.05)
    assert moment.bounded
    assert moment.ratio_max / moment.ratio_min - 1.0 < 0.05
    assert time.perf_counter() - start < 60.0


def test_criterion_8_small_data_global_run():
    """Measured-constant certificate keeps a long run inside its envelope."""
    start = time.perf_counter()
    space = build_lattice_space(dim=2, radius=10.0, points_per_axis=41)
    kernel = CauchyPoisson(2)                       # alpha = 2, beta = 1
    p, lam = 3.0, 3.0
    tgrid = TimeGrid.uniform(50.0, 33)

    consts = measure_smalldata_constants(kernel, space, p=p, lam=lam, tgrid=tgrid)
    cert = contraction_feasibility(consts.C1, consts.C3, p)
    assert cert.feasible

    delta = 0.9 * cert.delta_max
    prob = ProblemSpec(kernel=kernel, space=space,
                       phi=power_decay_field(space, delta, lam),
                       f=constant_field(space, 0.0), p=p)
    rep = picard_solve(prob, tgrid)
    assert rep.status == "converged"
    assert rep.residual <= rep.tol

    env = envelope_check(rep.trajectory, space, cert.epsilon_star,
                         alpha=2.0, beta=1.0)
    assert env.ok, env.worst_ratio
    assert time.perf_counter() - start < 600.0


def test_criterion_9_holder_regularity():
    """Exponent recovery on synthetic fields and on a solver slice."""
    start = time.perf_counter()
    space = build_lattice_space(dim=1, radius=3.0, points_per_axis=241)
    fit = estimate_holder_kernel(GaussWeierstrass(1))
    params = HolderParams(theta1=1.0, theta2=1.0, sigma=fit.sigma,
                          nu=fit.nu, L=fit.L, beta=2.0)

    x = space.coords[:, 0]
    rep_sqrt = holder_estimate(np.sqrt(np.abs(x)), space, params)
    assert rep_sqrt.theta_hat == pytest.approx(0.5, abs=0.05)
    rep_lin = holder_estimate(np.abs(x), space, params)
    assert rep_lin.theta_hat == pytest.approx(1.0, abs=0.05)

    kernel = NormalizedKernel(GaussWeierstrass(1), space)
    prob = ProblemSpec(kernel=kernel, space=space,
                       phi=gaussian_bump_field(space, 1.0, 0.5),
                       f=constant_field(space, 0.5), p=2.0)
    solve = picard_solve(prob, TimeGrid.uniform(0.5, 26))
    assert solve.status == "converged"
    rep = holder_estimate(solve.trajectory.values[-1], space, params)
    assert rep.theta_hat >= params.theta - 0.05
    assert rep.passed
    assert time.perf_counter() - start < 60.0


def test_criterion_10_profile_predicates():
    """Structural profile conditions with witnesses re-verified on an s-grid."""
    start = time.perf_counter()
    s = np.concatenate(([0.0], np.geomspace(1e-3, 50.0, 257)))

    phi1, phi2 = two_sided_bounds(GaussWeierstrass(1))
    rep = check_profile_conditions(phi1, phi2, p=2.0, alpha=1.0)
    assert rep.all_comparison_conditions
    assert rep.volume_integrable and rep.moment_integrable

    a1, a2 = rep.minorization.constants
    assert np.all(profile_eval(phi1, s) - a1 * profile_eval(phi2, a2 * s) >= -1e-12)
    b1, b2, b3 = rep.factorization.constants
    sg = s[:129:2][None, :]
    tg = s[:129:2][:, None]
    lhs = profile_eval(phi2, sg + tg)
    rhs = b1 * profile_eval(phi2, b2 * sg) * profile_eval(phi2, b3 * tg)
    assert np.all(lhs - rhs >= -1e-12)
    c1, c2 = rep.power_minorization.constants
    assert np.all(profile_eval(phi1, s) ** 2.0
                  - c1 * profile_eval(phi2, c2 * s) >= -1e-12)

    cauchy = CauchyType(1.0, 3.0)
    rep_c = check_profile_conditions(cauchy, cauchy, p=2.0, alpha=2.0)
    assert not rep_c.power_minorization.holds       # square decays too fast
    assert rep_c.minorization.holds
    assert rep_c.factorization.holds
    assert rep_c.volume_integrable                  # s^(2-1) (1+s)^-3 integrable
    rep_c3 = check_profile_conditions(cauchy, cauchy, p=2.0, alpha=3.0)
    assert not rep_c3.volume_integrable             # s^(3-1) (1+s)^-3 diverges
    assert time.perf_counter() - start < 10.0
