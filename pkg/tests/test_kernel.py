"""Tests for the closed-form kernels, normalization, and axiom checks."""

import numpy as np
import pytest

from fractalheat.kernel import (CauchyPoisson, GaussWeierstrass,
                                NormalizedKernel, ProfileKernel,
                                estimate_holder_kernel, kernel_eval,
                                two_sided_bounds, verify_kernel_axioms,
                                verify_two_sided)
from fractalheat.profiles import CauchyType, GaussType, profile_eval
from fractalheat.space import build_lattice_space


@pytest.fixture
def line():
    return build_lattice_space(dim=1, radius=12.0, points_per_axis=481)


# -- closed-form values --------------------------------------------------------


def test_gauss_weierstrass_point_values():
    k = GaussWeierstrass(1)
    assert k.alpha == 1.0 and k.beta == 2.0
    # (4 pi t)^(-1/2) exp(-r^2 / 4t)
    assert kernel_eval(k, 1.0, [0.0], [0.0]) == pytest.approx((4 * np.pi) ** -0.5)
    assert kernel_eval(k, 0.5, [0.0], [1.0]) == pytest.approx(
        (2 * np.pi) ** -0.5 * np.exp(-0.5))


def test_gauss_weierstrass_3d():
    k = GaussWeierstrass(3)
    assert k.alpha == 3.0
    assert kernel_eval(k, 1.0, [0, 0, 0], [0, 0, 0]) == pytest.approx(
        (4 * np.pi) ** -1.5)


def test_cauchy_poisson_constants():
    # C_n = Gamma((n+1)/2) / pi^((n+1)/2): 1/pi in 1-d, 1/(2 pi) in 2-d
    k1, k2 = CauchyPoisson(1), CauchyPoisson(2)
    assert k1.alpha == 1.0 and k1.beta == 1.0
    assert k1.constant == pytest.approx(1.0 / np.pi)
    assert k2.constant == pytest.approx(1.0 / (2.0 * np.pi))
    # k(t,x,y) = C_n t / (t^2 + r^2)^((n+1)/2)
    assert kernel_eval(k1, 1.0, [0.0], [0.0]) == pytest.approx(1.0 / np.pi)
    assert kernel_eval(k1, 1.0, [0.0], [1.0]) == pytest.approx(1.0 / (2.0 * np.pi))


def test_cauchy_poisson_exact_mass_on_line():
    # integral of the 1-d Poisson kernel is arctan-exact: truncation to
    # [-R, R] keeps 2/pi arctan(R/t) of the unit mass
    k = CauchyPoisson(1)
    space = build_lattice_space(dim=1, radius=60.0, points_per_axis=4801)
    row = k.radial(1.0, space.distance_from(space.x0_index))
    mass = float(row @ space.weights)
    assert mass == pytest.approx(2.0 / np.pi * np.arctan(60.0), rel=1e-4)


def test_profile_kernel_scaling_identity():
    prof = GaussType(C=0.3, c=0.7, gamma=1.5)
    k = ProfileKernel(alpha=1.4, beta=1.8, profile=prof)
    r = np.array([0.0, 0.3, 1.7])
    for t in (0.2, 1.0, 7.3):
        expect = t ** (-1.4 / 1.8) * profile_eval(prof, r * t ** (-1.0 / 1.8))
        np.testing.assert_allclose(k.radial(t, r), expect, rtol=1e-13)


def test_kernels_reject_nonpositive_time(line):
    for k in (GaussWeierstrass(1), CauchyPoisson(1),
              ProfileKernel(1.0, 2.0, GaussType(1.0, 0.25, 2.0))):
        with pytest.raises(ValueError):
            k.matrix(line, 0.0)
        with pytest.raises(ValueError):
            k.radial(-1.0, np.array([0.0]))


# -- normalization --------------------------------------------------------------


def test_normalized_kernel_has_unit_mass(line):
    k = NormalizedKernel(GaussWeierstrass(1), line)
    for t in (0.1, 1.0, 10.0):
        mass = k.matrix(line, t) @ line.weights
        np.testing.assert_allclose(mass, 1.0, atol=1e-12)


def test_normalized_kernel_jensen_contraction(line):
    # row-stochastic averaging cannot increase the sup norm
    k = NormalizedKernel(GaussWeierstrass(1), line)
    rng = np.random.default_rng(11)
    for _ in range(20):
        g = rng.uniform(0.0, 3.0, size=line.n)
        out = (k.matrix(line, 0.7) * line.weights[None, :]) @ g
        assert out.max() <= g.max() + 1e-12
        assert out.min() >= g.min() - 1e-12


def test_normalized_kernel_rejects_double_wrap(line):
    k = NormalizedKernel(GaussWeierstrass(1), line)
    with pytest.raises(ValueError):
        NormalizedKernel(k, line)
    with pytest.raises(TypeError):
        k.radial(1.0, np.array([0.0]))


# -- two-sided bounds ------------------------------------------------------------


def test_two_sided_bounds_gauss_exact():
    phi1, phi2 = two_sided_bounds(GaussWeierstrass(2))
    # the Gauss kernel is exactly self-similar: both bounds coincide
    assert phi1 == phi2
    assert phi1.C == pytest.approx((4 * np.pi) ** -1.0)
    assert phi1.c == pytest.approx(0.25)
    assert phi1.gamma == 2.0


def test_two_sided_bounds_cauchy_sandwich():
    k = CauchyPoisson(1)
    phi1, phi2 = two_sided_bounds(k)
    assert isinstance(phi1, CauchyType) and isinstance(phi2, CauchyType)
    assert phi1.gamma == phi2.gamma == 2.0
    # (1+s)^2 / 2 <= 1 + s^2 <= (1+s)^2 pointwise
    assert phi1.C == pytest.approx(1.0 / (2.0 * np.pi))
    assert phi2.C == pytest.approx(2.0 / np.pi)
    s = np.concatenate([[0.0], np.logspace(-3, 3, 200)])
    scaled = (1.0 + s**2) ** -1.0 / np.pi
    assert np.all(profile_eval(phi1, s) <= scaled * (1 + 1e-12))
    assert np.all(scaled <= profile_eval(phi2, s) * (1 + 1e-12))


def test_verify_two_sided_detects_violation(line):
    k = GaussWeierstrass(1)
    phi1, phi2 = two_sided_bounds(k)
    ok = verify_two_sided(k, line, phi1, phi2, t_samples=[0.25, 1.0])
    assert ok.holds
    # shrink the upper profile so the sandwich must fail
    bad_upper = GaussType(C=phi2.C * 0.5, c=phi2.c, gamma=phi2.gamma)
    bad = verify_two_sided(k, line, phi1, bad_upper, t_samples=[0.25, 1.0])
    assert not bad.holds
    assert bad.upper_margin < 0


# -- continuity fit ---------------------------------------------------------------


def test_estimate_holder_kernel_gauss_oracle():
    fit = estimate_holder_kernel(GaussWeierstrass(1))
    assert fit.nu == pytest.approx(1.0, abs=0.05)
    assert fit.sigma == pytest.approx(1.0, abs=0.05)
    # max_y |d/dy exp(-y^2/(4t))| scaling constant: e^(-1/2) / sqrt(8 pi)
    assert fit.L == pytest.approx(np.exp(-0.5) / np.sqrt(8 * np.pi), rel=0.10)


def test_estimate_holder_kernel_cauchy_oracle():
    fit = estimate_holder_kernel(CauchyPoisson(1))
    assert fit.nu == pytest.approx(2.0, abs=0.05)
    assert fit.sigma == pytest.approx(1.0, abs=0.05)
    assert fit.L == pytest.approx(0.20674833578317203, rel=0.10)


def test_estimate_holder_kernel_nu_floor():
    fit = estimate_holder_kernel(GaussWeierstrass(1))
    assert fit.nu >= 1.0
    assert 0.0 < fit.sigma <= 1.0


# -- axiom suite -------------------------------------------------------------------


def test_axiom_suite_gauss(line):
    phi1, phi2 = two_sided_bounds(GaussWeierstrass(1))
    rep = verify_kernel_axioms(GaussWeierstrass(1), line, [0.25, 0.5, 1.0],
                               phi1=phi1, phi2=phi2)
    assert rep.markov_ok and rep.markov_mass <= 1.0 + 1e-6
    assert rep.symmetry_residual == 0.0
    assert rep.semigroup_ok and rep.semigroup_residual < 1e-3
    assert rep.conservative_ok and rep.conservative_deficit < 1e-4
    assert not rep.boundary_warning
    assert rep.two_sided.holds


def test_axiom_suite_flags_truncation():
    # tiny domain: mass escapes and conservativeness must fail loudly
    small = build_lattice_space(dim=1, radius=1.5, points_per_axis=31)
    rep = verify_kernel_axioms(GaussWeierstrass(1), small, [4.0])
    assert not rep.conservative_ok
    assert rep.boundary_warning


def test_axiom_suite_normalized_kernel(line):
    k = NormalizedKernel(GaussWeierstrass(1), line)
    rep = verify_kernel_axioms(k, line, [0.5, 1.0, 4.0])
    assert rep.markov_ok
    assert rep.conservative_ok and rep.conservative_deficit < 1e-12


def test_axiom_suite_rejects_bad_times(line):
    with pytest.raises(ValueError):
        verify_kernel_axioms(GaussWeierstrass(1), line, [0.0, 1.0])
