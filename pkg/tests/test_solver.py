"""Tests for Picard iteration, the horizon majorant, and the blow-up witness."""

import numpy as np
import pytest

from fractalheat.analysis import harnack_constants
from fractalheat.kernel import GaussWeierstrass, NormalizedKernel
from fractalheat.semigroup import TimeGrid
from fractalheat.solver import (ProblemSpec, local_horizon,
                                nonexistence_witness, picard_solve)
from fractalheat.space import (build_lattice_space, constant_field,
                               gaussian_bump_field)


@pytest.fixture(scope="module")
def line():
    return build_lattice_space(dim=1, radius=12.0, points_per_axis=481)


@pytest.fixture(scope="module")
def conservative(line):
    return NormalizedKernel(GaussWeierstrass(1), line)


def _constant_problem(line, kernel, phi_val, f_val, p):
    return ProblemSpec(kernel=kernel, space=line,
                       phi=constant_field(line, phi_val),
                       f=constant_field(line, f_val), p=p)


# -- problem validation --------------------------------------------------------


def test_problem_rejects_bad_data(line, conservative):
    with pytest.raises(ValueError):
        _constant_problem(line, conservative, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        ProblemSpec(kernel=conservative, space=line,
                    phi=np.full(line.n, -0.1), f=np.zeros(line.n), p=2.0)
    with pytest.raises(ValueError):
        ProblemSpec(kernel=conservative, space=line,
                    phi=np.zeros(3), f=np.zeros(3), p=2.0)


# -- picard oracles --------------------------------------------------------------


def test_picard_matches_riccati_oracle(line, conservative):
    # phi = 1, f = 0, p = 2 on a conservative kernel: u(t) = 1/(1-t)
    prob = _constant_problem(line, conservative, 1.0, 0.0, 2.0)
    tg = TimeGrid.uniform(0.5, 101)
    rep = picard_solve(prob, tg)
    assert rep.status == "converged"
    oracle = 1.0 / (1.0 - tg.nodes)
    got = rep.trajectory.values[:, line.x0_index]
    np.testing.assert_allclose(got, oracle, rtol=2e-3)


def test_picard_matches_tan_oracle(line, conservative):
    # phi = 0, f = 1, p = 2: u(t) = tan(t)
    prob = _constant_problem(line, conservative, 0.0, 1.0, 2.0)
    tg = TimeGrid.uniform(1.0, 101)
    rep = picard_solve(prob, tg)
    assert rep.status == "converged"
    got = rep.trajectory.values[-1, line.x0_index]
    assert got == pytest.approx(np.tan(1.0), rel=2e-3)


def test_picard_iterates_are_monotone(line, conservative):
    # the iteration map preserves order: sup-norm history is nondecreasing
    prob = _constant_problem(line, conservative, 0.5, 0.2, 2.0)
    tg = TimeGrid.uniform(0.5, 41)
    rep = picard_solve(prob, tg)
    hist = np.asarray(rep.sup_norm_history)
    assert np.all(np.diff(hist) >= -1e-12)
    assert np.all(rep.trajectory.values >= 0.0)


def test_picard_solution_values_increase_in_time(line, conservative):
    prob = _constant_problem(line, conservative, 0.5, 0.0, 2.0)
    tg = TimeGrid.uniform(0.5, 41)
    rep = picard_solve(prob, tg)
    vals = rep.trajectory.values[:, line.x0_index]
    assert np.all(np.diff(vals) >= -1e-12)


def test_picard_detects_blow_up(line, conservative):
    # past T0 = 1 the constant-data solution leaves any finite cap
    prob = _constant_problem(line, conservative, 1.0, 0.0, 2.0)
    tg = TimeGrid.uniform(1.5, 61)
    rep = picard_solve(prob, tg, blowup_cap=1e4)
    assert rep.status == "blown-up"
    assert rep.t_blow is not None and rep.t_blow > 1.0 - 1e-9


def test_picard_zero_data_stays_zero(line, conservative):
    prob = _constant_problem(line, conservative, 0.0, 0.0, 2.0)
    rep = picard_solve(prob, TimeGrid.uniform(1.0, 11))
    assert rep.status == "converged"
    np.testing.assert_array_equal(rep.trajectory.values, 0.0)


def test_picard_rejects_bad_controls(line, conservative):
    prob = _constant_problem(line, conservative, 0.1, 0.0, 2.0)
    tg = TimeGrid.uniform(0.1, 5)
    with pytest.raises(ValueError):
        picard_solve(prob, tg, tol=0.0)
    with pytest.raises(ValueError):
        picard_solve(prob, tg, max_iter=0)


# -- horizon oracles ---------------------------------------------------------------


@pytest.mark.parametrize("C", [0.5, 1.0, 2.0])
def test_horizon_riccati_family(line, conservative, C):
    # f = 0, phi = C, p = 2: T0 = 1 / ((p-1) C^(p-1))
    prob = _constant_problem(line, conservative, C, 0.0, 2.0)
    rep = local_horizon(prob)
    assert rep.blow_up
    assert rep.T0_estimate == pytest.approx(1.0 / C, rel=1e-2)


def test_horizon_tan_oracle(line, conservative):
    prob = _constant_problem(line, conservative, 0.0, 1.0, 2.0)
    rep = local_horizon(prob)
    assert rep.blow_up
    assert rep.T0_estimate == pytest.approx(np.pi / 2.0, rel=1e-2)


def test_horizon_majorant_matches_closed_form(line, conservative):
    # b(t) = (1 - t)^(-1) for phi = 1, p = 2 before blow-up
    prob = _constant_problem(line, conservative, 1.0, 0.0, 2.0)
    rep = local_horizon(prob)
    keep = rep.t_samples <= 0.8
    np.testing.assert_allclose(rep.b_samples[keep],
                               1.0 / (1.0 - rep.t_samples[keep]), rtol=1e-2)


def test_horizon_existence_condition_boundary(line, conservative):
    # the closed-form blow-ups saturate the existence bound 1/(p-1)
    prob = _constant_problem(line, conservative, 1.0, 0.0, 2.0)
    rep = local_horizon(prob)
    assert rep.existence_condition_value == pytest.approx(1.0, abs=5e-3)
    assert rep.condition_met


def test_horizon_no_blow_up_for_tiny_data(line, conservative):
    prob = _constant_problem(line, conservative, 1e-4, 0.0, 2.0)
    rep = local_horizon(prob, t_limit=10.0)
    assert not rep.blow_up
    assert rep.T0_estimate == np.inf


# -- witness -------------------------------------------------------------------------


def test_witness_growth_matches_exponent_formula():
    space = build_lattice_space(dim=1, radius=20.0, points_per_axis=801)
    k = GaussWeierstrass(1)
    hc = harnack_constants(1.0, 2.0, 1.0, 2.0)
    phi = gaussian_bump_field(space, 1.0, 0.3)
    f = constant_field(space, 0.0)
    ts = np.geomspace(5.0, 80.0, 9)
    for p, want in ((2.0, 0.5), (4.0, -1.0 / 6.0)):
        prob = ProblemSpec(kernel=k, space=space, phi=phi, f=f, p=p)
        rep = nonexistence_witness(prob, hc, ts)
        assert rep.growth_exponent == pytest.approx(want, abs=0.05)
        assert rep.witness_found == (want > 0)


def test_witness_requires_enough_times_and_data(line, conservative):
    hc = harnack_constants(1.0, 2.0, 1.0, 2.0)
    prob = _constant_problem(line, conservative, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        nonexistence_witness(prob, hc, [1.0, 2.0, 3.0])     # too few
    zero = _constant_problem(line, conservative, 0.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        nonexistence_witness(zero, hc, [1.0, 2.0, 4.0, 8.0])
