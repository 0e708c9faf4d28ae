import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedy_energy.analysis import (block_trajectory, cell_discrepancy, cell_frequencies,
                                    cell_masses, convergence_report, energy_identity_error,
                                    energy_trajectory, ks_distance_1d, ks_distance_radial,
                                    ks_statistic, robin_limit_check, robin_trajectory,
                                    sequence_diagnostics, support_violation, tail_mean,
                                    van_der_corput)
from greedy_energy.conductor import CandidateSet, ball_grid, box_grid, interval_grid
from greedy_energy.equilibrium import (discrete_equilibrium, radial_newtonian_reference,
                                       riesz_interval_reference)
from greedy_energy.field import FieldSpec
from greedy_energy.kernel import KernelSpec, weighted_energy, Configuration
from greedy_energy.selector import block_greedy_run, greedy_run

LOG = KernelSpec(0.0)
ZERO = FieldSpec.zero()
R0 = 2 ** (-1 / 3)


@pytest.fixture(scope="module")
def radial():
    return radial_newtonian_reference(3, FieldSpec.quadratic(3))


@pytest.fixture(scope="module")
def run200():
    cand = interval_grid(-1, 1, 2001)
    return cand, greedy_run(LOG, ZERO, cand, 200)


# -- trajectories ---------------------------------------------------------------------

def test_energy_trajectory_pair():
    cand = interval_grid(-1, 1, 2)
    tr = greedy_run(LOG, ZERO, cand, 2, start=0)
    n, e = energy_trajectory(tr, LOG, ZERO, cand)
    assert list(n) == [2]
    assert e[0] == pytest.approx(-2 * math.log(2) / 4, abs=1e-15)
    assert e[0] == pytest.approx(-0.34657, abs=5e-6)


def test_block_energy_trajectory_pair():
    cand = interval_grid(-1, 1, 2)
    tr = block_greedy_run(LOG, ZERO, cand, 2, 1)
    n, e = energy_trajectory(tr)
    assert list(n) == [2]
    assert e[0] == pytest.approx(-2 * math.log(2) / 4, abs=1e-15)


def test_block_trajectory_samples_whole_blocks():
    cand = interval_grid(-1, 1, 41)
    tr = block_greedy_run(KernelSpec(0.5), FieldSpec.absolute(), cand, 2, 5)
    n, _ = energy_trajectory(tr)
    assert list(n) == [2, 4, 6, 8, 10]
    N, vals = block_trajectory(tr)
    assert list(N) == [1, 2, 3, 4]
    with pytest.raises(ValueError):
        block_trajectory(greedy_run(LOG, ZERO, cand, 4))


def test_energy_trajectory_reaches_log2(run200, log_ladder):
    _, tr = run200
    _, e = energy_trajectory(tr)
    assert abs(e[-1] - log_ladder.V_hat) <= 0.06


def test_robin_examples():
    cand = interval_grid(-1, 1, 3)
    tr = greedy_run(LOG, ZERO, cand, 2, start=0)
    assert tr.selected[1] == 2
    n, r = robin_trajectory(tr)
    assert n[0] == 2
    assert r[0] == pytest.approx(-math.log(2) / 2, abs=1e-15)


@pytest.mark.parametrize("s", [0.0, 0.7, 1.5])
def test_robin_pair_is_half_kernel(s):
    cand = interval_grid(-1, 1, 9)
    kernel = KernelSpec(s)
    tr = greedy_run(kernel, ZERO, cand, 2, start=3)
    a = cand.points[tr.selected]
    _, r = robin_trajectory(tr)
    assert r[0] == pytest.approx(kernel.profile(abs(a[1, 0] - a[0, 0])) / 2, rel=1e-14)


def test_robin_tail_near_W(run200, log_ladder):
    _, tr = run200
    _, r = robin_trajectory(tr)
    assert abs(tail_mean(r) - log_ladder.W_hat) <= 0.08


def test_tail_mean():
    assert tail_mean([1, 2, 3, 4, 5, 6, 7, 8]) == 7.5
    assert tail_mean([np.nan, 1.0, 3.0]) == 3.0
    assert np.isnan(tail_mean([np.nan]))


# -- consistency with independent recomputation ------------------------------------

@pytest.mark.parametrize("s, field, cand", [
    (0.0, FieldSpec.zero(), interval_grid(-1, 1, 201)),
    (0.5, FieldSpec.absolute(), interval_grid(-2, 2, 301)),
    (1.0, FieldSpec.jacobi(2, 1), interval_grid(-1, 1, 201)),
    (0.8, FieldSpec.quadratic(2), box_grid([0, 0], [1, 1], 15)),
])
def test_trace_matches_recomputation(s, field, cand):
    kernel = KernelSpec(s)
    tr = greedy_run(kernel, field, cand, 60)
    u, energy = sequence_diagnostics(kernel, field, tr.points(cand))
    np.testing.assert_allclose(u[1:], tr.u_values[1:], rtol=1e-10, atol=1e-10)
    np.testing.assert_allclose(energy[1:], tr.energy_prefix[1:], rtol=1e-10, atol=1e-9)
    for N in (2, 17, 60):
        direct = weighted_energy(kernel, field, Configuration(tr.points(cand)[:N]))
        assert tr.energy_prefix[N - 1] == pytest.approx(direct, rel=1e-10, abs=1e-10)
    assert energy_identity_error(tr) <= 1e-10


def test_identity_holds_for_block_traces():
    cand = interval_grid(-1, 1, 61)
    tr = block_greedy_run(KernelSpec(0.5), FieldSpec.absolute(), cand, 3, 6)
    assert energy_identity_error(tr) <= 1e-10


def test_identity_detects_corruption():
    cand = interval_grid(-1, 1, 101)
    tr = greedy_run(LOG, ZERO, cand, 30)
    tr.u_values[10] += 0.5
    assert energy_identity_error(tr) > 1e-4


def test_trajectories_invariant_under_reflection():
    # the symmetric instance started at mirrored points gives mirrored traces
    cand = interval_grid(-1, 1, 201)
    kernel, field = KernelSpec(0.5), FieldSpec.absolute()
    a = greedy_run(kernel, field, cand, 40, start=30)
    b = greedy_run(kernel, field, cand, 40, start=170)
    np.testing.assert_allclose(energy_trajectory(a)[1], energy_trajectory(b)[1], rtol=1e-12)
    np.testing.assert_allclose(robin_trajectory(a)[1], robin_trajectory(b)[1], rtol=1e-12)


# -- KS distances ------------------------------------------------------------------------

def test_ks_three_points_vs_arcsine(riesz_refs):
    assert ks_distance_1d([-1.0, 0.0, 1.0], riesz_refs[0.0]) == pytest.approx(1 / 3, abs=1e-14)


def test_ks_statistic_uniform():
    x = (np.arange(1, 11) - 0.5) / 10
    assert ks_statistic(x, lambda t: t) == pytest.approx(0.05)
    with pytest.raises(ValueError):
        ks_statistic([], lambda t: t)


@pytest.mark.parametrize("s", [0.0, 0.5])
def test_ks_quantile_sample(riesz_refs, s):
    ref = riesz_refs[s]
    u = (np.arange(1, 1001) - 0.5) / 1000
    x = ref.quantiles(u)
    assert ks_distance_1d(x, ref) <= 0.002


def test_ks_greedy_s05(riesz_refs):
    cand = interval_grid(-1, 1, 2001)
    tr = greedy_run(KernelSpec(0.5), ZERO, cand, 500)
    assert ks_distance_1d(tr.points(cand), riesz_refs[0.5]) <= 0.1


def test_ks_radial_examples(radial):
    rng = np.random.default_rng(11)
    u = (np.arange(1, 1001) - 0.5) / 1000
    r = radial.quantiles(u)
    assert r == pytest.approx((u / 2) ** (1 / 3), abs=1e-9)
    dirs = rng.normal(size=(1000, 3))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    assert ks_distance_radial(dirs * r[:, None], radial) <= 0.002
    shell = dirs * R0
    assert ks_distance_radial(shell, radial) == pytest.approx(1.0, abs=1e-9)
    with pytest.raises(ValueError):
        ks_distance_radial(np.zeros((3, 2)), radial)
    with pytest.raises(ValueError):
        ks_distance_1d([0.0], radial)


# -- support --------------------------------------------------------------------------

def test_planted_point_violation(radial):
    field = FieldSpec.quadratic(3)
    planted = np.array([[0.0, 0.0, 0.0], [1.5 * R0, 0.0, 0.0]])
    cand = CandidateSet(planted, 1.5 * R0)
    tr = greedy_run(KernelSpec(1), field, cand, 2, start=0)
    assert tr.selected[1] == 1
    v = support_violation(tr, radial, field, cand)
    expected = 1 / (1.5 * R0) + (1.5 * R0) ** 2 - radial.W_f
    assert v == pytest.approx(expected, rel=1e-12)
    assert v == pytest.approx(0.36747697288600467, abs=1e-12)


def test_radial_run_violation_small(radial):
    cand = ball_grid(1.2 * R0, 3, 21)
    field = FieldSpec.quadratic(3)
    tr = greedy_run(KernelSpec(1), field, cand, 120)
    assert support_violation(tr, radial, field, cand) <= 0.05


def test_interval_run_violation_small(riesz_refs):
    ref = riesz_refs[0.5]
    cand = interval_grid(-1, 1, 2001)
    tr = greedy_run(KernelSpec(0.5), ZERO, cand, 500)
    assert support_violation(tr, ref, ZERO, cand) <= 0.05 * abs(ref.W_f)


# -- cells ---------------------------------------------------------------------------------

def test_cell_frequencies_boundary_convention():
    pts = np.array([[0.0, 0.0], [0.25, 0.0], [1.0, 1.0], [0.5, 0.74]])
    freq = cell_frequencies(pts, [0, 0], [1, 1], 4)
    assert freq.shape == (16,) and freq.sum() == pytest.approx(1)
    assert freq[0] == 0.25 and freq[4] == 0.25 and freq[15] == 0.25 and freq[2 * 4 + 2] == 0.25


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 6), st.integers(0, 2 ** 31))
def test_cell_masses_conserve_weight(cells, seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, size=(50, 2))
    w = rng.uniform(size=50)
    assert cell_masses(pts, w, [0, 0], [1, 1], cells).sum() == pytest.approx(w.sum())


def test_cell_discrepancy_self_consistent():
    cand = box_grid([0, 0], [1, 1], 11)
    ref = discrete_equilibrium(KernelSpec(0.8), FieldSpec.quadratic(2), cand)
    # uniform weights on the grid versus themselves
    uni = CandidateSet(cand.points, cand.mesh_scale)
    freq = cell_frequencies(uni.points, [0, 0], [1, 1], 4)
    assert cell_discrepancy(cand.points, ref, [0, 0], [1, 1]) == pytest.approx(
        np.abs(freq - cell_masses(cand.points, ref.weights, [0, 0], [1, 1], 4)).max())


# -- limit diagnostic ------------------------------------------------------------------------

def test_robin_limit_check_on_greedy(run200, log_ladder):
    cand, tr = run200
    ref = log_ladder.finest
    check = robin_limit_check(tr.selected, LOG, ZERO, cand, ref)
    assert check.hypothesis_ok and check.conclusion_ok
    _, e = energy_trajectory(tr)
    np.testing.assert_allclose(check.e_values, e, rtol=1e-10)


def test_robin_limit_check_constant_sequence(riesz_refs):
    ref = riesz_refs[0.5]
    pts = np.full((20, 1), 0.3)
    check = robin_limit_check(pts, KernelSpec(0.5), ZERO, None, ref)
    assert check.t_tail == math.inf
    assert not check.hypothesis_ok and not check.conclusion_ok


def test_robin_limit_check_arcsine_quantiles(riesz_refs):
    ref = riesz_refs[0.0]
    b = -np.cos(math.pi * van_der_corput(400))
    check = robin_limit_check(b[:, None], LOG, ZERO, None, ref)
    assert check.hypothesis_ok and check.conclusion_ok
    with pytest.raises(ValueError, match="targets"):
        robin_limit_check(b[:, None], LOG, ZERO, None, riesz_interval_reference(0.0, ladder=None))


def test_van_der_corput():
    np.testing.assert_array_equal(van_der_corput(7), [0.5, 0.25, 0.75, 0.125, 0.625, 0.375, 0.875])
    assert van_der_corput(4, base=3)[:3] == pytest.approx([1 / 3, 2 / 3, 1 / 9])


def test_convergence_report(run200, riesz_refs):
    cand, tr = run200
    rep = convergence_report(tr, LOG, ZERO, cand, riesz_refs[0.0], ks_every=10)
    fin = rep.final()
    assert fin["N"] == 200
    assert fin["ks_distance"] == pytest.approx(ks_distance_1d(tr.points(cand), riesz_refs[0.0]))
    assert fin["target_Vf"] == pytest.approx(math.log(2), abs=5e-3)
    assert len(rep.N_values) == len(rep.normalized_energy) == len(rep.ks_distances) == 199
