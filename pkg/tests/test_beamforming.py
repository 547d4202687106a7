"""Conic-solver contracts: feasibility classification, bisection, power
minimization, and the optimality properties the schemes rely on."""

import math

import numpy as np
import pytest

from conftest import random_channels
from cran_maxmin.beamforming import (
    SolverTolerances,
    check_feasible,
    mrt_gamma_upper_bound,
    solve_max_min,
    solve_power_min,
)
from cran_maxmin.model import (
    AssociationMap,
    ChannelState,
    compute_all_sinrs,
    per_rrh_power,
)

TOL = SolverTolerances()


def mrt_bound(ch, caps, sigma2):
    return mrt_gamma_upper_bound(ch, caps, sigma2)


class TestCheckFeasible:
    def test_zero_target_always_feasible(self):
        ch = random_channels(0, 2, 2, 2)
        out = check_feasible(ch, AssociationMap.full(2, 2), 0.0, [1.0, 1.0], 1.0)
        assert out.status == "feasible"
        assert np.all(out.beamformers.w == 0)

    def test_single_user_mrt_bound_brackets(self):
        for seed in range(4):
            ch = random_channels(seed, 1, 2, 2, noise_power_w=1.3)
            assoc = AssociationMap.full(2, 1)
            caps = [0.8, 1.5]
            bound = mrt_bound(ch, caps, 1.3)
            assert check_feasible(ch, assoc, bound * 0.98, caps, 1.3).status == "feasible"
            assert check_feasible(ch, assoc, bound * 1.02, caps, 1.3).status == "infeasible"

    def test_unserved_user_infeasible(self):
        ch = random_channels(1, 2, 2, 2)
        assoc = AssociationMap((frozenset([0]), frozenset([0])))  # user 1 unserved
        out = check_feasible(ch, assoc, 0.5, [1.0, 1.0], 1.0)
        assert out.status == "infeasible"

    def test_negative_target_rejected(self):
        ch = random_channels(2, 1, 1, 1)
        with pytest.raises(ValueError):
            check_feasible(ch, AssociationMap.full(1, 1), -0.1, [1.0], 1.0)

    def test_dimension_mismatch_rejected(self):
        ch = random_channels(3, 2, 2, 2)
        with pytest.raises(ValueError):
            check_feasible(ch, AssociationMap.full(3, 2), 0.5, [1.0] * 3, 1.0)
        with pytest.raises(ValueError):
            check_feasible(ch, AssociationMap.full(2, 2), 0.5, [1.0] * 3, 1.0)

    def test_feasible_point_meets_query(self):
        ch = random_channels(4, 3, 2, 2, noise_power_w=0.6)
        assoc = AssociationMap((frozenset([0, 1, 2]), frozenset([1, 2])))
        caps = [1.0, 0.7]
        gamma = 0.3
        out = check_feasible(ch, assoc, gamma, caps, 0.6)
        assert out.status == "feasible"
        bf = out.beamformers
        sinr = compute_all_sinrs(ch, bf, 0.6)
        assert (sinr >= gamma * (1 - 1e-6)).all()
        assert (per_rrh_power(bf) <= np.array(caps) * (1 + 1e-6)).all()
        # eliminated links are exactly zero; aggregate gains are real
        assert np.all(bf.w[0, 1] == 0)
        sig = np.einsum("knm,knm->k", ch.h.conj(), bf.w)
        assert np.all(np.abs(sig.imag) <= 1e-9 * np.abs(sig.real))

    def test_monotone_feasibility(self):
        # any target above a feasible one being feasible implies the lower
        # one is too; probe a ladder of targets
        ch = random_channels(5, 3, 2, 2)
        assoc = AssociationMap.full(2, 3)
        caps = [1.0, 1.0]
        gamma_star, _ = solve_max_min(ch, assoc, caps, 1.0, TOL)
        ladder = gamma_star * np.array([0.2, 0.5, 0.9, 0.99, 1.05, 1.5, 3.0])
        results = [check_feasible(ch, assoc, g, caps, 1.0).status for g in ladder]
        # once infeasible, stays infeasible
        seen_infeasible = False
        for status in results:
            if status == "infeasible":
                seen_infeasible = True
            elif seen_infeasible:
                pytest.fail(f"feasibility not monotone: {results}")


class TestSolveMaxMin:
    def test_single_user_closed_form(self):
        for seed in range(5):
            ch = random_channels(10 + seed, 1, 2, 2, noise_power_w=0.9)
            caps = [0.5, 2.0]
            bound = mrt_bound(ch, caps, 0.9)
            gamma, bf = solve_max_min(ch, AssociationMap.full(2, 1), caps, 0.9, TOL)
            assert gamma == pytest.approx(bound, rel=1e-3)
            sinr = compute_all_sinrs(ch, bf, 0.9)
            assert sinr[0] == pytest.approx(gamma, rel=1e-4)

    def test_zero_channels(self):
        ch = ChannelState(np.zeros((2, 1, 1), complex), 1.0)
        gamma, bf = solve_max_min(ch, AssociationMap.full(1, 2), [1.0], 1.0, TOL)
        assert gamma == 0.0 and np.all(bf.w == 0)

    def test_orthogonal_two_user_hand_instance(self):
        # two users on orthogonal channels of one 2-antenna RRH with power 2:
        # each gets unit power on its own direction, zero interference
        h = np.zeros((2, 1, 2), complex)
        h[0, 0] = [1.0, 0.0]
        h[1, 0] = [0.0, 1.0]
        ch = ChannelState(h, 1.0)
        gamma, bf = solve_max_min(ch, AssociationMap.full(1, 2), [2.0], 1.0, TOL)
        assert gamma == pytest.approx(1.0, rel=2e-4)
        np.testing.assert_allclose(compute_all_sinrs(ch, bf, 1.0), [1.0, 1.0],
                                   rtol=1e-4)

    def test_unserved_user_returns_zero(self):
        ch = random_channels(20, 2, 2, 2)
        assoc = AssociationMap((frozenset([0]), frozenset()))
        gamma, bf = solve_max_min(ch, assoc, [1.0, 1.0], 1.0, TOL)
        assert gamma == 0.0 and np.all(bf.w == 0)

    def test_equal_sinr_at_optimum(self):
        for seed in range(4):
            ch = random_channels(30 + seed, 4, 2, 2, noise_power_w=0.5)
            gamma, bf = solve_max_min(ch, AssociationMap.full(2, 4),
                                      [1.0, 1.5], 0.5, TOL)
            sinr = compute_all_sinrs(ch, bf, 0.5)
            assert (sinr.max() - sinr.min()) <= 1e-3 * gamma

    def test_power_caps_respected(self):
        ch = random_channels(40, 4, 2, 2)
        caps = [0.6, 1.1]
        gamma, bf = solve_max_min(ch, AssociationMap.full(2, 4), caps, 1.0, TOL)
        assert (per_rrh_power(bf) <= np.array(caps) * (1 + 1e-6)).all()

    def test_bisection_bracketing(self):
        for seed in range(4):
            ch = random_channels(50 + seed, 3, 2, 2)
            assoc = AssociationMap.full(2, 3)
            caps = [1.0, 1.0]
            gamma, _ = solve_max_min(ch, assoc, caps, 1.0, TOL)
            r = TOL.bisection_rel_tol
            assert check_feasible(ch, assoc, gamma * (1 - 5 * r), caps, 1.0,
                                  TOL).status == "feasible"
            assert check_feasible(ch, assoc, gamma * (1 + 5 * r), caps, 1.0,
                                  TOL).status == "infeasible"

    def test_removing_link_never_helps(self):
        for seed in range(3):
            ch = random_channels(60 + seed, 3, 2, 2)
            caps = [1.0, 1.0]
            full = AssociationMap.full(2, 3)
            g_full, _ = solve_max_min(ch, full, caps, 1.0, TOL)
            for (k, n) in [(0, 0), (2, 1)]:
                g_sub, _ = solve_max_min(ch, full.remove_link(k, n), caps, 1.0, TOL)
                assert g_sub <= g_full * (1 + 1e-3)

    def test_zero_forced_links_stay_zero(self):
        ch = random_channels(70, 3, 2, 2)
        assoc = AssociationMap((frozenset([0, 1]), frozenset([1, 2])))
        gamma, bf = solve_max_min(ch, assoc, [1.0, 1.0], 1.0, TOL)
        assert gamma > 0
        assert np.all(bf.w[2, 0] == 0) and np.all(bf.w[0, 1] == 0)

    def test_upper_hint_matches_default(self):
        ch = random_channels(80, 3, 2, 2)
        assoc = AssociationMap.full(2, 3)
        g0, _ = solve_max_min(ch, assoc, [1.0, 1.0], 1.0, TOL)
        g1, _ = solve_max_min(ch, assoc, [1.0, 1.0], 1.0, TOL,
                              gamma_upper_hint=g0 * 4.0)
        assert g1 == pytest.approx(g0, rel=3 * TOL.bisection_rel_tol)


class TestSolvePowerMin:
    def test_zero_target_zero_power(self):
        ch = random_channels(90, 2, 2, 2)
        bf = solve_power_min(ch, AssociationMap.full(2, 2), 0.0, [1.0, 1.0], 1.0)
        assert np.all(bf.w == 0)

    def test_single_user_closed_form(self):
        # with slack caps the optimum beam is matched filtering over the
        # stacked channel: total power = gamma * sigma^2 / ||h||^2
        ch = random_channels(91, 1, 2, 3, noise_power_w=1.4)
        total_gain = float(np.sum(np.abs(ch.h) ** 2))
        gamma = 0.7
        bf = solve_power_min(ch, AssociationMap.full(2, 1), gamma,
                             [5.0, 5.0], 1.4)
        assert per_rrh_power(bf).sum() == pytest.approx(gamma * 1.4 / total_gain,
                                                        rel=1e-5)

    def test_power_strictly_below_full_budget(self):
        ch = random_channels(92, 1, 2, 2, noise_power_w=1.0)
        caps = [1.0, 1.0]
        bound = mrt_bound(ch, caps, 1.0)
        bf = solve_power_min(ch, AssociationMap.full(2, 1), 0.25 * bound, caps, 1.0)
        assert per_rrh_power(bf).sum() < 0.9 * sum(caps)

    def test_all_targets_met_tightly(self):
        for seed in range(3):
            ch = random_channels(93 + seed, 4, 2, 2, noise_power_w=0.8)
            assoc = AssociationMap.full(2, 4)
            g_star, _ = solve_max_min(ch, assoc, [1.0, 1.0], 0.8, TOL)
            target = 0.7 * g_star
            bf = solve_power_min(ch, assoc, target, [1.0, 1.0], 0.8)
            sinr = compute_all_sinrs(ch, bf, 0.8)
            assert (sinr >= target * (1 - 1e-5)).all()
            assert (sinr.max() - sinr.min()) <= 1e-3 * target

    def test_infeasible_target_raises(self):
        ch = ChannelState(np.ones((1, 1, 1), complex), 1.0)
        with pytest.raises(ValueError, match="infeasible"):
            solve_power_min(ch, AssociationMap.full(1, 1), 5.0, [1.0], 1.0)

    def test_unserved_user_raises(self):
        ch = random_channels(94, 2, 1, 1)
        with pytest.raises(ValueError):
            solve_power_min(ch, AssociationMap((frozenset([0]),)), 0.5, [1.0], 1.0)

    def test_negative_target_rejected(self):
        ch = random_channels(95, 1, 1, 1)
        with pytest.raises(ValueError):
            solve_power_min(ch, AssociationMap.full(1, 1), -1.0, [1.0], 1.0)


def test_tolerances_validation():
    with pytest.raises(ValueError):
        SolverTolerances(bisection_rel_tol=0.0)
    with pytest.raises(ValueError):
        SolverTolerances(max_bisection_iters=0)
