from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spatcast as sc


def dist_of(values, quantity="d4", stratum=120.0):
    return sc.EmpiricalDist(np.array(values, dtype=float), quantity, stratum)


int_samples = st.lists(st.integers(0, 120), min_size=1, max_size=50)


class TestExpectation:
    def test_point_mass(self):
        p = sc.predict_expectation(dist_of([40, 40, 40]), 10)
        assert p.predicted_duration == 40.0
        assert p.residual == 30.0
        assert p.n_conditioning_samples == 3
        assert not p.degraded

    def test_survivor_mean(self):
        p = sc.predict_expectation(dist_of([30, 40, 50]), 35)
        assert p.predicted_duration == pytest.approx(45.0)
        assert p.residual == pytest.approx(10.0)
        assert p.n_conditioning_samples == 2

    def test_empty_condition_propagates(self):
        with pytest.raises(sc.EmptyCondition):
            sc.predict_expectation(dist_of([30]), 30)

    def test_hold_fallback(self):
        p = sc.predict_expectation(dist_of([30]), 35, hold_interval=1.0)
        assert p.degraded
        assert p.predicted_duration == 36.0
        assert p.residual == 1.0
        assert p.n_conditioning_samples == 0


class TestConfidence:
    def test_point_mass(self):
        p = sc.predict_confidence(dist_of([40]), 0, 0.8)
        assert p.predicted_duration == 40.0

    def test_unconditioned_scan(self):
        p = sc.predict_confidence(dist_of([30, 30, 40, 50, 50]), 0, 0.8)
        assert p.predicted_duration == 30.0

    def test_conditioned_scan(self):
        # survivors past 31 are {40, 50, 50}: P(X>=40)=1, P(X>=50)=2/3
        p = sc.predict_confidence(dist_of([30, 30, 40, 50, 50]), 31, 0.8)
        assert p.predicted_duration == 40.0


def grid_loss_minimizer(samples, c1, c2, lo, hi, step=0.01):
    """Brute-force scan of the asymmetric loss over a dense grid."""
    best_x = None
    best = float("inf")
    x = lo
    while x <= hi + 1e-12:
        loss = sum(c1 * (d - x) if x < d else c2 * (x - d) for d in samples)
        if loss < best - 1e-12:
            best, best_x = loss, x
        x = round(x + step, 10)
    return best_x


class TestAsymmetric:
    def test_symmetric_weights_give_median(self):
        p = sc.predict_asymmetric(dist_of([10, 20, 30, 40, 50]), 0, 1, 1)
        assert p.predicted_duration == 30.0

    def test_matches_grid_search(self):
        samples = [10, 20, 30, 40, 50]
        oracle = grid_loss_minimizer(samples, c1=3, c2=1, lo=10, hi=50)
        assert oracle == 40.0
        p = sc.predict_asymmetric(dist_of(samples), 0, 3, 1)
        assert p.predicted_duration == oracle

    def test_swapping_weights_crosses_median(self):
        dist = dist_of([10, 10, 10, 50, 50])
        low = sc.predict_asymmetric(dist, 0, 1, 3).predicted_duration
        high = sc.predict_asymmetric(dist, 0, 3, 1).predicted_duration
        median = dist.quantile(0.5)
        assert low <= median <= high
        assert low < high

    def test_nonpositive_weights_rejected(self):
        with pytest.raises(sc.NonpositiveWeight):
            sc.predict_asymmetric(dist_of([10]), 0, 0, 1)
        with pytest.raises(sc.NonpositiveWeight):
            sc.predict_asymmetric(dist_of([10]), 0, 1, -2)


class TestSumPredictors:
    SUMS = [36.0, 41.0, 41.0, 51.0]
    LEAD = [36.0, 36.0, 41.0, 41.0]
    FOLLOW = [0.0, 5.0, 0.0, 10.0]

    def test_marginal_expectation_conditions_on_sum(self):
        dist = dist_of(self.SUMS, quantity="d4+d1")
        p = sc.predict_sum_marginal(dist, 38, sc.Expectation())
        # survivors {41, 41, 51}
        assert p.predicted_duration == pytest.approx(133 / 3)
        assert p.n_conditioning_samples == 3

    def test_marginal_unconditioned(self):
        dist = dist_of(self.SUMS, quantity="d4+d1")
        p = sc.predict_sum_marginal(dist, 0, sc.Expectation())
        assert p.predicted_duration == pytest.approx(42.25)

    def test_marginal_confidence(self):
        dist = dist_of(self.SUMS, quantity="d4+d1")
        p = sc.predict_sum_marginal(dist, 38, sc.Confidence(0.8))
        assert p.predicted_duration == 41.0

    def test_marginal_requires_sum_quantity(self):
        with pytest.raises(ValueError):
            sc.predict_sum_marginal(dist_of([36.0]), 0, sc.Expectation())

    def test_joint_conditions_on_lead(self):
        joint = sc.JointSamples(self.LEAD, self.FOLLOW)
        p = sc.predict_sum_joint(joint, 38, sc.Expectation())
        # pairs with lead > 38: (41,0), (41,10); mean of {41, 51}
        assert p.predicted_duration == pytest.approx(46.0)

    def test_routes_agree_at_zero(self):
        joint = sc.JointSamples(self.LEAD, self.FOLLOW)
        marginal = dist_of(self.SUMS, quantity="d4+d1")
        a = sc.predict_sum_marginal(marginal, 0, sc.Expectation())
        b = sc.predict_sum_joint(joint, 0, sc.Expectation())
        assert a.predicted_duration == b.predicted_duration

    def test_single_pair(self):
        joint = sc.JointSamples([40.0], [5.0])
        for t in (0, 10, 39.9):
            p = sc.predict_sum_joint(joint, t, sc.Expectation())
            assert p.predicted_duration == 45.0


class TestSchedule:
    def point_mass_dists(self):
        values = {"d4": [36.0] * 3, "d1": [5.0] * 3, "d2": [79.0] * 3}
        dists = {k: dist_of(v, quantity=k) for k, v in values.items()}
        dists["d4+d1"] = dist_of([41.0] * 3, quantity="d4+d1")
        return dists

    def test_point_mass_transitions(self):
        sched = sc.predict_schedule(self.point_mass_dists(), "p4", 0.0, 1)
        by_phase = {e.phase: e for e in sched}
        assert by_phase["p4"].end_time == 36.0
        assert by_phase["p1"].end_time == 41.0
        assert by_phase["p2"].end_time == 120.0
        assert all(e.cycle_offset == 0 for e in sched)

    def test_next_cycle_stacks_cycle_length(self):
        sched = sc.predict_schedule(self.point_mass_dists(), "p4", 10.0, 2)
        current = {e.phase: e.end_time for e in sched if e.cycle_offset == 0}
        future = {e.phase: e.end_time for e in sched if e.cycle_offset == 1}
        for phase in ("p4", "p1", "p2"):
            assert future[phase] == pytest.approx(current[phase] + 120.0)
        assert sc.next_green_start(sched, "p4") == 120.0

    def test_horizon_one_has_no_future_cycles(self):
        sched = sc.predict_schedule(self.point_mass_dists(), "p4", 0.0, 1)
        assert {e.cycle_offset for e in sched} == {0}

    def test_mid_phase_uses_sum_distribution(self):
        dists = self.point_mass_dists()
        sched = sc.predict_schedule(dists, "p1", 38.0, 1)
        by_phase = {e.phase: e for e in sched}
        assert set(by_phase) == {"p1", "p2"}
        assert by_phase["p1"].end_time == 41.0
        assert by_phase["p1"].start_time is None

    def test_coordination_phase_is_deterministic(self):
        sched = sc.predict_schedule(self.point_mass_dists(), "p2", 60.0, 1)
        assert len(sched) == 1
        assert sched[0].end_time == 120.0


@settings(max_examples=100, deadline=None)
@given(int_samples, st.floats(0, 119), st.floats(0.05, 0.95))
def test_all_methods_predict_strictly_past_t(samples, t, alpha):
    dist = dist_of(samples)
    if dist.support_max() <= t:
        return
    for method in (sc.Expectation(), sc.Confidence(alpha), sc.AsymmetricLoss(2, 1)):
        p = sc.predict(dist, t, method)
        assert p.predicted_duration > t
        assert p.residual == pytest.approx(p.predicted_duration - t)


@settings(max_examples=60, deadline=None)
@given(int_samples, st.floats(0, 100))
def test_confidence_nonincreasing_in_alpha(samples, t):
    dist = dist_of(samples)
    if dist.support_max() <= t:
        return
    alphas = [0.1, 0.3, 0.5, 0.7, 0.9]
    values = [sc.predict_confidence(dist, t, a).predicted_duration for a in alphas]
    assert all(b <= a for a, b in zip(values, values[1:]))


def test_residual_jumps_upward_on_bimodal_history():
    # 9 cycles at 36 s and one at 45 s: once t passes the modal value, only
    # the long cycle survives and the predicted residual grows.
    samples = [36.0] * 9 + [45.0]
    dist = dist_of(samples)
    before = sc.predict_expectation(dist, 35.99)
    after = sc.predict_expectation(dist, 36.0)
    mean_all = sum(Fraction(s) for s in samples) / len(samples)
    assert before.predicted_duration == pytest.approx(float(mean_all))
    assert after.predicted_duration == 45.0
    assert after.residual > before.residual
