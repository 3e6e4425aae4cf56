import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import spatcast as sc
from spatcast.evaluate import compare, loss_curve, mae_curve, mse_curve, write_comparison_csv


def dist_of(values, quantity="d4", stratum=120.0):
    return sc.EmpiricalDist(np.array(values, dtype=float), quantity, stratum)


def table_from_d4(values, build):
    return build([(v, 0.0, 0.0) for v in values])


class TestCurves:
    def test_perfect_predictor_on_point_mass(self, build_table):
        table = table_from_d4([40.0] * 5, build_table)
        dist = sc.fit(table, "d4")
        curve = mae_curve(sc.Expectation(), dist, table)
        assert np.all(curve.values == 0.0)
        curve = mse_curve(sc.Expectation(), dist, table)
        assert np.all(curve.values == 0.0)

    def test_constant_predictor_hand_values(self, build_table):
        table = table_from_d4([30.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        constant = lambda d, t: 40.0
        mae = mae_curve(constant, dist, table, predictor_label="const40")
        mse = mse_curve(constant, dist, table, predictor_label="const40")
        assert mae.values[0] == 10.0
        assert mse.values[0] == 100.0
        assert mae.counts[0] == 2

    def test_survivor_counts_nonincreasing(self, build_table):
        table = table_from_d4([30.0, 40.0, 50.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        curve = mae_curve(sc.Expectation(), dist, table)
        assert np.all(np.diff(curve.counts) <= 0)
        assert curve.ts[0] == 0.0
        assert curve.ts[-1] < 50.0

    def test_symmetric_loss_equals_mae(self, build_table):
        table = table_from_d4([30.0, 36.0, 41.0, 55.0], build_table)
        dist = sc.fit(table, "d4")
        mae = mae_curve(sc.Expectation(), dist, table)
        sym = loss_curve(sc.Expectation(), dist, table, 1, 1)
        np.testing.assert_array_equal(mae.values, sym.values)

    def test_empty_grid(self, build_table):
        table = table_from_d4([40.0], build_table)
        dist = sc.fit(table, "d1")  # all zeros: nothing survives t = 0
        with pytest.raises(sc.EmptyGrid):
            mae_curve(sc.Expectation(), dist, table)

    def test_threads_match_serial(self, build_table):
        table = table_from_d4([30.0, 36.0, 44.0, 59.0, 60.0], build_table)
        dist = sc.fit(table, "d4")
        serial = mse_curve(sc.Expectation(), dist, table)
        threaded = mse_curve(sc.Expectation(), dist, table, threads=4)
        np.testing.assert_array_equal(serial.values, threaded.values)
        np.testing.assert_array_equal(serial.ts, threaded.ts)


class TestLeaveOneOut:
    def test_two_sample_hand_computation(self, build_table):
        # dropping 30 predicts 50 (error 20); dropping 50 predicts 30 (error 20)
        table = table_from_d4([30.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        loo = mae_curve(sc.Expectation(), dist, table, leave_one_out=True)
        assert loo.values[0] == 20.0
        insample = mae_curve(sc.Expectation(), dist, table)
        assert insample.values[0] == 10.0

    def test_requires_refittable_predictor(self, build_table):
        table = table_from_d4([30.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        with pytest.raises(ValueError):
            mae_curve(lambda d, t: 40.0, dist, table, leave_one_out=True)

    def test_large_n_converges_to_in_sample(self, build_table):
        rng = np.random.default_rng(5)
        values = (36 + 5 * rng.poisson(1.2, size=400)).astype(float)
        table = table_from_d4(values.tolist(), build_table)
        dist = sc.fit(table, "d4")
        insample = mae_curve(sc.Expectation(), dist, table)
        loo = mae_curve(sc.Expectation(), dist, table, leave_one_out=True)
        assert np.max(np.abs(insample.values - loo.values)) < 0.2

    def test_joint_leave_one_out(self, build_table):
        table = build_table([(36, 0, 0), (36, 5, 5), (41, 0, 0), (41, 10, 10)])
        joint = sc.fit_joint(table, "d4", "d1")
        loo = mae_curve(sc.Expectation(), joint, table, leave_one_out=True)
        assert loo.counts[0] == 4
        assert np.all(loo.values >= 0)


class TestOptimality:
    def test_expectation_minimizes_mse_in_sample(self, build_table):
        rng = np.random.default_rng(7)
        values = (36 + 5 * rng.poisson(1.0, size=200)).astype(float)
        table = table_from_d4(values.tolist(), build_table)
        dist = sc.fit(table, "d4")
        best = mse_curve(sc.Expectation(), dist, table)
        for other in (sc.Confidence(0.8), sc.Confidence(0.5), sc.AsymmetricLoss(3, 1)):
            rival = mse_curve(other, dist, table)
            assert np.all(best.values <= rival.values)

    def test_asymmetric_quantile_minimizes_its_own_loss(self, build_table):
        rng = np.random.default_rng(8)
        values = (36 + 5 * rng.poisson(1.5, size=150)).astype(float)
        table = table_from_d4(values.tolist(), build_table)
        dist = sc.fit(table, "d4")
        for c1, c2 in ((3, 1), (1, 3), (2, 5)):
            best = loss_curve(sc.AsymmetricLoss(c1, c2), dist, table, c1, c2)
            for other in (sc.Expectation(), sc.Confidence(0.8)):
                rival = loss_curve(other, dist, table, c1, c2)
                assert np.all(best.values <= rival.values + 1e-9)

    def test_weight_swap_changes_winner_on_skewed_data(self, build_table):
        table = table_from_d4([10.0, 10.0, 50.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        low = sc.AsymmetricLoss(1, 3)
        high = sc.AsymmetricLoss(3, 1)
        # each quantile wins strictly under its own loss at t = 0
        low_under_low = loss_curve(low, dist, table, 1, 3).values[0]
        high_under_low = loss_curve(high, dist, table, 1, 3).values[0]
        low_under_high = loss_curve(low, dist, table, 3, 1).values[0]
        high_under_high = loss_curve(high, dist, table, 3, 1).values[0]
        assert low_under_low < high_under_low
        assert high_under_high < low_under_high

    def test_weight_swap_tie_when_quantiles_coincide(self, build_table):
        # On {10,10,10,50} the cdf at 10 is exactly 0.75, so both the 0.25
        # and 0.75 quantiles resolve to 10 under the smaller-minimizer tie
        # convention: the two weightings predict identically and no strict
        # winner exists.
        table = table_from_d4([10.0, 10.0, 10.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        a = sc.predict_asymmetric(dist, 0, 1, 3).predicted_duration
        b = sc.predict_asymmetric(dist, 0, 3, 1).predicted_duration
        assert a == b == 10.0
        under_low = loss_curve(sc.AsymmetricLoss(1, 3), dist, table, 1, 3).values[0]
        under_high = loss_curve(sc.AsymmetricLoss(3, 1), dist, table, 1, 3).values[0]
        assert under_low == under_high

    def test_error_decreases_with_elapsed_time_on_simulator_data(self):
        table = sc.simulate(sc.TimingPlan(), sc.peaked_demand(21), 800)
        dist = sc.fit(table, "d4")
        curve = mae_curve(sc.Expectation(), dist, table)
        assert curve.values[-1] < curve.values[0]


class TestCompare:
    def test_long_format_rows(self, build_table):
        table = table_from_d4([30.0, 40.0, 50.0], build_table)
        dist = sc.fit(table, "d4")
        predictors = [("expectation", sc.Expectation()),
                      ("confidence:0.8", sc.Confidence(0.8))]
        rows = compare(predictors, dist, table, metrics=("mae", "mse", "loss:2:1"))
        ts = sorted({r[0] for r in rows})
        assert len(rows) == len(ts) * len(predictors) * 3
        t0_exp = [r for r in rows if r[0] == 0.0 and r[1] == "expectation"]
        assert {r[2] for r in t0_exp} == {"mae", "mse", "loss(2,1)"}

    def test_empty_predictors_rejected(self, build_table):
        table = table_from_d4([30.0], build_table)
        dist = sc.fit(table, "d4")
        with pytest.raises(ValueError):
            compare([], dist, table)

    def test_csv_contract(self, build_table):
        table = table_from_d4([30.0, 40.0], build_table)
        dist = sc.fit(table, "d4")
        rows = compare([("expectation", sc.Expectation())], dist, table, metrics=("mae",))
        buf = io.StringIO()
        write_comparison_csv(rows, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == "t,predictor,metric,value,n"
        assert len(lines) == 1 + len(rows)


small_int_tables = st.lists(st.integers(20, 60), min_size=2, max_size=30)


@settings(max_examples=40, deadline=None)
@given(small_int_tables)
def test_expectation_mse_optimality_property(values):
    dist = dist_of([float(v) for v in values])
    records = []
    for i, v in enumerate(values):
        records.append(sc.CycleRecord(i, i * 120000, 120.0, d4=float(v), d1=0.0,
                                      d2=120.0 - v, d8=float(v), d5=0.0, d6=120.0 - v))
    table = sc.CycleTable(tuple(records))
    best = mse_curve(sc.Expectation(), dist, table)
    rival = mse_curve(sc.Confidence(0.5), dist, table)
    assert np.all(best.values <= rival.values)
