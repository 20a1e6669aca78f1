"""Trace containers, CSV IO, peak detection, and the distance transform."""

from __future__ import annotations

import math

import numpy as np
import pytest

from vlpl.errors import (
    DomainError,
    TraceFormatError,
    TransformError,
    UnitMismatchError,
)
from vlpl.model import ChannelParams, PassGeometry, passby_power_db, peak_range
from vlpl.radiometry import DetectorProfile
from vlpl.rng import Pcg32
from vlpl.trace import (
    DEFAULT_SMOOTH_WINDOW,
    DistanceTrace,
    RawTrace,
    StaticPointSet,
    UNIT_POWER_DBW,
    UNIT_VOLTAGE,
    average_static_points,
    convert_trace_to_power,
    detect_peak,
    distance_trace_from_static,
    load_distance_csv,
    load_trace_csv,
    save_distance_csv,
    save_trace_csv,
    smooth_values,
    time_to_range,
    transform_to_distance,
)

NIGHT = ChannelParams(k_db=-35.268, gamma=0.9707)


def make_trace(values, rate=100.0, unit=UNIT_POWER_DBW):
    values = np.asarray(values, dtype=np.float64)
    times = np.arange(values.size) / rate
    return RawTrace(times_s=times, values=values, unit=unit,
                    sample_rate_hz=rate)


def approach_trace(params, w, speed, duration, rate=100.0):
    """Noiseless approach-only pass-by ending at broadside (range 0 at t=duration)."""
    n = int(round(duration * rate))
    times = np.arange(n) / rate
    ranges = speed * (duration - times)
    distances = np.hypot(ranges, w)
    powers = passby_power_db(params, w, distances)
    trace = RawTrace(times_s=times, values=powers, unit=UNIT_POWER_DBW,
                     sample_rate_hz=rate)
    return trace, ranges, distances, powers


class TestRawTrace:
    def test_basic_properties(self):
        tr = make_trace([1.0, 2.0, 3.0])
        assert len(tr) == 3
        assert tr.unit == UNIT_POWER_DBW
        assert tr.sample_rate_hz == 100.0

    def test_arrays_are_copied_and_readonly(self):
        src = np.array([1.0, 2.0, 3.0])
        tr = RawTrace(times_s=np.array([0.0, 0.01, 0.02]), values=src,
                      unit=UNIT_VOLTAGE, sample_rate_hz=100.0)
        src[0] = 99.0
        assert tr.values[0] == 1.0
        with pytest.raises(ValueError):
            tr.values[0] = 0.0
        with pytest.raises(ValueError):
            tr.times_s[0] = -1.0

    def test_rejects_unknown_unit(self):
        with pytest.raises(DomainError):
            make_trace([1.0, 2.0], unit="lumens")

    def test_rejects_length_mismatch(self):
        with pytest.raises(DomainError):
            RawTrace(times_s=np.array([0.0, 0.01]), values=np.array([1.0]),
                     unit=UNIT_VOLTAGE, sample_rate_hz=100.0)

    def test_rejects_single_sample(self):
        with pytest.raises(DomainError):
            RawTrace(times_s=np.array([0.0]), values=np.array([1.0]),
                     unit=UNIT_VOLTAGE, sample_rate_hz=100.0)

    def test_rejects_nonincreasing_times(self):
        with pytest.raises(DomainError):
            RawTrace(times_s=np.array([0.0, 0.01, 0.01]),
                     values=np.zeros(3), unit=UNIT_VOLTAGE,
                     sample_rate_hz=100.0)

    def test_rejects_off_grid_times(self):
        with pytest.raises(DomainError):
            RawTrace(times_s=np.array([0.0, 0.01, 0.025]),
                     values=np.zeros(3), unit=UNIT_VOLTAGE,
                     sample_rate_hz=100.0)

    def test_allows_whole_period_gaps(self):
        tr = RawTrace(times_s=np.array([0.0, 0.01, 0.03]),
                      values=np.zeros(3), unit=UNIT_VOLTAGE,
                      sample_rate_hz=100.0)
        assert len(tr) == 3

    def test_rejects_bad_rate(self):
        with pytest.raises(DomainError):
            RawTrace(times_s=np.array([0.0, 0.01]), values=np.zeros(2),
                     unit=UNIT_VOLTAGE, sample_rate_hz=0.0)

    def test_from_samples_infers_rate(self):
        tr = RawTrace.from_samples([0.0, 0.02, 0.04], [1.0, 2.0, 3.0],
                                   UNIT_VOLTAGE)
        assert tr.sample_rate_hz == pytest.approx(50.0, rel=1e-9)


class TestTraceCsv:
    def test_round_trip_is_bit_exact(self, tmp_path):
        values = Pcg32(7).normals(200) * 3.0 - 44.0
        tr = make_trace(values)
        path = tmp_path / "trace.csv"
        save_trace_csv(tr, path)
        back = load_trace_csv(path)
        assert back.unit == UNIT_POWER_DBW
        assert np.array_equal(back.times_s, tr.times_s)
        assert np.array_equal(back.values, tr.values)

    def test_two_row_file(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,voltage_v\n0.0,1.5\n0.01,1.6\n")
        tr = load_trace_csv(path)
        assert len(tr) == 2
        assert tr.unit == UNIT_VOLTAGE
        assert tr.sample_rate_hz == pytest.approx(100.0, rel=1e-9)
        assert list(tr.values) == [1.5, 1.6]

    def test_blank_lines_are_skipped(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,voltage_v\n0.0,1.5\n\n0.01,1.6\n\n")
        assert len(load_trace_csv(path)) == 2

    def test_bad_header_reports_line_1(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("timestamp,volts\n0.0,1.5\n")
        with pytest.raises(TraceFormatError) as err:
            load_trace_csv(path)
        assert err.value.line == 1
        assert "line 1" in str(err.value)

    def test_field_count_error_carries_line(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,voltage_v\n0.0,1.5\n0.01,1.6,9\n")
        with pytest.raises(TraceFormatError) as err:
            load_trace_csv(path)
        assert err.value.line == 3

    def test_bad_number_carries_line(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,voltage_v\n0.0,oops\n")
        with pytest.raises(TraceFormatError) as err:
            load_trace_csv(path)
        assert err.value.line == 2

    def test_too_few_rows(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,voltage_v\n0.0,1.5\n")
        with pytest.raises(TraceFormatError):
            load_trace_csv(path)

    def test_empty_file(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("")
        with pytest.raises(TraceFormatError):
            load_trace_csv(path)

    def test_expect_unit_mismatch(self, tmp_path):
        path = tmp_path / "t.csv"
        path.write_text("time_s,power_dbw\n0.0,-44.0\n0.01,-44.5\n")
        with pytest.raises(UnitMismatchError):
            load_trace_csv(path, expect_unit=UNIT_VOLTAGE)
        assert load_trace_csv(path, expect_unit=UNIT_POWER_DBW).unit == \
            UNIT_POWER_DBW


class TestConvert:
    def test_one_volt_at_zero_gain(self):
        tr = make_trace([1.0, 1.0], unit=UNIT_VOLTAGE)
        out, dropped = convert_trace_to_power(tr, DetectorProfile(0.0))
        assert dropped == 0
        assert out.unit == UNIT_POWER_DBW
        assert np.allclose(out.values, -21.76, atol=1e-12)

    def test_interior_nonpositive_row_dropped(self):
        tr = make_trace([1.0, -0.5, 1.0, 2.0], unit=UNIT_VOLTAGE)
        out, dropped = convert_trace_to_power(tr, DetectorProfile(0.0))
        assert dropped == 1
        assert len(out) == 3
        assert list(out.times_s) == [0.0, 0.02, 0.03]

    def test_all_zero_raises(self):
        tr = make_trace([0.0, 0.0, 1.0], unit=UNIT_VOLTAGE)
        with pytest.raises(TransformError):
            convert_trace_to_power(tr, DetectorProfile(0.0))

    def test_requires_voltage_unit(self):
        tr = make_trace([-40.0, -41.0], unit=UNIT_POWER_DBW)
        with pytest.raises(UnitMismatchError):
            convert_trace_to_power(tr, DetectorProfile(0.0))

    def test_gain_shifts_power(self):
        tr = make_trace([1.0, 1.0], unit=UNIT_VOLTAGE)
        low, _ = convert_trace_to_power(tr, DetectorProfile(0.0))
        high, _ = convert_trace_to_power(tr, DetectorProfile(30.0))
        assert np.allclose(low.values - high.values, 15.0, atol=1e-12)


class TestSmoothing:
    def test_window_one_is_identity(self):
        vals = np.array([1.0, 5.0, 2.0])
        assert np.array_equal(smooth_values(vals, 1), vals)

    def test_constant_is_invariant(self):
        vals = np.full(20, 3.25)
        assert np.allclose(smooth_values(vals, 5), vals, atol=1e-12)

    def test_preserves_length(self):
        assert smooth_values(np.arange(30.0), 7).size == 30

    def test_even_window_rejected(self):
        with pytest.raises(DomainError):
            smooth_values(np.arange(10.0), 4)


class TestDetectPeak:
    def test_constant_trace_ties_to_first_sample(self):
        t_peak, idx = detect_peak(make_trace(np.full(50, -40.0)),
                                  smooth_window=5)
        assert idx == 0
        assert t_peak == 0.0

    def test_spike_with_unit_window(self):
        vals = np.full(60, -50.0)
        vals[37] = -10.0
        t_peak, idx = detect_peak(make_trace(vals), smooth_window=1)
        assert idx == 37
        assert t_peak == pytest.approx(0.37, abs=1e-12)

    def test_parabola_survives_smoothing(self):
        times = np.arange(101) / 100.0
        vals = -((times - 0.5) ** 2)
        tr = make_trace(vals)
        _, idx = detect_peak(tr, smooth_window=9)
        assert idx == 50

    def test_reversal_mirrors_index(self):
        vals = Pcg32(11).normals(80)
        n = vals.size
        _, idx_fwd = detect_peak(make_trace(vals), smooth_window=7)
        _, idx_rev = detect_peak(make_trace(vals[::-1]), smooth_window=7)
        assert idx_rev == n - 1 - idx_fwd

    def test_simulated_passby_within_one_sample(self):
        w, speed, duration, rate = 2.0, 8.9408, 10.0, 100.0
        trace, _, _, _ = approach_trace(NIGHT, w, speed, duration, rate)
        t_true = duration - peak_range(NIGHT, w) / speed
        t_det, _ = detect_peak(trace, DEFAULT_SMOOTH_WINDOW)
        assert abs(t_det - t_true) <= 1.0 / rate + 1e-12

    def test_window_longer_than_trace_rejected(self):
        with pytest.raises(DomainError):
            detect_peak(make_trace([1.0, 2.0, 3.0]), smooth_window=5)


class TestTimeToRange:
    def test_peak_time_maps_to_peak_range(self):
        geom = PassGeometry(2.0, 10.0, 2.8708, peak_time_s=4.0)
        assert time_to_range(geom, 4.0) == 2.8708

    def test_worked_example(self):
        # one second before the peak at 8.9408 m/s adds 8.9408 m to a 5 m
        # peak range
        geom = PassGeometry(2.0, 8.9408, 5.0, peak_time_s=3.0)
        assert time_to_range(geom, 2.0) == pytest.approx(13.9408, abs=1e-12)

    def test_uniform_times_give_uniform_ranges(self):
        rate = 100.0
        geom = PassGeometry(1.5, 7.25, 3.0, peak_time_s=5.0)
        times = np.arange(400) / rate
        ranges = time_to_range(geom, times)
        diffs = np.diff(ranges)
        assert np.max(np.abs(diffs + geom.speed_mps / rate)) <= 1e-9

    def test_scalar_in_scalar_out(self):
        geom = PassGeometry(1.0, 5.0, 2.0, peak_time_s=1.0)
        out = time_to_range(geom, 0.5)
        assert isinstance(out, float)

    def test_requires_peak_time(self):
        geom = PassGeometry(1.0, 5.0, 2.0)
        with pytest.raises(DomainError):
            time_to_range(geom, 0.0)


class TestDistanceTrace:
    def test_consistency_enforced(self):
        with pytest.raises(DomainError):
            DistanceTrace(range_m=np.array([3.0, 4.0]),
                          distance_m=np.array([3.0, 4.0]),
                          power_dbw=np.array([-40.0, -42.0]),
                          lateral_offset_m=2.0)

    def test_negative_range_rejected(self):
        with pytest.raises(DomainError):
            DistanceTrace(range_m=np.array([-1.0, 4.0]),
                          distance_m=np.hypot([-1.0, 4.0], 2.0),
                          power_dbw=np.array([-40.0, -42.0]),
                          lateral_offset_m=2.0)

    def test_ordering_enforced(self):
        r = np.array([4.0, 3.0])
        with pytest.raises(DomainError):
            DistanceTrace(range_m=r, distance_m=np.hypot(r, 2.0),
                          power_dbw=np.array([-42.0, -40.0]),
                          lateral_offset_m=2.0)

    def test_valid_construction(self):
        r = np.array([3.0, 4.0, 5.0])
        dt = DistanceTrace(range_m=r, distance_m=np.hypot(r, 2.0),
                           power_dbw=np.array([-40.0, -42.0, -44.0]),
                           lateral_offset_m=2.0)
        assert len(dt) == 3
        with pytest.raises(ValueError):
            dt.power_dbw[0] = 0.0


class TestTransform:
    def test_noiseless_anchored_closure(self):
        w, speed, duration, rate = 2.0, 10.0, 8.0, 100.0
        trace, ranges, distances, powers = approach_trace(
            NIGHT, w, speed, duration, rate)
        geom = PassGeometry(w, speed, 0.0, peak_time_s=duration)
        out, summary = transform_to_distance(trace, geom)
        # distances decrease with time on an approach, so output is reversed
        assert np.array_equal(out.range_m, ranges[::-1])
        assert np.array_equal(out.distance_m, distances[::-1])
        assert np.array_equal(out.power_dbw, powers[::-1])
        assert summary.peak_detected is False
        assert summary.n_kept == len(trace)
        assert summary.n_dropped_negative_range == 0
        assert summary.n_dropped_degenerate == 0

    def test_detected_peak_path(self):
        w, speed, duration, rate = 2.0, 8.9408, 10.0, 100.0
        trace, _, _, _ = approach_trace(NIGHT, w, speed, duration, rate)
        r_star = peak_range(NIGHT, w)
        geom = PassGeometry(w, speed, r_star)
        out, summary = transform_to_distance(trace, geom)
        assert summary.peak_detected is True
        assert summary.smooth_window == DEFAULT_SMOOTH_WINDOW
        t_true = duration - r_star / speed
        assert abs(summary.peak_time_s - t_true) <= 1.0 / rate + 1e-12
        assert summary.n_dropped_negative_range <= 1
        assert summary.n_kept + summary.n_dropped_negative_range + \
            summary.n_dropped_degenerate == len(trace)
        assert np.all(np.diff(out.distance_m) >= 0)
        # the smallest mapped distance sits near the analytic peak distance
        assert out.distance_m[0] <= math.hypot(r_star, w) + 0.1

    def test_trace_ending_before_peak(self):
        # approach segment truncated well before the peak: the smoothed
        # maximum is the last sample
        w, speed, rate = 2.0, 10.0, 100.0
        n = 200
        times = np.arange(n) / rate
        ranges = 50.0 - speed * times  # ends at range 30.1 m, far out
        powers = passby_power_db(NIGHT, w, np.hypot(ranges, w))
        trace = RawTrace(times_s=times, values=powers, unit=UNIT_POWER_DBW,
                         sample_rate_hz=rate)
        geom = PassGeometry(w, speed, peak_range(NIGHT, w))
        out, summary = transform_to_distance(trace, geom)
        assert summary.peak_index == n - 1
        assert summary.n_dropped_negative_range == 0
        assert len(out) == n

    def test_negative_range_dropping(self):
        w, speed, rate = 1.0, 10.0, 100.0
        trace = make_trace(np.full(100, -40.0), rate=rate)
        geom = PassGeometry(w, speed, 0.0, peak_time_s=0.495)
        out, summary = transform_to_distance(trace, geom)
        assert summary.n_dropped_negative_range == 50
        assert summary.n_dropped_degenerate == 0
        assert summary.n_kept == 50
        assert len(out) == 50

    def test_degenerate_broadside_dropping(self):
        w, speed, rate = 1.0, 10.0, 100.0
        trace = make_trace(np.full(100, -40.0), rate=rate)
        geom = PassGeometry(w, speed, 1e-8, peak_time_s=0.5)
        out, summary = transform_to_distance(trace, geom)
        assert summary.n_dropped_degenerate == 1
        assert summary.n_dropped_negative_range == 49
        assert summary.n_kept == 50

    def test_all_dropped_raises(self):
        trace = make_trace(np.full(10, -40.0))
        geom = PassGeometry(1.0, 10.0, 0.0, peak_time_s=-10.0)
        with pytest.raises(TransformError):
            transform_to_distance(trace, geom)

    def test_requires_power_unit(self):
        trace = make_trace([1.0, 2.0], unit=UNIT_VOLTAGE)
        geom = PassGeometry(1.0, 10.0, 0.0, peak_time_s=0.0)
        with pytest.raises(UnitMismatchError):
            transform_to_distance(trace, geom)


class TestDistanceCsv:
    def test_round_trip_bit_exact(self, tmp_path):
        w, speed, duration = 2.0, 10.0, 8.0
        trace, _, _, _ = approach_trace(NIGHT, w, speed, duration)
        geom = PassGeometry(w, speed, 0.0, peak_time_s=duration)
        out, _ = transform_to_distance(trace, geom)
        path = tmp_path / "dist.csv"
        save_distance_csv(out, path)
        back = load_distance_csv(path)
        assert np.array_equal(back.range_m, out.range_m)
        assert np.array_equal(back.distance_m, out.distance_m)
        assert np.array_equal(back.power_dbw, out.power_dbw)
        assert back.lateral_offset_m == pytest.approx(w, abs=1e-9)

    def test_on_axis_offset_inference(self, tmp_path):
        r = np.array([2.0, 3.0, 4.0])
        dt = DistanceTrace(range_m=r, distance_m=r.copy(),
                           power_dbw=np.array([-40.0, -42.0, -44.0]),
                           lateral_offset_m=0.0)
        path = tmp_path / "axis.csv"
        save_distance_csv(dt, path)
        assert load_distance_csv(path).lateral_offset_m == 0.0

    def test_bad_header(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("range,distance,power\n1.0,1.0,-40.0\n")
        with pytest.raises(TraceFormatError) as err:
            load_distance_csv(path)
        assert err.value.line == 1

    def test_field_count_line_number(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("range_m,distance_m,power_dbw\n1.0,1.0\n")
        with pytest.raises(TraceFormatError) as err:
            load_distance_csv(path)
        assert err.value.line == 2

    def test_no_rows(self, tmp_path):
        path = tmp_path / "d.csv"
        path.write_text("range_m,distance_m,power_dbw\n")
        with pytest.raises(TraceFormatError):
            load_distance_csv(path)


class TestStaticAveraging:
    def test_constant_milliwatt(self):
        level = 10.0 * math.log10(1e-3)
        tr = make_trace(np.full(10, level))
        points = average_static_points([(5.0, tr)])
        assert points.mean_power_dbw[0] == pytest.approx(level, abs=1e-12)
        assert points.sample_counts[0] == 10

    def test_linear_mean_of_one_and_three_milliwatts(self):
        vals = [10.0 * math.log10(1e-3), 10.0 * math.log10(3e-3)]
        tr = make_trace(vals)
        points = average_static_points([(5.0, tr)])
        assert points.mean_power_dbw[0] == pytest.approx(
            -26.989700043360187, abs=1e-12)

    def test_db_domain_mean_flag(self):
        tr = make_trace([-30.0, -20.0])
        linear = average_static_points([(5.0, tr)])
        db = average_static_points([(5.0, tr)], db_domain_mean=True)
        assert db.mean_power_dbw[0] == pytest.approx(-25.0, abs=1e-12)
        expected = 10.0 * math.log10((1e-3 + 1e-2) / 2.0)
        assert linear.mean_power_dbw[0] == pytest.approx(expected, abs=1e-12)
        assert linear.mean_power_dbw[0] > db.mean_power_dbw[0]

    def test_single_reading_point_from_plain_list(self):
        points = average_static_points([(10.0, [-45.0])])
        assert points.sample_counts[0] == 1
        assert points.mean_power_dbw[0] == -45.0

    def test_plain_sequence_matches_trace_path(self):
        vals = [-41.0, -43.0, -39.5]
        via_trace = average_static_points([(7.0, make_trace(vals))])
        via_list = average_static_points([(7.0, vals)])
        assert via_trace.mean_power_dbw[0] == via_list.mean_power_dbw[0]

    def test_voltage_trace_rejected(self):
        tr = make_trace([1.0, 2.0], unit=UNIT_VOLTAGE)
        with pytest.raises(UnitMismatchError):
            average_static_points([(5.0, tr)])

    def test_empty_sequence_rejected(self):
        with pytest.raises(DomainError):
            average_static_points([(5.0, [])])

    def test_no_points_rejected(self):
        with pytest.raises(DomainError):
            average_static_points([])

    def test_duplicate_distances_rejected(self):
        with pytest.raises(DomainError):
            average_static_points([(5.0, [-40.0]), (5.0, [-41.0])])


class TestStaticPointSet:
    def test_validation(self):
        with pytest.raises(DomainError):
            StaticPointSet(distances_m=np.array([1.0, 2.0]),
                           mean_power_dbw=np.array([-40.0]),
                           sample_counts=np.array([1]))
        with pytest.raises(DomainError):
            StaticPointSet(distances_m=np.array([1.0]),
                           mean_power_dbw=np.array([-40.0]),
                           sample_counts=np.array([0]))

    def test_len(self):
        points = StaticPointSet(distances_m=np.array([1.0, 2.0]),
                                mean_power_dbw=np.array([-40.0, -43.0]),
                                sample_counts=np.array([3, 3]))
        assert len(points) == 2


class TestStaticToDistance:
    def test_on_axis_range_equals_distance(self):
        points = average_static_points([(d, [-40.0 - d]) for d in
                                        (8.0, 9.0, 10.0)])
        dt = distance_trace_from_static(points)
        assert np.array_equal(dt.range_m, dt.distance_m)
        assert dt.lateral_offset_m == 0.0

    def test_offset_geometry(self):
        points = average_static_points([(5.0, [-40.0]), (10.0, [-44.0])])
        dt = distance_trace_from_static(points, lateral_offset_m=3.0)
        assert dt.range_m[0] == pytest.approx(4.0, abs=1e-12)
        assert dt.range_m[1] == pytest.approx(math.sqrt(91.0), abs=1e-12)

    def test_unsorted_input_is_ordered(self):
        points = average_static_points([(10.0, [-44.0]), (5.0, [-40.0])])
        dt = distance_trace_from_static(points)
        assert list(dt.distance_m) == [5.0, 10.0]
        assert list(dt.power_dbw) == [-40.0, -44.0]

    def test_distance_below_offset_rejected(self):
        points = average_static_points([(2.0, [-40.0])])
        with pytest.raises(DomainError):
            distance_trace_from_static(points, lateral_offset_m=3.0)
