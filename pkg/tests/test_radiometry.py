"""Detector-chain conversions: gain, voltage<->power, ADC effects, profiles."""

from __future__ import annotations

import math

import pytest

from vlpl.errors import ConfigError, DomainError
from vlpl.radiometry import (
    DetectorProfile,
    db_path_constant,
    load_profile,
    power_to_voltage,
    quantize_voltage,
    transimpedance_gain,
    voltage_to_power_dbw,
    voltage_to_power_w,
    with_gain,
)

P0 = DetectorProfile(gain_setting_db=0.0)


class TestGain:
    def test_zero_db(self):
        assert transimpedance_gain(P0) == pytest.approx(750.0, rel=1e-12)

    def test_twenty_db_is_times_ten(self):
        assert transimpedance_gain(with_gain(P0, 20.0)) == pytest.approx(
            7500.0, rel=1e-12)

    def test_seventy_db(self):
        assert transimpedance_gain(with_gain(P0, 70.0)) == pytest.approx(
            2371708.2451262847, rel=1e-12)

    @pytest.mark.parametrize("bad", [-1.0, 70.1])
    def test_range(self, bad):
        with pytest.raises(DomainError):
            DetectorProfile(gain_setting_db=bad)


class TestLinearPath:
    def test_one_volt_default(self):
        assert voltage_to_power_w(P0, 1.0) == pytest.approx(2.0 / 300.0,
                                                            rel=1e-12)

    def test_zero_maps_to_zero(self):
        assert voltage_to_power_w(P0, 0.0) == 0.0

    def test_linearity(self):
        v = 0.73
        assert voltage_to_power_w(P0, 2.0 * v) == pytest.approx(
            2.0 * voltage_to_power_w(P0, v), rel=1e-12)

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            voltage_to_power_w(P0, -0.1)


class TestDbPath:
    def test_rounded_constant(self):
        assert db_path_constant(P0) == -21.76

    def test_one_volt(self):
        assert voltage_to_power_dbw(P0, 1.0) == -21.76

    def test_high_gain(self):
        assert voltage_to_power_dbw(with_gain(P0, 70.0), 1.0) == pytest.approx(
            -56.76, abs=1e-12)

    def test_decade_of_voltage(self):
        assert voltage_to_power_dbw(P0, 10.0) == pytest.approx(-11.76,
                                                               abs=1e-12)

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            voltage_to_power_dbw(P0, 0.0)

    def test_paths_consistent_within_rounding(self):
        for v in (0.01, 0.1, 1.0, 5.0, 10.0):
            for gain in range(0, 71, 10):
                prof = with_gain(P0, float(gain))
                linear_db = 10.0 * math.log10(voltage_to_power_w(prof, v))
                assert abs(linear_db - voltage_to_power_dbw(prof, v)) <= 0.005


class TestInverse:
    def test_recovers_reference_voltage(self):
        v, saturated = power_to_voltage(P0, 2.0 / 300.0)
        assert not saturated
        assert v == pytest.approx(1.0, rel=1e-12)

    def test_zero(self):
        assert power_to_voltage(P0, 0.0) == (0.0, False)

    def test_round_trip(self):
        for p in (1e-9, 1e-6, 1e-3, 0.01):
            v, saturated = power_to_voltage(P0, p)
            assert not saturated
            assert voltage_to_power_w(P0, v) == pytest.approx(p, rel=1e-12)

    def test_saturation_clamps(self):
        v, saturated = power_to_voltage(P0, 1.0)  # would be 150 V
        assert saturated
        assert v == P0.signal_range_v

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            power_to_voltage(P0, -1e-9)


class TestQuantization:
    def test_snaps_to_grid(self):
        q = quantize_voltage(P0, 1.0)
        assert q / P0.adc_lsb_v == pytest.approx(round(q / P0.adc_lsb_v),
                                                 abs=1e-9)

    def test_idempotent(self):
        for v in (0.0, 1e-4, 0.37, 4.999, 11.0):
            q = quantize_voltage(P0, v)
            assert quantize_voltage(P0, q) == q

    def test_error_bounded_by_half_lsb(self):
        for v in (1e-4, 0.1, 1.0, 2.345678):
            assert abs(quantize_voltage(P0, v) - v) <= P0.adc_lsb_v / 2 + 1e-15

    def test_power_shift_bounded_by_one_lsb_equivalent(self):
        lsb_power = voltage_to_power_w(P0, P0.adc_lsb_v)
        for v in (0.001, 0.5, 3.0):
            delta = abs(voltage_to_power_w(P0, quantize_voltage(P0, v))
                        - voltage_to_power_w(P0, v))
            assert delta <= lsb_power

    def test_full_scale_clamp(self):
        assert quantize_voltage(P0, 100.0) <= P0.adc_max_v + P0.adc_lsb_v / 2

    def test_negative_rejected(self):
        with pytest.raises(DomainError):
            quantize_voltage(P0, -0.01)


class TestProfileFile:
    def _write(self, tmp_path, text):
        path = tmp_path / "detector.profile"
        path.write_text(text, encoding="utf-8")
        return path

    def test_full_profile(self, tmp_path):
        path = self._write(tmp_path, """
# bench detector, high gain
gain_setting_db = 40
responsivity_a_per_w = 0.45   # at 620 nm
base_transimpedance_v_per_a = 800
adc_lsb_v = 0.000366
adc_max_v = 12
signal_range_v = 5
""")
        prof = load_profile(path)
        assert prof.gain_setting_db == 40.0
        assert prof.responsivity_a_per_w == 0.45
        assert prof.base_transimpedance_v_per_a == 800.0

    def test_defaults_fill_in(self, tmp_path):
        prof = load_profile(self._write(tmp_path, "gain_setting_db = 10\n"))
        assert prof.responsivity_a_per_w == P0.responsivity_a_per_w
        assert prof.base_transimpedance_v_per_a == P0.base_transimpedance_v_per_a

    def test_missing_gain(self, tmp_path):
        with pytest.raises(ConfigError):
            load_profile(self._write(tmp_path, "responsivity_a_per_w = 0.4\n"))

    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError):
            load_profile(self._write(tmp_path, "gain_setting_db = 0\nbogus = 1\n"))

    def test_bad_number(self, tmp_path):
        with pytest.raises(ConfigError):
            load_profile(self._write(tmp_path, "gain_setting_db = ten\n"))

    def test_duplicate_key(self, tmp_path):
        with pytest.raises(ConfigError):
            load_profile(self._write(
                tmp_path, "gain_setting_db = 0\ngain_setting_db = 10\n"))

    def test_invalid_value_range(self, tmp_path):
        with pytest.raises(ConfigError):
            load_profile(self._write(tmp_path, "gain_setting_db = 90\n"))
