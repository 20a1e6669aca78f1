"""Amplified-photodetector radiometry: ADC voltage to optical power and back.

The detector chain is a photodiode (responsivity R, A/W) into a switchable
transimpedance amplifier (G_0 at the 0 dB setting, stepped in dB) into a
terminated ADC input. The measured voltage relates to incident optical power
by

    P_in = 2 * V_out / (R * G),    G = G_0 * 10^(G_amp / 20)

Two conversion paths are provided: the exact linear-domain inverse above, and
a dB-domain shortcut 10*log10(V_out) - G_amp/2 + C with C pre-rounded to two
decimals (C = -21.76 for the default profile). The rounded path is canonical
for report output; the linear path is the high-precision reference. They
agree within 0.005 dB by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from pathlib import Path

from .errors import ConfigError, DomainError

DEFAULT_RESPONSIVITY_A_PER_W = 0.4   # silicon PD at the operating wavelength
DEFAULT_BASE_TRANSIMPEDANCE = 750.0  # V/A at the 0 dB gain setting, 50 ohm terminated
DEFAULT_ADC_LSB_V = 366e-6
DEFAULT_ADC_MAX_V = 12.0
DEFAULT_SIGNAL_RANGE_V = 5.0

GAIN_SETTING_MIN_DB = 0.0
GAIN_SETTING_MAX_DB = 70.0


@dataclass(frozen=True)
class DetectorProfile:
    """Detector chain parameters. ``gain_setting_db`` has no safe default and
    must always be stated explicitly."""

    gain_setting_db: float
    responsivity_a_per_w: float = DEFAULT_RESPONSIVITY_A_PER_W
    base_transimpedance_v_per_a: float = DEFAULT_BASE_TRANSIMPEDANCE
    adc_lsb_v: float = DEFAULT_ADC_LSB_V
    adc_max_v: float = DEFAULT_ADC_MAX_V
    signal_range_v: float = DEFAULT_SIGNAL_RANGE_V

    def __post_init__(self):
        if not GAIN_SETTING_MIN_DB <= self.gain_setting_db <= GAIN_SETTING_MAX_DB:
            raise DomainError(
                f"gain_setting_db must be in [{GAIN_SETTING_MIN_DB:g}, "
                f"{GAIN_SETTING_MAX_DB:g}] dB, got {self.gain_setting_db!r}")
        if self.responsivity_a_per_w <= 0:
            raise DomainError("responsivity_a_per_w must be > 0")
        if self.base_transimpedance_v_per_a <= 0:
            raise DomainError("base_transimpedance_v_per_a must be > 0")
        if self.adc_lsb_v <= 0:
            raise DomainError("adc_lsb_v must be > 0")
        if self.adc_max_v <= 0:
            raise DomainError("adc_max_v must be > 0")
        if not 0.0 < self.signal_range_v <= self.adc_max_v:
            raise DomainError("signal_range_v must be in (0, adc_max_v]")


DEFAULT_PROFILE_0DB = DetectorProfile(gain_setting_db=0.0)


def transimpedance_gain(profile: DetectorProfile) -> float:
    """Effective transimpedance G_0 * 10^(G_amp/20), in V/A."""
    return (profile.base_transimpedance_v_per_a
            * 10.0 ** (profile.gain_setting_db / 20.0))


def voltage_to_power_w(profile: DetectorProfile, v_out: float) -> float:
    """Incident optical power in watts from ADC voltage (exact linear path)."""
    if v_out < 0:
        raise DomainError(f"v_out must be >= 0, got {v_out!r}")
    if v_out == 0.0:
        return 0.0
    return 2.0 * v_out / (profile.responsivity_a_per_w * transimpedance_gain(profile))


def db_path_constant(profile: DetectorProfile) -> float:
    """The dB-path additive constant 10*log10(2/(R*G_0)), rounded to 2 decimals.

    -21.76 for the default profile; the rounding is deliberate (the shortcut
    formula is quoted with a 2-decimal constant) and bounds the dB-vs-linear
    path disagreement at 0.005 dB.
    """
    exact = 10.0 * math.log10(
        2.0 / (profile.responsivity_a_per_w * profile.base_transimpedance_v_per_a))
    return round(exact, 2)


def voltage_to_power_dbw(profile: DetectorProfile, v_out: float) -> float:
    """Incident optical power in dBW from ADC voltage (rounded-constant dB path).

    10*log10(v_out) - gain_setting_db/2 + C, with C from db_path_constant.
    """
    if v_out <= 0:
        raise DomainError(
            f"v_out must be > 0 for a dB result, got {v_out!r}")
    return (10.0 * math.log10(v_out)
            - 0.5 * profile.gain_setting_db
            + db_path_constant(profile))


def power_to_voltage(profile: DetectorProfile, p_in: float) -> tuple[float, bool]:
    """ADC voltage for a given incident power; clamps at the valid signal range.

    Returns (volts, saturated). Exact inverse of voltage_to_power_w below
    saturation.
    """
    if p_in < 0:
        raise DomainError(f"p_in must be >= 0, got {p_in!r}")
    v = p_in * profile.responsivity_a_per_w * transimpedance_gain(profile) / 2.0
    if v > profile.signal_range_v:
        return profile.signal_range_v, True
    return v, False


def quantize_voltage(profile: DetectorProfile, v: float) -> float:
    """Snap a voltage to the ADC's LSB grid, clamped to full scale. Idempotent."""
    if v < 0:
        raise DomainError(f"v must be >= 0, got {v!r}")
    v = min(v, profile.adc_max_v)
    return round(v / profile.adc_lsb_v) * profile.adc_lsb_v


_PROFILE_FIELDS = {
    "gain_setting_db",
    "responsivity_a_per_w",
    "base_transimpedance_v_per_a",
    "adc_lsb_v",
    "adc_max_v",
    "signal_range_v",
}


def load_profile(path) -> DetectorProfile:
    """Read a detector profile from a ``key = value`` text file.

    Blank lines and ``#`` comments are ignored. ``gain_setting_db`` is
    required; every other field falls back to the hardware defaults. Values
    are SI (volts, A/W, V/A) with gain in dB.
    """
    text = Path(path).read_text(encoding="utf-8")
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}: line {lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in _PROFILE_FIELDS:
            raise ConfigError(f"{path}: line {lineno}: unknown profile field {key!r}")
        if key in values:
            raise ConfigError(f"{path}: line {lineno}: duplicate field {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise ConfigError(
                f"{path}: line {lineno}: invalid number {value.strip()!r}") from None
    if "gain_setting_db" not in values:
        raise ConfigError(f"{path}: profile must set gain_setting_db")
    try:
        return DetectorProfile(**values)
    except DomainError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def with_gain(profile: DetectorProfile, gain_setting_db: float) -> DetectorProfile:
    """Copy of the profile at a different amplifier gain setting."""
    return replace(profile, gain_setting_db=gain_setting_db)
