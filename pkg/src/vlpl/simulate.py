"""Synthetic pass-by and static traces with known ground truth.

The simulator drives the forward model along straight-line approach
kinematics and layers on the measurement chain, providing oracle data for the
transform and fitting pipeline:

    R_i = V * (duration - t_i)          (vehicle reaches the detector at the end)
    D_i = sqrt(R_i^2 + w^2)
    P_i = model(D_i) + sigma_db * z_i   (multiplicative noise, Gaussian in dB)
    P_total = P_i(linear) + ambient     (powers add in watts, never in dB)

Randomness comes from a small portable generator (see rng module) so traces
are bit-identical across platforms for a given seed. Draws are staged, not
interleaved: first all per-sample dB-noise deviates, then all ambient
fluctuation deviates. That keeps the signal noise identical across runs that
differ only in the ambient setting, which the ambient study relies on.

Voltage emission runs the power back through the detector chain (inverse
conversion, 5 V clamp, LSB quantization) so a downstream convert step sees
realistic ADC output.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np

from .errors import ConfigError
from .fitting import FitConfig, fit_log_linear
from .model import (
    DEFAULT_EPSILON,
    ChannelParams,
    PassGeometry,
    conditional_power_db,
    passby_power_db,
    peak_distance,
    peak_range,
    received_power_passby,
)
from .radiometry import DetectorProfile, power_to_voltage, quantize_voltage
from .rng import ALGORITHM as RNG_ALGORITHM
from .rng import Pcg32
from .trace import UNIT_POWER_DBW, UNIT_VOLTAGE, RawTrace, transform_to_distance

EMIT_POWER = "power"
EMIT_VOLTAGE = "voltage"

MODEL_FORM_FULL = "full"
MODEL_FORM_CONDITIONAL = "conditional"

#: Noise-sigma defaults (dB) per environment, mirroring how much noisier the
#: daylight measurements run than the night ones.
PRESET_NOISE_SIGMA_DB = {
    "night": 0.5,
    "daylight": 2.0,
    "night-alt": 0.5,
    "daylight-alt": 2.0,
}


@dataclass(frozen=True)
class ScenarioConfig:
    """Everything needed to reproduce one synthetic pass-by bit-for-bit."""

    params: ChannelParams
    lateral_offset_m: float
    speed_mps: float
    duration_s: float
    sample_rate_hz: float = 100.0
    noise_sigma_db: float = 0.0
    ambient_power_dbw: float | None = None
    ambient_sigma_w: float = 0.0
    seed: int = 0
    emit: str = EMIT_POWER
    adc_effects: bool = True
    detector_profile: DetectorProfile | None = None
    model_form: str = MODEL_FORM_FULL
    regime_epsilon: float = DEFAULT_EPSILON
    environment: str | None = None

    def __post_init__(self):
        if self.lateral_offset_m < 0:
            raise ConfigError("lateral_offset_m must be >= 0")
        if self.speed_mps <= 0:
            raise ConfigError("speed_mps must be > 0")
        if self.duration_s <= 0:
            raise ConfigError("duration_s must be > 0")
        if self.sample_rate_hz <= 0:
            raise ConfigError("sample_rate_hz must be > 0")
        if self.noise_sigma_db < 0:
            raise ConfigError("noise_sigma_db must be >= 0")
        if self.ambient_sigma_w < 0:
            raise ConfigError("ambient_sigma_w must be >= 0")
        if self.emit not in (EMIT_POWER, EMIT_VOLTAGE):
            raise ConfigError(f"emit must be {EMIT_POWER!r} or {EMIT_VOLTAGE!r}")
        if self.model_form not in (MODEL_FORM_FULL, MODEL_FORM_CONDITIONAL):
            raise ConfigError(
                f"model_form must be {MODEL_FORM_FULL!r} or {MODEL_FORM_CONDITIONAL!r}")
        if not 0.0 < self.regime_epsilon < 1.0:
            raise ConfigError("regime_epsilon must be in (0, 1)")

    @property
    def sample_count(self) -> int:
        return int(round(self.duration_s * self.sample_rate_hz))


def _model_curve_db(config: ScenarioConfig, distances: np.ndarray) -> np.ndarray:
    if config.model_form == MODEL_FORM_CONDITIONAL:
        return conditional_power_db(config.params, config.lateral_offset_m,
                                    distances, config.regime_epsilon)
    return passby_power_db(config.params, config.lateral_offset_m, distances)


def _resolve_profile(config: ScenarioConfig) -> DetectorProfile:
    if config.detector_profile is not None:
        return config.detector_profile
    return DetectorProfile(gain_setting_db=0.0)


def scenario_metadata(config: ScenarioConfig) -> dict:
    """Self-describing sidecar: config echo, ground truth, RNG identity."""
    params = config.params
    w = config.lateral_offset_m
    peak: dict | None = None
    if w > 0 and params.gamma > 0:
        r_star = peak_range(params, w)
        t_star = config.duration_s - r_star / config.speed_mps
        peak = {
            "time_s": t_star,
            "range_m": r_star,
            "distance_m": peak_distance(params, w),
        }
    doc = {
        "scenario": {
            "k_db": params.k_db,
            "gamma": params.gamma,
            "lambertian_order": params.lambertian_order,
            "half_angle_rad": params.half_angle_rad,
            "lateral_offset_m": w,
            "speed_mps": config.speed_mps,
            "duration_s": config.duration_s,
            "sample_rate_hz": config.sample_rate_hz,
            "noise_sigma_db": config.noise_sigma_db,
            "ambient_power_dbw": config.ambient_power_dbw,
            "ambient_sigma_w": config.ambient_sigma_w,
            "seed": config.seed,
            "emit": config.emit,
            "adc_effects": config.adc_effects,
            "model_form": config.model_form,
            "regime_epsilon": config.regime_epsilon,
            "environment": config.environment,
        },
        "ground_truth": {
            "k_db": params.k_db,
            "gamma": params.gamma,
            "lambertian_order": params.lambertian_order,
            "kinematic_reference": {"time_s": config.duration_s, "range_m": 0.0},
            "peak": peak,
        },
        "rng": {"algorithm": RNG_ALGORITHM, "seed": config.seed, "stream": 0},
        "samples": config.sample_count,
    }
    if config.emit == EMIT_VOLTAGE:
        profile = _resolve_profile(config)
        doc["scenario"]["gain_setting_db"] = profile.gain_setting_db
    return doc


def reference_geometry(config: ScenarioConfig) -> PassGeometry:
    """Exact kinematic anchor for the synthesized trace.

    Anchored at (t = duration, R = 0), the affine time-to-range map
    reproduces the synthesis kinematics bit-for-bit, independent of where the
    power peak sits.
    """
    return PassGeometry(lateral_offset_m=config.lateral_offset_m,
                        speed_mps=config.speed_mps,
                        peak_range_m=0.0,
                        peak_time_s=config.duration_s)


def synthesize_passby(config: ScenarioConfig) -> RawTrace:
    """Generate one pass-by trace (power or voltage per config.emit)."""
    if config.lateral_offset_m <= 0:
        raise ConfigError("pass-by synthesis requires lateral_offset_m > 0")
    n = config.sample_count
    if n < 2:
        raise ConfigError("duration * sample_rate must give at least 2 samples")

    times = np.arange(n, dtype=np.float64) / config.sample_rate_hz
    ranges = config.speed_mps * (config.duration_s - times)
    distances = np.hypot(ranges, config.lateral_offset_m)
    power_db = _model_curve_db(config, distances)

    rng = Pcg32(config.seed)
    if config.noise_sigma_db > 0:
        power_db = power_db + config.noise_sigma_db * rng.normals(n)
    if config.ambient_power_dbw is not None:
        ambient_w = 10.0 ** (config.ambient_power_dbw / 10.0)
        ambient = np.full(n, ambient_w)
        if config.ambient_sigma_w > 0:
            ambient = np.maximum(ambient + config.ambient_sigma_w * rng.normals(n), 0.0)
        total_w = 10.0 ** (power_db / 10.0) + ambient
        power_db = 10.0 * np.log10(total_w)

    metadata = scenario_metadata(config)
    if config.emit == EMIT_POWER:
        return RawTrace(times_s=times, values=power_db, unit=UNIT_POWER_DBW,
                        sample_rate_hz=config.sample_rate_hz, metadata=metadata)

    profile = _resolve_profile(config)
    volts = np.empty(n)
    saturated = 0
    for i in range(n):
        v, clipped = power_to_voltage(profile, float(10.0 ** (power_db[i] / 10.0)))
        if clipped:
            saturated += 1
        if config.adc_effects:
            v = quantize_voltage(profile, v)
        volts[i] = v
    metadata["warnings"] = {
        "saturated_samples": saturated,
        "quantized_to_zero": int(np.count_nonzero(volts == 0.0)),
    }
    return RawTrace(times_s=times, values=volts, unit=UNIT_VOLTAGE,
                    sample_rate_hz=config.sample_rate_hz, metadata=metadata)


def synthesize_static(params: ChannelParams, distances_m: Sequence[float],
                      samples_per_point: int, noise_sigma_db: float,
                      seed: int, lateral_offset_m: float = 0.0,
                      sample_rate_hz: float = 100.0) -> list[tuple[float, RawTrace]]:
    """Fixed-distance traces, one per surveyed point.

    Each point uses an independent RNG stream derived from (seed, position in
    the list), so the points are mutually independent and appending more
    points never perturbs the earlier ones.
    """
    if samples_per_point < 2:
        raise ConfigError("samples_per_point must be >= 2")
    if noise_sigma_db < 0:
        raise ConfigError("noise_sigma_db must be >= 0")
    if lateral_offset_m < 0:
        raise ConfigError("lateral_offset_m must be >= 0")
    if not distances_m:
        raise ConfigError("need at least one distance")
    times = np.arange(samples_per_point, dtype=np.float64) / sample_rate_hz
    out: list[tuple[float, RawTrace]] = []
    for index, distance in enumerate(distances_m):
        if distance <= lateral_offset_m:
            raise ConfigError(
                f"distance {distance!r} must exceed lateral_offset_m")
        level = received_power_passby(params, lateral_offset_m, float(distance))
        values = np.full(samples_per_point, level)
        if noise_sigma_db > 0:
            rng = Pcg32(seed, stream=index)
            values = values + noise_sigma_db * rng.normals(samples_per_point)
        metadata = {
            "distance_m": float(distance),
            "lateral_offset_m": lateral_offset_m,
            "noise_sigma_db": noise_sigma_db,
            "rng": {"algorithm": RNG_ALGORITHM, "seed": seed, "stream": index},
        }
        out.append((float(distance),
                    RawTrace(times_s=times, values=values, unit=UNIT_POWER_DBW,
                             sample_rate_hz=sample_rate_hz, metadata=metadata)))
    return out


@dataclass(frozen=True)
class AmbientStudyRow:
    """One cell of the ambient sweep: floor level and the resulting fit."""

    offset_db: float | None
    ambient_power_dbw: float | None
    gamma_hat: float
    k_db_hat: float
    rmse_db: float
    n_used: int


def ambient_floor_study(config: ScenarioConfig,
                        offsets_db: Sequence[float | None],
                        fit_config: FitConfig | None = None) -> list[AmbientStudyRow]:
    """Sweep a constant ambient floor and refit the path-loss line per level.

    ``offsets_db`` are ambient levels relative to the noiseless peak signal
    power (None = no ambient at all). Every cell reuses the same seed, and the
    staged draw order makes the per-sample signal noise identical across
    cells, so the sweep isolates the ambient floor as the only moving part.
    Fits use the known synthesis geometry and the far-regime line fit.
    """
    if not offsets_db:
        raise ConfigError("need at least one ambient offset")
    if fit_config is None:
        fit_config = FitConfig()
    n = config.sample_count
    times = np.arange(n, dtype=np.float64) / config.sample_rate_hz
    ranges = config.speed_mps * (config.duration_s - times)
    distances = np.hypot(ranges, config.lateral_offset_m)
    peak_signal_db = float(np.max(_model_curve_db(config, distances)))

    geometry = reference_geometry(config)
    rows: list[AmbientStudyRow] = []
    for offset in offsets_db:
        ambient = None if offset is None else peak_signal_db + float(offset)
        cell = replace(config, ambient_power_dbw=ambient, emit=EMIT_POWER)
        trace = synthesize_passby(cell)
        distance_trace, _ = transform_to_distance(trace, geometry)
        report = fit_log_linear(distance_trace, fit_config)
        rows.append(AmbientStudyRow(
            offset_db=None if offset is None else float(offset),
            ambient_power_dbw=ambient,
            gamma_hat=report.gamma_hat,
            k_db_hat=report.k_db_hat,
            rmse_db=report.rmse_db,
            n_used=report.n_used))
    return rows
