"""Vehicular visible-light path-loss toolkit.

Evaluate the generalized-Lambertian link model, convert photodetector ADC
voltages to received optical power, transform pass-by time traces onto the
distance axis, estimate the log-domain path-loss line (K_dB, gamma), and
synthesize oracle traces with a seeded simulator.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .errors import (
    ConfigError,
    DomainError,
    FieldOfViewError,
    FitError,
    GeometryError,
    PeakUndefinedError,
    TraceFormatError,
    TransformError,
    UnitMismatchError,
    VlplError,
)
from .model import (
    DEFAULT_EPSILON,
    PRESETS,
    ChannelParams,
    LambertianSource,
    PassGeometry,
    Regime,
    classify_regime,
    conditional_power_db,
    incidence_angle,
    lambertian_order,
    model_constant,
    model_constant_db,
    near_field_correction,
    params_from_source,
    passby_power_db,
    peak_distance,
    peak_distance_numeric,
    peak_range,
    received_power_aligned,
    received_power_conditional,
    received_power_lambertian,
    received_power_passby,
)
from .radiometry import (
    DetectorProfile,
    load_profile,
    power_to_voltage,
    quantize_voltage,
    transimpedance_gain,
    voltage_to_power_dbw,
    voltage_to_power_w,
)
from .trace import (
    DistanceTrace,
    RawTrace,
    StaticPointSet,
    TransformSummary,
    average_static_points,
    convert_trace_to_power,
    detect_peak,
    distance_trace_from_static,
    load_distance_csv,
    load_trace_csv,
    save_distance_csv,
    save_trace_csv,
    time_to_range,
    transform_to_distance,
)
from .fitting import (
    EvalSummary,
    FitConfig,
    FitReport,
    evaluate_fit,
    evaluate_params,
    fit,
    fit_log_linear,
    fit_with_correction,
    predict_power_db,
)
from .simulate import (
    AmbientStudyRow,
    ScenarioConfig,
    ambient_floor_study,
    reference_geometry,
    synthesize_passby,
    synthesize_static,
)
from .rng import Pcg32

__all__ = [
    "__version__",
    # errors
    "VlplError", "DomainError", "GeometryError", "FieldOfViewError",
    "PeakUndefinedError", "TraceFormatError", "UnitMismatchError",
    "TransformError", "FitError", "ConfigError",
    # model
    "ChannelParams", "LambertianSource", "PassGeometry", "Regime", "PRESETS",
    "DEFAULT_EPSILON", "lambertian_order", "incidence_angle",
    "received_power_lambertian", "received_power_aligned",
    "near_field_correction", "received_power_passby",
    "received_power_conditional", "classify_regime", "peak_distance",
    "peak_range", "peak_distance_numeric", "model_constant",
    "model_constant_db", "params_from_source", "passby_power_db",
    "conditional_power_db",
    # radiometry
    "DetectorProfile", "transimpedance_gain", "voltage_to_power_w",
    "voltage_to_power_dbw", "power_to_voltage", "quantize_voltage",
    "load_profile",
    # trace
    "RawTrace", "DistanceTrace", "StaticPointSet", "TransformSummary",
    "load_trace_csv", "save_trace_csv", "load_distance_csv",
    "save_distance_csv", "convert_trace_to_power", "detect_peak",
    "time_to_range", "transform_to_distance", "average_static_points",
    "distance_trace_from_static",
    # fitting
    "FitConfig", "FitReport", "EvalSummary", "fit", "fit_log_linear",
    "fit_with_correction", "evaluate_fit", "evaluate_params",
    "predict_power_db",
    # simulator
    "ScenarioConfig", "AmbientStudyRow", "synthesize_passby",
    "synthesize_static", "ambient_floor_study", "reference_geometry",
    # rng
    "Pcg32",
]
