"""Generalized-Lambertian path-loss model for vehicular visible-light links.

The link is a headlamp-class source passing a roadside photodetector at
lateral offset ``w``. With source and detector at equal height the irradiance
and incidence angles coincide, and the received power collapses to a
log-domain form

    P_dBW(D) = K_dB - gamma * 10*log10(D) + 5*(n+1) * log10(1 - w^2/D^2)

where ``D`` is the true source-detector distance, ``K_dB`` lumps transmit
power, detector area and Lambertian order ``n``, and ``gamma`` is the
path-loss exponent. The last term vanishes on-axis and for ``D >> w``; the
two-regime variant drops it entirely in the far region, leaving the plain
log-linear law used for fitting.

All angles are radians, powers dBW (watts only at conversion boundaries).
Every type here is an immutable value and every operation a pure function.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import (
    DomainError,
    FieldOfViewError,
    GeometryError,
    PeakUndefinedError,
)

# Consistency tolerance between a stored Lambertian order and the order
# implied by the stored half-power semi-angle.
ORDER_CONSISTENCY_TOL = 1e-9

DEFAULT_HALF_ANGLE_RAD = math.pi / 3  # 60 deg half-power semi-angle, order 1


def lambertian_order(half_angle_rad: float) -> float:
    """Lambertian order n from the half-power semi-angle.

    n = -ln(2) / ln(cos(half_angle)); strictly positive and strictly
    decreasing on (0, pi/2).
    """
    if not 0.0 < half_angle_rad < math.pi / 2:
        raise DomainError(
            f"half_angle_rad must be in (0, pi/2), got {half_angle_rad!r}")
    return -math.log(2.0) / math.log(math.cos(half_angle_rad))


@dataclass(frozen=True)
class ChannelParams:
    """Fitted or ground-truth channel model (K_dB, gamma, order, half-angle).

    ``gamma`` typically falls in [1, 6] but fitted values outside that range
    (including non-positive ones from ambient-dominated daylight data) are
    representable.
    """

    k_db: float
    gamma: float
    lambertian_order: float = 1.0
    half_angle_rad: float = DEFAULT_HALF_ANGLE_RAD

    def __post_init__(self):
        if not math.isfinite(self.k_db):
            raise DomainError("k_db must be finite")
        if not math.isfinite(self.gamma):
            raise DomainError("gamma must be finite")
        if self.lambertian_order < 0:
            raise DomainError("lambertian_order must be >= 0")
        if not 0.0 < self.half_angle_rad < math.pi / 2:
            raise DomainError("half_angle_rad must be in (0, pi/2)")

    def order_mismatch(self) -> float:
        """|stored order - order implied by the half-angle| (consistency check)."""
        return abs(self.lambertian_order - lambertian_order(self.half_angle_rad))

    def is_consistent(self, tol: float = ORDER_CONSISTENCY_TOL) -> bool:
        return self.order_mismatch() <= tol

    @classmethod
    def from_half_angle(cls, k_db: float, gamma: float,
                        half_angle_rad: float) -> "ChannelParams":
        return cls(k_db=k_db, gamma=gamma,
                   lambertian_order=lambertian_order(half_angle_rad),
                   half_angle_rad=half_angle_rad)


@dataclass(frozen=True)
class LambertianSource:
    """Physical source/detector pair: transmit power, detector area, semi-angle."""

    tx_power_w: float
    detector_area_m2: float
    half_angle_rad: float = DEFAULT_HALF_ANGLE_RAD

    def __post_init__(self):
        if self.tx_power_w <= 0:
            raise DomainError("tx_power_w must be > 0")
        if self.detector_area_m2 <= 0:
            raise DomainError("detector_area_m2 must be > 0")
        if not 0.0 < self.half_angle_rad < math.pi / 2:
            raise DomainError("half_angle_rad must be in (0, pi/2)")

    @property
    def order(self) -> float:
        return lambertian_order(self.half_angle_rad)


def model_constant(source: LambertianSource) -> float:
    """Lumped constant K = (n+1) * A_R * P_t / (2*pi), in watts."""
    n = source.order
    return (n + 1.0) * source.detector_area_m2 * source.tx_power_w / (2.0 * math.pi)


def model_constant_db(source: LambertianSource) -> float:
    """K_dB = 10*log10(K)."""
    return 10.0 * math.log10(model_constant(source))


def constant_mismatch_db(params: ChannelParams, source: LambertianSource) -> float:
    """|stored K_dB - K_dB implied by the physical source| in dB.

    Cross-checks a directly supplied constant (e.g. a fit result) against the
    one constructed from (P_t, A_R, half-angle).
    """
    return abs(params.k_db - model_constant_db(source))


def params_from_source(source: LambertianSource, gamma: float) -> ChannelParams:
    """Build ChannelParams with K_dB derived from the physical source."""
    return ChannelParams(
        k_db=model_constant_db(source),
        gamma=gamma,
        lambertian_order=source.order,
        half_angle_rad=source.half_angle_rad,
    )


@dataclass(frozen=True)
class PassGeometry:
    """Constant-speed pass-by geometry and its peak reference.

    ``peak_range_m`` is the longitudinal range at which peak power was
    observed and ``peak_time_s`` its timestamp; together with the speed they
    anchor the affine time-to-range mapping. ``peak_time_s=None`` means the
    peak time is to be detected from the trace.
    """

    lateral_offset_m: float
    speed_mps: float
    peak_range_m: float
    peak_time_s: float | None = None

    def __post_init__(self):
        if self.lateral_offset_m < 0:
            raise DomainError("lateral_offset_m must be >= 0")
        if not self.speed_mps > 0:
            raise DomainError("speed_mps must be > 0")
        if self.peak_range_m < 0:
            raise DomainError("peak_range_m must be >= 0")

    def with_peak_time(self, t_peak: float) -> "PassGeometry":
        return replace(self, peak_time_s=t_peak)


def incidence_angle(w: float, range_m: float) -> float:
    """Incidence angle from lateral offset and longitudinal range.

    theta = atan2(w, R), so cos(theta) = R / sqrt(R^2 + w^2).
    """
    if w < 0 or range_m < 0:
        raise DomainError("w and range_m must be >= 0")
    if w == 0 and range_m == 0:
        raise GeometryError("incidence angle undefined at w = range = 0")
    return math.atan2(w, range_m)


def received_power_lambertian(source: LambertianSource, gamma: float,
                              distance_m: float, irradiance_rad: float,
                              incidence_rad: float) -> float:
    """Received power in watts from the full Lambertian relation.

    (n+1) * A_R * P_t / (2*pi*D^gamma) * cos^n(irradiance) * cos(incidence),
    valid only while the incidence angle is inside the half-power semi-angle.
    """
    if distance_m <= 0:
        raise DomainError("distance_m must be > 0")
    if not 0.0 <= irradiance_rad < math.pi / 2:
        raise DomainError("irradiance_rad must be in [0, pi/2)")
    if incidence_rad < 0:
        raise DomainError("incidence_rad must be >= 0")
    if incidence_rad >= source.half_angle_rad:
        raise FieldOfViewError(
            f"incidence {incidence_rad:.6f} rad outside half-angle "
            f"{source.half_angle_rad:.6f} rad")
    n = source.order
    geometry = math.cos(irradiance_rad) ** n * math.cos(incidence_rad)
    return model_constant(source) / distance_m ** gamma * geometry


def received_power_aligned(params: ChannelParams, distance_m: float,
                           incidence_rad: float) -> float:
    """Log-domain received power with irradiance and incidence angles equal.

    K_dB - gamma*10*log10(D) + 10*(n+1)*log10(cos(theta)), in dBW.
    """
    if distance_m <= 0:
        raise DomainError("distance_m must be > 0")
    if not 0.0 <= incidence_rad < math.pi / 2:
        raise DomainError("incidence_rad must be in [0, pi/2)")
    np1 = params.lambertian_order + 1.0
    return (params.k_db
            - params.gamma * 10.0 * math.log10(distance_m)
            + 10.0 * np1 * math.log10(math.cos(incidence_rad)))


def near_field_correction(params: ChannelParams, w: float,
                          distance_m: float) -> float:
    """Correction term 5*(n+1)*log10(1 - w^2/D^2), in dB.

    Always <= 0; zero exactly on-axis; diverges to -inf as D approaches w.
    """
    if w < 0:
        raise DomainError("w must be >= 0")
    if distance_m <= w:
        raise DomainError(
            f"distance_m must exceed the lateral offset ({distance_m!r} <= {w!r})")
    if w == 0.0:
        return 0.0
    np1 = params.lambertian_order + 1.0
    return 5.0 * np1 * math.log10(1.0 - (w * w) / (distance_m * distance_m))


def received_power_passby(params: ChannelParams, w: float,
                          distance_m: float) -> float:
    """Full log-domain pass-by power: line term plus near-field correction (dBW)."""
    correction = near_field_correction(params, w, distance_m)
    return (params.k_db
            - params.gamma * 10.0 * math.log10(distance_m)
            + correction)


class Regime(enum.Enum):
    FAR = "far"
    NEAR = "near"


#: Far-regime threshold on w^2/D^2; 0.01 puts the boundary at D = 10*w.
DEFAULT_EPSILON = 0.01


def classify_regime(w: float, distance_m: float,
                    epsilon: float = DEFAULT_EPSILON) -> Regime:
    """Far iff w^2/D^2 <= epsilon (closed boundary), else Near."""
    if w < 0:
        raise DomainError("w must be >= 0")
    if distance_m <= 0:
        raise DomainError("distance_m must be > 0")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must be in (0, 1)")
    return Regime.FAR if (w * w) / (distance_m * distance_m) <= epsilon else Regime.NEAR


def received_power_conditional(params: ChannelParams, w: float,
                               distance_m: float,
                               epsilon: float = DEFAULT_EPSILON) -> float:
    """Two-regime power: plain log-linear law in the far regime, corrected near (dBW)."""
    if classify_regime(w, distance_m, epsilon) is Regime.FAR:
        return params.k_db - params.gamma * 10.0 * math.log10(distance_m)
    return received_power_passby(params, w, distance_m)


def peak_distance(params: ChannelParams, w: float) -> float:
    """Distance maximizing the pass-by power: D* = w*sqrt(1 + (n+1)/gamma).

    Stationary point of the full log-domain model over D in (w, inf); only
    defined for gamma > 0 (otherwise power is monotone in D).
    """
    if w <= 0:
        raise DomainError("w must be > 0")
    if params.gamma <= 0:
        raise PeakUndefinedError(
            f"no interior peak for gamma = {params.gamma!r} (power monotone in D)")
    return w * math.sqrt(1.0 + (params.lambertian_order + 1.0) / params.gamma)


def peak_range(params: ChannelParams, w: float) -> float:
    """Longitudinal range at the power peak: R* = sqrt(D*^2 - w^2) = w*sqrt((n+1)/gamma)."""
    if w <= 0:
        raise DomainError("w must be > 0")
    if params.gamma <= 0:
        raise PeakUndefinedError(
            f"no interior peak for gamma = {params.gamma!r} (power monotone in D)")
    return w * math.sqrt((params.lambertian_order + 1.0) / params.gamma)


def passby_power_db(params: ChannelParams, w: float, distances_m) -> np.ndarray:
    """Vectorized full pass-by power over an array of distances (kernel-backed)."""
    d = np.asarray(distances_m, dtype=np.float64)
    if d.size and (not np.all(d > w) or w < 0):
        raise DomainError("all distances must exceed the lateral offset")
    return _kernels.passby_power_db(params.k_db, params.gamma,
                                    params.lambertian_order, w, np.atleast_1d(d))


def conditional_power_db(params: ChannelParams, w: float, distances_m,
                         epsilon: float = DEFAULT_EPSILON) -> np.ndarray:
    """Vectorized two-regime power over an array of distances (kernel-backed)."""
    d = np.asarray(distances_m, dtype=np.float64)
    if d.size and (not np.all(d > w) or w < 0):
        raise DomainError("all distances must exceed the lateral offset")
    if not 0.0 < epsilon < 1.0:
        raise DomainError("epsilon must be in (0, 1)")
    return _kernels.conditional_power_db(params.k_db, params.gamma,
                                         params.lambertian_order, w, epsilon,
                                         np.atleast_1d(d))


def peak_distance_numeric(params: ChannelParams, w: float, d_max: float,
                          step: float = 1e-4, d_min: float | None = None) -> float:
    """Grid-search cross-check of the analytic peak distance.

    Scans D over [d_min, d_max] at the given step (d_min defaults to one step
    past w) and returns the best grid point. Intended for validating
    ``peak_distance``; accurate to one grid step.
    """
    if w <= 0:
        raise DomainError("w must be > 0")
    if d_min is None:
        d_min = w + step
    if not w < d_min < d_max:
        raise DomainError("need w < d_min < d_max")
    count = int(math.floor((d_max - d_min) / step)) + 1
    idx, _ = _kernels.passby_peak_scan(params.k_db, params.gamma,
                                       params.lambertian_order, w,
                                       d_min, step, count)
    return d_min + step * idx


# Parameter presets from the validation measurement campaigns: the canonical
# values plus the alternate fits published alongside them (kept separate;
# they disagree slightly, daylight even in sign).
PRESETS: dict[str, ChannelParams] = {
    "night": ChannelParams(k_db=-35.2680, gamma=0.9707),
    "daylight": ChannelParams(k_db=-32.6335, gamma=0.0175),
    "night-alt": ChannelParams(k_db=-32.84, gamma=1.173),
    "daylight-alt": ChannelParams(k_db=-32.63, gamma=-0.01793),
}
