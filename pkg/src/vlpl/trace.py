"""Trace containers and the pass-by time-to-distance transform.

A pass-by measurement is a uniformly sampled time series of detector output
(volts, or received power in dBW once converted). Fitting needs power versus
distance, so the core transform here anchors an affine time-to-range map at
the observed power peak,

    R_i = R_peak + V * (T_peak - t_i)

then converts range to true distance D_i = sqrt(R_i^2 + w^2). Samples behind
the detector (R < 0) and samples too close to broadside for the model
(w^2/D^2 ~ 1) are dropped and counted. Static campaigns average fixed-point
traces instead; the mean is taken in linear watts by default because that is
what an averaging instrument reports (a dB-domain mean is available).

CSV schemas: raw traces are ``time_s,voltage_v`` or ``time_s,power_dbw``;
distance traces are ``range_m,distance_m,power_dbw``. Floats are written with
repr() so a save/load round trip is bit-exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DomainError,
    TraceFormatError,
    TransformError,
    UnitMismatchError,
)
from .model import PassGeometry
from .radiometry import DetectorProfile, voltage_to_power_dbw

UNIT_VOLTAGE = "voltage_v"
UNIT_POWER_DBW = "power_dbw"
_VALID_UNITS = (UNIT_VOLTAGE, UNIT_POWER_DBW)

#: Tolerance on sample-interval uniformity, in seconds.
UNIFORMITY_TOL_S = 1e-9

#: Default centered moving-average width (samples) for peak detection.
#: ~0.15 s at 100 Hz: wide enough to reject sample-level noise spikes, narrow
#: enough that the detected peak of a clean simulated pass-by stays within one
#: sample of the true peak time.
DEFAULT_SMOOTH_WINDOW = 15

#: Samples with w^2/D^2 at or above this are dropped as degenerate geometry.
DEGENERACY_LIMIT = 1.0 - 1e-12


def _as_readonly(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=np.float64, copy=True)
    if arr.ndim != 1:
        raise DomainError(f"{name} must be one-dimensional")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class RawTrace:
    """Uniformly sampled time series with a declared unit tag."""

    times_s: np.ndarray
    values: np.ndarray
    unit: str
    sample_rate_hz: float
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        times = _as_readonly(self.times_s, "times_s")
        values = _as_readonly(self.values, "values")
        object.__setattr__(self, "times_s", times)
        object.__setattr__(self, "values", values)
        if self.unit not in _VALID_UNITS:
            raise DomainError(f"unit must be one of {_VALID_UNITS}, got {self.unit!r}")
        if times.size != values.size:
            raise DomainError("times_s and values must have equal length")
        if times.size < 2:
            raise DomainError("trace must contain at least 2 samples")
        if self.sample_rate_hz <= 0:
            raise DomainError("sample_rate_hz must be > 0")
        dt = np.diff(times)
        if not np.all(dt > 0):
            raise DomainError("timestamps must be strictly increasing")
        expected = 1.0 / self.sample_rate_hz
        # Every interval must be a whole number of sample periods: a plain
        # uniform trace has all intervals equal to one period, and a trace
        # with dropped rows (e.g. nonpositive voltages removed) keeps its
        # remaining timestamps on the same grid.
        steps = np.rint(dt / expected)
        off_grid = np.abs(dt - steps * expected)
        if np.any(steps < 1) or np.max(off_grid) > UNIFORMITY_TOL_S:
            raise DomainError(
                "timestamps must lie on the sample-rate grid "
                f"(worst deviation {np.max(off_grid):.3e} s)")

    def __len__(self) -> int:
        return int(self.times_s.size)

    @classmethod
    def from_samples(cls, times_s, values, unit: str,
                     metadata: dict | None = None) -> "RawTrace":
        """Build a trace inferring the sample rate from the first interval."""
        times = np.asarray(times_s, dtype=np.float64)
        if times.size < 2:
            raise DomainError("trace must contain at least 2 samples")
        rate = 1.0 / (times[1] - times[0])
        return cls(times_s=times, values=values, unit=unit,
                   sample_rate_hz=float(rate), metadata=dict(metadata or {}))


def load_trace_csv(path, expect_unit: str | None = None) -> RawTrace:
    """Parse a raw-trace CSV; errors carry the offending line number."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise TraceFormatError(f"{path}: empty file", line=1)
    header = lines[0].strip()
    if header == f"time_s,{UNIT_VOLTAGE}":
        unit = UNIT_VOLTAGE
    elif header == f"time_s,{UNIT_POWER_DBW}":
        unit = UNIT_POWER_DBW
    else:
        raise TraceFormatError(
            f"{path}: expected header 'time_s,{UNIT_VOLTAGE}' or "
            f"'time_s,{UNIT_POWER_DBW}', got {header!r}", line=1)
    if expect_unit is not None and unit != expect_unit:
        raise UnitMismatchError(
            f"{path}: trace unit is {unit!r}, expected {expect_unit!r}")
    times: list[float] = []
    values: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 2:
            raise TraceFormatError(
                f"{path}: expected 2 comma-separated fields, got {len(parts)}",
                line=lineno)
        try:
            t = float(parts[0])
            v = float(parts[1])
        except ValueError:
            raise TraceFormatError(
                f"{path}: invalid number in row {raw!r}", line=lineno) from None
        times.append(t)
        values.append(v)
    if len(times) < 2:
        raise TraceFormatError(
            f"{path}: need at least 2 data rows, got {len(times)}",
            line=len(lines))
    try:
        return RawTrace.from_samples(times, values, unit)
    except DomainError as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc


def save_trace_csv(trace: RawTrace, path) -> None:
    # repr() of a Python float is the shortest string that parses back to the
    # same bits, so a save/load round trip is lossless.
    rows = [f"time_s,{trace.unit}"]
    rows.extend(f"{float(t)!r},{float(v)!r}"
                for t, v in zip(trace.times_s, trace.values))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def convert_trace_to_power(trace: RawTrace,
                           profile: DetectorProfile) -> tuple[RawTrace, int]:
    """Voltage trace -> power trace in dBW via the rounded dB path.

    Nonpositive voltages have no dB image and are dropped; returns the
    converted trace and the dropped-row count. Dropping interior samples
    leaves a gap in the timestamp grid, which the trace container permits
    (intervals stay whole multiples of the sample period).
    """
    if trace.unit != UNIT_VOLTAGE:
        raise UnitMismatchError(
            f"convert expects a {UNIT_VOLTAGE!r} trace, got {trace.unit!r}")
    keep = trace.values > 0.0
    n_dropped = int(np.count_nonzero(~keep))
    times = trace.times_s[keep]
    if times.size < 2:
        raise TransformError(
            "fewer than 2 positive-voltage samples remain after conversion")
    powers = np.array([voltage_to_power_dbw(profile, float(v))
                       for v in trace.values[keep]])
    converted = RawTrace(times_s=times, values=powers, unit=UNIT_POWER_DBW,
                         sample_rate_hz=trace.sample_rate_hz,
                         metadata=dict(trace.metadata))
    return converted, n_dropped


def smooth_values(values: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average with edge padding; window must be odd."""
    if window < 1 or window % 2 == 0:
        raise DomainError(f"smooth window must be odd and >= 1, got {window}")
    if window == 1:
        return np.asarray(values, dtype=np.float64).copy()
    half = window // 2
    padded = np.pad(np.asarray(values, dtype=np.float64), half, mode="edge")
    kernel = np.full(window, 1.0 / window)
    return np.convolve(padded, kernel, mode="valid")


def detect_peak(trace: RawTrace,
                smooth_window: int = DEFAULT_SMOOTH_WINDOW) -> tuple[float, int]:
    """Timestamp and index of the maximum of the smoothed trace.

    Ties resolve to the earliest index. The window is clamped nowhere: it must
    be odd and no longer than the trace.
    """
    if smooth_window > len(trace):
        raise DomainError(
            f"smooth window {smooth_window} exceeds trace length {len(trace)}")
    smoothed = smooth_values(trace.values, smooth_window)
    index = int(np.argmax(smoothed))
    return float(trace.times_s[index]), index


def time_to_range(geometry: PassGeometry, t_s):
    """Affine time-to-range map anchored at the peak: R = R_peak + V*(T_peak - t)."""
    if geometry.peak_time_s is None:
        raise DomainError("geometry has no peak_time_s; detect or supply one first")
    t = np.asarray(t_s, dtype=np.float64)
    r = geometry.peak_range_m + geometry.speed_mps * (geometry.peak_time_s - t)
    if np.ndim(t_s) == 0:
        return float(r)
    return r


@dataclass(frozen=True)
class DistanceTrace:
    """Distance-indexed received power, ordered by increasing distance."""

    range_m: np.ndarray
    distance_m: np.ndarray
    power_dbw: np.ndarray
    lateral_offset_m: float
    geometry: PassGeometry | None = None
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        r = _as_readonly(self.range_m, "range_m")
        d = _as_readonly(self.distance_m, "distance_m")
        p = _as_readonly(self.power_dbw, "power_dbw")
        object.__setattr__(self, "range_m", r)
        object.__setattr__(self, "distance_m", d)
        object.__setattr__(self, "power_dbw", p)
        if not r.size == d.size == p.size:
            raise DomainError("range, distance and power arrays must align")
        if r.size == 0:
            raise DomainError("distance trace must not be empty")
        if self.lateral_offset_m < 0:
            raise DomainError("lateral_offset_m must be >= 0")
        if np.any(r < 0):
            raise DomainError("ranges must be >= 0")
        expected = np.hypot(r, self.lateral_offset_m)
        if np.max(np.abs(d - expected)) > 1e-9:
            raise DomainError(
                "distance_m inconsistent with sqrt(range^2 + offset^2) "
                f"(worst {np.max(np.abs(d - expected)):.3e} m)")
        if np.any(np.diff(d) < 0):
            raise DomainError("points must be ordered by nondecreasing distance")

    def __len__(self) -> int:
        return int(self.range_m.size)


@dataclass(frozen=True)
class TransformSummary:
    """Bookkeeping from transform_to_distance (for reports and audits)."""

    peak_time_s: float
    peak_index: int | None
    peak_detected: bool
    smooth_window: int | None
    n_input: int
    n_kept: int
    n_dropped_negative_range: int
    n_dropped_degenerate: int


def transform_to_distance(
        trace: RawTrace, geometry: PassGeometry,
        smooth_window: int = DEFAULT_SMOOTH_WINDOW,
) -> tuple[DistanceTrace, TransformSummary]:
    """Map a power-vs-time pass-by onto the distance axis.

    If the geometry carries no peak time, the peak is detected from the
    smoothed trace first. Output points are ordered by increasing distance
    (the approach segment reverses). Samples mapping behind the detector and
    samples at degenerate broadside geometry are dropped and counted.
    """
    if trace.unit != UNIT_POWER_DBW:
        raise UnitMismatchError(
            f"transform expects a {UNIT_POWER_DBW!r} trace, got {trace.unit!r} "
            "(convert voltages first)")
    if geometry.peak_time_s is None:
        t_peak, peak_index = detect_peak(trace, smooth_window)
        geometry = geometry.with_peak_time(t_peak)
        detected = True
        window_used: int | None = smooth_window
    else:
        t_peak, peak_index, detected, window_used = (
            float(geometry.peak_time_s), None, False, None)

    w = geometry.lateral_offset_m
    ranges = time_to_range(geometry, trace.times_s)
    powers = trace.values

    ahead = ranges >= 0.0
    n_negative = int(np.count_nonzero(~ahead))
    r = ranges[ahead]
    p = powers[ahead]
    d = np.hypot(r, w)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(d > 0.0, (w * w) / (d * d), np.inf)
    ok = (ratio < DEGENERACY_LIMIT) & (d > 0.0)
    n_degenerate = int(np.count_nonzero(~ok))
    r, d, p = r[ok], d[ok], p[ok]
    if r.size == 0:
        raise TransformError(
            "no samples remain after dropping negative-range and degenerate points")

    order = np.argsort(d, kind="stable")
    result = DistanceTrace(
        range_m=r[order], distance_m=d[order], power_dbw=p[order],
        lateral_offset_m=w, geometry=geometry, metadata=dict(trace.metadata))
    summary = TransformSummary(
        peak_time_s=t_peak, peak_index=peak_index, peak_detected=detected,
        smooth_window=window_used, n_input=len(trace), n_kept=int(r.size),
        n_dropped_negative_range=n_negative, n_dropped_degenerate=n_degenerate)
    return result, summary


DISTANCE_HEADER = "range_m,distance_m,power_dbw"


def save_distance_csv(trace: DistanceTrace, path) -> None:
    rows = [DISTANCE_HEADER]
    rows.extend(f"{float(r)!r},{float(d)!r},{float(p)!r}" for r, d, p in
                zip(trace.range_m, trace.distance_m, trace.power_dbw))
    Path(path).write_text("\n".join(rows) + "\n", encoding="utf-8")


def load_distance_csv(path) -> DistanceTrace:
    """Parse a distance-trace CSV, inferring the lateral offset geometrically."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines or lines[0].strip() != DISTANCE_HEADER:
        raise TraceFormatError(
            f"{path}: expected header {DISTANCE_HEADER!r}", line=1)
    cols: list[list[float]] = [[], [], []]
    for lineno, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        parts = raw.split(",")
        if len(parts) != 3:
            raise TraceFormatError(
                f"{path}: expected 3 comma-separated fields, got {len(parts)}",
                line=lineno)
        try:
            for col, text in zip(cols, parts):
                col.append(float(text))
        except ValueError:
            raise TraceFormatError(
                f"{path}: invalid number in row {raw!r}", line=lineno) from None
    if not cols[0]:
        raise TraceFormatError(f"{path}: no data rows", line=len(lines))
    r = np.array(cols[0])
    d = np.array(cols[1])
    p = np.array(cols[2])
    w_sq = d[0] * d[0] - r[0] * r[0]
    w = math.sqrt(w_sq) if w_sq > 0.0 else 0.0
    try:
        return DistanceTrace(range_m=r, distance_m=d, power_dbw=p,
                             lateral_offset_m=w)
    except DomainError as exc:
        raise TraceFormatError(f"{path}: {exc}") from exc


@dataclass(frozen=True)
class StaticPointSet:
    """Averaged static-campaign measurements: one power per surveyed distance."""

    distances_m: np.ndarray
    mean_power_dbw: np.ndarray
    sample_counts: np.ndarray

    def __post_init__(self):
        d = _as_readonly(self.distances_m, "distances_m")
        p = _as_readonly(self.mean_power_dbw, "mean_power_dbw")
        counts = np.array(self.sample_counts, dtype=np.int64, copy=True)
        counts.flags.writeable = False
        object.__setattr__(self, "distances_m", d)
        object.__setattr__(self, "mean_power_dbw", p)
        object.__setattr__(self, "sample_counts", counts)
        if not d.size == p.size == counts.size:
            raise DomainError("static point arrays must align")
        if d.size == 0:
            raise DomainError("static point set must not be empty")
        if np.any(counts < 1):
            raise DomainError("every point needs sample_count >= 1")
        if np.unique(d).size != d.size:
            raise DomainError("distances must be distinct")

    def __len__(self) -> int:
        return int(self.distances_m.size)


def average_static_points(
        pairs: Iterable[tuple[float, "RawTrace | Sequence[float]"]],
        db_domain_mean: bool = False) -> StaticPointSet:
    """Collapse per-distance traces to mean powers.

    Each pair is (distance, trace); the trace may be a power RawTrace or a
    bare sequence of dBW values (handy for single-reading points, which a
    RawTrace cannot represent). The default averages in linear watts and
    converts back to dBW; set ``db_domain_mean`` to average the dB values
    directly instead.
    """
    distances: list[float] = []
    means: list[float] = []
    counts: list[int] = []
    for distance_m, trace in pairs:
        if isinstance(trace, RawTrace):
            if trace.unit != UNIT_POWER_DBW:
                raise UnitMismatchError(
                    f"static averaging expects {UNIT_POWER_DBW!r} traces, "
                    f"got {trace.unit!r}")
            values = trace.values
        else:
            values = np.asarray(trace, dtype=np.float64)
            if values.size == 0:
                raise DomainError("empty value sequence for a static point")
        if db_domain_mean:
            mean_db = float(np.mean(values))
        else:
            mean_db = 10.0 * math.log10(float(np.mean(10.0 ** (values / 10.0))))
        distances.append(float(distance_m))
        means.append(mean_db)
        counts.append(int(values.size))
    if not distances:
        raise DomainError("no static points supplied")
    return StaticPointSet(distances_m=np.array(distances),
                          mean_power_dbw=np.array(means),
                          sample_counts=np.array(counts))


def distance_trace_from_static(points: StaticPointSet,
                               lateral_offset_m: float = 0.0) -> DistanceTrace:
    """Adapt averaged static points to the fitting substrate.

    Static campaigns survey true distance directly; the implied range is
    sqrt(D^2 - w^2) (on-axis campaigns have R = D).
    """
    d = points.distances_m
    if np.any(d < lateral_offset_m):
        raise DomainError("every distance must be >= the lateral offset")
    r = np.sqrt(np.maximum(d * d - lateral_offset_m * lateral_offset_m, 0.0))
    order = np.argsort(d, kind="stable")
    return DistanceTrace(range_m=r[order], distance_m=d[order],
                         power_dbw=points.mean_power_dbw[order],
                         lateral_offset_m=lateral_offset_m)
