"""Least-squares estimation of the path-loss line (K_dB, gamma).

The far-field model is a straight line in log-distance,

    P_dBW = K_dB - gamma * D_dB,      D_dB = 10*log10(D)

so ordinary least squares of power on D_dB gives gamma as the negated slope
and K_dB as the intercept. Two estimators are provided: a plain fit over the
far regime (w^2/D^2 <= epsilon), and a corrected fit that subtracts the known
near-field term 5*(n+1)*log10(1 - w^2/D^2) from the observations first and
can therefore use every point. Both report RMSE, R^2 (as-is, possibly
negative), the sample bookkeeping, and the regime boundary used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from .errors import FitError
from .model import DEFAULT_EPSILON
from .trace import DEGENERACY_LIMIT, DistanceTrace


@dataclass(frozen=True)
class FitConfig:
    """Estimator settings.

    ``epsilon`` bounds w^2/D^2 for the far regime; ``min_distance_m``, when
    set, replaces the epsilon filter with a plain distance cutoff (the
    field-work style of picking "points beyond X meters").
    ``assumed_order_n`` is the Lambertian order used to compute the
    correction; the true order is generally unknown, so corrected fits are
    re-run at n +/- 0.5 and the parameter shifts reported as sensitivity.
    """

    epsilon: float = DEFAULT_EPSILON
    use_correction: bool = False
    min_points: int = 10
    assumed_order_n: float = 1.0
    min_distance_m: float | None = None

    def __post_init__(self):
        if not 0.0 < self.epsilon < 1.0:
            raise FitError(f"epsilon must be in (0, 1), got {self.epsilon!r}")
        if self.min_points < 2:
            raise FitError(f"min_points must be >= 2, got {self.min_points!r}")
        if self.assumed_order_n < 0:
            raise FitError("assumed_order_n must be >= 0")
        if self.min_distance_m is not None and self.min_distance_m <= 0:
            raise FitError("min_distance_m must be > 0 when set")


@dataclass(frozen=True)
class FitReport:
    """Estimation result with residual diagnostics and config echo."""

    k_db_hat: float
    gamma_hat: float
    rmse_db: float
    r_squared: float
    n_used: int
    n_dropped_near: int
    n_dropped_degenerate: int
    regime_boundary_m: float
    use_correction: bool
    assumed_order_n: float
    epsilon: float
    min_distance_m: float | None
    min_points: int
    lateral_offset_m: float
    sensitivity: dict[str, float] | None = None

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {
            "k_db_hat": self.k_db_hat,
            "gamma_hat": self.gamma_hat,
            "rmse_db": self.rmse_db,
            "r_squared": self.r_squared,
            "n_used": self.n_used,
            "n_dropped_near": self.n_dropped_near,
            "n_dropped_degenerate": self.n_dropped_degenerate,
            "regime_boundary_m": self.regime_boundary_m,
            "config": {
                "epsilon": self.epsilon,
                "use_correction": self.use_correction,
                "min_points": self.min_points,
                "assumed_order_n": self.assumed_order_n,
                "min_distance_m": self.min_distance_m,
                "lateral_offset_m": self.lateral_offset_m,
            },
        }
        if self.sensitivity is not None:
            doc["sensitivity"] = dict(self.sensitivity)
        return doc

    @classmethod
    def from_dict(cls, doc: dict[str, Any]) -> "FitReport":
        try:
            config = doc.get("config", {})
            return cls(
                k_db_hat=float(doc["k_db_hat"]),
                gamma_hat=float(doc["gamma_hat"]),
                rmse_db=float(doc["rmse_db"]),
                r_squared=float(doc["r_squared"]),
                n_used=int(doc["n_used"]),
                n_dropped_near=int(doc["n_dropped_near"]),
                n_dropped_degenerate=int(doc["n_dropped_degenerate"]),
                regime_boundary_m=float(doc["regime_boundary_m"]),
                use_correction=bool(config.get("use_correction", False)),
                assumed_order_n=float(config.get("assumed_order_n", 1.0)),
                epsilon=float(config.get("epsilon", DEFAULT_EPSILON)),
                min_distance_m=(None if config.get("min_distance_m") is None
                                else float(config["min_distance_m"])),
                min_points=int(config.get("min_points", 10)),
                lateral_offset_m=float(config.get("lateral_offset_m", 0.0)),
                sensitivity=doc.get("sensitivity"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FitError(f"malformed fit report document: {exc}") from exc


def _ols_line(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and intercept of y on x (centered normal equations)."""
    x_mean = float(np.mean(x))
    y_mean = float(np.mean(y))
    dx = x - x_mean
    sxx = float(np.dot(dx, dx))
    if sxx == 0.0:
        raise FitError("degenerate design: all distances are equal")
    slope = float(np.dot(dx, y - y_mean)) / sxx
    intercept = y_mean - slope * x_mean
    return slope, intercept


def _diagnostics(y: np.ndarray, predicted: np.ndarray) -> tuple[float, float]:
    residuals = y - predicted
    rmse = float(np.sqrt(np.mean(residuals * residuals)))
    ss_res = float(np.dot(residuals, residuals))
    centered = y - float(np.mean(y))
    ss_tot = float(np.dot(centered, centered))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return rmse, r_squared


def _correction_db(order_n: float, w: float, d: np.ndarray) -> np.ndarray:
    return 5.0 * (order_n + 1.0) * np.log10(1.0 - (w * w) / (d * d))


def _fit_filtered(trace: DistanceTrace, config: FitConfig,
                  apply_far_filter: bool, subtract_correction: bool,
                  order_n: float) -> FitReport:
    d = trace.distance_m
    p = trace.power_dbw
    w = trace.lateral_offset_m

    positive = d > 0.0
    ratio = np.full(d.shape, np.inf)
    ratio[positive] = (w * w) / (d[positive] * d[positive])
    usable = positive & (ratio < DEGENERACY_LIMIT)
    n_degenerate = int(np.count_nonzero(~usable))

    if config.min_distance_m is not None:
        far = usable & (d >= config.min_distance_m)
        boundary = config.min_distance_m
    elif apply_far_filter:
        far = usable & (ratio <= config.epsilon)
        boundary = w / math.sqrt(config.epsilon)
    else:
        far = usable
        boundary = w / math.sqrt(config.epsilon)
    n_near = int(np.count_nonzero(usable & ~far))

    d_fit = d[far]
    p_fit = p[far]
    if d_fit.size < config.min_points:
        raise FitError(
            f"only {d_fit.size} usable points (need min_points={config.min_points})")
    if np.unique(d_fit).size < 2:
        raise FitError("degenerate design: need at least two distinct distances")

    y = p_fit - _correction_db(order_n, w, d_fit) if subtract_correction else p_fit
    x = 10.0 * np.log10(d_fit)
    slope, intercept = _ols_line(x, y)
    rmse, r_squared = _diagnostics(y, intercept + slope * x)
    return FitReport(
        k_db_hat=intercept,
        gamma_hat=-slope,
        rmse_db=rmse,
        r_squared=r_squared,
        n_used=int(d_fit.size),
        n_dropped_near=n_near,
        n_dropped_degenerate=n_degenerate,
        regime_boundary_m=boundary,
        use_correction=subtract_correction,
        assumed_order_n=order_n,
        epsilon=config.epsilon,
        min_distance_m=config.min_distance_m,
        min_points=config.min_points,
        lateral_offset_m=w,
    )


def fit_log_linear(trace: DistanceTrace, config: FitConfig = FitConfig()) -> FitReport:
    """Plain line fit over the far regime (or beyond min_distance_m)."""
    return _fit_filtered(trace, config, apply_far_filter=True,
                         subtract_correction=False,
                         order_n=config.assumed_order_n)


def fit_with_correction(trace: DistanceTrace,
                        config: FitConfig = FitConfig()) -> FitReport:
    """Line fit after subtracting the known near-field term; uses all regimes.

    The correction needs the trace's lateral offset and an assumed Lambertian
    order. Sensitivity to that order is reported as the (K_dB, gamma) shifts
    when refitting at n - 0.5 and n + 0.5.
    """
    report = _fit_filtered(trace, config, apply_far_filter=False,
                           subtract_correction=True,
                           order_n=config.assumed_order_n)
    sensitivity: dict[str, float] = {}
    for label, order_n in (("minus", config.assumed_order_n - 0.5),
                           ("plus", config.assumed_order_n + 0.5)):
        if order_n < 0:
            continue
        shifted = _fit_filtered(trace, config, apply_far_filter=False,
                                subtract_correction=True, order_n=order_n)
        sensitivity[f"gamma_delta_{label}"] = shifted.gamma_hat - report.gamma_hat
        sensitivity[f"k_db_delta_{label}"] = shifted.k_db_hat - report.k_db_hat
    return replace(report, sensitivity=sensitivity)


def fit(trace: DistanceTrace, config: FitConfig = FitConfig()) -> FitReport:
    """Dispatch on config.use_correction."""
    if config.use_correction:
        return fit_with_correction(trace, config)
    return fit_log_linear(trace, config)


@dataclass(frozen=True)
class EvalSummary:
    rmse_db: float
    max_abs_residual_db: float
    mean_residual_db: float
    r_squared: float
    n_points: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "rmse_db": self.rmse_db,
            "max_abs_residual_db": self.max_abs_residual_db,
            "mean_residual_db": self.mean_residual_db,
            "r_squared": self.r_squared,
            "n_points": self.n_points,
        }


def predict_power_db(k_db: float, gamma: float, distance_m,
                     lateral_offset_m: float = 0.0,
                     order_n: float = 1.0,
                     with_correction: bool = False) -> np.ndarray:
    """Model line (optionally with the near-field term) at given distances."""
    d = np.asarray(distance_m, dtype=np.float64)
    line = k_db - gamma * 10.0 * np.log10(d)
    if with_correction and lateral_offset_m > 0.0:
        line = line + _correction_db(order_n, lateral_offset_m, d)
    return line


def evaluate_params(k_db: float, gamma: float, trace: DistanceTrace,
                    order_n: float = 1.0,
                    with_correction: bool = False) -> tuple[np.ndarray, EvalSummary]:
    """Residuals (observed - predicted) of a parameter pair against a trace."""
    predicted = predict_power_db(k_db, gamma, trace.distance_m,
                                 lateral_offset_m=trace.lateral_offset_m,
                                 order_n=order_n,
                                 with_correction=with_correction)
    residuals = trace.power_dbw - predicted
    rmse, r_squared = _diagnostics(trace.power_dbw, predicted)
    summary = EvalSummary(
        rmse_db=rmse,
        max_abs_residual_db=float(np.max(np.abs(residuals))),
        mean_residual_db=float(np.mean(residuals)),
        r_squared=r_squared,
        n_points=len(trace),
    )
    return residuals, summary


def evaluate_fit(report: FitReport,
                 trace: DistanceTrace) -> tuple[np.ndarray, EvalSummary]:
    """Residual series of a fit against a trace.

    Corrected fits are evaluated through the full near-field model; plain
    fits through the bare line.
    """
    return evaluate_params(report.k_db_hat, report.gamma_hat, trace,
                           order_n=report.assumed_order_n,
                           with_correction=report.use_correction)
