"""Command-line pipeline: simulate, convert, transform, fit, eval.

Each command reads/writes the CSV schemas from the trace module and prints
exactly one JSON run report to stdout (command echo, SHA-256 digests of the
files touched, warnings, and the command's own report payload). Reports
contain no timestamps, so identical invocations produce identical output.

Exit codes: 0 success, 1 runtime failure (bad data, impossible fit), 2 usage
error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import VlplError
from .fitting import (
    FitConfig,
    FitReport,
    evaluate_params,
    fit as run_fit,
    predict_power_db,
)
from .model import (
    PRESETS,
    DEFAULT_EPSILON,
    ChannelParams,
    PassGeometry,
    lambertian_order,
)
from .radiometry import DetectorProfile, load_profile, with_gain
from .simulate import (
    EMIT_POWER,
    EMIT_VOLTAGE,
    MODEL_FORM_CONDITIONAL,
    MODEL_FORM_FULL,
    PRESET_NOISE_SIGMA_DB,
    ScenarioConfig,
    synthesize_passby,
)
from .trace import (
    DEFAULT_SMOOTH_WINDOW,
    UNIT_VOLTAGE,
    DistanceTrace,
    convert_trace_to_power,
    load_distance_csv,
    load_trace_csv,
    save_distance_csv,
    save_trace_csv,
    transform_to_distance,
)

PROG = "vlpl"


def _sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _digests(paths) -> dict[str, str]:
    return {str(p): _sha256(p) for p in paths}


def _emit_report(command: str, *, inputs=(), outputs=(), warnings=None,
                 report=None) -> None:
    doc = {
        "tool": PROG,
        "version": __version__,
        "command": command,
        "inputs": _digests(inputs),
        "outputs": _digests(outputs),
        "warnings": list(warnings or []),
        "report": report if report is not None else {},
    }
    json.dump(doc, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog=PROG,
        description="Vehicular visible-light path-loss toolkit: synthesize "
                    "pass-by traces, convert detector voltages to power, map "
                    "time traces onto the distance axis, and fit the "
                    "log-domain path-loss line.")
    parser.add_argument("--version", action="version",
                        version=f"{PROG} {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser(
        "simulate", help="synthesize a pass-by trace with known ground truth")
    sim.add_argument("--preset", choices=sorted(PRESETS),
                     help="named (K_dB, gamma) parameter set")
    sim.add_argument("--k-db", type=float, help="model constant K_dB (dBW at 1 m)")
    sim.add_argument("--gamma", type=float, help="path-loss exponent")
    sim.add_argument("--n", type=float, default=None,
                     help="Lambertian order (default 1.0)")
    sim.add_argument("--half-angle-deg", type=float, default=None,
                     help="half-power semi-angle in degrees (alternative to --n)")
    sim.add_argument("--w", type=float, required=True,
                     help="lateral offset of the track, meters")
    sim.add_argument("--speed", type=float, required=True, help="vehicle speed, m/s")
    sim.add_argument("--duration", type=float, required=True, help="seconds")
    sim.add_argument("--rate", type=float, required=True, help="samples per second")
    sim.add_argument("--seed", type=int, required=True, help="RNG seed")
    sim.add_argument("--noise-db", type=float, default=None,
                     help="dB-domain noise sigma (default: preset's, else 0)")
    sim.add_argument("--ambient-dbw", type=float, default=None,
                     help="constant ambient floor, dBW")
    sim.add_argument("--ambient-sigma-w", type=float, default=0.0,
                     help="linear-domain ambient fluctuation sigma, watts")
    sim.add_argument("--emit", choices=(EMIT_POWER, EMIT_VOLTAGE),
                     default=EMIT_POWER, help="output unit (default power)")
    sim.add_argument("--gain-db", type=float, default=0.0,
                     help="amplifier gain used when emitting voltage")
    sim.add_argument("--no-adc", action="store_true",
                     help="skip ADC quantization/saturation on voltage output")
    sim.add_argument("--model-form",
                     choices=(MODEL_FORM_FULL, MODEL_FORM_CONDITIONAL),
                     default=MODEL_FORM_FULL,
                     help="full near-field model or two-regime form")
    sim.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                     help="far-regime threshold for the two-regime form")
    sim.add_argument("--environment", default=None,
                     help="free-form tag recorded in metadata (night/daylight)")
    sim.add_argument("--out", required=True, help="output trace CSV path")
    sim.add_argument("--meta", default=None,
                     help="sidecar metadata path (default: OUT.meta.json)")

    conv = sub.add_parser(
        "convert", help="convert a voltage trace to received power (dBW)")
    conv.add_argument("input", help="voltage trace CSV")
    conv.add_argument("--gain-db", type=float, required=True,
                      help="amplifier gain setting during capture, dB")
    conv.add_argument("--profile", default=None,
                      help="detector profile file (gain flag overrides its gain)")
    conv.add_argument("--out", required=True, help="output power trace CSV")

    trans = sub.add_parser(
        "transform", help="map a power-vs-time pass-by onto the distance axis")
    trans.add_argument("input", help="power trace CSV")
    trans.add_argument("--speed", type=float, required=True, help="m/s")
    trans.add_argument("--w", type=float, required=True,
                       help="lateral offset, meters (0 = on-axis)")
    trans.add_argument("--r-peak", type=float, required=True,
                       help="longitudinal range at the power peak, meters")
    trans.add_argument("--t-peak", type=float, default=None,
                       help="peak timestamp; detected from the trace if omitted")
    trans.add_argument("--smooth-window", type=int, default=DEFAULT_SMOOTH_WINDOW,
                       help="odd moving-average width for peak detection")
    trans.add_argument("--out", required=True, help="output distance CSV")

    fit_p = sub.add_parser(
        "fit", help="estimate (K_dB, gamma) from a distance trace")
    fit_p.add_argument("input", help="distance trace CSV")
    fit_p.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON,
                       help="far-regime threshold on w^2/D^2")
    fit_p.add_argument("--min-distance", type=float, default=None,
                       help="use a plain distance cutoff instead of epsilon")
    fit_p.add_argument("--correction", action="store_true",
                       help="subtract the near-field term and use all points")
    fit_p.add_argument("--w", type=float, default=None,
                       help="override the lateral offset inferred from the file")
    fit_p.add_argument("--n", type=float, default=1.0,
                       help="assumed Lambertian order for the correction")
    fit_p.add_argument("--min-points", type=int, default=10)
    fit_p.add_argument("--out", default=None, help="write the fit report JSON here")
    fit_p.add_argument("--line-out", default=None,
                       help="write the fitted line (distance_m,predicted_power_dbw)")

    ev = sub.add_parser(
        "eval", help="predict power from fitted parameters, or score a trace")
    ev.add_argument("trace", nargs="?", default=None,
                    help="distance trace CSV to score (omit with --at)")
    ev.add_argument("--params", default=None, help="fit report JSON")
    ev.add_argument("--preset", choices=sorted(PRESETS),
                    help="named parameter set instead of --params")
    ev.add_argument("--at", type=float, default=None,
                    help="predict received power at this distance, meters")
    ev.add_argument("--w", type=float, default=None,
                    help="lateral offset for near-field prediction (default 0)")
    return parser


def _simulate_params(args, parser) -> ChannelParams:
    if args.preset is not None:
        if args.k_db is not None or args.gamma is not None:
            parser.error("--preset conflicts with --k-db/--gamma")
        base = PRESETS[args.preset]
    else:
        if args.k_db is None or args.gamma is None:
            parser.error("either --preset or both --k-db and --gamma are required")
        base = ChannelParams(k_db=args.k_db, gamma=args.gamma)
    if args.half_angle_deg is not None:
        if args.n is not None:
            parser.error("--n conflicts with --half-angle-deg")
        half = math.radians(args.half_angle_deg)
        return ChannelParams(k_db=base.k_db, gamma=base.gamma,
                             lambertian_order=lambertian_order(half),
                             half_angle_rad=half)
    if args.n is not None:
        return ChannelParams(k_db=base.k_db, gamma=base.gamma,
                             lambertian_order=args.n)
    return base


def _cmd_simulate(args, parser) -> int:
    params = _simulate_params(args, parser)
    if args.w <= 0:
        parser.error("--w must be > 0 for a pass-by")
    if args.speed <= 0:
        parser.error("--speed must be > 0")
    noise = args.noise_db
    if noise is None:
        noise = PRESET_NOISE_SIGMA_DB.get(args.preset, 0.0) if args.preset else 0.0
    profile = DetectorProfile(gain_setting_db=args.gain_db)
    config = ScenarioConfig(
        params=params,
        lateral_offset_m=args.w,
        speed_mps=args.speed,
        duration_s=args.duration,
        sample_rate_hz=args.rate,
        noise_sigma_db=noise,
        ambient_power_dbw=args.ambient_dbw,
        ambient_sigma_w=args.ambient_sigma_w,
        seed=args.seed,
        emit=args.emit,
        adc_effects=not args.no_adc,
        detector_profile=profile if args.emit == EMIT_VOLTAGE else None,
        model_form=args.model_form,
        regime_epsilon=args.epsilon,
        environment=args.environment,
    )
    trace = synthesize_passby(config)
    save_trace_csv(trace, args.out)
    meta_path = args.meta if args.meta is not None else args.out + ".meta.json"
    Path(meta_path).write_text(
        json.dumps(trace.metadata, indent=2, sort_keys=True) + "\n",
        encoding="utf-8")
    warnings = []
    sat = trace.metadata.get("warnings", {}).get("saturated_samples", 0)
    if sat:
        warnings.append(f"{sat} samples saturated the 5 V signal range")
    zeroed = trace.metadata.get("warnings", {}).get("quantized_to_zero", 0)
    if zeroed:
        warnings.append(f"{zeroed} samples quantized to 0 V")
    _emit_report("simulate", outputs=[args.out, meta_path], warnings=warnings,
                 report={"samples": len(trace), "unit": trace.unit,
                         "metadata_path": str(meta_path)})
    return 0


def _cmd_convert(args) -> int:
    trace = load_trace_csv(args.input, expect_unit=UNIT_VOLTAGE)
    if args.profile is not None:
        profile = with_gain(load_profile(args.profile), args.gain_db)
    else:
        profile = DetectorProfile(gain_setting_db=args.gain_db)
    converted, n_dropped = convert_trace_to_power(trace, profile)
    save_trace_csv(converted, args.out)
    warnings = []
    if n_dropped:
        warnings.append(f"{n_dropped} nonpositive-voltage rows dropped")
    _emit_report("convert", inputs=[args.input], outputs=[args.out],
                 warnings=warnings,
                 report={"rows_in": len(trace), "rows_out": len(converted),
                         "rows_dropped": n_dropped,
                         "gain_setting_db": profile.gain_setting_db})
    return 0


def _cmd_transform(args, parser) -> int:
    if args.speed <= 0:
        parser.error("--speed must be > 0")
    if args.w < 0:
        parser.error("--w must be >= 0")
    if args.r_peak < 0:
        parser.error("--r-peak must be >= 0")
    trace = load_trace_csv(args.input)
    geometry = PassGeometry(lateral_offset_m=args.w, speed_mps=args.speed,
                            peak_range_m=args.r_peak, peak_time_s=args.t_peak)
    distance_trace, summary = transform_to_distance(
        trace, geometry, smooth_window=args.smooth_window)
    save_distance_csv(distance_trace, args.out)
    warnings = []
    if summary.n_dropped_negative_range:
        warnings.append(f"{summary.n_dropped_negative_range} samples behind "
                        "the detector dropped")
    if summary.n_dropped_degenerate:
        warnings.append(f"{summary.n_dropped_degenerate} degenerate-geometry "
                        "samples dropped")
    _emit_report("transform", inputs=[args.input], outputs=[args.out],
                 warnings=warnings,
                 report={"peak_time_s": summary.peak_time_s,
                         "peak_detected": summary.peak_detected,
                         "smooth_window": summary.smooth_window,
                         "n_input": summary.n_input,
                         "n_kept": summary.n_kept,
                         "n_dropped_negative_range": summary.n_dropped_negative_range,
                         "n_dropped_degenerate": summary.n_dropped_degenerate})
    return 0


def _cmd_fit(args) -> int:
    trace = load_distance_csv(args.input)
    if args.w is not None:
        if args.w < 0:
            raise VlplError("--w must be >= 0")
        trace = DistanceTrace(
            range_m=trace.range_m,
            distance_m=np.hypot(trace.range_m, args.w),
            power_dbw=trace.power_dbw,
            lateral_offset_m=args.w)
    config = FitConfig(epsilon=args.epsilon,
                       use_correction=args.correction,
                       min_points=args.min_points,
                       assumed_order_n=args.n,
                       min_distance_m=args.min_distance)
    report = run_fit(trace, config)
    outputs = []
    if args.out is not None:
        Path(args.out).write_text(
            json.dumps(report.to_dict(), indent=2, sort_keys=True) + "\n",
            encoding="utf-8")
        outputs.append(args.out)
    line_path = args.line_out
    if line_path is None and args.out is not None:
        line_path = args.out + ".line.csv"
    if line_path is not None:
        predicted = predict_power_db(
            report.k_db_hat, report.gamma_hat, trace.distance_m,
            lateral_offset_m=report.lateral_offset_m,
            order_n=report.assumed_order_n,
            with_correction=report.use_correction)
        rows = ["distance_m,predicted_power_dbw"]
        rows.extend(f"{float(d)!r},{float(p)!r}"
                    for d, p in zip(trace.distance_m, predicted))
        Path(line_path).write_text("\n".join(rows) + "\n", encoding="utf-8")
        outputs.append(line_path)
    _emit_report("fit", inputs=[args.input], outputs=outputs,
                 report=report.to_dict())
    return 0


def _eval_parameters(args, parser):
    if (args.params is None) == (args.preset is None):
        parser.error("exactly one of --params or --preset is required")
    if args.params is not None:
        try:
            doc = json.loads(Path(args.params).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise VlplError(f"cannot read fit report {args.params!r}: {exc}") from exc
        report = FitReport.from_dict(doc)
        return (report.k_db_hat, report.gamma_hat, report.assumed_order_n,
                report.use_correction, report.lateral_offset_m, [args.params])
    preset = PRESETS[args.preset]
    return preset.k_db, preset.gamma, preset.lambertian_order, False, 0.0, []


def _cmd_eval(args, parser) -> int:
    k_db, gamma, order_n, corrected, w, inputs = _eval_parameters(args, parser)
    if args.w is not None:
        w = args.w
    if (args.at is None) == (args.trace is None):
        parser.error("exactly one of --at or a trace path is required")
    if args.at is not None:
        if args.at <= 0:
            parser.error("--at must be > 0")
        if corrected and w >= args.at:
            raise VlplError("prediction distance must exceed the lateral offset")
        value = float(predict_power_db(k_db, gamma, args.at,
                                       lateral_offset_m=w, order_n=order_n,
                                       with_correction=corrected))
        _emit_report("eval", inputs=inputs,
                     report={"distance_m": args.at, "predicted_power_dbw": value,
                             "k_db": k_db, "gamma": gamma})
        return 0
    trace = load_distance_csv(args.trace)
    _, summary = evaluate_params(k_db, gamma, trace, order_n=order_n,
                                 with_correction=corrected)
    _emit_report("eval", inputs=[*inputs, args.trace],
                 report={"k_db": k_db, "gamma": gamma, **summary.to_dict()})
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args, parser)
        if args.command == "convert":
            return _cmd_convert(args)
        if args.command == "transform":
            return _cmd_transform(args, parser)
        if args.command == "fit":
            return _cmd_fit(args)
        if args.command == "eval":
            return _cmd_eval(args, parser)
    except SystemExit as exc:  # parser.error inside a command
        return int(exc.code or 0)
    except (VlplError, OSError) as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        return 1
    raise AssertionError(f"unhandled command {args.command!r}")


if __name__ == "__main__":
    sys.exit(main())
