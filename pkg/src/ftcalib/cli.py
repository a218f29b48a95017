"""Command-line front end: ``ftcalib {calibrate,sweep,validate,generate,report}``.

Exit codes: 0 success, 1 data/solve failure, 2 usage or precondition error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io
from .errors import CalibrationError, DimensionError
from .model import AXES, TYPE_ORDER, EstimationConfig, EstimationType
from .synth import DEFAULT_NOISE, KINDS, ScenarioSpec, combine, generate, make_sensor
from .validate import (
    LAMBDA_SCHEDULE,
    SweepReport,
    best_by_axis,
    best_overall,
    calibrate,
    format_metrics,
    mse_per_axis,
    mse_reduction_percent,
    run_sweep,
)

TYPE_CHOICES = [t.value for t in TYPE_ORDER]


class UsageError(Exception):
    """Precondition violation; exit code 2."""


def parse_lambdas(tokens) -> list:
    """Accept ``0 1 5e+05`` or ``0,1,5e+05`` (or a mix)."""
    out = []
    for tok in tokens:
        for part in str(tok).split(","):
            if part.strip():
                value = float(part)
                if not (value >= 0 and np.isfinite(value)):
                    raise argparse.ArgumentTypeError(f"lambda must be finite and >= 0: {part}")
                out.append(value)
    return out


def _temp_range(text):
    try:
        lo, hi = (float(v) for v in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("expected START:END, e.g. 32:41.2") from None
    return lo, hi


def _load_data(paths):
    return [io.read_dataset(p) for p in paths]


def cmd_calibrate(args, out):
    if args.workbench is None and (args.lam > 0 or EstimationType(args.type).uses_sphere):
        raise UsageError("--workbench is required when --lambda > 0 or with a sphere type (SnT/SwT)")
    data = _load_data(args.data)
    offset_data = io.read_dataset(args.offset_data) if args.offset_data else None
    C_w = io.read_workbench(args.workbench) if args.workbench else None
    cfg = EstimationConfig(args.type, args.lam, C_w, regularize_extras=args.regularize_extras)
    fit = calibrate(data, cfg, offset_data=offset_data)
    io.write_model(fit.model, args.out)

    train = calibrate_training_metrics(fit.model, data)
    out.write(f"type {cfg.estimation_type.value} lambda {cfg.lam:g}\n")
    out.write("training mse: " + " ".join(f"{a}={v:.6g}" for a, v in zip(AXES, train)) + "\n")
    out.write(f"rcond {fit.diagnostics.rcond:.6g} ({fit.diagnostics.method})\n")
    if C_w is not None:
        out.write(f"||C - C_w|| {np.linalg.norm(fit.model.C - C_w):.6g}\n")
    if fit.offset.method == "sphere":
        out.write(f"sphere radius {fit.offset.sphere_radius:.6g} N, fit rms {fit.offset.fit_rms:.6g} N\n")
    return 0


def calibrate_training_metrics(model, datasets):
    data = datasets[0] if len(datasets) == 1 else combine(datasets)
    return mse_per_axis(model, data).mse


def cmd_sweep(args, out):
    data_paths = [Path(p).resolve() for p in args.data]
    if Path(args.validation).resolve() in data_paths:
        raise UsageError("validation file must differ from calibration files")
    data = _load_data(args.data)
    valid = io.read_dataset(args.validation)
    offset_data = io.read_dataset(args.offset_data) if args.offset_data else None
    C_w = io.read_workbench(args.workbench)
    lambdas = parse_lambdas(args.lambdas) if args.lambdas else list(LAMBDA_SCHEDULE)
    types = args.types or TYPE_CHOICES
    report = run_sweep(data, valid, C_w, types=types, lambdas=lambdas, offset_data=offset_data,
                       label=args.label, regularize_extras=args.regularize_extras)
    text = report.to_text() if args.format == "text" else report.to_csv()
    if args.out:
        io.atomic_write_text(args.out, text)
    else:
        out.write(text)
    if not any(r.ok for r in report.cells):
        out.write("all calibration cells failed\n")
        return 1
    best = best_overall(report)
    out.write(
        f"best: dataset={best.dataset} type={best.estimation_type} lambda={best.lam:g} "
        f"force_norm_mean={best.metrics.residual_norm_mean:.6g} "
        f"(workbench {report.workbench_row.metrics.residual_norm_mean:.6g})\n"
    )
    return 0


def cmd_validate(args, out):
    model = io.read_model(args.calibration)
    valid = io.read_dataset(args.validation)
    metrics = mse_per_axis(model, valid)
    pct = None
    if args.baseline:
        base = mse_per_axis(io.read_model(args.baseline), valid)
        pct = mse_reduction_percent(base.mse, metrics.mse)
    if args.format == "csv":
        cols = ["axis", "mse", "mean_abs"] + (["mse_percent"] if pct is not None else [])
        lines = [",".join(cols)]
        for k, a in enumerate(AXES):
            vals = [a, repr(float(metrics.mse[k])), repr(float(metrics.mean_abs_residual[k]))]
            if pct is not None:
                vals.append(repr(float(pct[k])))
            lines.append(",".join(vals))
        lines.append(f"force_norm_mean,{metrics.residual_norm_mean!r},")
        text = "\n".join(lines) + "\n"
    else:
        text = format_metrics(metrics, pct)
    if args.out:
        io.atomic_write_text(args.out, text)
    out.write(text)
    return 0


def _noise(values):
    if len(values) not in (1, 6):
        raise UsageError("--noise takes one value or six per-channel values")
    return values[0] if len(values) == 1 else tuple(values)


def cmd_generate(args, out):
    noise = _noise(args.noise)
    sensor = make_sensor(args.sensor_seed, mount_deviation=args.mount_deviation)
    spec = ScenarioSpec(
        kind=args.kind, n=args.n, C_true=sensor.C_true, o_true=sensor.o_true, Ct_true=sensor.Ct_true,
        mass=args.mass, temp_profile=args.temp, ramp=args.ramp, noise_sigma=noise,
        hysteresis_gain=args.hysteresis_gain, seed=args.seed, name=args.name or args.kind,
    )
    dataset, truth = generate(spec)
    dataset.meta.update(sensor_seed=args.sensor_seed, noise_sigma=np.broadcast_to(noise, (6,)).tolist())
    out_path = Path(args.out)
    truth_path = Path(args.truth) if args.truth else out_path.with_suffix(".truth.json")
    io.write_dataset(dataset, out_path)
    io.write_model(truth, truth_path)
    if args.workbench_out:
        io.write_workbench(sensor.C_w, args.workbench_out)
    out.write(f"wrote {len(dataset)} samples to {out_path} (ground truth {truth_path})\n")
    return 0


def cmd_report(args, out):
    report = SweepReport()
    for p in args.sweep:
        report = report.merge(SweepReport.from_csv(Path(p).read_text(encoding="utf-8")))
    if args.format == "csv":
        text = report.to_csv()
    else:
        parts = [report.to_text(), "best by axis (validation mse):"]
        for b in best_by_axis(report):
            parts.append(f"  {b.axis}: {b.dataset} {b.estimation_type} lambda={b.lam:g} mse={b.value:.6g}")
        best = best_overall(report)
        parts.append(f"best overall: {best.dataset} {best.estimation_type} lambda={best.lam:g} "
                     f"force_norm_mean={best.metrics.residual_norm_mean:.6g}")
        text = "\n".join(parts) + "\n"
    if args.out:
        io.atomic_write_text(args.out, text)
    else:
        out.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ftcalib", description="In-situ F/T sensor calibration with temperature compensation.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("calibrate", help="estimate a calibration from one or more datasets")
    c.add_argument("--data", nargs="+", required=True)
    c.add_argument("--offset-data")
    c.add_argument("--workbench")
    c.add_argument("--type", choices=TYPE_CHOICES, required=True)
    c.add_argument("--lambda", dest="lam", type=float, default=0.0)
    c.add_argument("--regularize-extras", action="store_true")
    c.add_argument("--out", required=True)
    c.set_defaults(func=cmd_calibrate)

    s = sub.add_parser("sweep", help="estimation type x lambda sweep scored on a validation set")
    s.add_argument("--data", nargs="+", required=True)
    s.add_argument("--validation", required=True)
    s.add_argument("--workbench", required=True)
    s.add_argument("--offset-data")
    s.add_argument("--types", nargs="+", choices=TYPE_CHOICES)
    s.add_argument("--lambdas", nargs="+")
    s.add_argument("--label")
    s.add_argument("--regularize-extras", action="store_true")
    s.add_argument("--format", choices=("csv", "text"), default="csv")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sweep)

    v = sub.add_parser("validate", help="per-axis metrics of a calibration on a dataset")
    v.add_argument("--calibration", required=True)
    v.add_argument("--validation", required=True)
    v.add_argument("--baseline", help="calibration without temperature, for MSE reduction")
    v.add_argument("--format", choices=("csv", "text"), default="text")
    v.add_argument("--out")
    v.set_defaults(func=cmd_validate)

    g = sub.add_parser("generate", help="write a synthetic dataset and its ground truth")
    g.add_argument("--kind", choices=KINDS, required=True)
    g.add_argument("--n", type=int, default=1000)
    g.add_argument("--temp", type=_temp_range, default=(32.0, 41.2))
    g.add_argument("--ramp", choices=("linear", "saturating"), default="linear")
    g.add_argument("--mass", type=float, default=33.0)
    g.add_argument("--noise", type=float, nargs="+", default=list(DEFAULT_NOISE),
                   help="raw-count noise standard deviation, one value or six per channel")
    g.add_argument("--hysteresis-gain", type=float, default=0.0)
    g.add_argument("--mount-deviation", type=float, default=0.002)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--sensor-seed", type=int, default=0)
    g.add_argument("--name")
    g.add_argument("--out", required=True)
    g.add_argument("--truth")
    g.add_argument("--workbench-out")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("report", help="render sweep CSVs as a table with per-axis winners")
    r.add_argument("--sweep", nargs="+", required=True)
    r.add_argument("--format", choices=("csv", "text"), default="text")
    r.add_argument("--out")
    r.set_defaults(func=cmd_report)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (CalibrationError, DimensionError, np.linalg.LinAlgError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
