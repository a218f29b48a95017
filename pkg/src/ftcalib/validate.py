"""Calibration pipelines, validation metrics and the lambda sweep."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import offset as _offset
from .errors import CalibrationError, IllConditionedError, UndefinedBaselineError
from .model import AXES, TYPE_ORDER, CalibrationModel, Dataset, EstimationConfig, EstimationType
from .solver import RegressionInput, SolveDiagnostics, solve
from .synth import combine

LAMBDA_SCHEDULE = (0.0, 1.0, 5.0, 10.0, 50.0, 100.0, 1e3, 5e3, 1e4, 5e4, 1e5, 5e5, 1e6)
WORKBENCH = "Workbench"
CSV_COLUMNS = ("dataset", "type", "lambda", *(f"{a}_mse" for a in AXES), "force_norm_mean", "status")


@dataclass(frozen=True)
class AxisMetrics:
    """Per-axis error summary of ``prediction - reference``.

    ``mse`` is in N^2 / (N*m)^2, ``mean_abs_residual`` in N / N*m and
    ``residual_norm_mean`` is the time-averaged norm of the force residual.
    """

    mse: np.ndarray
    mean_abs_residual: np.ndarray
    residual_norm_mean: float

    def __post_init__(self):
        if np.any(np.asarray(self.mse) < 0):
            raise ValueError("mse must be non-negative")


@dataclass(frozen=True)
class CalibrationFit:
    model: CalibrationModel
    diagnostics: SolveDiagnostics
    offset: _offset.OffsetEstimate


def residuals(model: CalibrationModel, dataset: Dataset) -> np.ndarray:
    return model.predict_dataset(dataset) - dataset.reference


def _metrics(resid) -> AxisMetrics:
    return AxisMetrics(
        mse=np.mean(resid**2, axis=0),
        mean_abs_residual=np.mean(np.abs(resid), axis=0),
        residual_norm_mean=float(np.mean(np.linalg.norm(resid[:, :3], axis=1))),
    )


def mse_per_axis(model: CalibrationModel, dataset: Dataset) -> AxisMetrics:
    """Mean squared error of each wrench axis over the dataset."""
    return _metrics(residuals(model, dataset))


def residual_wrench(model: CalibrationModel, dataset: Dataset) -> AxisMetrics:
    """External-wrench proxy on contact-free data.

    With no external contact the calibrated measurement should equal the
    reference wrench, so ``prediction - reference`` plays the role of the
    estimated external wrench. Lower is better; zero for a perfect sensor.
    """
    return _metrics(residuals(model, dataset))


def mse_reduction_percent(mse_noT, mse_t):
    """Percentage of error removed by the temperature-aware estimate.

    ``100 * (mse_noT - mse_t) / mse_noT``; negative when temperature hurts.
    Works element-wise on arrays.
    """
    mse_noT = np.asarray(mse_noT, dtype=float)
    if np.any(mse_noT == 0):
        raise UndefinedBaselineError("baseline MSE is zero; reduction is undefined")
    out = (mse_noT - np.asarray(mse_t, dtype=float)) / mse_noT * 100.0
    return float(out) if out.ndim == 0 else out


def _as_dataset(datasets) -> tuple[Dataset, list]:
    if isinstance(datasets, Dataset):
        datasets = [datasets]
    datasets = list(datasets)
    if not datasets:
        raise ValueError("no calibration datasets given")
    data = datasets[0] if len(datasets) == 1 else combine(datasets)
    return data, datasets


def calibrate(datasets, config: EstimationConfig, offset_data: Dataset = None) -> CalibrationFit:
    """Run offset estimation and the regularized solve for one configuration.

    Several datasets are concatenated into one calibration set. Sphere types
    fit the offset on ``offset_data`` (default: the first dataset) and reuse
    it for the rest.
    """
    data, parts = _as_dataset(datasets)
    etype = config.estimation_type
    names = config.extra_names
    C_w = config.workbench
    meta = {
        "estimation_type": etype.value,
        "lambda": float(config.lam),
        "regularize_extras": bool(config.regularize_extras),
        "sources": [d.name for d in parts],
        "temperature_bounds": [float(data.temperature.min()), float(data.temperature.max())],
    }

    if etype.uses_sphere:
        if C_w is None:
            raise ValueError("sphere estimation types need a workbench matrix")
        source = offset_data if offset_data is not None else parts[0]
        est = _offset.fit_sphere_offset(source, C_w, temperature_drift=etype.uses_temperature)
        R, F, X = _offset.apply_offset(data, est, names)
    else:
        R, F, X, stats = _offset.centralize(data, names)
        meta["centering"] = stats.to_dict()

    inp = RegressionInput(R, F, X, lam=config.lam, C_w=C_w, C_tw=config.workbench_extra,
                          regularize_extras=config.regularize_extras)
    C, Ct, diag = solve(inp)

    if etype.uses_sphere:
        o = est.o_r
        meta.update(offset_method="sphere", offset_source=est.source_dataset,
                    sphere_radius=est.sphere_radius, sphere_fit_rms=est.fit_rms)
    else:
        # f - mu_f = C (r - mu_r) + Ct (x - mu_x)  =>  o = mu_r - C^-1 (mu_f - Ct mu_x)
        try:
            o = stats.mu_r - np.linalg.solve(C, stats.mu_f - Ct @ stats.mu_extras)
        except np.linalg.LinAlgError as exc:
            raise IllConditionedError("estimated C is singular; cannot express offset in raw space") from exc
        est = _offset.centralized_estimate(stats, data.name)
        meta["offset_method"] = "centralized"
    meta.update(rcond=diag.rcond, solve_method=diag.method)
    model = CalibrationModel(C, o, Ct, names, metadata=meta)
    return CalibrationFit(model, diag, est)


@dataclass(frozen=True)
class SweepRow:
    dataset: str
    estimation_type: str
    lam: float | None
    metrics: AxisMetrics | None
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    @property
    def type_rank(self) -> int:
        try:
            return TYPE_ORDER.index(EstimationType(self.estimation_type))
        except ValueError:
            return len(TYPE_ORDER)


@dataclass
class SweepReport:
    """Rows of a sweep; the workbench baseline rows carry ``estimation_type == "Workbench"``."""

    rows: list = field(default_factory=list)

    @property
    def cells(self) -> list:
        return [r for r in self.rows if r.estimation_type != WORKBENCH]

    @property
    def workbench_rows(self) -> list:
        return [r for r in self.rows if r.estimation_type == WORKBENCH]

    @property
    def workbench_row(self):
        rows = self.workbench_rows
        return rows[0] if rows else None

    def merge(self, other: "SweepReport") -> "SweepReport":
        return SweepReport(self.rows + other.rows)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in self.rows:
            lam = "" if r.lam is None else repr(float(r.lam))
            if r.metrics is None:
                vals = [""] * 7
            else:
                vals = [repr(float(v)) for v in r.metrics.mse] + [repr(float(r.metrics.residual_norm_mean))]
            w.writerow([r.dataset, r.estimation_type, lam, *vals, r.status])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "SweepReport":
        reader = csv.DictReader(io.StringIO(text))
        if tuple(reader.fieldnames or ()) != CSV_COLUMNS:
            raise ValueError(f"unexpected sweep CSV columns {reader.fieldnames}")
        rows = []
        for rec in reader:
            lam = float(rec["lambda"]) if rec["lambda"] else None
            if rec["force_norm_mean"]:
                mse = np.array([float(rec[f"{a}_mse"]) for a in AXES])
                metrics = AxisMetrics(mse, np.full(6, np.nan), float(rec["force_norm_mean"]))
            else:
                metrics = None
            rows.append(SweepRow(rec["dataset"], rec["type"], lam, metrics, rec["status"]))
        return cls(rows)

    def to_text(self) -> str:
        """Aligned table: one line per (dataset, type), one column per lambda, cells = mean force-residual norm."""
        lams = []
        for r in self.cells:
            if r.lam not in lams:
                lams.append(r.lam)
        keys = []
        grid = {}
        for r in self.cells:
            key = (r.dataset, r.estimation_type)
            if key not in keys:
                keys.append(key)
            grid[key, r.lam] = f"{r.metrics.residual_norm_mean:.2f}" if r.ok else "fail"
        labels = [f"{d} {t}" for d, t in keys]
        wb = self.workbench_rows
        labels += [f"{r.dataset} {WORKBENCH}" for r in wb]
        width = max([len(s) for s in labels] + [len("data + type")])
        heads = [_fmt_lambda(l) for l in lams]
        colw = max([len(h) for h in heads] + [6])
        lines = ["data + type".ljust(width) + " | " + " ".join(h.rjust(colw) for h in heads)]
        lines.append("-" * len(lines[0]))
        for label, key in zip(labels, keys):
            lines.append(label.ljust(width) + " | " + " ".join(grid.get((key, l), "").rjust(colw) for l in lams))
        for label, r in zip(labels[len(keys):], wb):
            v = f"{r.metrics.residual_norm_mean:.2f}" if r.ok else "fail"
            lines.append(label.ljust(width) + " | " + " ".join(v.rjust(colw) for _ in lams))
        return "\n".join(lines) + "\n"


def _fmt_lambda(lam):
    if lam is None:
        return "-"
    return f"{lam:g}"


def run_sweep(calib_data, valid_data: Dataset, workbench, types=TYPE_ORDER, lambdas=LAMBDA_SCHEDULE,
              offset_data: Dataset = None, label: str = None, regularize_extras=False) -> SweepReport:
    """Calibrate every (type, lambda) cell and score it on the validation set.

    Cells are evaluated in (type, lambda) order; a failing cell is recorded
    with its error class rather than aborting the sweep. The workbench
    baseline (``workbench`` with zero offset, no temperature) is appended
    last.
    """
    data, parts = _as_dataset(calib_data)
    if any(valid_data is d for d in parts) or valid_data is data:
        raise ValueError("validation data must be disjoint from calibration data")
    label = label or data.name
    types = [EstimationType.parse(t) for t in types]
    rows = []
    for etype in types:
        for lam in lambdas:
            cfg = EstimationConfig(etype, float(lam), workbench, regularize_extras=regularize_extras)
            try:
                fit = calibrate(parts, cfg, offset_data=offset_data)
                rows.append(SweepRow(label, etype.value, float(lam), residual_wrench(fit.model, valid_data)))
            except (CalibrationError, np.linalg.LinAlgError) as exc:
                rows.append(SweepRow(label, etype.value, float(lam), None, f"failed: {type(exc).__name__}"))
    wb = CalibrationModel.workbench(workbench)
    rows.append(SweepRow(label, WORKBENCH, None, residual_wrench(wb, valid_data)))
    return SweepReport(rows)


def _rank_key(row: SweepRow, value):
    return (value, row.lam if row.lam is not None else math.inf, row.type_rank)


@dataclass(frozen=True)
class BestCell:
    axis: str
    dataset: str
    estimation_type: str
    lam: float
    value: float


def best_by_axis(report: SweepReport) -> list:
    """Per-axis winner by validation MSE; ties go to smaller lambda, then SnT < SwT < CnT < CwT."""
    rows = [r for r in report.cells if r.ok]
    if not rows:
        raise ValueError("report has no successful calibration cells")
    out = []
    for k, axis in enumerate(AXES):
        best = min(rows, key=lambda r: _rank_key(r, r.metrics.mse[k]))
        out.append(BestCell(axis, best.dataset, best.estimation_type, best.lam, float(best.metrics.mse[k])))
    return out


def best_overall(report: SweepReport) -> SweepRow:
    """Cell with the lowest mean force-residual norm."""
    rows = [r for r in report.cells if r.ok]
    if not rows:
        raise ValueError("report has no successful calibration cells")
    return min(rows, key=lambda r: _rank_key(r, r.metrics.residual_norm_mean))


def format_metrics(metrics: AxisMetrics, mse_percent: Sequence[float] = None) -> str:
    """Aligned per-axis table of MSE, mean |residual| and optional MSE reduction."""
    head = f"{'axis':<5}{'mse':>16}{'mean_abs':>16}"
    if mse_percent is not None:
        head += f"{'mse_%':>10}"
    lines = [head]
    for k, axis in enumerate(AXES):
        line = f"{axis:<5}{metrics.mse[k]:>16.6g}{metrics.mean_abs_residual[k]:>16.6g}"
        if mse_percent is not None:
            line += f"{mse_percent[k]:>10.2f}"
        lines.append(line)
    lines.append(f"force_norm_mean {metrics.residual_norm_mean:.6g}")
    return "\n".join(lines) + "\n"

