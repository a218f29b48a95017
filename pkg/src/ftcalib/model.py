"""Domain types: wrenches, raw samples, datasets and calibration models.

Conventions
-----------
* A wrench is ordered ``(fx, fy, fz, tx, ty, tz)`` in N and N*m.
* Raw gauge readings are dimensionless counts; the calibration matrix
  carries the whole unit conversion.
* The offset ``o`` lives in raw space, so a model evaluates
  ``C @ (raw - o) + Ct @ extras``. The equivalent wrench-side offset is
  ``-C @ o``.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, DimensionError

AXES = ("fx", "fy", "fz", "tx", "ty", "tz")
TEMPERATURE = "temperature"
TEMPERATURE_BOUNDS = (-20.0, 120.0)
DATASET_KINDS = ("grid", "balancing", "random", "combined", "custom")


def _frozen(a, dtype=float):
    arr = np.array(a, dtype=dtype, copy=True)
    arr.flags.writeable = False
    return arr


def _check_finite(name, arr):
    if not np.all(np.isfinite(arr)):
        raise DataError(f"{name} contains NaN or Inf")


class EstimationType(str, enum.Enum):
    """Offset strategy (sphere / centralized) crossed with temperature use."""

    SnT = "SnT"
    SwT = "SwT"
    CnT = "CnT"
    CwT = "CwT"

    @property
    def uses_sphere(self) -> bool:
        return self in (EstimationType.SnT, EstimationType.SwT)

    @property
    def uses_temperature(self) -> bool:
        return self in (EstimationType.SwT, EstimationType.CwT)

    @classmethod
    def parse(cls, value) -> "EstimationType":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value))
        except ValueError:
            valid = ", ".join(t.value for t in cls)
            raise ValueError(f"unknown estimation type {value!r} (expected one of {valid})") from None


# tie-break order used when ranking sweep cells
TYPE_ORDER = (EstimationType.SnT, EstimationType.SwT, EstimationType.CnT, EstimationType.CwT)


@dataclass(frozen=True)
class Wrench:
    force: np.ndarray
    torque: np.ndarray

    def __post_init__(self):
        force = _frozen(self.force)
        torque = _frozen(self.torque)
        if force.shape != (3,) or torque.shape != (3,):
            raise DimensionError("force and torque must be 3-vectors")
        _check_finite("wrench", np.concatenate([force, torque]))
        object.__setattr__(self, "force", force)
        object.__setattr__(self, "torque", torque)

    @classmethod
    def from_array(cls, values) -> "Wrench":
        values = np.asarray(values, dtype=float)
        if values.shape != (6,):
            raise DimensionError(f"wrench must have 6 entries, got shape {values.shape}")
        return cls(values[:3], values[3:])

    def as_array(self) -> np.ndarray:
        return np.concatenate([self.force, self.torque])


@dataclass(frozen=True)
class RawSample:
    """One dataset row."""

    time: float
    raw: np.ndarray
    temperature: float
    reference: Wrench

    def __post_init__(self):
        raw = _frozen(self.raw)
        if raw.shape != (6,):
            raise DimensionError("raw must be a 6-vector")
        _check_finite("raw", raw)
        lo, hi = TEMPERATURE_BOUNDS
        if not (lo <= self.temperature <= hi):
            raise DataError(f"temperature {self.temperature} outside [{lo}, {hi}] degC")
        object.__setattr__(self, "raw", raw)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Column-oriented container of raw samples.

    Parameters
    ----------
    time : (n,) array
        Seconds since dataset start, non-decreasing.
    raw : (n, 6) array
        Raw gauge readings.
    temperature : (n,) array
        Sensor temperature in degC.
    reference : (n, 6) array
        Model-predicted wrench acting on the sensor.
    kind : str
        One of ``DATASET_KINDS``.
    name : str
        Free-text label.
    extras : mapping of str to (n,) arrays, optional
        Additional linear variables besides temperature.
    meta : mapping, optional
        Free-form metadata (written as ``#`` lines in CSV files).
    """

    time: np.ndarray
    raw: np.ndarray
    temperature: np.ndarray
    reference: np.ndarray
    kind: str = "custom"
    name: str = ""
    extras: Mapping[str, np.ndarray] = field(default_factory=dict)
    meta: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        time = _frozen(self.time)
        raw = _frozen(self.raw)
        temperature = _frozen(self.temperature)
        reference = _frozen(self.reference)
        n = time.shape[0] if time.ndim == 1 else -1
        if n < 1:
            raise DataError("dataset must contain at least one sample")
        if raw.shape != (n, 6) or reference.shape != (n, 6) or temperature.shape != (n,):
            raise DimensionError(
                f"inconsistent shapes: time {time.shape}, raw {raw.shape}, "
                f"temperature {temperature.shape}, reference {reference.shape}"
            )
        for label, arr in (("time", time), ("raw", raw), ("temperature", temperature), ("reference", reference)):
            _check_finite(label, arr)
        if np.any(np.diff(time) < 0):
            raise DataError("time must be non-decreasing")
        lo, hi = TEMPERATURE_BOUNDS
        if np.any(temperature < lo) or np.any(temperature > hi):
            raise DataError(f"temperature outside plausible range [{lo}, {hi}] degC")
        if self.kind not in DATASET_KINDS:
            raise DataError(f"unknown dataset kind {self.kind!r}")
        extras = {}
        for key, col in dict(self.extras).items():
            col = _frozen(col)
            if col.shape != (n,):
                raise DimensionError(f"extra variable {key!r} must have shape ({n},)")
            _check_finite(key, col)
            extras[key] = col
        object.__setattr__(self, "time", time)
        object.__setattr__(self, "raw", raw)
        object.__setattr__(self, "temperature", temperature)
        object.__setattr__(self, "reference", reference)
        object.__setattr__(self, "extras", extras)
        object.__setattr__(self, "meta", dict(self.meta))

    def __len__(self):
        return self.time.shape[0]

    @property
    def n(self) -> int:
        return len(self)

    @property
    def samples(self) -> list[RawSample]:
        return [
            RawSample(float(t), r, float(temp), Wrench.from_array(f))
            for t, r, temp, f in zip(self.time, self.raw, self.temperature, self.reference)
        ]

    @classmethod
    def from_samples(cls, samples: Sequence[RawSample], kind="custom", name="", meta=None) -> "Dataset":
        if not samples:
            raise DataError("dataset must contain at least one sample")
        return cls(
            time=[s.time for s in samples],
            raw=np.stack([s.raw for s in samples]),
            temperature=[s.temperature for s in samples],
            reference=np.stack([s.reference.as_array() for s in samples]),
            kind=kind,
            name=name,
            meta=meta or {},
        )

    def extra_matrix(self, names: Iterable[str]) -> np.ndarray:
        """Return the ``(n, m)`` matrix of the named extra variables."""
        cols = []
        for key in names:
            if key == TEMPERATURE:
                cols.append(self.temperature)
            elif key in self.extras:
                cols.append(self.extras[key])
            else:
                raise DimensionError(f"dataset {self.name!r} has no extra variable {key!r}")
        if not cols:
            return np.zeros((len(self), 0))
        return np.column_stack(cols)


@dataclass(frozen=True, eq=False)
class CalibrationModel:
    """Estimated sensor model ``wrench = C @ (raw - o) + Ct @ extras``."""

    C: np.ndarray
    o: np.ndarray
    Ct: np.ndarray = None
    extra_variable_names: tuple = ()
    metadata: Mapping[str, object] = field(default_factory=dict)

    def __post_init__(self):
        C = _frozen(self.C)
        o = _frozen(self.o)
        names = tuple(self.extra_variable_names)
        Ct = np.zeros((6, len(names))) if self.Ct is None else np.asarray(self.Ct, dtype=float)
        if Ct.ndim == 1:
            Ct = Ct.reshape(6, -1)
        Ct = _frozen(Ct)
        if C.shape != (6, 6):
            raise DimensionError(f"C must be 6x6, got {C.shape}")
        if o.shape != (6,):
            raise DimensionError(f"o must be a 6-vector, got {o.shape}")
        if Ct.shape != (6, len(names)):
            raise DimensionError(f"Ct must be 6x{len(names)} to match extra_variable_names, got {Ct.shape}")
        for label, arr in (("C", C), ("o", o), ("Ct", Ct)):
            _check_finite(label, arr)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "o", o)
        object.__setattr__(self, "Ct", Ct)
        object.__setattr__(self, "extra_variable_names", names)
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def m(self) -> int:
        return len(self.extra_variable_names)

    @classmethod
    def workbench(cls, C_w, **metadata) -> "CalibrationModel":
        """Manufacturer matrix with zero offset and no extra variables."""
        return cls(C_w, np.zeros(6), metadata={"estimation_type": "Workbench", **metadata})

    def apply(self, raw, extras=None) -> np.ndarray:
        """Vectorized prediction over rows of ``raw`` (shape ``(..., 6)``)."""
        raw = np.asarray(raw, dtype=float)
        if raw.shape[-1] != 6:
            raise DimensionError(f"raw must have 6 channels, got shape {raw.shape}")
        if extras is None:
            extras = np.zeros(raw.shape[:-1] + (0,))
        extras = np.asarray(extras, dtype=float)
        if extras.ndim == raw.ndim - 1 and self.m == 1 and extras.shape == raw.shape[:-1]:
            extras = extras[..., None]
        if extras.shape[-1:] != (self.m,) or extras.shape[:-1] != raw.shape[:-1]:
            raise DimensionError(
                f"extras shape {extras.shape} does not match model with m={self.m}"
            )
        return (raw - self.o) @ self.C.T + extras @ self.Ct.T

    def predict_dataset(self, dataset: Dataset) -> np.ndarray:
        return self.apply(dataset.raw, dataset.extra_matrix(self.extra_variable_names))

    def to_dict(self) -> dict:
        return {
            "C": self.C.tolist(),
            "o": self.o.tolist(),
            "Ct": self.Ct.tolist(),
            "extra_variable_names": list(self.extra_variable_names),
            "metadata": _jsonable(self.metadata),
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "CalibrationModel":
        names = tuple(d.get("extra_variable_names", ()))
        Ct = np.array(d.get("Ct", []), dtype=float).reshape(6, len(names))
        return cls(
            C=np.array(d["C"], dtype=float),
            o=np.array(d["o"], dtype=float),
            Ct=Ct,
            extra_variable_names=names,
            metadata=d.get("metadata", {}),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "CalibrationModel":
        return cls.from_dict(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, Mapping):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, enum.Enum):
        return obj.value
    return obj


def predict(model: CalibrationModel, raw, extras=()) -> Wrench:
    """Evaluate a single sample: ``C @ (raw - o) + Ct @ extras``."""
    raw = np.asarray(raw, dtype=float)
    extras = np.atleast_1d(np.asarray(extras, dtype=float))
    if raw.shape != (6,):
        raise DimensionError("raw must be a 6-vector")
    if extras.shape != (model.m,):
        raise DimensionError(f"expected {model.m} extra values, got {extras.shape[0]}")
    return Wrench.from_array(model.C @ (raw - model.o) + model.Ct @ extras)


@dataclass(frozen=True)
class EstimationConfig:
    """Recipe for one calibration solve."""

    estimation_type: EstimationType
    lam: float = 0.0
    workbench: np.ndarray = None
    workbench_extra: np.ndarray = None
    regularize_extras: bool = False

    def __post_init__(self):
        object.__setattr__(self, "estimation_type", EstimationType.parse(self.estimation_type))
        if not (self.lam >= 0 and np.isfinite(self.lam)):
            raise ValueError(f"lambda must be a finite non-negative number, got {self.lam}")
        if self.workbench is not None:
            cw = _frozen(self.workbench)
            if cw.shape != (6, 6):
                raise DimensionError("workbench matrix must be 6x6")
            object.__setattr__(self, "workbench", cw)
        if self.workbench_extra is not None:
            object.__setattr__(self, "workbench_extra", _frozen(self.workbench_extra))

    @property
    def extra_names(self) -> tuple:
        return (TEMPERATURE,) if self.estimation_type.uses_temperature else ()


@dataclass(frozen=True)
class CenteringStats:
    """Means removed by centralized offset removal."""

    mu_r: np.ndarray
    mu_f: np.ndarray
    mu_extras: np.ndarray

    def to_dict(self) -> dict:
        return {"mu_r": self.mu_r.tolist(), "mu_f": self.mu_f.tolist(), "mu_extras": self.mu_extras.tolist()}
