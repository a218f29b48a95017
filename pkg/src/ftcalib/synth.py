"""Synthetic gravity-loaded datasets with known sensor parameters.

A load of mass ``m`` hangs from the sensor at lever arm ``a``; for a
gravity direction ``u`` in the sensor frame the reference wrench is
``f = m g u`` and ``tau = a x f``. Raw readings invert the temperature
model exactly::

    raw = C_true^{-1} (wrench - Ct_true * t_drift) + o_true + noise

where ``t_drift`` is the sensor temperature, optionally passed through a
first-order lag (hysteresis stressor).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .model import TEMPERATURE, CalibrationModel, Dataset

GRAVITY = 9.80665
KINDS = ("grid", "balancing", "random")

# nominal center-of-mass offset of the load from the sensor origin (m)
DEFAULT_ARM = np.array([0.02, -0.01, 0.25])
DEFAULT_ARM_SPREAD = {"grid": 0.02, "balancing": 0.1, "random": 0.1}

# raw-count noise per channel; torque channels are noisier so that torque
# MSEs land at the magnitude seen on the real sensor
DEFAULT_NOISE = (0.002, 0.002, 0.002, 0.004, 0.004, 0.004)


@dataclass(frozen=True, eq=False)
class ScenarioSpec:
    """Recipe for one synthetic dataset.

    ``temp_profile`` is ``(t_start, t_end)`` in degC. ``ramp`` is
    ``"linear"`` or ``"saturating"``; the saturating ramp approaches
    ``t_end`` exponentially with ``ramp_time_constant`` expressed as a
    fraction of the dataset duration. ``noise_sigma`` is the raw-count noise
    standard deviation (scalar or per channel). ``hysteresis_gain`` blends a
    lagged temperature (time constant ``hysteresis_tau`` seconds) into the
    drift term. ``arm_spread`` (m) is how far the lever arm moves around
    ``lever_arm``; by default the grid barely moves it (the loaded link stays
    straight) while balancing and random motions move it widely.
    """

    kind: str
    n: int
    C_true: np.ndarray
    o_true: np.ndarray
    Ct_true: np.ndarray
    mass: float = 33.0
    gravity: float = GRAVITY
    temp_profile: tuple = (32.0, 41.2)
    ramp: str = "linear"
    ramp_time_constant: float = 0.3
    noise_sigma: object = 0.0
    hysteresis_gain: float = 0.0
    hysteresis_tau: float = 30.0
    sample_period: float = 0.1
    lever_arm: np.ndarray = field(default_factory=lambda: DEFAULT_ARM.copy())
    arm_spread: float = None
    grid_passes: int = 4
    seed: int = 0
    name: str = ""

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.n < 10:
            raise ValueError("n must be at least 10")
        if not self.mass > 0:
            raise ValueError("mass must be positive")
        t0, t1 = self.temp_profile
        if t1 < t0:
            raise ValueError("temperature must not decrease over a dataset (t_end >= t_start)")
        if self.ramp not in ("linear", "saturating"):
            raise ValueError(f"unknown ramp shape {self.ramp!r}")
        sigma = np.asarray(self.noise_sigma, dtype=float)
        if sigma.shape not in ((), (6,)) or np.any(sigma < 0) or not np.all(np.isfinite(sigma)):
            raise ValueError("noise_sigma must be a non-negative scalar or 6-vector")
        if self.hysteresis_gain < 0:
            raise ValueError("hysteresis_gain must be >= 0")
        if self.arm_spread is None:
            object.__setattr__(self, "arm_spread", DEFAULT_ARM_SPREAD[self.kind])


def _direction(roll, pitch):
    """Gravity direction in the sensor frame for a tilt by ``roll``/``pitch``."""
    return np.column_stack([
        -np.sin(pitch),
        np.sin(roll) * np.cos(pitch),
        -np.cos(roll) * np.cos(pitch),
    ])


def _grid_motion(spec, rng):
    # lattice of tilts swept in ``grid_passes`` boustrophedon passes; each
    # tilt is held at three lever-arm positions so all six wrench channels
    # are independently excited
    s = spec.arm_spread
    arms = spec.lever_arm + np.array([[0.0, 0.0, 0.0], [s, 0.0, 0.0], [0.0, s, 0.0]])
    per_pass = int(np.ceil(spec.n / (len(arms) * spec.grid_passes)))
    q = max(2, int(np.ceil(np.sqrt(per_pass))))
    angles = np.radians(np.linspace(-60.0, 60.0, q))
    cells = []
    for i, r in enumerate(angles):
        row = angles if i % 2 == 0 else angles[::-1]
        cells.extend((r, p) for p in row)
    passes = []
    for k in range(spec.grid_passes):
        passes.extend(cells if k % 2 == 0 else cells[::-1])
    idx = np.arange(spec.n)
    cell = np.array(passes)[(idx // len(arms)) % len(passes)]
    u = _direction(cell[:, 0], cell[:, 1])
    return u, arms[idx % len(arms)]


def _balancing_motion(spec, rng):
    s = np.linspace(0.0, 1.0, spec.n)
    ph = rng.uniform(0, 2 * np.pi, size=5)
    roll = np.radians(70.0) * np.sin(2 * np.pi * 3.0 * s + ph[0])
    pitch = np.radians(50.0) * np.sin(2 * np.pi * 2.0 * s + ph[1])
    u = _direction(roll, pitch)
    wobble = np.column_stack([
        np.sin(2 * np.pi * 1.3 * s + ph[2]),
        np.cos(2 * np.pi * 0.7 * s + ph[3]),
        0.5 * np.sin(2 * np.pi * 0.9 * s + ph[4]),
    ])
    return u, spec.lever_arm + spec.arm_spread * wobble


def _random_motion(spec, rng):
    u = rng.standard_normal((spec.n, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    arms = spec.lever_arm + rng.uniform(-spec.arm_spread, spec.arm_spread, size=(spec.n, 3))
    return u, arms


_MOTIONS = {"grid": _grid_motion, "balancing": _balancing_motion, "random": _random_motion}


def temperature_profile(n, t_start, t_end, ramp="linear", time_constant=0.3) -> np.ndarray:
    """Monotone temperature samples hitting ``t_start`` and ``t_end`` exactly."""
    s = np.linspace(0.0, 1.0, n)
    if ramp == "linear":
        shape = s
    elif ramp == "saturating":
        shape = (1.0 - np.exp(-s / time_constant)) / (1.0 - np.exp(-1.0 / time_constant))
    else:
        raise ValueError(f"unknown ramp shape {ramp!r}")
    t = t_start + (t_end - t_start) * shape
    t[0], t[-1] = t_start, t_end
    return t


def first_order_lag(x, dt, tau) -> np.ndarray:
    """Discrete first-order low-pass filter started at ``x[0]``."""
    alpha = dt / (tau + dt)
    y = np.empty_like(x)
    y[0] = x[0]
    for i in range(1, len(x)):
        y[i] = y[i - 1] + alpha * (x[i] - y[i - 1])
    return y


def generate(spec: ScenarioSpec):
    """Return ``(dataset, ground_truth_model)`` for ``spec``."""
    C_true = np.asarray(spec.C_true, dtype=float)
    o_true = np.asarray(spec.o_true, dtype=float)
    Ct_true = np.asarray(spec.Ct_true, dtype=float).reshape(6, 1)
    if np.linalg.cond(C_true) > 1.0 / np.finfo(float).eps:
        raise np.linalg.LinAlgError("C_true is singular")

    rng = np.random.default_rng(spec.seed)
    u, arms = _MOTIONS[spec.kind](spec, rng)
    force = spec.mass * spec.gravity * u
    wrench = np.hstack([force, np.cross(arms, force)])

    time = spec.sample_period * np.arange(spec.n)
    temp = temperature_profile(spec.n, *spec.temp_profile, spec.ramp, spec.ramp_time_constant)
    t_drift = temp
    if spec.hysteresis_gain > 0:
        lagged = first_order_lag(temp, spec.sample_period, spec.hysteresis_tau)
        t_drift = temp + spec.hysteresis_gain * (lagged - temp)

    noise = rng.standard_normal((spec.n, 6)) * np.broadcast_to(np.asarray(spec.noise_sigma, float), (6,))
    raw = np.linalg.solve(C_true, (wrench - t_drift[:, None] * Ct_true.T).T).T + o_true + noise

    name = spec.name or spec.kind
    meta = {
        "kind": spec.kind,
        "n": spec.n,
        "mass": spec.mass,
        "temp_start": float(spec.temp_profile[0]),
        "temp_end": float(spec.temp_profile[1]),
        "ramp": spec.ramp,
        "seed": spec.seed,
    }
    dataset = Dataset(time, raw, temp, wrench, kind=spec.kind, name=name, meta=meta)
    truth = CalibrationModel(
        C_true, o_true, Ct_true, (TEMPERATURE,), metadata={"estimation_type": "ground truth", "source": name}
    )
    return dataset, truth


def combine(datasets, name=None) -> Dataset:
    """Concatenate datasets in order, shifting time stamps so they stay monotone."""
    datasets = list(datasets)
    if not datasets:
        raise ValueError("need at least one dataset to combine")
    if len(datasets) == 1:
        d = datasets[0]
        return Dataset(d.time, d.raw, d.temperature, d.reference, kind="combined",
                       name=name or d.name, extras=d.extras,
                       meta={**d.meta, "sources": [[d.name, d.kind, len(d)]]})
    times, offset = [], 0.0
    for d in datasets:
        t = d.time - d.time[0] + offset
        times.append(t)
        step = float(np.median(np.diff(d.time))) if len(d) > 1 else 1.0
        offset = t[-1] + (step if step > 0 else 1.0)
    common = set.intersection(*(set(d.extras) for d in datasets))
    extras = {k: np.concatenate([d.extras[k] for d in datasets]) for k in sorted(common)}
    return Dataset(
        time=np.concatenate(times),
        raw=np.vstack([d.raw for d in datasets]),
        temperature=np.concatenate([d.temperature for d in datasets]),
        reference=np.vstack([d.reference for d in datasets]),
        kind="combined",
        name=name or "+".join(d.name for d in datasets),
        extras=extras,
        meta={"sources": [[d.name, d.kind, len(d)] for d in datasets]},
    )


@dataclass(frozen=True, eq=False)
class SensorParams:
    """A synthetic sensor: workbench matrix plus its in-situ ground truth."""

    C_w: np.ndarray
    C_true: np.ndarray
    o_true: np.ndarray
    Ct_true: np.ndarray


def make_sensor(seed=0, mount_deviation=0.002, offset_scale=0.01,
                drift=(0.1, 0.05, 1.0, 0.002, 0.002, 0.001), tare_temperature=30.0) -> SensorParams:
    """Draw a plausible sensor.

    Raw counts are of order one at full load: the workbench matrix has
    gains of 400 N and 40 N*m per count with 5 % cross-coupling. Mounting
    perturbs it by ``mount_deviation`` (relative, per entry). ``drift`` is
    the temperature coefficient per axis, in N/degC and N*m/degC; the
    default concentrates drift on ``fz``. The raw offset is tared at
    ``tare_temperature``: a zero load read at that temperature gives raw
    counts of order ``offset_scale``.
    """
    rng = np.random.default_rng(seed)
    gains = np.diag([400.0, 400.0, 400.0, 40.0, 40.0, 40.0])
    C_w = gains @ (np.eye(6) + 0.05 * rng.standard_normal((6, 6)))
    C_true = C_w @ (np.eye(6) + mount_deviation * rng.standard_normal((6, 6)))
    Ct_true = np.asarray(drift, dtype=float).reshape(6, 1)
    o_true = offset_scale * rng.standard_normal(6) + np.linalg.solve(C_true, Ct_true[:, 0] * tare_temperature)
    return SensorParams(C_w=C_w, C_true=C_true, o_true=o_true, Ct_true=Ct_true)


# Start/end temperatures (degC) of the recorded datasets being mimicked.
RECORDED_TEMPERATURES = {
    "grid": (32.0, 41.2),
    "balancing_right": (38.1, 41.6),
    "validation": (39.0, 40.5),
}


def reference_scenario(seed=0, sensor=None, n=1000, n_validation=300, noise_sigma=DEFAULT_NOISE, **spec_kw):
    """Grid, right-balancing and validation datasets from one sensor.

    The validation set concatenates one grid, one balancing and one random
    segment that together span the validation temperature range.

    Returns
    -------
    dict
        Keys ``grid``, ``balancing``, ``combined``, ``validation``,
        ``truth`` and ``sensor``.
    """
    sensor = sensor or make_sensor()
    common = dict(C_true=sensor.C_true, o_true=sensor.o_true, Ct_true=sensor.Ct_true,
                  noise_sigma=noise_sigma, **spec_kw)
    grid, truth = generate(ScenarioSpec("grid", n, temp_profile=RECORDED_TEMPERATURES["grid"],
                                        seed=seed, name="grid", **common))
    balancing, _ = generate(ScenarioSpec("balancing", n, temp_profile=RECORDED_TEMPERATURES["balancing_right"],
                                         seed=seed + 10_000, name="balancing_right", **common))
    v0, v1 = RECORDED_TEMPERATURES["validation"]
    edges = np.linspace(v0, v1, 4)
    parts = [
        generate(ScenarioSpec(kind, n_validation, temp_profile=(edges[i], edges[i + 1]),
                              seed=seed + 20_000 + i, name=f"validation_{kind}", **common))[0]
        for i, kind in enumerate(KINDS)
    ]
    return {
        "grid": grid,
        "balancing": balancing,
        "combined": combine([grid, balancing], name="combined"),
        "validation": combine(parts, name="validation"),
        "truth": truth,
        "sensor": sensor,
    }
