"""Offset handling: centralized mean removal and sphere-based raw offsets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateGeometryError, DimensionError
from .model import TEMPERATURE, CenteringStats, Dataset

COVERAGE_RATIO_MIN = 1e-6


@dataclass(frozen=True)
class OffsetEstimate:
    """Raw-space offset ``o_r`` plus fit details.

    ``center`` is the fitted force-space sphere center and ``drift`` the
    per-degree center motion when the fit models temperature (else ``None``).
    """

    o_r: np.ndarray
    method: str
    source_dataset: str = ""
    sphere_radius: float = None
    fit_rms: float = 0.0
    center: np.ndarray = None
    drift: np.ndarray = None

    def __post_init__(self):
        o_r = np.asarray(self.o_r, dtype=float)
        if o_r.shape != (6,) or not np.all(np.isfinite(o_r)):
            raise DimensionError("o_r must be a finite 6-vector")
        if self.sphere_radius is not None and not self.sphere_radius > 0:
            raise DegenerateGeometryError(f"non-positive sphere radius {self.sphere_radius}")
        object.__setattr__(self, "o_r", o_r)


def centralize(dataset: Dataset, extra_names=(TEMPERATURE,)):
    """Subtract column means from raw, reference and extra-variable columns.

    Returns
    -------
    R_c, F_c, X_c : ndarray
        Centered ``(n, 6)``, ``(n, 6)`` and ``(n, m)`` matrices.
    stats : CenteringStats
        The subtracted means.
    """
    X = dataset.extra_matrix(extra_names)
    mu_r = dataset.raw.mean(axis=0)
    mu_f = dataset.reference.mean(axis=0)
    mu_x = X.mean(axis=0)
    stats = CenteringStats(mu_r=mu_r, mu_f=mu_f, mu_extras=mu_x)
    return dataset.raw - mu_r, dataset.reference - mu_f, X - mu_x, stats


def apply_offset(dataset: Dataset, est: OffsetEstimate, extra_names=(TEMPERATURE,)):
    """Subtract the raw offset; reference wrenches and extras pass through."""
    return dataset.raw - est.o_r, dataset.reference.copy(), dataset.extra_matrix(extra_names)


def _check_coverage(points):
    cov = np.cov(points, rowvar=False) if len(points) > 1 else np.zeros((3, 3))
    eig = np.linalg.eigvalsh(cov)
    if eig[-1] <= 0 or eig[0] <= COVERAGE_RATIO_MIN * eig[-1]:
        raise DegenerateGeometryError(
            f"force points do not cover a sphere patch (covariance eigenvalues {eig})"
        )


def fit_sphere(points, temperature=None):
    """Algebraic (Kasa) sphere fit, optionally with a center drifting linearly in temperature.

    Solves ``|p|^2 = 2 c.p + (rho^2 - |c|^2)`` in the least-squares sense.
    When ``temperature`` is given the center is ``c + k t`` and the lifted
    linear system ``|p|^2 = 2 c.p + 2 t k.p + a t + b t^2 + e`` is solved
    instead; the radius is then the RMS distance of the drift-corrected
    points from ``c``.

    Returns ``(center, radius, drift)``; ``drift`` is ``None`` without
    temperature.
    """
    p = np.asarray(points, dtype=float)
    sq = np.sum(p**2, axis=1)
    ones = np.ones(len(p))
    if temperature is None:
        A = np.column_stack([2 * p, ones])
        coef, *_ = np.linalg.lstsq(A, sq, rcond=None)
        c, drift = coef[:3], None
        rho2 = coef[3] + c @ c
    else:
        t = np.asarray(temperature, dtype=float)
        A = np.column_stack([2 * p, 2 * t[:, None] * p, t, t**2, ones])
        # equilibrate columns; temperatures and counts differ by orders of magnitude
        scale = np.linalg.norm(A, axis=0)
        scale[scale == 0] = 1.0
        coef, *_ = np.linalg.lstsq(A / scale, sq, rcond=None)
        coef = coef / scale
        c, drift = coef[:3], coef[3:6]
        # the relaxation leaves the constant term unconstrained; take the
        # radius from the drift-corrected points instead
        rho2 = np.mean(np.sum((p - c - t[:, None] * drift) ** 2, axis=1))
    if not rho2 > 0:
        raise DegenerateGeometryError(f"fitted squared radius is not positive ({rho2:.3g})")
    return c, float(np.sqrt(rho2)), drift


def fit_sphere_offset(dataset: Dataset, C_w, temperature_drift=False) -> OffsetEstimate:
    """Estimate the raw offset from gravity-loaded motion.

    Raw samples are mapped through the workbench matrix; the force part of
    the mapped points is fit to a sphere whose center is the force offset.
    The torque offset is the mean torque residual of the mapped samples
    against the reference wrenches. With ``temperature_drift`` both the
    sphere center and the torque residual are allowed to move linearly with
    temperature and the zero-temperature intercepts are used, which keeps
    the offset consistent with a model carrying a temperature term.
    """
    C_w = np.asarray(C_w, dtype=float)
    if C_w.shape != (6, 6):
        raise DimensionError("C_w must be 6x6")
    if np.linalg.cond(C_w) > 1.0 / np.finfo(float).eps:
        raise np.linalg.LinAlgError("workbench matrix is singular")
    mapped = dataset.raw @ C_w.T
    forces = mapped[:, :3]
    _check_coverage(forces)

    t = dataset.temperature
    use_drift = temperature_drift and np.ptp(t) > 0
    center, radius, drift = fit_sphere(forces, t if use_drift else None)

    torque_resid = mapped[:, 3:] - dataset.reference[:, 3:]
    if use_drift:
        A = np.column_stack([np.ones_like(t), t])
        coef, *_ = np.linalg.lstsq(A, torque_resid, rcond=None)
        torque_offset = coef[0]
        moved = forces - center - t[:, None] * drift
    else:
        torque_offset = torque_resid.mean(axis=0)
        moved = forces - center
    fit_rms = float(np.sqrt(np.mean((np.linalg.norm(moved, axis=1) - radius) ** 2)))

    o_r = np.linalg.solve(C_w, np.concatenate([center, torque_offset]))
    return OffsetEstimate(
        o_r=o_r,
        method="sphere",
        source_dataset=dataset.name,
        sphere_radius=radius,
        fit_rms=fit_rms,
        center=center,
        drift=drift,
    )


def centralized_estimate(stats: CenteringStats, source_dataset="") -> OffsetEstimate:
    """Offset record for the centralized strategy (the raw mean)."""
    return OffsetEstimate(o_r=stats.mu_r, method="centralized", source_dataset=source_dataset)
