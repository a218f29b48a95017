"""
Sphere offset from gravity
==========================

A load hanging from the sensor produces forces of constant magnitude, so
mapped force readings lie on a sphere whose center is the force offset.
This demo fits that sphere, then adds a temperature drift and compares the
plain fit with the drift-aware one.
"""

# %%
# Points on a sphere
# ------------------

import numpy as np

from ftcalib.offset import fit_sphere, fit_sphere_offset
from ftcalib.synth import GRAVITY, ScenarioSpec, generate, make_sensor

rng = np.random.default_rng(3)
radius = 33 * GRAVITY
c0 = np.array([12.0, -7.5, 30.0])
u = rng.normal(size=(200, 3))
pts = c0 + radius * u / np.linalg.norm(u, axis=1, keepdims=True)

center, rho, _ = fit_sphere(pts)
print("center error:", np.abs(center - c0).max(), " radius error:", abs(rho - radius))

# %%
# Noise
# -----
#
# With isotropic noise the center error shrinks like sigma / sqrt(n).

sigma = 0.1
for n in (50, 200, 800):
    errs = []
    for seed in range(100):
        r = np.random.default_rng(seed)
        u = r.normal(size=(n, 3))
        noisy = c0 + radius * u / np.linalg.norm(u, axis=1, keepdims=True) + sigma * r.normal(size=(n, 3))
        errs.append(np.linalg.norm(fit_sphere(noisy)[0] - c0))
    print(f"n={n:4d}  mean center error {np.mean(errs):.4f}  (3 sigma/sqrt(n) = {3 * sigma / np.sqrt(n):.4f})")

# %%
# A drifting sensor
# -----------------
#
# On a warming sensor the sphere center moves with temperature. The plain
# fit averages the drift into the offset; the drift-aware fit separates it.

sensor = make_sensor(0)
grid, truth = generate(ScenarioSpec("grid", 1000, sensor.C_true, sensor.o_true, sensor.Ct_true))
plain = fit_sphere_offset(grid, sensor.C_true)
aware = fit_sphere_offset(grid, sensor.C_true, temperature_drift=True)
print("plain fit      offset error:", np.linalg.norm(plain.o_r - truth.o))
print("drift-aware    offset error:", np.linalg.norm(aware.o_r - truth.o))
print("fitted center drift (N/degC):", np.round(aware.drift, 4), " truth:", -truth.Ct[:3, 0])
