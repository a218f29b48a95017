"""
Regularized calibration solve
=============================

The calibration matrix is estimated by least squares pulled toward the
workbench matrix. This walk-through checks the vec/Kronecker identity the
closed form is built on, shows that the block (per-axis) solve and the full
Kronecker system agree, and traces how the estimate moves toward the
workbench matrix as lambda grows.
"""

# %%
# The vec trick
# -------------
#
# ``vec(A X B) = (B^T kron A) vec(X)``; with column-major vec this turns the
# matrix regression ``F^T = C R^T`` into an ordinary linear system.

import numpy as np

from ftcalib.solver import RegressionInput, solve_per_axis, solve_vectorized, vec, vec_kron_check

rng = np.random.default_rng(0)
A, X, B = rng.normal(size=(3, 2)), rng.normal(size=(2, 4)), rng.normal(size=(4, 3))
print("identity holds:", vec_kron_check(A, X, B))
print("vec of [[1, 2], [3, 4]]:", vec(np.array([[1, 2], [3, 4]])))

# %%
# A synthetic regression problem
# ------------------------------
#
# Six raw channels plus one temperature column; the workbench matrix is the
# truth plus a perturbation, as after mounting a sensor.

n = 400
R = rng.normal(size=(n, 6))
t = rng.normal(size=(n, 1))
C_true = np.diag([400.0, 400, 400, 40, 40, 40]) @ (np.eye(6) + 0.05 * rng.normal(size=(6, 6)))
Ct_true = np.array([[0.1], [0.05], [1.0], [0.002], [0.002], [0.001]])
F = R @ C_true.T + t @ Ct_true.T + 0.5 * rng.normal(size=(n, 6))
C_w = C_true @ (np.eye(6) + 0.01 * rng.normal(size=(6, 6)))

# %%
# Three routes to the same minimizer
# ----------------------------------

inp = RegressionInput(R, F, t, lam=50.0, C_w=C_w)
block = solve_vectorized(inp)
full = solve_vectorized(inp, materialize=True)
per_axis = solve_per_axis(inp)
for name, sol in (("block", block), ("kronecker", full), ("per-axis", per_axis)):
    diff = np.linalg.norm(sol.C - block.C) / np.linalg.norm(block.C)
    print(f"{name:>9}: method={sol.diagnostics.method:<9} rcond={sol.diagnostics.rcond:.3g} rel diff {diff:.1e}")

# %%
# Sweeping lambda
# ---------------
#
# The distance to the workbench matrix can only shrink as lambda grows; the
# temperature coefficients are left free.

for lam in (0, 1, 10, 100, 1e3, 1e4, 1e5, 1e6, 1e9):
    C, Ct, _ = solve_vectorized(RegressionInput(R, F, t, lam=lam, C_w=C_w))
    print(f"lambda={lam:>8g}  ||C - C_w|| = {np.linalg.norm(C - C_w):9.4f}   Ct_z = {Ct[2, 0]:.4f}")
