"""
Sweeping types and lambda
=========================

Run the full 4 x 13 grid of estimation types and regularization weights,
score every cell on the validation set by the mean force-residual norm
and compare with the uncalibrated workbench matrix.
"""

# %%
# One sweep per calibration set
# -----------------------------

from ftcalib.model import AXES
from ftcalib.synth import make_sensor, reference_scenario
from ftcalib.validate import best_by_axis, best_overall, run_sweep

sc = reference_scenario(seed=0, sensor=make_sensor(0))
C_w = sc["sensor"].C_w
grid = run_sweep([sc["grid"]], sc["validation"], C_w, label="grid")
combined = run_sweep([sc["grid"], sc["balancing"]], sc["validation"], C_w, label="combined")
report = grid.merge(combined)
print(report.to_text())

# %%
# Winners
# -------
#
# No single lambda wins every axis.

for b in best_by_axis(report):
    print(f"{b.axis}: {b.dataset} {b.estimation_type} lambda={b.lam:g} mse={b.value:.4g}")
best = best_overall(report)
wb = report.workbench_row.metrics.residual_norm_mean
print(f"\nbest overall: {best.dataset} {best.estimation_type} lambda={best.lam:g} "
      f"{best.metrics.residual_norm_mean:.3f} N vs workbench {wb:.3f} N")

# %%
# The same table as CSV
# ---------------------

print(report.to_csv().splitlines()[0])
print(len(report.rows), "rows,", len(AXES), "axes each")
