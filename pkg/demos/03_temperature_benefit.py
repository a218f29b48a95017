"""
What temperature buys
=====================

Calibrate a warming sensor with and without a temperature term and compare
per-axis validation errors. The synthetic sensor drifts mostly along z.
"""

# %%
# Data
# ----
#
# A grid dataset warming from 32 to 41.2 degC, a balancing dataset from 38.1
# to 41.6 degC, and a mixed validation set from 39 to 40.5 degC.

from ftcalib.model import AXES, EstimationConfig
from ftcalib.synth import make_sensor, reference_scenario
from ftcalib.validate import calibrate, mse_per_axis, mse_reduction_percent

sc = reference_scenario(seed=0, sensor=make_sensor(0))
C_w = sc["sensor"].C_w
for key in ("grid", "balancing", "validation"):
    d = sc[key]
    print(f"{key:>10}: n={len(d)}  {d.temperature[0]:.1f} -> {d.temperature[-1]:.1f} degC")

# %%
# Four estimation types
# ---------------------

results = {}
for data_name, parts in (("grid", [sc["grid"]]), ("combined", [sc["grid"], sc["balancing"]])):
    for etype in ("SnT", "SwT", "CnT", "CwT"):
        model = calibrate(parts, EstimationConfig(etype, 0.0, C_w)).model
        results[data_name, etype] = mse_per_axis(model, sc["validation"]).mse

print(f"{'':14}" + "".join(f"{a:>10}" for a in AXES))
for (data_name, etype), mse in results.items():
    print(f"{data_name:>8} {etype:<5}" + "".join(f"{v:10.4f}" for v in mse))

# %%
# Error reduction from the temperature term
# -----------------------------------------

for data_name in ("grid", "combined"):
    pct = mse_reduction_percent(results[data_name, "SnT"], results[data_name, "SwT"])
    print(f"{data_name:>8} SwT vs SnT MSE_%: " + " ".join(f"{a}={p:+.1f}" for a, p in zip(AXES, pct)))
