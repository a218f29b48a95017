"""In-situ calibration of six-axis force/torque sensors with temperature compensation."""

from .errors import (
    CalibrationError,
    DataError,
    DegenerateGeometryError,
    DimensionError,
    IllConditionedError,
    UndefinedBaselineError,
)
from .model import (
    CalibrationModel,
    CenteringStats,
    Dataset,
    EstimationConfig,
    EstimationType,
    RawSample,
    Wrench,
    predict,
)
from .offset import OffsetEstimate, apply_offset, centralize, fit_sphere, fit_sphere_offset
from .solver import RegressionInput, build_augmented, solve, solve_per_axis, solve_vectorized, vec_kron_check
from .synth import ScenarioSpec, combine, generate, make_sensor, reference_scenario
from .validate import (
    LAMBDA_SCHEDULE,
    AxisMetrics,
    SweepReport,
    best_by_axis,
    best_overall,
    calibrate,
    mse_per_axis,
    mse_reduction_percent,
    residual_wrench,
    run_sweep,
)

__version__ = "0.1.0"
