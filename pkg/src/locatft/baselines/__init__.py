from .compare import ComparisonResult, OracleForecaster, TrainedForecaster, compare
from .model import (
    CELLS,
    BaselineConfig,
    RecurrentBaseline,
    baseline_forward,
    cell_step,
    forward_batch,
    init_params,
    param_shapes,
    predict_normalized,
)

__all__ = [
    "CELLS",
    "BaselineConfig",
    "ComparisonResult",
    "OracleForecaster",
    "RecurrentBaseline",
    "TrainedForecaster",
    "baseline_forward",
    "cell_step",
    "compare",
    "forward_batch",
    "init_params",
    "param_shapes",
    "predict_normalized",
]
