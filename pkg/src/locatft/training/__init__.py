from .loss import LossReport, aggregate_loss, pinball_array, pinball_loss, quantile_loss
from .metrics import EvalMetrics, evaluate, evaluate_forecasts
from .reports import forecast_header, write_forecast_dump, write_loss_curve, write_metrics
from .trainer import TrainingDivergence, TrainResult, TrainSchedule, train

__all__ = [
    "EvalMetrics",
    "LossReport",
    "TrainResult",
    "TrainSchedule",
    "TrainingDivergence",
    "aggregate_loss",
    "evaluate",
    "evaluate_forecasts",
    "pinball_array",
    "pinball_loss",
    "quantile_loss",
    "train",
    "forecast_header",
    "write_forecast_dump",
    "write_loss_curve",
    "write_metrics",
]
