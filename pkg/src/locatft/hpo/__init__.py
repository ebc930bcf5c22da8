from .objective import DIVERGENCE_PENALTY, TftObjective, score
from .optimize import OptimizeResult, TrialRecord, best_trial, optimize, propose, read_log, write_log
from .space import SearchSpace, decode, encode
from .surrogate import ForestSurrogate, expected_improvement

__all__ = [
    "DIVERGENCE_PENALTY",
    "ForestSurrogate",
    "OptimizeResult",
    "SearchSpace",
    "TftObjective",
    "TrialRecord",
    "best_trial",
    "decode",
    "encode",
    "expected_improvement",
    "optimize",
    "propose",
    "read_log",
    "score",
    "write_log",
]
