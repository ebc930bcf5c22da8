from .generator import (
    DIRECT_SIGNALS,
    LOCATIONS,
    TARGETS,
    BreakDynamics,
    GeneratorConfig,
    GridError,
    SizeGrid,
    TransientCase,
    build_corpus,
    case_id_for,
    generate_case,
)
from .preprocess import (
    DEFAULT_TARGET,
    NormStats,
    PruneResult,
    correlation_matrix,
    hpo_subsample,
    inject_noise,
    pearson,
    pearson_prune,
    split,
    static_covariates,
    window,
)
from .sample import Batch, TimeSeriesSample, collate
from .storage import load_corpus, read_case, read_manifest, write_case, write_manifest

__all__ = [
    "Batch",
    "BreakDynamics",
    "DEFAULT_TARGET",
    "DIRECT_SIGNALS",
    "GeneratorConfig",
    "GridError",
    "LOCATIONS",
    "NormStats",
    "PruneResult",
    "SizeGrid",
    "TARGETS",
    "TimeSeriesSample",
    "TransientCase",
    "build_corpus",
    "case_id_for",
    "collate",
    "correlation_matrix",
    "generate_case",
    "hpo_subsample",
    "inject_noise",
    "load_corpus",
    "pearson",
    "pearson_prune",
    "read_case",
    "read_manifest",
    "split",
    "static_covariates",
    "window",
    "write_case",
    "write_manifest",
]
