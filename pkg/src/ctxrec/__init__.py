"""Context-aware top-N recommendation via self-organizing-map clustering.

The package models ratings as a sparse cube (user x context situation x
item), clusters each user's context situations by usage pattern, collapses
the cube into a virtual-user space, and recommends collaboratively inside
virtual-user clusters.  A flat baseline, an evaluation harness, a synthetic
data generator, and a CLI round it out.
"""

from .core import (
    ContextDimension,
    ContextSchema,
    ContextSituation,
    RatingCube,
    RatingRecord,
    default_schema,
    enumerate_situations,
    load_ratings,
    load_schema,
    ratings_csv_text,
    save_schema,
    write_ratings,
)
from .som import (
    SomConfig,
    SomNetwork,
    assign,
    cosine_similarity,
    find_bmu,
    load_som,
    mean_similarity,
    save_som,
    train,
)
from .pipeline import (
    ContextClustering,
    PipelineModel,
    VirtualUserSpace,
    aggregate,
    build_virtual_space,
    cluster_user_contexts,
    cluster_virtual_users,
    fit_pipeline,
    load_pipeline,
    predict_scores,
    rank_items,
    recommend,
    save_pipeline,
    weighted_mean,
)
from .baseline import (
    BaselineModel,
    FlatSpace,
    baseline_recommend,
    fit_baseline,
    flatten_cube,
    load_baseline,
    save_baseline,
)
from .evaluation import (
    EvalConfig,
    EvalReport,
    SplitConfig,
    SweepResult,
    evaluate,
    f1,
    neuron_sweep,
    per_cluster_f1,
    precision_recall,
    split,
)
from .datagen import GenConfig, generate, generate_dataset, scaled_config, write_dataset
from .errors import CtxRecError

__version__ = "0.1.0"

__all__ = [
    "BaselineModel",
    "ContextClustering",
    "ContextDimension",
    "ContextSchema",
    "ContextSituation",
    "CtxRecError",
    "EvalConfig",
    "EvalReport",
    "FlatSpace",
    "GenConfig",
    "PipelineModel",
    "RatingCube",
    "RatingRecord",
    "SomConfig",
    "SomNetwork",
    "SplitConfig",
    "SweepResult",
    "VirtualUserSpace",
    "aggregate",
    "assign",
    "baseline_recommend",
    "build_virtual_space",
    "cluster_user_contexts",
    "cluster_virtual_users",
    "cosine_similarity",
    "default_schema",
    "enumerate_situations",
    "evaluate",
    "f1",
    "find_bmu",
    "fit_baseline",
    "fit_pipeline",
    "flatten_cube",
    "generate",
    "generate_dataset",
    "load_baseline",
    "load_pipeline",
    "load_ratings",
    "load_schema",
    "load_som",
    "mean_similarity",
    "neuron_sweep",
    "per_cluster_f1",
    "precision_recall",
    "predict_scores",
    "rank_items",
    "ratings_csv_text",
    "recommend",
    "save_baseline",
    "save_pipeline",
    "save_schema",
    "save_som",
    "scaled_config",
    "split",
    "train",
    "weighted_mean",
    "write_dataset",
    "write_ratings",
]
