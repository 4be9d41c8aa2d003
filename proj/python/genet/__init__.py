"""Hypergraph pre-training on side information for recommendation."""

from ._genet import (
    EdgeTag,
    EpochLoss,
    EvalMode,
    FeedbackData,
    FinetuneConfig,
    FinetuneResult,
    GenetError,
    Hypergraph,
    LossForm,
    MetricReport,
    NodeKind,
    ParamStore,
    PlantedData,
    PretrainConfig,
    PretrainResult,
    SplitSpec,
    Task,
    TestInstance,
    compute_metrics,
    encode_edges,
    encode_nodes,
    evaluate_split,
    gen_feedback,
    gen_planted,
    kmeans,
    leave_one_out_split,
    run_finetune,
    run_pretraining,
    updated_node_embeddings,
)

__all__ = [
    "EdgeTag",
    "EpochLoss",
    "EvalMode",
    "FeedbackData",
    "FinetuneConfig",
    "FinetuneResult",
    "GenetError",
    "Hypergraph",
    "LossForm",
    "MetricReport",
    "NodeKind",
    "ParamStore",
    "PlantedData",
    "PretrainConfig",
    "PretrainResult",
    "SplitSpec",
    "Task",
    "TestInstance",
    "compute_metrics",
    "encode_edges",
    "encode_nodes",
    "evaluate_split",
    "gen_feedback",
    "gen_planted",
    "kmeans",
    "leave_one_out_split",
    "run_finetune",
    "run_pretraining",
    "updated_node_embeddings",
]
