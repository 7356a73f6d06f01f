"""Data models for graphs, training and evaluation."""

from .graph_models import DatasetManifest, Graph, NormalizationMode, ProximityMatrix
from .training_models import (
    ClusterState,
    DatasetProfile,
    EncoderOutput,
    IterationRecord,
    MetricsReport,
    RunRecord,
    TrainConfig,
)

__all__ = [
    "DatasetManifest",
    "Graph",
    "NormalizationMode",
    "ProximityMatrix",
    "ClusterState",
    "DatasetProfile",
    "EncoderOutput",
    "IterationRecord",
    "MetricsReport",
    "RunRecord",
    "TrainConfig",
]
