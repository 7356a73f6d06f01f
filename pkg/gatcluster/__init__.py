"""
gatcluster - Attributed graph clustering with a graph attention autoencoder.

This library provides:
- Loading and preprocessing of attributed graphs
- A two-layer graph attention encoder with an inner product decoder
- Self-training clustering on the learned embedding
- Clustering metrics (ACC, NMI, F-score, ARI) and a command-line interface
"""

from .core.trainer import ClusteringTrainer
from .core.graph_io import load_graph
from .core.proximity import proximity
from .core.metrics import evaluate_clustering
from .models.graph_models import DatasetManifest, Graph, ProximityMatrix
from .models.training_models import MetricsReport, RunRecord, TrainConfig

__version__ = "0.1.0"
__all__ = [
    "ClusteringTrainer",
    "load_graph",
    "proximity",
    "evaluate_clustering",
    "DatasetManifest",
    "Graph",
    "ProximityMatrix",
    "MetricsReport",
    "RunRecord",
    "TrainConfig",
]
