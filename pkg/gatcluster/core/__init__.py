"""Core graph clustering functionality."""

from .exceptions import (
    CheckpointException,
    ClusteringException,
    ConfigurationException,
    EmptyNeighborhoodException,
    GraphClusterException,
    GraphFormatException,
    KernelException,
    MetricsException,
    NonFiniteLossException,
    ProximityException,
)
from .graph_io import describe_graph, from_edge_list, load_graph, save_graph
from .proximity import proximity, transition_matrix
from .autoencoder import GATAutoencoder, decode, encode, reconstruction_loss
from .self_train import clustering_loss, hard_labels, kmeans, soft_assign, target_distribution
from .metrics import evaluate_clustering
from .trainer import ClusteringTrainer, fit, pretrain, summarize_runs

__all__ = [
    "CheckpointException",
    "ClusteringException",
    "ConfigurationException",
    "EmptyNeighborhoodException",
    "GraphClusterException",
    "GraphFormatException",
    "KernelException",
    "MetricsException",
    "NonFiniteLossException",
    "ProximityException",
    "describe_graph",
    "from_edge_list",
    "load_graph",
    "save_graph",
    "proximity",
    "transition_matrix",
    "GATAutoencoder",
    "decode",
    "encode",
    "reconstruction_loss",
    "clustering_loss",
    "hard_labels",
    "kmeans",
    "soft_assign",
    "target_distribution",
    "evaluate_clustering",
    "ClusteringTrainer",
    "fit",
    "pretrain",
    "summarize_runs",
]
