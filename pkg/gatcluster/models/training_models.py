"""
Data models for training configuration, run records, cluster state and metrics.
"""

from typing import Any, Dict, List, Literal, Optional, Tuple

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, field_validator, model_validator

from .graph_models import NormalizationMode


class TrainConfig(BaseModel):
    """Hyper-parameters for pretraining and joint embedding/clustering."""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "gamma": 10.0,
                "t_order": 2,
                "update_interval": 5,
                "pretrain_epochs": 200,
                "joint_iters": 200,
                "embed_dim": 16,
            }
        },
    )

    gamma: float = Field(10.0, ge=0.0, description="Clustering coefficient in L = L_r + gamma * L_c")
    t_order: int = Field(2, ge=1, description="Proximity order t")
    update_interval: int = Field(5, ge=1, description="Target distribution update interval T")
    pretrain_epochs: int = Field(200, ge=0, description="Full-graph reconstruction steps before clustering")
    joint_iters: int = Field(200, ge=1, description="Joint clustering iterations")
    lr_pretrain: float = Field(0.005, gt=0.0, description="Learning rate while pretraining")
    lr_joint: float = Field(0.0001, gt=0.0, description="Learning rate during joint training")
    seed: int = Field(0, ge=0, description="Seed for initialization, k-means and dropout")
    hidden_dim: int = Field(256, ge=1, description="Width of the hidden attention layer")
    embed_dim: int = Field(16, ge=1, description="Width of the embedding layer")
    k: Optional[int] = Field(None, ge=2, description="Cluster count; taken from labels when unset")
    optimizer: Literal["adam", "sgd"] = Field("adam", description="Parameter update rule")
    adam_betas: Tuple[float, float] = Field((0.9, 0.999), description="Adam moment decay rates")
    adam_eps: float = Field(1e-8, gt=0.0, description="Adam denominator epsilon")
    embedding_activation: Literal["identity", "leaky_relu"] = Field(
        "identity", description="Nonlinearity applied to the embedding layer"
    )
    shared_attention: bool = Field(
        False, description="Reuse the attribute-level attention of layer one in layer two"
    )
    dropout: float = Field(0.0, ge=0.0, lt=1.0, description="Dropout rate on layer inputs")
    weight_decay: float = Field(0.0, ge=0.0, description="L2 penalty added to weight gradients")
    normalization: Optional[NormalizationMode] = Field(
        None, description="Overrides the manifest's attribute normalization when set"
    )
    sampled_loss: bool = Field(False, description="Subsample negative pairs in the reconstruction loss")
    sample_threshold: int = Field(10000, ge=1, description="Node count above which sampling applies")
    kmeans_restarts: int = Field(20, ge=1, description="k-means restarts")
    kmeans_max_iter: int = Field(300, ge=1, description="Maximum Lloyd iterations per restart")
    kmeans_tol: float = Field(1e-6, ge=0.0, description="k-means convergence tolerance")
    eval_interval: int = Field(1, ge=0, description="Evaluate metrics every N joint iterations (0 = never)")
    snapshot_interval: int = Field(0, ge=0, description="Store embedding snapshots every N iterations (0 = off)")
    log_interval: int = Field(10, ge=1, description="Log progress every N steps")

    @field_validator("adam_betas")
    @classmethod
    def _check_betas(cls, value: Tuple[float, float]) -> Tuple[float, float]:
        if not all(0.0 <= beta < 1.0 for beta in value):
            raise ValueError("adam_betas must lie in [0, 1)")
        return value


class MetricsReport(BaseModel):
    """External clustering quality of one partition against ground truth."""

    acc: float = Field(..., ge=0.0, le=1.0, description="Accuracy under the best one-to-one mapping")
    nmi: float = Field(..., ge=0.0, le=1.0, description="Normalized mutual information")
    fscore: float = Field(..., ge=0.0, le=1.0, description="F-score after the accuracy mapping")
    ari: float = Field(..., ge=-1.0, le=1.0, description="Adjusted Rand index")
    mapping: Dict[int, int] = Field(default_factory=dict, description="Cluster id -> class id")
    nmi_normalization: str = Field("arithmetic", description="Entropy mean used by NMI")
    fscore_variant: str = Field("macro-f1-after-acc-mapping", description="F-score definition")

    def as_row(self) -> Dict[str, float]:
        return {"ACC": self.acc, "NMI": self.nmi, "F-score": self.fscore, "ARI": self.ari}


class IterationRecord(BaseModel):
    """Losses (and optionally metrics) recorded at one joint iteration."""

    iteration: int = Field(..., ge=0)
    reconstruction_loss: float = Field(..., description="L_r")
    clustering_loss: float = Field(..., description="L_c")
    total_loss: float = Field(..., description="L = L_r + gamma * L_c")
    target_updated: bool = Field(False, description="Whether P was recomputed at this iteration")
    metrics: Optional[MetricsReport] = Field(None, description="Metrics of the hard labels of Q")


class RunRecord(BaseModel):
    """Everything needed to inspect and reproduce one training run."""

    config: TrainConfig = Field(..., description="Config echo")
    seed: int = Field(..., description="Seed of the run")
    dataset: Dict[str, Any] = Field(default_factory=dict, description="Dataset and preprocessing metadata")
    pretrain_losses: List[float] = Field(default_factory=list, description="L_r per pretraining epoch")
    iterations: List[IterationRecord] = Field(default_factory=list, description="Joint iterations")
    pretrain_metrics: Optional[MetricsReport] = Field(
        None, description="Two-step baseline: k-means on the pretrained embedding"
    )
    final_metrics: Optional[MetricsReport] = Field(None, description="Metrics of the final labels")
    labels: List[int] = Field(default_factory=list, description="Final cluster id per node")
    wall_time_seconds: float = Field(0.0, ge=0.0, description="Wall time of the run")

    @property
    def reconstruction_losses(self) -> List[float]:
        return [record.reconstruction_loss for record in self.iterations]

    @property
    def clustering_losses(self) -> List[float]:
        return [record.clustering_loss for record in self.iterations]

    @property
    def total_losses(self) -> List[float]:
        return [record.total_loss for record in self.iterations]

    @property
    def target_update_iterations(self) -> List[int]:
        return [record.iteration for record in self.iterations if record.target_updated]


class DatasetProfile(BaseModel):
    """Shape summary of an attributed graph dataset."""

    name: str = Field(..., description="Dataset name")
    nodes: int = Field(..., ge=0)
    features: int = Field(..., ge=0)
    clusters: Optional[int] = Field(None, description="Number of ground-truth classes")
    links: int = Field(..., ge=0, description="Undirected edges")


class EncoderOutput(BaseModel):
    """Forward state of the two-layer attention encoder."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    hidden: np.ndarray = Field(..., description="First-layer output, shape (n, hidden_dim)")
    embedding: np.ndarray = Field(..., description="Node embedding Z, shape (n, embed_dim)")
    alpha0: sp.csr_matrix = Field(..., description="Attention of the first layer over the M-support")
    alpha1: sp.csr_matrix = Field(..., description="Attention of the second layer over the M-support")

    _cache: Dict[str, Any] = PrivateAttr(default_factory=dict)

    @property
    def Z(self) -> np.ndarray:
        return self.embedding


class ClusterState(BaseModel):
    """Cluster centers, soft assignment and target distribution of the self-training loop."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    k: int = Field(..., ge=1, description="Cluster count")
    mu: np.ndarray = Field(..., description="Cluster centers, shape (k, embed_dim); updated in place")
    Q: Optional[np.ndarray] = Field(None, description="Soft assignment, shape (n, k)")
    P: Optional[np.ndarray] = Field(None, description="Target distribution, shape (n, k)")
    last_p_update: int = Field(-1, description="Iteration of the last target update")

    @model_validator(mode="after")
    def _check_shapes(self) -> "ClusterState":
        if self.mu.ndim != 2 or self.mu.shape[0] != self.k:
            raise ValueError(f"mu must have {self.k} rows, got shape {self.mu.shape}")
        if not np.all(np.isfinite(self.mu)):
            raise ValueError("mu contains non-finite values")
        return self
