"""
Self-optimizing clustering: k-means center initialization, Student's t soft
assignment Q, sharpened target distribution P, the KL clustering loss and hard
label extraction.
"""

import logging
import warnings
from typing import Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import xlogy
from sklearn.cluster import KMeans
from sklearn.exceptions import ConvergenceWarning

from ..models.training_models import ClusterState
from .exceptions import ClusteringException

logger = logging.getLogger(__name__)


class KMeansResult(BaseModel):
    """Outcome of the one-off k-means run on the pretrained embedding."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    centers: np.ndarray = Field(..., description="Cluster centers, shape (k, d)")
    labels: np.ndarray = Field(..., description="Nearest-center id per point")
    inertia: float = Field(..., ge=0.0, description="Sum of squared distances to the assigned center")
    iterations: int = Field(..., ge=0, description="Lloyd iterations of the best restart")


def kmeans(Z: np.ndarray, k: int, restarts: int = 20, seed: int = 0,
           max_iter: int = 300, tol: float = 1e-6) -> KMeansResult:
    """
    Lloyd's algorithm with greedy k-means++ seeding, best inertia over restarts.

    Empty clusters are relocated to the points farthest from their centers.

    Raises:
        ClusteringException: If there are fewer points than clusters.
    """
    n = Z.shape[0]
    if k < 1:
        raise ClusteringException(f"Cluster count must be positive, got {k}")
    if n < k:
        raise ClusteringException(f"Cannot form {k} clusters from {n} points")

    estimator = KMeans(n_clusters=k, init="k-means++", n_init=restarts,
                       max_iter=max_iter, tol=tol, random_state=seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", ConvergenceWarning)
        estimator.fit(Z)
    for warning in caught:
        if issubclass(warning.category, ConvergenceWarning):
            logger.warning("k-means: %s", warning.message)
        warnings.warn_explicit(warning.message, warning.category, warning.filename, warning.lineno)

    result = KMeansResult(
        centers=np.asarray(estimator.cluster_centers_, dtype=np.float64).copy(),
        labels=np.asarray(estimator.labels_, dtype=np.int64),
        inertia=max(0.0, float(estimator.inertia_)),
        iterations=int(estimator.n_iter_),
    )
    logger.info("k-means: k=%d, restarts=%d, inertia=%.6g", k, restarts, result.inertia)
    return result


def _kernel(Z: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """(1 + ||z_i - mu_u||^2)^-1 from explicit differences."""
    distances = np.empty((Z.shape[0], mu.shape[0]), dtype=np.float64)
    for u in range(mu.shape[0]):
        diff = Z - mu[u]
        distances[:, u] = np.einsum("ij,ij->i", diff, diff)
    return 1.0 / (1.0 + distances)


def soft_assign(Z: np.ndarray, mu: np.ndarray) -> np.ndarray:
    """Student's t soft assignment q_iu of every node to every center."""
    K = _kernel(Z, mu)
    return K / K.sum(axis=1, keepdims=True)


def target_distribution(Q: np.ndarray) -> np.ndarray:
    """
    Sharpen Q into p_iu proportional to q_iu^2 / f_u, with f_u = sum_i q_iu.

    Raises:
        ClusteringException: If a cluster has zero total assignment.
    """
    frequency = Q.sum(axis=0)
    if np.any(frequency <= 0.0):
        empty = int(np.flatnonzero(frequency <= 0.0)[0])
        raise ClusteringException(f"Cluster {empty} has zero soft frequency")
    weight = np.square(Q) / frequency
    return weight / weight.sum(axis=1, keepdims=True)


def _kl(P: np.ndarray, Q: np.ndarray) -> float:
    return float(np.sum(xlogy(P, P) - xlogy(P, Q)))


def clustering_loss(P: np.ndarray, Q: np.ndarray) -> float:
    """KL(P || Q) summed over nodes, with 0 log 0 = 0."""
    value = _kl(P, Q)
    if not np.isfinite(value):
        raise ClusteringException(f"Non-finite clustering loss: {value!r}")
    return value


def clustering_loss_and_grad(Z: np.ndarray, mu: np.ndarray,
                             P: np.ndarray) -> Tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """
    KL(P || Q(Z, mu)) with P held constant. The loss is returned unchecked.

    Returns:
        (loss, Q, dL/dZ, dL/dmu)
    """
    K = _kernel(Z, mu)
    Q = K / K.sum(axis=1, keepdims=True)
    loss = _kl(P, Q)

    W = K * (P - Q)
    dZ = 2.0 * (W.sum(axis=1, keepdims=True) * Z - W @ mu)
    dmu = -2.0 * (W.T @ Z - W.sum(axis=0)[:, None] * mu)
    return loss, Q, dZ, dmu


def hard_labels(Q: np.ndarray) -> np.ndarray:
    """Most likely cluster per node; ties go to the smallest id."""
    return np.argmax(Q, axis=1).astype(np.int64)


def init_cluster_state(Z: np.ndarray, k: int, restarts: int = 20, seed: int = 0,
                       max_iter: int = 300, tol: float = 1e-6) -> Tuple[ClusterState, KMeansResult]:
    """Run k-means once on Z and wrap its centers in a fresh ClusterState."""
    result = kmeans(Z, k, restarts=restarts, seed=seed, max_iter=max_iter, tol=tol)
    state = ClusterState(k=k, mu=result.centers.copy())
    state.Q = soft_assign(Z, state.mu)
    return state, result


__all__ = [
    "KMeansResult",
    "clustering_loss",
    "clustering_loss_and_grad",
    "hard_labels",
    "init_cluster_state",
    "kmeans",
    "soft_assign",
    "target_distribution",
]
