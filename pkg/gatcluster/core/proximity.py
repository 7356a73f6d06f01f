"""
Transition matrix and t-order proximity matrix of a graph.
"""

import logging
from pathlib import Path
from typing import Union

import numpy as np
import scipy.sparse as sp

from ..models.graph_models import Graph, ProximityMatrix
from .exceptions import ProximityException

logger = logging.getLogger(__name__)

# Entries of M below this are treated as numerical noise
PROXIMITY_CUTOFF = 1e-12


def transition_matrix(g: Graph) -> sp.csr_matrix:
    """
    Build B with B_ij = 1/d_i for every edge {i, j}.

    Isolated nodes get B_ii = 1 so that every row is stochastic.
    """
    degrees = g.degrees
    isolated = degrees == 0
    if np.any(isolated):
        logger.warning("Patching %d isolated node(s) with a self-loop in B", int(isolated.sum()))

    inverse = np.zeros(g.n, dtype=np.float64)
    inverse[~isolated] = 1.0 / degrees[~isolated]
    B = sp.diags(inverse).dot(g.adjacency) + sp.diags(isolated.astype(np.float64))
    B = sp.csr_matrix(B)
    B.eliminate_zeros()
    B.sort_indices()
    return B


def proximity(g: Graph, t: int = 2) -> ProximityMatrix:
    """
    Build M = (B + B^2 + ... + B^t) / t and its neighborhoods.

    Entries below PROXIMITY_CUTOFF are dropped.

    Raises:
        ProximityException: If t < 1.
    """
    if t < 1:
        raise ProximityException(f"Proximity order must be >= 1, got {t}")

    B = transition_matrix(g)
    power = B
    total = B.copy()
    for _ in range(1, t):
        power = sp.csr_matrix(power.dot(B))
        total = total + power

    M = sp.csr_matrix(total / t)
    M.data[M.data < PROXIMITY_CUTOFF] = 0.0
    M.eliminate_zeros()
    M.sort_indices()

    prox = ProximityMatrix(t=t, matrix=M, transition=B)
    logger.info("Built proximity matrix: t=%d, nnz=%d, self-relevance=%s",
                t, prox.nnz, prox.includes_self)
    return prox


def export_proximity(prox: ProximityMatrix, path: Union[str, Path]) -> Path:
    """Write M as 'i<TAB>j<TAB>value' coordinate triplets."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        for i, j, value in zip(prox.rows, prox.cols, prox.values):
            f.write(f"{i}\t{j}\t{float(value)!r}\n")
    return target
