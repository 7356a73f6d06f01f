"""Shared fixtures: small synthetic graphs and a fast training config."""

import numpy as np
import pytest

from gatcluster.core.graph_io import from_edge_list
from gatcluster.core.proximity import proximity
from gatcluster.models import TrainConfig


def make_random_graph(n: int = 8, m: int = 5, p: float = 0.4, seed: int = 0, classes: int = 2):
    """Erdos-Renyi graph with Gaussian attributes; a ring keeps it connected."""
    rng = np.random.default_rng(seed)
    edges = [(i, (i + 1) % n) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p:
                edges.append((i, j))
    X = rng.normal(size=(n, m))
    labels = np.arange(n) % classes
    return from_edge_list(n, edges, X, labels=labels, name="random")


def make_two_cliques(size: int = 10):
    """Two cliques joined by one edge, with block-indicator attributes."""
    edges = []
    for offset in (0, size):
        for i in range(size):
            for j in range(i + 1, size):
                edges.append((offset + i, offset + j))
    edges.append((size - 1, size))
    X = np.zeros((2 * size, 2))
    X[:size, 0] = 1.0
    X[size:, 1] = 1.0
    labels = [0] * size + [1] * size
    return from_edge_list(2 * size, edges, X, labels=labels, name="two-cliques")


@pytest.fixture
def path_graph():
    return from_edge_list(3, [(0, 1), (1, 2)], np.eye(3), labels=[0, 0, 1], name="path")


@pytest.fixture
def random_graph():
    return make_random_graph()


@pytest.fixture
def two_cliques():
    return make_two_cliques()


@pytest.fixture
def two_cliques_prox(two_cliques):
    return proximity(two_cliques, 2)


@pytest.fixture
def fast_config():
    return TrainConfig(hidden_dim=16, embed_dim=4, pretrain_epochs=30, joint_iters=20,
                       update_interval=5, lr_pretrain=0.01, lr_joint=0.001,
                       kmeans_restarts=5, log_interval=100)
