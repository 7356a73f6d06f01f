import pickle

import pytest

from gatcluster.core.exceptions import (
    CheckpointException, ClusteringException, ConfigurationException, EmptyNeighborhoodException,
    GraphClusterException, GraphFormatException, KernelException, MetricsException,
    NonFiniteLossException, ProximityException,
)

EXCEPTIONS = [
    GraphClusterException("plain", module="gat-autoencoder"),
    GraphFormatException("bad row", path="g.edges", line_number=12),
    ProximityException("t must be positive"),
    KernelException("shape mismatch"),
    EmptyNeighborhoodException(4),
    ClusteringException("empty cluster"),
    NonFiniteLossException("joint training", 3, [float("nan"), 1.0]),
    CheckpointException("run/checkpoint.bin", "truncated payload"),
    MetricsException("length mismatch"),
    ConfigurationException("k is required"),
]


@pytest.mark.parametrize("exc", EXCEPTIONS, ids=lambda exc: type(exc).__name__)
def test_survives_pickling(exc):
    restored = pickle.loads(pickle.dumps(exc))
    assert type(restored) is type(exc)
    assert str(restored) == str(exc)
    assert restored.module == exc.module
    assert restored.args == exc.args


def test_pickled_attributes():
    restored = pickle.loads(pickle.dumps(NonFiniteLossException("pretraining", 7, [float("inf")])))
    assert (restored.phase, restored.iteration, restored.values) == ("pretraining", 7, [float("inf")])
    assert restored.module == "trainer"

    restored = pickle.loads(pickle.dumps(CheckpointException("a.bin", "not a checkpoint file")))
    assert (restored.path, restored.reason) == ("a.bin", "not a checkpoint file")

    restored = pickle.loads(pickle.dumps(GraphFormatException("bad row", path="g.edges", line_number=2)))
    assert restored.line_number == 2
    assert str(restored) == "g.edges:2: bad row"
