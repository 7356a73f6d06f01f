"""
Custom exceptions for the clustering pipeline.
"""

from typing import Any, Dict, Optional, Sequence, Tuple


def _rebuild(cls: type, args: Tuple[Any, ...], state: Dict[str, Any]) -> "GraphClusterException":
    exc = cls.__new__(cls)
    exc.args = args
    exc.__dict__.update(state)
    return exc


class GraphClusterException(Exception):
    """Base exception for all pipeline errors."""

    def __init__(self, message: str, module: str = "gatcluster"):
        super().__init__(message)
        self.module = module

    def __reduce__(self):
        # Rebuilt without __init__: subclass signatures differ from self.args.
        return _rebuild, (type(self), self.args, dict(self.__dict__))


class GraphFormatException(GraphClusterException):
    """Raised when a dataset file cannot be parsed or violates graph invariants."""

    def __init__(self, message: str, path: Optional[str] = None,
                 line_number: Optional[int] = None):
        location = ""
        if path is not None:
            location = f"{path}:{line_number}: " if line_number is not None else f"{path}: "
        super().__init__(f"{location}{message}", module="graph-io")
        self.path = path
        self.line_number = line_number


class ProximityException(GraphClusterException):
    """Raised when the proximity matrix cannot be built."""

    def __init__(self, message: str):
        super().__init__(message, module="proximity")


class KernelException(GraphClusterException):
    """Raised by numeric kernels on shape errors or non-finite values."""

    def __init__(self, message: str):
        super().__init__(message, module="diff-kernels")


class EmptyNeighborhoodException(GraphClusterException):
    """Raised when attention is requested over an empty neighborhood."""

    def __init__(self, node: int):
        super().__init__(f"Node {node} has an empty neighborhood.", module="gat-autoencoder")
        self.node = node


class ClusteringException(GraphClusterException):
    """Raised by the self-training clustering module."""

    def __init__(self, message: str):
        super().__init__(message, module="self-train")


class NonFiniteLossException(GraphClusterException):
    """Raised when training produces a non-finite loss."""

    def __init__(self, phase: str, iteration: int, values: Sequence[float]):
        rendered = ", ".join(repr(float(v)) for v in values)
        super().__init__(
            f"Non-finite loss during {phase} at iteration {iteration}: [{rendered}]",
            module="trainer",
        )
        self.phase = phase
        self.iteration = iteration
        self.values = list(values)


class CheckpointException(GraphClusterException):
    """Raised when a checkpoint file is malformed or truncated."""

    def __init__(self, path: str, reason: str):
        super().__init__(f"Invalid checkpoint '{path}': {reason}", module="trainer")
        self.path = path
        self.reason = reason


class MetricsException(GraphClusterException):
    """Raised when predictions and ground truth cannot be compared."""

    def __init__(self, message: str):
        super().__init__(message, module="metrics")


class ConfigurationException(GraphClusterException):
    """Raised when there's an issue with configuration."""

    def __init__(self, message: str):
        super().__init__(message, module="config")
