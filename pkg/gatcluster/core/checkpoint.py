"""
Checkpoint files: one JSON header line followed by the raw little-endian
float64 data of every array named in the header, in header order.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ..models.training_models import ClusterState
from .exceptions import CheckpointException
from .params import ParamStore

logger = logging.getLogger(__name__)

CHECKPOINT_FORMAT = "gatcluster-checkpoint"
CHECKPOINT_VERSION = 1
_DTYPE = np.dtype("<f8")


class Checkpoint(BaseModel):
    """Everything needed to resume a run."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    params: ParamStore = Field(..., description="Encoder parameters, including the dropout RNG state")
    state: Optional[ClusterState] = Field(None, description="Cluster centers and target distribution")
    optimizer_step: int = Field(0, ge=0, description="Optimizer update count")
    optimizer_arrays: Dict[str, np.ndarray] = Field(default_factory=dict, description="Optimizer moments")
    extra: Dict[str, Any] = Field(default_factory=dict, description="Trainer progress and history")

    @property
    def seed(self) -> int:
        return self.params.seed


def save_checkpoint(params: ParamStore, state: Optional[ClusterState], path: Union[str, Path],
                    optimizer: Any = None, extra: Optional[Dict[str, Any]] = None) -> Path:
    """
    Write parameters, cluster state and optional optimizer state to `path`.

    `extra` must be JSON-serializable; it is stored in the header unchanged.
    """
    arrays: Dict[str, np.ndarray] = {name: params[name].data for name in params.NAMES}
    optimizer_header = None
    if optimizer is not None:
        optimizer_arrays = optimizer.state_arrays()
        optimizer_header = {"step": int(optimizer.step_count), "arrays": list(optimizer_arrays)}
        arrays.update(optimizer_arrays)

    cluster_header = None
    if state is not None:
        cluster_header = {"k": state.k, "last_p_update": state.last_p_update, "has_P": state.P is not None}
        arrays["mu"] = state.mu
        if state.P is not None:
            arrays["P"] = state.P

    header = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "seed": params.seed,
        "dims": {"in": params.in_dim, "hidden": params.hidden_dim, "embed": params.embed_dim},
        "rng": params.rng.bit_generator.state,
        "arrays": [[name, list(array.shape)] for name, array in arrays.items()],
        "optimizer": optimizer_header,
        "cluster": cluster_header,
        "extra": extra or {},
    }

    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "wb") as f:
        f.write(json.dumps(header, sort_keys=True).encode("utf-8"))
        f.write(b"\n")
        for array in arrays.values():
            f.write(np.ascontiguousarray(array, dtype=_DTYPE).tobytes())
    logger.debug("Saved checkpoint %s (%d arrays)", target, len(arrays))
    return target


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    """
    Read a checkpoint written by save_checkpoint.

    Raises:
        CheckpointException: If the file is missing, truncated or malformed.
    """
    source = Path(path)
    try:
        raw = source.read_bytes()
    except OSError as e:
        raise CheckpointException(str(source), f"cannot read file: {e}")

    newline = raw.find(b"\n")
    if newline < 0:
        raise CheckpointException(str(source), "missing header line")
    try:
        header = json.loads(raw[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise CheckpointException(str(source), f"malformed header: {e}")
    if not isinstance(header, dict) or header.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointException(str(source), "not a checkpoint file")
    if header.get("version") != CHECKPOINT_VERSION:
        raise CheckpointException(str(source), f"unsupported version {header.get('version')!r}")

    try:
        layout: List[List[Any]] = header["arrays"]
        sizes = [int(np.prod(shape, dtype=np.int64)) for _, shape in layout]
        dims = header["dims"]
    except (KeyError, TypeError, ValueError) as e:
        raise CheckpointException(str(source), f"incomplete header: {e}")

    payload = raw[newline + 1:]
    expected = sum(sizes) * _DTYPE.itemsize
    if len(payload) != expected:
        raise CheckpointException(
            str(source), f"expected {expected} data bytes, found {len(payload)} (truncated?)"
        )

    arrays: Dict[str, np.ndarray] = {}
    offset = 0
    for (name, shape), size in zip(layout, sizes):
        chunk = payload[offset:offset + size * _DTYPE.itemsize]
        arrays[name] = np.frombuffer(chunk, dtype=_DTYPE).astype(np.float64).reshape(shape)
        offset += size * _DTYPE.itemsize

    params = ParamStore(dims["in"], dims["hidden"], dims["embed"], seed=header["seed"], initialize=False)
    for name in params.NAMES:
        if name not in arrays or arrays[name].shape != params[name].shape:
            raise CheckpointException(str(source), f"parameter '{name}' missing or misshaped")
        params[name].data[...] = arrays[name]
    params.rng.bit_generator.state = header["rng"]

    state = None
    cluster = header.get("cluster")
    if cluster is not None:
        state = ClusterState(k=cluster["k"], mu=arrays["mu"].copy(),
                             P=arrays["P"].copy() if cluster.get("has_P") else None,
                             last_p_update=cluster["last_p_update"])

    optimizer = header.get("optimizer")
    optimizer_arrays = {}
    optimizer_step = 0
    if optimizer is not None:
        optimizer_step = int(optimizer["step"])
        optimizer_arrays = {name: arrays[name].copy() for name in optimizer["arrays"]}

    return Checkpoint(params=params, state=state, optimizer_step=optimizer_step,
                      optimizer_arrays=optimizer_arrays, extra=header.get("extra") or {})
