"""
Run artifacts: embeddings and assignment matrices as tab-separated text,
labels one per line, and the run record as JSON.
"""

import json
import logging
from pathlib import Path
from typing import Dict, List, Sequence, Union

import numpy as np

from ..config.manager import ConfigManager
from ..models.training_models import RunRecord
from .exceptions import GraphFormatException
from .graph_io import read_labels

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def write_matrix(matrix: np.ndarray, path: PathLike) -> Path:
    """Header 'rows<TAB>cols', then one tab-separated row per line at full precision."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    rows, cols = matrix.shape
    with open(target, "w", encoding="utf-8") as f:
        f.write(f"{rows}\t{cols}\n")
        for row in matrix:
            f.write("\t".join(repr(float(value)) for value in row))
            f.write("\n")
    return target


def read_matrix(path: PathLike) -> np.ndarray:
    """Inverse of write_matrix."""
    source = Path(path)
    try:
        with open(source, "r", encoding="utf-8") as f:
            lines = f.read().splitlines()
    except OSError as e:
        raise GraphFormatException(f"Cannot read file: {e}", path=str(source)) from e
    if not lines:
        raise GraphFormatException("Missing 'rows<TAB>cols' header", str(source), 1)

    try:
        rows, cols = (int(token) for token in lines[0].split("\t"))
    except ValueError as e:
        raise GraphFormatException(f"Malformed header: {e}", str(source), 1) from e

    matrix = np.zeros((rows, cols), dtype=np.float64)
    body = lines[1:]
    if len(body) != rows:
        raise GraphFormatException(f"Expected {rows} rows, found {len(body)}", path=str(source))
    for index, line in enumerate(body):
        try:
            values = [float(token) for token in line.split("\t")] if cols else []
        except ValueError as e:
            raise GraphFormatException(f"Malformed row: {e}", str(source), index + 2) from e
        if len(values) != cols:
            raise GraphFormatException(f"Row has {len(values)} values, expected {cols}",
                                       str(source), index + 2)
        matrix[index] = values
    return matrix


write_embedding = write_matrix
read_embedding = read_matrix


def write_labels(labels: Sequence[int], path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        for label in labels:
            f.write(f"{int(label)}\n")
    return target


def write_node_ids(node_ids: Sequence[str], path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        for node_id in node_ids:
            f.write(f"{node_id}\n")
    return target


def write_json(data: Dict, path: PathLike) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with open(target, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
        f.write("\n")
    return target


def write_run_record(record: RunRecord, path: PathLike) -> Path:
    return write_json(record.model_dump(mode="json"), path)


def read_run_record(path: PathLike) -> RunRecord:
    with open(path, "r", encoding="utf-8") as f:
        return RunRecord.model_validate(json.load(f))


def write_run_artifacts(trainer, out_dir: PathLike) -> Dict[str, Path]:
    """
    Write everything a finished trainer produced into `out_dir`.

    Files: run.json, config.json, labels.txt, embedding.tsv, q.tsv, p.tsv,
    checkpoint.bin, node_ids.txt (when the graph has external ids) and
    snapshots/embedding_<iteration>.tsv (when snapshots were taken).
    """
    directory = Path(out_dir)
    directory.mkdir(parents=True, exist_ok=True)
    record = trainer.record
    written: Dict[str, Path] = {
        "run": write_run_record(record, directory / "run.json"),
        "config": ConfigManager().save_config(record.config, directory / "config.json"),
        "labels": write_labels(record.labels, directory / "labels.txt"),
        "embedding": write_embedding(trainer.embed().Z, directory / "embedding.tsv"),
        "checkpoint": trainer.save_checkpoint(directory / "checkpoint.bin"),
    }
    if trainer.state is not None:
        if trainer.state.Q is not None:
            written["q"] = write_matrix(trainer.state.Q, directory / "q.tsv")
        if trainer.state.P is not None:
            written["p"] = write_matrix(trainer.state.P, directory / "p.tsv")
    if trainer.graph.node_ids is not None:
        written["node_ids"] = write_node_ids(trainer.graph.node_ids, directory / "node_ids.txt")

    snapshot_paths: List[Path] = []
    for iteration, Z in sorted(trainer.snapshots.items()):
        snapshot_paths.append(write_embedding(Z, directory / "snapshots" / f"embedding_{iteration:05d}.tsv"))
    if snapshot_paths:
        written["snapshots"] = directory / "snapshots"

    for name, path in written.items():
        logger.info("Wrote %s: %s", name, path)
    return written


__all__ = [
    "read_embedding",
    "read_labels",
    "read_matrix",
    "read_run_record",
    "write_embedding",
    "write_json",
    "write_labels",
    "write_matrix",
    "write_node_ids",
    "write_run_artifacts",
    "write_run_record",
]
