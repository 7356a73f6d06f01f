"""
Loading, validation and preprocessing of attributed graphs.
"""

import logging
from pathlib import Path
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from ..config.default_configs import default_normalization, get_dataset_profile_by_name
from ..config.manager import ConfigManager
from ..models.graph_models import DatasetManifest, Graph, NormalizationMode
from ..models.training_models import DatasetProfile
from .exceptions import GraphFormatException

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def normalize_attributes(X: np.ndarray, mode: NormalizationMode) -> np.ndarray:
    """
    Normalize attribute rows.

    Args:
        X: Finite attribute matrix.
        mode: "none" (identity), "row-sum" (divide by L1 norm) or "l2-row" (divide by L2 norm).

    Rows with zero norm pass through unchanged.
    """
    X = np.asarray(X, dtype=np.float64)
    if mode == "none":
        return X.copy()
    if mode == "row-sum":
        norms = np.abs(X).sum(axis=1)
    elif mode == "l2-row":
        norms = np.sqrt(np.square(X).sum(axis=1))
    else:
        raise ValueError(f"Unknown normalization mode: {mode}")

    scale = np.where(norms > 0, norms, 1.0)
    return X / scale[:, None]


def from_edge_list(n: int,
                   edges: Iterable[Tuple[int, int]],
                   X: np.ndarray,
                   labels: Optional[Sequence[int]] = None,
                   node_ids: Optional[List[str]] = None,
                   name: Optional[str] = None,
                   normalization: NormalizationMode = "none",
                   attribute_kind: Optional[str] = None) -> Graph:
    """
    Build a Graph from possibly directed, duplicated pairs.

    Pairs are symmetrized and deduplicated; self-loops are dropped. X is
    normalized with `normalization`.
    """
    pairs = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
    if pairs.size and (pairs.min() < 0 or pairs.max() >= n):
        bad = pairs[(pairs < 0).any(axis=1) | (pairs >= n).any(axis=1)][0]
        raise GraphFormatException(f"Edge ({bad[0]}, {bad[1]}) has an endpoint outside [0, {n})")

    loops = pairs[:, 0] == pairs[:, 1]
    if np.any(loops):
        logger.warning("Dropping %d self-loop(s) from the edge list", int(loops.sum()))
        pairs = pairs[~loops]

    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    keys = np.unique(lo * max(n, 1) + hi)
    undirected = np.stack([keys // max(n, 1), keys % max(n, 1)], axis=1).astype(np.int64)
    if undirected.shape[0] < pairs.shape[0]:
        logger.info("Merged %d directed/duplicate pair(s) into %d undirected edges",
                    pairs.shape[0], undirected.shape[0])

    raw = np.asarray(X, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] != n:
        raise GraphFormatException(f"Attribute matrix must have {n} rows, got shape {raw.shape}")
    if not np.all(np.isfinite(raw)):
        raise GraphFormatException("Attribute matrix contains non-finite values")
    if attribute_kind is None:
        attribute_kind = "binary" if np.all((raw == 0) | (raw == 1)) else "real"

    label_array = None
    if labels is not None:
        label_array = _densify_labels(np.asarray(labels, dtype=np.int64))

    return Graph(
        n=n,
        edges=undirected.reshape(-1, 2),
        X=normalize_attributes(raw, normalization),
        labels=label_array,
        node_ids=node_ids,
        name=name,
        normalization=normalization,
        attribute_kind=attribute_kind,
    )


def load_graph(manifest: DatasetManifest) -> Graph:
    """
    Load an attributed graph from the files named in a manifest.

    Raises:
        GraphFormatException: On malformed lines, out-of-range ids, row-length
            mismatches or non-finite attribute values.
    """
    node_ids: Optional[List[str]] = None
    id_index: Optional[Dict[str, int]] = None
    if manifest.id_file:
        node_ids = [token for _, token in _content_lines(manifest.id_file)]
        id_index = {node_id: i for i, node_id in enumerate(node_ids)}
        if len(id_index) != len(node_ids):
            raise GraphFormatException("Duplicate node ids", path=manifest.id_file)

    X = _read_attributes(manifest.attr_file)
    n = X.shape[0]
    if node_ids is not None and len(node_ids) != n:
        raise GraphFormatException(
            f"{len(node_ids)} ids for {n} attribute rows", path=manifest.id_file
        )

    edges = _read_edges(manifest.edge_file, n, id_index)

    labels = None
    if manifest.label_file:
        labels = _read_labels(manifest.label_file, n)

    normalization = default_normalization(manifest)
    graph = from_edge_list(
        n, edges, X,
        labels=labels,
        node_ids=node_ids,
        name=manifest.name,
        normalization=normalization,
    )

    logger.info(
        "Loaded graph%s: n=%d, m=%d, edges=%d, classes=%s, normalization=%s, attributes=%s",
        f" '{graph.name}'" if graph.name else "", graph.n, graph.num_attributes,
        graph.num_edges, graph.num_classes, normalization, graph.attribute_kind,
    )
    _check_against_profile(graph)
    return graph


def adjacency_row(g: Graph, i: int) -> sp.csr_matrix:
    """
    Get row i of the adjacency matrix as a sparse 1 x n 0/1 row.

    Raises:
        IndexError: If i is outside [0, n).
    """
    if not 0 <= i < g.n:
        raise IndexError(f"Node {i} is outside [0, {g.n})")
    return g.adjacency.getrow(i)


def save_graph(graph: Graph, directory: PathLike, stem: str = "graph") -> DatasetManifest:
    """
    Write a graph as edge/attribute/label/id files plus a manifest.

    Attributes are written with round-trip precision and the manifest uses
    normalization "none", so loading it reproduces the same nodes, edges,
    attributes and labels. Returns the manifest with absolute paths.
    """
    out_dir = Path(directory).resolve()
    out_dir.mkdir(parents=True, exist_ok=True)

    names = {"edge_file": f"{stem}.edges", "attr_file": f"{stem}.attrs"}
    node_names = graph.node_ids or [str(i) for i in range(graph.n)]

    with open(out_dir / names["edge_file"], "w", encoding="utf-8") as f:
        f.write(f"# {graph.num_edges} undirected edges\n")
        for i, j in graph.edges:
            f.write(f"{node_names[i]}\t{node_names[j]}\n")
    with open(out_dir / names["attr_file"], "w", encoding="utf-8") as f:
        for row in graph.X:
            f.write(" ".join(repr(float(value)) for value in row))
            f.write("\n")
    if graph.labels is not None:
        names["label_file"] = f"{stem}.labels"
        with open(out_dir / names["label_file"], "w", encoding="utf-8") as f:
            f.writelines(f"{label}\n" for label in graph.labels)
    if graph.node_ids is not None:
        names["id_file"] = f"{stem}.ids"
        with open(out_dir / names["id_file"], "w", encoding="utf-8") as f:
            f.writelines(f"{node_id}\n" for node_id in graph.node_ids)

    manifest = DatasetManifest(name=graph.name, normalization="none", **names)
    ConfigManager().save_manifest(manifest, out_dir / f"{stem}.manifest.json")
    return manifest.model_copy(update={key: str(out_dir / value) for key, value in names.items()})


def describe_graph(graph: Graph) -> DatasetProfile:
    """Summarize a graph as node, feature, class and link counts."""
    return DatasetProfile(
        name=graph.name or "graph",
        nodes=graph.n,
        features=graph.num_attributes,
        clusters=graph.num_classes,
        links=graph.num_edges,
    )


def _check_against_profile(graph: Graph) -> None:
    profile = get_dataset_profile_by_name(graph.name)
    if profile is None:
        return
    if (graph.n, graph.num_attributes) != (profile.nodes, profile.features):
        logger.warning(
            "Dataset '%s' has shape (%d, %d); the standard profile is (%d, %d)",
            graph.name, graph.n, graph.num_attributes, profile.nodes, profile.features,
        )


def _content_lines(path: PathLike) -> Iterator[Tuple[int, str]]:
    """Yield (line number, stripped line), skipping blanks and '#' comments."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                stripped = line.strip()
                if stripped and not stripped.startswith("#"):
                    yield line_number, stripped
    except OSError as e:
        raise GraphFormatException(f"Cannot read file: {e}", path=str(path)) from e


def _read_attributes(path: PathLike) -> np.ndarray:
    rows: List[np.ndarray] = []
    width: Optional[int] = None
    for line_number, line in _content_lines(path):
        try:
            row = np.array(line.split(), dtype=np.float64)
        except ValueError as e:
            raise GraphFormatException(f"Malformed attribute row: {e}", str(path), line_number) from e
        if width is None:
            width = row.size
        elif row.size != width:
            raise GraphFormatException(
                f"Row has {row.size} values, expected {width}", str(path), line_number
            )
        if not np.all(np.isfinite(row)):
            raise GraphFormatException("Non-finite attribute value", str(path), line_number)
        rows.append(row)

    if not rows:
        return np.zeros((0, 0), dtype=np.float64)
    return np.vstack(rows)


def _read_edges(path: PathLike, n: int,
                id_index: Optional[Dict[str, int]]) -> List[Tuple[int, int]]:
    edges: List[Tuple[int, int]] = []
    for line_number, line in _content_lines(path):
        tokens = line.split()
        if len(tokens) != 2:
            raise GraphFormatException(
                f"Expected 'src<TAB>dst', got {len(tokens)} field(s)", str(path), line_number
            )
        endpoints = []
        for token in tokens:
            if id_index is not None:
                if token not in id_index:
                    raise GraphFormatException(f"Unknown node id '{token}'", str(path), line_number)
                endpoints.append(id_index[token])
                continue
            try:
                node = int(token)
            except ValueError as e:
                raise GraphFormatException(f"Node id '{token}' is not an integer", str(path), line_number) from e
            if not 0 <= node < n:
                raise GraphFormatException(
                    f"Node id {node} is outside [0, {n})", str(path), line_number
                )
            endpoints.append(node)
        edges.append((endpoints[0], endpoints[1]))
    return edges


def read_labels(path: PathLike) -> np.ndarray:
    """Integer ids, one per line; blank lines and '#' comments are skipped."""
    labels: List[int] = []
    for line_number, line in _content_lines(path):
        try:
            labels.append(int(line))
        except ValueError as e:
            raise GraphFormatException(f"Label '{line}' is not an integer", str(path), line_number) from e
    return np.asarray(labels, dtype=np.int64)


def _read_labels(path: PathLike, n: int) -> np.ndarray:
    labels = read_labels(path)
    if labels.size != n:
        raise GraphFormatException(f"{labels.size} labels for {n} nodes", path=str(path))
    return labels


def _densify_labels(labels: np.ndarray) -> np.ndarray:
    """Map class ids onto 0..k-1, preserving order."""
    classes, dense = np.unique(labels, return_inverse=True)
    if labels.size and not np.array_equal(classes, np.arange(classes.size)):
        logger.warning("Remapped %d class ids onto 0..%d", classes.size, classes.size - 1)
    return dense.astype(np.int64).reshape(labels.shape)
