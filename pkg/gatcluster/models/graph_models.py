"""
Data models for attributed graphs, dataset manifests and proximity matrices.
"""

from typing import List, Literal, Optional

import numpy as np
import scipy.sparse as sp
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

NormalizationMode = Literal["none", "row-sum", "l2-row"]
AttributeKind = Literal["binary", "real"]


class DatasetManifest(BaseModel):
    """Names the files that make up one attributed graph dataset."""

    model_config = ConfigDict(
        extra="forbid",
        json_schema_extra={
            "example": {
                "name": "cora",
                "kind": "citation",
                "edge_file": "cora.edges",
                "attr_file": "cora.attrs",
                "label_file": "cora.labels",
                "normalization": "row-sum",
            }
        },
    )

    edge_file: str = Field(..., description="Edge list, one 'src<TAB>dst' pair per line")
    attr_file: str = Field(..., description="Attribute matrix, one whitespace-separated row per node")
    label_file: Optional[str] = Field(None, description="Ground-truth class ids, one integer per line")
    id_file: Optional[str] = Field(None, description="External node ids, one per attribute row")
    name: Optional[str] = Field(None, description="Dataset name (e.g., 'cora', 'citeseer')")
    kind: Literal["citation", "generic"] = Field(
        "generic", description="Dataset kind; citation sets default to row-sum normalization"
    )
    normalization: Optional[NormalizationMode] = Field(
        None, description="Attribute normalization; None picks the default for the dataset kind"
    )


class Graph(BaseModel):
    """
    Immutable attributed graph.

    Edges are stored once per undirected pair as rows (i, j) with i < j, sorted
    lexicographically. Self-relevance never appears here; it only enters
    through the proximity matrix.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n: int = Field(..., ge=0, description="Node count")
    edges: np.ndarray = Field(..., description="Undirected edges, shape (e, 2), i < j")
    X: np.ndarray = Field(..., description="Dense attribute matrix, shape (n, m), float64")
    labels: Optional[np.ndarray] = Field(None, description="Ground-truth class id per node")
    node_ids: Optional[List[str]] = Field(None, description="External id per dense node id")
    name: Optional[str] = Field(None, description="Dataset name")
    normalization: NormalizationMode = Field("none", description="Normalization applied to X")
    attribute_kind: AttributeKind = Field("real", description="Raw attributes were binary or real")

    _adjacency: Optional[sp.csr_matrix] = PrivateAttr(default=None)

    @model_validator(mode="after")
    def _check_invariants(self) -> "Graph":
        edges = self.edges
        if edges.ndim != 2 or edges.shape[1] != 2:
            raise ValueError(f"edges must have shape (e, 2), got {edges.shape}")
        if edges.size:
            if edges.min() < 0 or edges.max() >= self.n:
                raise ValueError("edge endpoint out of range")
            if np.any(edges[:, 0] >= edges[:, 1]):
                raise ValueError("edges must be stored as (i, j) with i < j")
            keys = edges[:, 0] * self.n + edges[:, 1]
            if np.unique(keys).size != keys.size:
                raise ValueError("duplicate undirected edges")
        if self.X.ndim != 2 or self.X.shape[0] != self.n:
            raise ValueError(f"X must have exactly {self.n} rows, got shape {self.X.shape}")
        if not np.all(np.isfinite(self.X)):
            raise ValueError("X contains non-finite values")
        if self.labels is not None and self.labels.shape != (self.n,):
            raise ValueError(f"labels must have length {self.n}")
        if self.node_ids is not None and len(self.node_ids) != self.n:
            raise ValueError(f"node_ids must have length {self.n}")
        for array in (self.edges, self.X, self.labels):
            if array is not None:
                array.setflags(write=False)
        return self

    @property
    def num_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def num_attributes(self) -> int:
        return int(self.X.shape[1])

    @property
    def num_classes(self) -> Optional[int]:
        if self.labels is None or self.labels.size == 0:
            return None
        return int(self.labels.max()) + 1

    @property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric 0/1 adjacency matrix, materialized on first use."""
        if self._adjacency is None:
            rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
            cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
            data = np.ones(rows.size, dtype=np.float64)
            adjacency = sp.csr_matrix((data, (rows, cols)), shape=(self.n, self.n))
            adjacency.sort_indices()
            self._adjacency = adjacency
        return self._adjacency

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()


class ProximityMatrix(BaseModel):
    """t-order topological relevance M and the attention neighborhoods it induces."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    t: int = Field(..., ge=1, description="Proximity order")
    matrix: sp.csr_matrix = Field(..., description="M, sparse n x n, sorted indices")
    transition: sp.csr_matrix = Field(..., description="Row-stochastic transition matrix B")

    @property
    def n(self) -> int:
        return int(self.matrix.shape[0])

    @property
    def nnz(self) -> int:
        return int(self.matrix.nnz)

    @property
    def indptr(self) -> np.ndarray:
        return self.matrix.indptr

    @property
    def cols(self) -> np.ndarray:
        return self.matrix.indices

    @property
    def rows(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), np.diff(self.matrix.indptr))

    @property
    def values(self) -> np.ndarray:
        return self.matrix.data

    @property
    def neighborhoods(self) -> List[np.ndarray]:
        """N_i = { j : M_ij > 0 }, ordered by j."""
        indptr, indices = self.matrix.indptr, self.matrix.indices
        return [indices[indptr[i]:indptr[i + 1]] for i in range(self.n)]

    @property
    def includes_self(self) -> bool:
        """Whether any node attends to itself (M_ii > 0)."""
        return bool(np.any(self.matrix.diagonal() > 0))
