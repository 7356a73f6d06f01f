import json

import numpy as np
import pytest

from gatcluster.config import ConfigManager
from gatcluster.core.exceptions import ConfigurationException, GraphFormatException
from gatcluster.core.graph_io import (
    adjacency_row, describe_graph, from_edge_list, load_graph, normalize_attributes, save_graph,
)
from gatcluster.models import DatasetManifest


def write_dataset(tmp_path, edges, attrs, labels=None, ids=None, **manifest_fields):
    (tmp_path / "g.edges").write_text(edges, encoding="utf-8")
    (tmp_path / "g.attrs").write_text(attrs, encoding="utf-8")
    manifest = {"edge_file": "g.edges", "attr_file": "g.attrs", **manifest_fields}
    if labels is not None:
        (tmp_path / "g.labels").write_text(labels, encoding="utf-8")
        manifest["label_file"] = "g.labels"
    if ids is not None:
        (tmp_path / "g.ids").write_text(ids, encoding="utf-8")
        manifest["id_file"] = "g.ids"
    path = tmp_path / "g.json"
    path.write_text(json.dumps(manifest), encoding="utf-8")
    return ConfigManager().load_manifest(path)


class TestLoadGraph:
    def test_symmetrize_and_dedup(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n1\t0\n1\t2\n", "1 0\n0 1\n1 1\n")
        g = load_graph(manifest)
        assert g.n == 3
        assert g.num_edges == 2
        assert g.edges.tolist() == [[0, 1], [1, 2]]

    def test_empty_edge_file(self, tmp_path):
        manifest = write_dataset(tmp_path, "", "1 0\n0 1\n1 1\n")
        g = load_graph(manifest)
        assert g.n == 3
        assert g.num_edges == 0

    def test_comments_and_labels(self, tmp_path):
        manifest = write_dataset(tmp_path, "# header\n0\t1\n", "1 0\n0 1\n", labels="3\n7\n")
        g = load_graph(manifest)
        assert g.labels.tolist() == [0, 1]
        assert g.num_classes == 2

    def test_malformed_edge_line_reports_line_number(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n0 1 2\n", "1\n1\n")
        with pytest.raises(GraphFormatException) as excinfo:
            load_graph(manifest)
        assert excinfo.value.line_number == 2
        assert excinfo.value.module == "graph-io"

    def test_index_out_of_range(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t5\n", "1\n1\n")
        with pytest.raises(GraphFormatException, match="outside"):
            load_graph(manifest)

    def test_row_length_mismatch(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n", "1 2\n3\n")
        with pytest.raises(GraphFormatException) as excinfo:
            load_graph(manifest)
        assert excinfo.value.line_number == 2

    def test_non_finite_attribute(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n", "1 nan\n0 1\n")
        with pytest.raises(GraphFormatException, match="Non-finite"):
            load_graph(manifest)

    def test_label_count_mismatch(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n", "1\n1\n", labels="0\n")
        with pytest.raises(GraphFormatException):
            load_graph(manifest)

    def test_external_ids(self, tmp_path):
        manifest = write_dataset(tmp_path, "doc-b\tdoc-a\n", "1 0\n0 1\n", ids="doc-a\ndoc-b\n")
        g = load_graph(manifest)
        assert g.node_ids == ["doc-a", "doc-b"]
        assert g.edges.tolist() == [[0, 1]]

    def test_unknown_external_id(self, tmp_path):
        manifest = write_dataset(tmp_path, "doc-a\tdoc-z\n", "1 0\n0 1\n", ids="doc-a\ndoc-b\n")
        with pytest.raises(GraphFormatException, match="Unknown node id"):
            load_graph(manifest)

    def test_citation_kind_defaults_to_row_sum(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n", "2 2 0\n1 0 0\n", kind="citation")
        g = load_graph(manifest)
        assert g.normalization == "row-sum"
        np.testing.assert_allclose(g.X[0], [0.5, 0.5, 0.0])
        assert g.attribute_kind == "real"

    def test_binary_attributes_detected(self, tmp_path):
        manifest = write_dataset(tmp_path, "0\t1\n", "1 0\n0 1\n")
        assert load_graph(manifest).attribute_kind == "binary"

    def test_missing_file_in_manifest(self, tmp_path):
        path = tmp_path / "m.json"
        path.write_text(json.dumps({"edge_file": "nope.edges", "attr_file": "nope.attrs"}))
        with pytest.raises(ConfigurationException):
            ConfigManager().load_manifest(path)


class TestGraphInvariants:
    def test_self_loops_dropped(self):
        g = from_edge_list(2, [(0, 0), (0, 1)], np.ones((2, 1)))
        assert g.edges.tolist() == [[0, 1]]

    def test_adjacency_symmetric(self, random_graph):
        A = random_graph.adjacency.toarray()
        assert np.array_equal(A, A.T)
        assert np.all(np.diag(A) == 0)

    def test_graph_is_read_only(self, path_graph):
        with pytest.raises(ValueError):
            path_graph.X[0, 0] = 5.0


class TestAdjacencyRow:
    def test_path_middle(self, path_graph):
        assert adjacency_row(path_graph, 1).toarray().ravel().tolist() == [1, 0, 1]

    def test_isolated_node(self):
        g = from_edge_list(3, [(0, 1)], np.ones((3, 1)))
        assert adjacency_row(g, 2).nnz == 0

    def test_triangle(self):
        g = from_edge_list(3, [(0, 1), (1, 2), (0, 2)], np.ones((3, 1)))
        assert adjacency_row(g, 0).toarray().ravel().tolist() == [0, 1, 1]

    def test_out_of_range(self, path_graph):
        with pytest.raises(IndexError):
            adjacency_row(path_graph, 3)


class TestNormalizeAttributes:
    def test_none_is_identity(self):
        X = np.array([[2.0, -1.0], [0.0, 3.0]])
        assert np.array_equal(normalize_attributes(X, "none"), X)

    def test_row_sum(self):
        np.testing.assert_allclose(normalize_attributes(np.array([[2.0, 2.0, 0.0]]), "row-sum"),
                                   [[0.5, 0.5, 0.0]])

    def test_l2_row(self):
        np.testing.assert_allclose(normalize_attributes(np.array([[3.0, 4.0]]), "l2-row"), [[0.6, 0.8]])

    def test_zero_rows_pass_through(self):
        X = np.array([[0.0, 0.0], [1.0, 3.0]])
        out = normalize_attributes(X, "row-sum")
        assert out[0].tolist() == [0.0, 0.0]

    def test_unit_norms(self):
        X = np.random.default_rng(5).normal(size=(20, 7))
        np.testing.assert_allclose(np.abs(normalize_attributes(X, "row-sum")).sum(axis=1), 1.0, atol=1e-12)
        np.testing.assert_allclose(np.linalg.norm(normalize_attributes(X, "l2-row"), axis=1), 1.0, atol=1e-12)


class TestSaveGraph:
    def test_load_save_load(self, tmp_path, random_graph):
        manifest = save_graph(random_graph, tmp_path / "a")
        first = load_graph(manifest)
        second = load_graph(save_graph(first, tmp_path / "b"))
        for g in (first, second):
            assert g.n == random_graph.n
            assert np.array_equal(g.edges, random_graph.edges)
            assert np.array_equal(g.X, random_graph.X)
            assert np.array_equal(g.labels, random_graph.labels)

    def test_external_ids_round_trip(self, tmp_path):
        g = from_edge_list(3, [(0, 2)], np.eye(3), node_ids=["x", "y", "z"])
        loaded = load_graph(save_graph(g, tmp_path))
        assert loaded.node_ids == ["x", "y", "z"]
        assert loaded.edges.tolist() == [[0, 2]]

    def test_manifest_written(self, tmp_path, path_graph):
        save_graph(path_graph, tmp_path, stem="path")
        reloaded = ConfigManager().load_manifest(tmp_path / "path.manifest.json")
        assert isinstance(reloaded, DatasetManifest)
        assert reloaded.normalization == "none"


def test_describe_graph(path_graph):
    profile = describe_graph(path_graph)
    assert (profile.nodes, profile.features, profile.clusters, profile.links) == (3, 3, 2, 2)
