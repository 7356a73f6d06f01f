import numpy as np
import pytest

from conftest import make_random_graph
from gatcluster.core.autoencoder import (
    GATAutoencoder, attention_coefficients, decode, encode, positive_weight, reconstruction_loss,
    reconstruction_loss_and_grad, sample_pairs, sampled_reconstruction_loss_and_grad,
)
from gatcluster.core.exceptions import GraphClusterException
from gatcluster.core.gradcheck import grad_check
from gatcluster.core.graph_io import from_edge_list
from gatcluster.core.kernels import LEAKY_SLOPE
from gatcluster.core.params import ParamStore, Tensor
from gatcluster.core.proximity import proximity
from gatcluster.core.self_train import clustering_loss_and_grad, soft_assign, target_distribution


def leaky(x):
    return np.where(x > 0, x, LEAKY_SLOPE * x)


def dense_attention(H, W, a, M):
    G = H @ W
    width = G.shape[1]
    C = (G @ a[:width])[:, None] + (G @ a[width:])[None, :]
    E = np.where(M > 0, leaky(M * C), -np.inf)
    E = E - E.max(axis=1, keepdims=True)
    expE = np.where(M > 0, np.exp(E), 0.0)
    return expE / expE.sum(axis=1, keepdims=True), G


def dense_encode(g, prox, params):
    M = prox.matrix.toarray()
    alpha0, G0 = dense_attention(g.X, params["W0"].data, params["a0"].data, M)
    H1 = leaky(alpha0 @ G0)
    alpha1, G1 = dense_attention(H1, params["W1"].data, params["a1"].data, M)
    return alpha1 @ G1


class TestAttention:
    def test_uniform_over_equal_inputs(self):
        g = from_edge_list(4, [(i, j) for i in range(4) for j in range(i + 1, 4)], np.ones((4, 3)))
        prox = proximity(g, 1)
        params = ParamStore(3, 5, 2, seed=0)
        alpha = attention_coefficients(g.X, params["W0"].data, params["a0"].data, prox).toarray()
        for i in range(4):
            np.testing.assert_allclose(alpha[i, np.arange(4) != i], 1.0 / 3.0, atol=1e-15)

    def test_single_neighbor(self):
        g = from_edge_list(2, [(0, 1)], np.array([[1.0, -4.0], [2.0, 7.0]]))
        params = ParamStore(2, 3, 2, seed=1)
        alpha = attention_coefficients(g.X, params["W0"].data, params["a0"].data, proximity(g, 1))
        assert alpha[0, 1] == 1.0 and alpha[1, 0] == 1.0

    def test_star_matches_dense_oracle(self):
        rng = np.random.default_rng(7)
        g = from_edge_list(4, [(0, 1), (0, 2), (0, 3)], rng.normal(size=(4, 3)))
        prox = proximity(g, 2)
        params = ParamStore(3, 4, 2, seed=7)
        alpha = attention_coefficients(g.X, params["W0"].data, params["a0"].data, prox).toarray()
        expected, _ = dense_attention(g.X, params["W0"].data, params["a0"].data, prox.matrix.toarray())
        np.testing.assert_allclose(alpha, expected, rtol=0, atol=1e-12)

    def test_rows_are_distributions_over_support(self, random_graph):
        prox = proximity(random_graph, 2)
        output = encode(random_graph, prox, ParamStore(random_graph.num_attributes, 6, 3, seed=2))
        for alpha in (output.alpha0, output.alpha1):
            np.testing.assert_allclose(np.asarray(alpha.sum(axis=1)).ravel(), 1.0, atol=1e-12)
            assert np.all(alpha.data > 0)
            for i in range(random_graph.n):
                assert np.array_equal(alpha[i].indices, prox.neighborhoods[i])


class TestEncode:
    def test_singleton_graph(self):
        x = np.array([[0.5, -1.5, 2.0]])
        g = from_edge_list(1, [], x)
        params = ParamStore(3, 4, 2, seed=0)
        Z = encode(g, proximity(g, 2), params).Z
        expected = leaky(x @ params["W0"].data) @ params["W1"].data
        np.testing.assert_allclose(Z, expected, atol=1e-14)

    def test_zero_attributes(self):
        g = from_edge_list(4, [(0, 1), (1, 2), (2, 3)], np.zeros((4, 3)))
        Z = encode(g, proximity(g, 2), ParamStore(3, 4, 2, seed=0)).Z
        assert np.all(Z == 0.0)

    def test_matches_dense_oracle(self):
        g = make_random_graph(n=8, m=5, seed=3)
        prox = proximity(g, 2)
        params = ParamStore(5, 6, 3, seed=3)
        np.testing.assert_allclose(encode(g, prox, params).Z, dense_encode(g, prox, params), rtol=0, atol=1e-10)

    def test_permutation_equivariance(self):
        g = make_random_graph(n=9, m=4, seed=11)
        params = ParamStore(4, 6, 3, seed=11)
        Z = encode(g, proximity(g, 2), params).Z

        perm = np.random.default_rng(11).permutation(g.n)
        inverse = np.argsort(perm)
        edges = [(perm[i], perm[j]) for i, j in g.edges]
        permuted = from_edge_list(g.n, edges, g.X[inverse])
        Zp = encode(permuted, proximity(permuted, 2), params).Z
        np.testing.assert_allclose(Zp[perm], Z, atol=1e-10)

    def test_dropout_is_seeded(self, random_graph):
        prox = proximity(random_graph, 2)
        outputs = []
        for _ in range(2):
            params = ParamStore(random_graph.num_attributes, 6, 3, seed=4)
            model = GATAutoencoder(params, dropout=0.5)
            outputs.append(model.encode(random_graph, prox, training=True).Z)
        assert np.array_equal(outputs[0], outputs[1])
        plain = encode(random_graph, prox, ParamStore(random_graph.num_attributes, 6, 3, seed=4)).Z
        assert not np.array_equal(outputs[0], plain)

    def test_unknown_activation(self):
        with pytest.raises(GraphClusterException):
            GATAutoencoder(ParamStore(2, 2, 2), embedding_activation="tanh")


class TestDecode:
    def test_zero_embedding(self):
        assert np.all(decode(np.zeros((3, 2))) == 0.5)

    def test_log_three(self):
        z = np.array([np.sqrt(np.log(3.0)), 0.0])
        A_hat = decode(np.stack([z, z]))
        assert A_hat[0, 1] == pytest.approx(0.75, abs=1e-12)

    def test_symmetric_and_open_interval(self):
        Z = np.random.default_rng(0).normal(size=(12, 4)) * 3
        A_hat = decode(Z)
        assert np.array_equal(A_hat, A_hat.T)
        assert np.all((A_hat > 0) & (A_hat < 1))

    def test_large_logits_stay_open(self):
        Z = np.array([[10.0, 0.0], [10.0, 0.0], [-10.0, 0.0]])
        A_hat = decode(Z)
        assert A_hat[0, 1] < 1.0
        assert A_hat[0, 2] > 0.0
        assert A_hat[0, 1] == pytest.approx(1.0)


class TestReconstructionLoss:
    def test_half_probability_closed_form(self, random_graph):
        n, ones = random_graph.n, 2 * random_graph.num_edges
        w_pos = positive_weight(random_graph)
        expected = np.log(2.0) * (w_pos * ones + (n * n - ones)) / (n * n)
        assert reconstruction_loss(random_graph, np.full((n, n), 0.5)) == pytest.approx(expected, rel=1e-12)

    def test_perfect_reconstruction_limit(self, random_graph):
        A = random_graph.adjacency.toarray()
        A_hat = np.where(A > 0, 1.0 - 1e-15, 1e-15)
        assert reconstruction_loss(random_graph, A_hat) < 1e-10

    def test_logit_form_matches_probabilities(self, random_graph):
        Z = np.random.default_rng(1).normal(size=(random_graph.n, 3))
        loss, _ = reconstruction_loss_and_grad(random_graph, Z)
        assert loss == pytest.approx(reconstruction_loss(random_graph, decode(Z)), rel=1e-10)

    def test_no_edges_rejected(self):
        g = from_edge_list(3, [], np.eye(3))
        with pytest.raises(GraphClusterException):
            reconstruction_loss_and_grad(g, np.zeros((3, 2)))


class TestGradients:
    @pytest.mark.parametrize("seed", range(5))
    @pytest.mark.parametrize("variant", [
        {},
        {"embedding_activation": "leaky_relu"},
        {"shared_attention": True},
    ])
    def test_full_reconstruction_gradient(self, seed, variant):
        g = make_random_graph(n=8, m=5, seed=seed)
        prox = proximity(g, 2)
        params = ParamStore(5, 6, 3, seed=seed)
        model = GATAutoencoder(params, **variant)

        def loss():
            output = model.encode(g, prox)
            value, dZ = reconstruction_loss_and_grad(g, output.Z)
            model.backward(output, dZ)
            return value

        assert grad_check(loss, params.tensors()) < 1e-4

    def test_sampled_reconstruction_gradient(self):
        g = make_random_graph(n=8, m=5, seed=9)
        prox = proximity(g, 2)
        params = ParamStore(5, 6, 3, seed=9)
        model = GATAutoencoder(params)

        def loss():
            output = model.encode(g, prox)
            value, dZ = sampled_reconstruction_loss_and_grad(g, output.Z, np.random.default_rng(0))
            model.backward(output, dZ)
            return value

        assert grad_check(loss, params.tensors()) < 1e-4


def test_sample_pairs(random_graph):
    rows, cols, targets = sample_pairs(random_graph, np.random.default_rng(0))
    A = random_graph.adjacency.toarray()
    positives = targets == 1.0
    assert positives.sum() == 2 * random_graph.num_edges
    assert (~positives).sum() == positives.sum()
    assert np.all(A[rows[positives], cols[positives]] == 1)
    assert np.all(A[rows[~positives], cols[~positives]] == 0)


@pytest.mark.parametrize("seed", range(100))
def test_joint_loss_gradient(seed):
    rng = np.random.default_rng(1000 + seed)
    n, m, k = int(rng.integers(4, 13)), int(rng.integers(1, 9)), int(rng.integers(1, 5))
    g = make_random_graph(n=n, m=m, p=float(rng.uniform(0.1, 0.5)), seed=seed)
    prox = proximity(g, int(rng.integers(1, 4)))
    params = ParamStore(m, 6, 3, seed=seed)
    model = GATAutoencoder(params)
    mu = Tensor(rng.normal(size=(k, 3)), "mu")
    gamma = float(rng.uniform(0.5, 10.0))
    P = target_distribution(soft_assign(model.encode(g, prox).Z, mu.data))

    def loss():
        output = model.encode(g, prox)
        clustering, _, dZ_c, dmu = clustering_loss_and_grad(output.Z, mu.data, P)
        reconstruction, dZ_r = reconstruction_loss_and_grad(g, output.Z)
        model.backward(output, dZ_r + gamma * dZ_c)
        mu.accumulate(gamma * dmu)
        return reconstruction + gamma * clustering

    assert grad_check(loss, params.tensors() + [mu]) < 1e-4
