import warnings

import numpy as np
import pytest

from gatcluster.core.exceptions import ClusteringException
from gatcluster.core.gradcheck import grad_check
from gatcluster.core.params import Tensor
from gatcluster.core.self_train import (
    clustering_loss, clustering_loss_and_grad, hard_labels, init_cluster_state, kmeans, soft_assign,
    target_distribution,
)


def random_q(rng, n, k):
    raw = rng.random((n, k)) + 1e-3
    return raw / raw.sum(axis=1, keepdims=True)


class TestKMeans:
    def test_two_blobs(self):
        rng = np.random.default_rng(0)
        left = rng.normal(loc=(-5.0, 0.0), scale=0.3, size=(50, 2))
        right = rng.normal(loc=(5.0, 1.0), scale=0.3, size=(50, 2))
        result = kmeans(np.vstack([left, right]), 2, restarts=5, seed=0)
        centers = result.centers[np.argsort(result.centers[:, 0])]
        np.testing.assert_allclose(centers[0], left.mean(axis=0), atol=0.1)
        np.testing.assert_allclose(centers[1], right.mean(axis=0), atol=0.1)

    def test_every_point_its_own_center(self):
        Z = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 3.0]])
        result = kmeans(Z, 3, restarts=3, seed=1)
        assert result.inertia == pytest.approx(0.0, abs=1e-12)
        assert sorted(result.labels.tolist()) == [0, 1, 2]

    def test_duplicate_points(self):
        Z = np.ones((6, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            result = kmeans(Z, 2, restarts=2, seed=0)
        assert result.centers.shape == (2, 2)
        assert np.all(np.isfinite(result.centers))

    def test_fewer_points_than_clusters(self):
        with pytest.raises(ClusteringException) as excinfo:
            kmeans(np.zeros((2, 3)), 3)
        assert excinfo.value.module == "self-train"

    def test_seeded(self):
        Z = np.random.default_rng(3).normal(size=(40, 3))
        first, second = kmeans(Z, 4, restarts=3, seed=9), kmeans(Z, 4, restarts=3, seed=9)
        assert np.array_equal(first.centers, second.centers)

    def test_init_cluster_state(self):
        Z = np.random.default_rng(4).normal(size=(30, 2))
        state, result = init_cluster_state(Z, 3, restarts=2, seed=0)
        assert state.k == 3
        assert np.array_equal(state.mu, result.centers)
        assert state.P is None
        np.testing.assert_allclose(state.Q.sum(axis=1), 1.0, atol=1e-12)


class TestSoftAssign:
    def test_single_cluster(self):
        Q = soft_assign(np.random.default_rng(0).normal(size=(5, 3)), np.zeros((1, 3)))
        assert np.all(Q == 1.0)

    def test_known_row(self):
        Q = soft_assign(np.array([[0.0, 0.0]]), np.array([[0.0, 0.0], [1.0, 0.0]]))
        np.testing.assert_allclose(Q[0], [2.0 / 3.0, 1.0 / 3.0], atol=1e-15)

    def test_equidistant(self):
        mu = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
        np.testing.assert_allclose(soft_assign(np.zeros((1, 2)), mu), 0.25, atol=1e-15)

    def test_translation_invariance(self):
        rng = np.random.default_rng(1)
        Z, mu, shift = rng.normal(size=(12, 4)), rng.normal(size=(3, 4)), rng.normal(size=4) * 10
        np.testing.assert_allclose(soft_assign(Z + shift, mu + shift), soft_assign(Z, mu), atol=1e-12)

    def test_rows_strictly_positive_distributions(self):
        rng = np.random.default_rng(2)
        Q = soft_assign(rng.normal(size=(20, 3)) * 50, rng.normal(size=(5, 3)))
        assert np.all(Q > 0)
        np.testing.assert_allclose(Q.sum(axis=1), 1.0, atol=1e-12)


class TestTargetDistribution:
    def test_single_node_is_fixed_point(self):
        np.testing.assert_allclose(target_distribution(np.array([[0.8, 0.2]])), [[0.8, 0.2]], atol=1e-15)

    def test_uniform_fixed_point(self):
        np.testing.assert_allclose(target_distribution(np.full((6, 3), 1.0 / 3.0)), 1.0 / 3.0, atol=1e-15)

    def test_hand_evaluated_row(self):
        P = target_distribution(np.array([[0.8, 0.2], [0.6, 0.4]]))
        np.testing.assert_allclose(P[0], [0.8727, 0.1273], atol=1e-4)

    def test_rows_are_distributions(self):
        P = target_distribution(random_q(np.random.default_rng(3), 25, 4))
        assert np.all(P >= 0)
        np.testing.assert_allclose(P.sum(axis=1), 1.0, atol=1e-12)

    def test_empty_cluster(self):
        with pytest.raises(ClusteringException):
            target_distribution(np.array([[1.0, 0.0], [1.0, 0.0]]))


class TestClusteringLoss:
    def test_identical_is_zero(self):
        Q = random_q(np.random.default_rng(4), 10, 3)
        assert clustering_loss(Q, Q) == pytest.approx(0.0, abs=1e-12)

    def test_gibbs_inequality(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            P, Q = random_q(rng, 8, 3), random_q(rng, 8, 3)
            assert clustering_loss(P, Q) > 0.0

    def test_zero_probabilities_in_target(self):
        P = np.array([[1.0, 0.0]])
        Q = np.array([[0.5, 0.5]])
        assert clustering_loss(P, Q) == pytest.approx(np.log(2.0))

    def test_non_finite(self):
        with pytest.raises(ClusteringException):
            clustering_loss(np.array([[0.5, 0.5]]), np.array([[1.0, 0.0]]))

    def test_loss_matches_soft_assign(self):
        rng = np.random.default_rng(6)
        Z, mu = rng.normal(size=(10, 4)), rng.normal(size=(3, 4))
        P = target_distribution(soft_assign(Z, mu))
        loss, Q, _, _ = clustering_loss_and_grad(Z, mu, P)
        np.testing.assert_allclose(Q, soft_assign(Z, mu), atol=1e-15)
        assert loss == pytest.approx(clustering_loss(P, Q), rel=1e-12)

    @pytest.mark.parametrize("seed", range(5))
    def test_gradient(self, seed):
        rng = np.random.default_rng(seed)
        Z, mu = Tensor(rng.normal(size=(10, 4)), "Z"), Tensor(rng.normal(size=(3, 4)), "mu")
        P = target_distribution(random_q(rng, 10, 3))

        def loss():
            value, _, dZ, dmu = clustering_loss_and_grad(Z.data, mu.data, P)
            Z.accumulate(dZ)
            mu.accumulate(dmu)
            return value

        assert grad_check(loss, [Z, mu]) < 1e-4

    def test_center_gradient_is_negated_node_sum(self):
        rng = np.random.default_rng(7)
        Z, mu = rng.normal(size=(6, 2)), rng.normal(size=(2, 2))
        P = target_distribution(random_q(rng, 6, 2))
        _, _, dZ, dmu = clustering_loss_and_grad(Z, mu, P)
        # Q depends on differences only, so shifting everything leaves the loss unchanged.
        np.testing.assert_allclose(dZ.sum(axis=0) + dmu.sum(axis=0), 0.0, atol=1e-12)


class TestHardLabels:
    def test_argmax(self):
        assert hard_labels(np.array([[0.1, 0.7, 0.2]])).tolist() == [1]

    def test_ties_go_to_smallest_id(self):
        assert hard_labels(np.array([[0.5, 0.5]])).tolist() == [0]

    def test_one_hot(self):
        assert hard_labels(np.eye(4)[[2, 0, 3, 1]]).tolist() == [2, 0, 3, 1]

    def test_monotone_rescaling(self):
        Q = random_q(np.random.default_rng(8), 15, 4)
        assert np.array_equal(hard_labels(Q), hard_labels(np.log(Q) * 3.0 + 1.0))
