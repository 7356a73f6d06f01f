"""
Training loop: pretrain the attention autoencoder on reconstruction, initialize
cluster centers with k-means, then jointly minimize L = L_r + gamma * L_c with
the target distribution refreshed every `update_interval` iterations.
"""

import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..models.graph_models import Graph, ProximityMatrix
from ..models.training_models import (
    ClusterState, EncoderOutput, IterationRecord, MetricsReport, RunRecord, TrainConfig,
)
from .autoencoder import (
    GATAutoencoder, reconstruction_loss_and_grad, sampled_reconstruction_loss_and_grad,
)
from .checkpoint import load_checkpoint, save_checkpoint
from .exceptions import ClusteringException, ConfigurationException, NonFiniteLossException
from .metrics import METRIC_NAMES, evaluate_clustering
from .params import ParamStore, Tensor, make_optimizer
from .self_train import (
    KMeansResult, clustering_loss_and_grad, hard_labels, init_cluster_state, soft_assign,
    target_distribution,
)

logger = logging.getLogger(__name__)

Callback = Callable[[Dict[str, Any]], None]


class ClusteringTrainer:
    """
    Owns one run: parameters, cluster state, optimizer and run record.

    Phases advance init -> pretrained -> joint -> done. A trainer can be
    checkpointed after pretraining or between joint iterations and resumed
    with `ClusteringTrainer.resume`.
    """

    def __init__(self, graph: Graph, prox: ProximityMatrix, config: TrainConfig,
                 params: Optional[ParamStore] = None):
        self.graph = graph
        self.prox = prox
        self.config = config
        self.logger = logging.getLogger(__name__)

        self.params = params or ParamStore(graph.num_attributes, config.hidden_dim,
                                           config.embed_dim, seed=config.seed)
        self.model = GATAutoencoder(self.params, config.embedding_activation,
                                    config.shared_attention, config.dropout)
        self.sample_rng = np.random.default_rng([config.seed, 2])
        self.use_sampling = config.sampled_loss and graph.n > config.sample_threshold

        self.state: Optional[ClusterState] = None
        self.mu: Optional[Tensor] = None
        self.optimizer: Any = None
        self.phase = "init"
        self.next_iteration = 0
        self.snapshots: Dict[int, np.ndarray] = {}
        self.record = RunRecord(config=config, seed=config.seed, dataset=self._dataset_metadata())

        self.on_epoch: Optional[Callback] = None
        self.on_iteration: Optional[Callback] = None

    @property
    def k(self) -> int:
        """Cluster count from the config, else from the ground-truth classes."""
        k = self.config.k if self.config.k is not None else self.graph.num_classes
        if k is None:
            raise ConfigurationException("Cluster count k is required when the graph has no labels")
        if k < 2:
            raise ClusteringException(f"Training needs at least 2 clusters, got k={k}")
        if k > self.graph.n:
            raise ClusteringException(f"Cannot form {k} clusters from {self.graph.n} nodes")
        return k

    def _dataset_metadata(self) -> Dict[str, Any]:
        g = self.graph
        return {
            "name": g.name,
            "nodes": g.n,
            "features": g.num_attributes,
            "links": g.num_edges,
            "clusters": g.num_classes,
            "normalization": g.normalization,
            "attribute_kind": g.attribute_kind,
            "t_order": self.prox.t,
            "proximity_nnz": self.prox.nnz,
            "self_relevance": self.prox.includes_self,
            "sampled_loss": self.use_sampling,
        }

    def _reconstruction(self, Z: np.ndarray) -> Tuple[float, np.ndarray]:
        if self.use_sampling:
            return sampled_reconstruction_loss_and_grad(self.graph, Z, self.sample_rng)
        return reconstruction_loss_and_grad(self.graph, Z)

    def _make_optimizer(self, tensors: Sequence[Tensor], lr: float) -> Any:
        cfg = self.config
        return make_optimizer(cfg.optimizer, tensors, lr, betas=cfg.adam_betas,
                              eps=cfg.adam_eps, weight_decay=cfg.weight_decay)

    def _notify(self, callback: Optional[Callback], info: Dict[str, Any]) -> None:
        if callback:
            try:
                callback(info)
            except Exception as e:
                self.logger.error(f"Error in training callback: {e}")

    def embed(self) -> EncoderOutput:
        """Inference-mode forward pass with the current parameters."""
        return self.model.encode(self.graph, self.prox)

    def pretrain(self) -> EncoderOutput:
        """
        Minimize L_r alone for `pretrain_epochs` full-graph steps.

        Returns:
            The embedding after the last step.

        Raises:
            NonFiniteLossException: If L_r becomes non-finite.
        """
        cfg = self.config
        started = time.perf_counter()
        optimizer = self._make_optimizer(self.params.tensors(), cfg.lr_pretrain)

        for epoch in range(cfg.pretrain_epochs):
            self.params.zero_grad()
            output = self.model.encode(self.graph, self.prox, training=True)
            loss, dZ = self._reconstruction(output.Z)
            if not np.isfinite(loss):
                raise NonFiniteLossException("pretraining", epoch, [loss])
            self.model.backward(output, dZ)
            optimizer.step()

            self.record.pretrain_losses.append(loss)
            if epoch % cfg.log_interval == 0 or epoch == cfg.pretrain_epochs - 1:
                self.logger.info("pretrain epoch %d/%d: L_r=%.6f", epoch + 1, cfg.pretrain_epochs, loss)
            self._notify(self.on_epoch, {"epoch": epoch, "reconstruction_loss": loss})

        self.phase = "pretrained"
        self.record.wall_time_seconds += time.perf_counter() - started
        return self.embed()

    def initialize_clusters(self, Z: Optional[np.ndarray] = None) -> KMeansResult:
        """
        Run k-means once on the pretrained embedding and set up the joint optimizer.

        When labels exist, the k-means labels are scored as the two-step baseline.
        """
        cfg = self.config
        started = time.perf_counter()
        if Z is None:
            Z = self.embed().Z
        state, result = init_cluster_state(Z, self.k, restarts=cfg.kmeans_restarts, seed=cfg.seed,
                                           max_iter=cfg.kmeans_max_iter, tol=cfg.kmeans_tol)
        self._attach_state(state)
        self.optimizer = self._make_optimizer(self.params.tensors() + [self.mu], cfg.lr_joint)
        self.phase = "joint"
        self.next_iteration = 0

        if self.graph.labels is not None:
            self.record.pretrain_metrics = evaluate_clustering(result.labels, self.graph.labels)
            self.logger.info("two-step baseline: %s", _format_metrics(self.record.pretrain_metrics))
        self.record.wall_time_seconds += time.perf_counter() - started
        return result

    def _attach_state(self, state: ClusterState) -> None:
        # The optimizer updates mu through the tensor; the state shares its buffer.
        self.mu = Tensor(state.mu, "mu")
        state.mu = self.mu.data
        self.state = state

    def joint_step(self) -> IterationRecord:
        """
        One joint iteration l: Q from the current Z, P refreshed when l % T == 0,
        then a single optimizer step on all parameters and the centers.

        Raises:
            NonFiniteLossException: If L_r, L_c or L is non-finite.
        """
        cfg = self.config
        l = self.next_iteration
        state, mu = self.state, self.mu

        self.params.zero_grad()
        mu.zero_grad()
        output = self.model.encode(self.graph, self.prox, training=True)
        Z = output.Z

        updated = l % cfg.update_interval == 0
        if updated:
            state.P = target_distribution(soft_assign(Z, mu.data))
            state.last_p_update = l

        clustering, Q, dZ_c, dmu = clustering_loss_and_grad(Z, mu.data, state.P)
        reconstruction, dZ_r = self._reconstruction(Z)
        total = reconstruction + cfg.gamma * clustering
        if not (np.isfinite(reconstruction) and np.isfinite(clustering) and np.isfinite(total)):
            raise NonFiniteLossException("joint training", l, [reconstruction, clustering, total])

        self.model.backward(output, dZ_r + cfg.gamma * dZ_c)
        mu.accumulate(cfg.gamma * dmu)
        self.optimizer.step()
        state.Q = Q

        metrics = None
        if self.graph.labels is not None and cfg.eval_interval and l % cfg.eval_interval == 0:
            metrics = evaluate_clustering(hard_labels(Q), self.graph.labels)
        if cfg.snapshot_interval and l % cfg.snapshot_interval == 0:
            self.snapshots[l] = Z.copy()

        record = IterationRecord(iteration=l, reconstruction_loss=reconstruction,
                                 clustering_loss=clustering, total_loss=total,
                                 target_updated=updated, metrics=metrics)
        self.record.iterations.append(record)
        self.next_iteration = l + 1

        if l % cfg.log_interval == 0 or l == cfg.joint_iters - 1:
            message = f"iter {l + 1}/{cfg.joint_iters}: L_r={reconstruction:.6f} L_c={clustering:.6f} L={total:.6f}"
            if metrics is not None:
                message += " " + _format_metrics(metrics)
            self.logger.info(message)
        self._notify(self.on_iteration, record.model_dump())
        return record

    def joint_steps(self, until: Optional[int] = None) -> List[IterationRecord]:
        """Run joint iterations up to (not including) `until`, capped at joint_iters."""
        if self.phase != "joint":
            raise ClusteringException(f"Joint training requires initialized clusters (phase is '{self.phase}')")
        stop = self.config.joint_iters if until is None else min(until, self.config.joint_iters)
        started = time.perf_counter()
        records = []
        while self.next_iteration < stop:
            records.append(self.joint_step())
        self.record.wall_time_seconds += time.perf_counter() - started
        return records

    def finish(self) -> RunRecord:
        """Final labels from Q of the trained embedding and centers."""
        Q = soft_assign(self.embed().Z, self.mu.data)
        self.state.Q = Q
        labels = hard_labels(Q)
        self.record.labels = labels.tolist()
        if self.graph.labels is not None:
            self.record.final_metrics = evaluate_clustering(labels, self.graph.labels)
            self.logger.info("final: %s", _format_metrics(self.record.final_metrics))
        self.phase = "done"
        return self.record

    def fit(self) -> RunRecord:
        """Run every remaining phase and return the run record."""
        if self.phase == "init":
            self.pretrain()
        if self.phase == "pretrained":
            self.initialize_clusters()
        if self.phase == "joint":
            self.joint_steps()
        return self.finish() if self.phase != "done" else self.record

    def save_checkpoint(self, path: Union[str, Path]) -> Path:
        extra = {
            "phase": self.phase,
            "next_iteration": self.next_iteration,
            "sample_rng": self.sample_rng.bit_generator.state,
            "record": self.record.model_dump(mode="json"),
        }
        return save_checkpoint(self.params, self.state, path, optimizer=self.optimizer, extra=extra)

    @classmethod
    def resume(cls, graph: Graph, prox: ProximityMatrix, path: Union[str, Path]) -> "ClusteringTrainer":
        """Rebuild a trainer from a checkpoint written by `save_checkpoint`."""
        checkpoint = load_checkpoint(path)
        record = RunRecord.model_validate(checkpoint.extra["record"])
        trainer = cls(graph, prox, record.config, params=checkpoint.params)
        trainer.record = record
        trainer.sample_rng.bit_generator.state = checkpoint.extra["sample_rng"]
        trainer.phase = checkpoint.extra["phase"]
        trainer.next_iteration = checkpoint.extra["next_iteration"]
        if checkpoint.state is not None:
            trainer._attach_state(checkpoint.state)
            trainer.optimizer = trainer._make_optimizer(trainer.params.tensors() + [trainer.mu],
                                                        record.config.lr_joint)
            trainer.optimizer.load_state(checkpoint.optimizer_step, checkpoint.optimizer_arrays)
        trainer.logger.info("Resumed %s at phase '%s', iteration %d", path, trainer.phase, trainer.next_iteration)
        return trainer


def _format_metrics(report: MetricsReport) -> str:
    return " ".join(f"{name}={getattr(report, name):.4f}" for name in METRIC_NAMES)


def pretrain(g: Graph, prox: ProximityMatrix, params: ParamStore, cfg: TrainConfig) -> EncoderOutput:
    """Pretrain `params` in place on reconstruction alone."""
    return ClusteringTrainer(g, prox, cfg, params=params).pretrain()


def fit(g: Graph, prox: ProximityMatrix, params: ParamStore, cfg: TrainConfig) -> RunRecord:
    """Cluster with already-pretrained `params`: k-means init, joint training, final labels."""
    trainer = ClusteringTrainer(g, prox, cfg, params=params)
    trainer.phase = "pretrained"
    return trainer.fit()


def summarize_runs(records: Sequence[RunRecord]) -> Dict[str, Any]:
    """Mean and population standard deviation of each metric across runs."""
    summary: Dict[str, Any] = {
        "runs": len(records),
        "seeds": [record.seed for record in records],
        "wall_time_seconds": float(sum(record.wall_time_seconds for record in records)),
    }
    for key, attribute in (("final", "final_metrics"), ("two_step", "pretrain_metrics")):
        reports = [getattr(record, attribute) for record in records if getattr(record, attribute) is not None]
        if not reports:
            continue
        summary[key] = {
            name: {
                "mean": float(np.mean([getattr(report, name) for report in reports])),
                "std": float(np.std([getattr(report, name) for report in reports])),
            }
            for name in METRIC_NAMES
        }
    return summary


__all__ = ["ClusteringTrainer", "fit", "pretrain", "summarize_runs"]
