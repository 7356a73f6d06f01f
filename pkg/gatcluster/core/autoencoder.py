"""
Graph attention autoencoder: a two-layer attention encoder over the proximity
neighborhoods, an inner product decoder and the class-weighted reconstruction
loss, each with a hand-wired backward pass.
"""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from ..models.graph_models import Graph, ProximityMatrix
from ..models.training_models import EncoderOutput
from .exceptions import EmptyNeighborhoodException, GraphClusterException
from .kernels import (
    edge_dot,
    leaky_relu,
    leaky_relu_backward,
    masked_row_softmax,
    masked_row_softmax_backward,
    matmul,
    sigmoid,
    softplus,
)
from .params import ParamStore

logger = logging.getLogger(__name__)

# Smallest probability passed to log() when scoring a given A-hat
_LOG_FLOOR = 1e-300
_PROB_FLOOR = np.finfo(np.float64).tiny
_PROB_CEIL = np.nextafter(1.0, 0.0)


class _Support:
    """CSR coordinates of the proximity support, shared by both layers."""

    def __init__(self, prox: ProximityMatrix):
        self.n = prox.n
        self.indptr = prox.indptr
        self.cols = prox.cols
        self.rows = prox.rows
        self.weights = prox.values
        counts = np.diff(self.indptr)
        if np.any(counts == 0):
            raise EmptyNeighborhoodException(int(np.flatnonzero(counts == 0)[0]))

    def as_matrix(self, values: np.ndarray) -> sp.csr_matrix:
        return sp.csr_matrix((values, self.cols, self.indptr), shape=(self.n, self.n))


def _attention_forward(G: np.ndarray, a: np.ndarray, support: _Support) -> Tuple[np.ndarray, Dict[str, Any]]:
    """alpha_ij = softmax_j(LeakyReLU(M_ij * a^T [g_i || g_j])) over the support."""
    width = G.shape[1]
    score_self = G @ a[:width]
    score_neighbor = G @ a[width:]
    logits = score_self[support.rows] + score_neighbor[support.cols]
    weighted = support.weights * logits
    alpha = masked_row_softmax(leaky_relu(weighted), support.indptr)
    return alpha, {"G": G, "weighted": weighted, "alpha": alpha}


def _attention_backward(d_alpha: np.ndarray, a: np.ndarray, cache: Dict[str, Any],
                        support: _Support) -> Tuple[np.ndarray, np.ndarray]:
    """Map dL/d(alpha) onto dL/dG and dL/da."""
    G = cache["G"]
    width = G.shape[1]
    d_activated = masked_row_softmax_backward(d_alpha, cache["alpha"], support.indptr)
    d_logits = leaky_relu_backward(d_activated, cache["weighted"]) * support.weights
    d_self = np.bincount(support.rows, weights=d_logits, minlength=support.n)
    d_neighbor = np.bincount(support.cols, weights=d_logits, minlength=support.n)
    dG = np.outer(d_self, a[:width]) + np.outer(d_neighbor, a[width:])
    da = np.concatenate([G.T @ d_self, G.T @ d_neighbor])
    return dG, da


def attention_coefficients(Hin: np.ndarray, W: np.ndarray, a: np.ndarray,
                           prox: ProximityMatrix) -> sp.csr_matrix:
    """
    Attention of one layer over the proximity support.

    Raises:
        EmptyNeighborhoodException: If some N_i is empty.
    """
    support = _Support(prox)
    alpha, _ = _attention_forward(matmul(Hin, W), a, support)
    return support.as_matrix(alpha)


class GATAutoencoder:
    """
    Two stacked attention layers (input -> hidden -> embedding) and an inner
    product decoder.

    The hidden layer uses LeakyReLU; the embedding layer uses
    `embedding_activation`. Each layer computes its own attention from its own
    input unless `shared_attention` is set, in which case the first layer's
    attention is reused by the second.
    """

    def __init__(self, params: ParamStore, embedding_activation: str = "identity",
                 shared_attention: bool = False, dropout: float = 0.0):
        if embedding_activation not in ("identity", "leaky_relu"):
            raise GraphClusterException(
                f"Unknown embedding activation '{embedding_activation}'", module="gat-autoencoder"
            )
        self.params = params
        self.embedding_activation = embedding_activation
        self.shared_attention = shared_attention
        self.dropout = dropout

    def encode(self, g: Graph, prox: ProximityMatrix, training: bool = False) -> EncoderOutput:
        """Run both attention layers; Z is the second layer's output."""
        support = _Support(prox)
        W0, W1 = self.params["W0"].data, self.params["W1"].data
        a0, a1 = self.params["a0"].data, self.params["a1"].data

        X, mask0 = self._dropout(g.X, training)
        layer0 = self._layer_forward(X, W0, a0, support, "leaky_relu", mask=mask0)
        H1, mask1 = self._dropout(layer0["out"], training)
        shared = layer0["alpha"] if self.shared_attention else None
        layer1 = self._layer_forward(H1, W1, a1, support, self.embedding_activation,
                                     alpha=shared, mask=mask1)

        output = EncoderOutput(
            hidden=layer0["out"],
            embedding=layer1["out"],
            alpha0=support.as_matrix(layer0["alpha"]),
            alpha1=support.as_matrix(layer1["alpha"]),
        )
        output._cache.update(support=support, layer0=layer0, layer1=layer1)
        return output

    def backward(self, output: EncoderOutput, dZ: np.ndarray) -> None:
        """Accumulate dL/dparams given dL/dZ."""
        support: _Support = output._cache["support"]
        layer0, layer1 = output._cache["layer0"], output._cache["layer1"]
        W0, W1 = self.params["W0"], self.params["W1"]
        a0, a1 = self.params["a0"], self.params["a1"]

        dH1, d_alpha_shared = self._layer_backward(layer1, dZ, W1, a1, support, need_input_grad=True)
        if layer1["input_mask"] is not None:
            dH1 = dH1 * layer1["input_mask"]
        self._layer_backward(layer0, dH1, W0, a0, support, need_input_grad=False,
                             extra_d_alpha=d_alpha_shared)

    def _layer_forward(self, H: np.ndarray, W: np.ndarray, a: np.ndarray, support: _Support,
                       activation: str, alpha: Optional[np.ndarray] = None,
                       mask: Optional[np.ndarray] = None) -> Dict[str, Any]:
        G = matmul(H, W)
        attention_cache = None
        if alpha is None:
            alpha, attention_cache = _attention_forward(G, a, support)
        pre = support.as_matrix(alpha) @ G
        out = leaky_relu(pre) if activation == "leaky_relu" else pre
        return {
            "H": H, "G": G, "alpha": alpha, "pre": pre, "out": out,
            "activation": activation, "attention": attention_cache,
            "input_mask": mask,
        }

    def _layer_backward(self, layer: Dict[str, Any], d_out: np.ndarray, W, a, support: _Support,
                        need_input_grad: bool,
                        extra_d_alpha: Optional[np.ndarray] = None) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        d_pre = leaky_relu_backward(d_out, layer["pre"]) if layer["activation"] == "leaky_relu" else d_out
        G = layer["G"]
        dG = support.as_matrix(layer["alpha"]).T @ d_pre
        d_alpha = edge_dot(d_pre, G, support.rows, support.cols)

        if layer["attention"] is None:
            # Attention borrowed from the first layer; hand its gradient back.
            passthrough = d_alpha
        else:
            passthrough = None
            if extra_d_alpha is not None:
                d_alpha = d_alpha + extra_d_alpha
            dG_attention, da = _attention_backward(d_alpha, a.data, layer["attention"], support)
            dG = dG + dG_attention
            a.accumulate(da)

        W.accumulate(layer["H"].T @ dG)
        d_input = dG @ W.data.T if need_input_grad else None
        return d_input, passthrough

    def _dropout(self, H: np.ndarray, training: bool) -> Tuple[np.ndarray, Optional[np.ndarray]]:
        """Inverted dropout driven by the store's seeded generator."""
        if not training or self.dropout <= 0.0:
            return H, None
        keep = 1.0 - self.dropout
        mask = (self.params.rng.random(H.shape) < keep) / keep
        return H * mask, mask


def decode_logits(Z: np.ndarray) -> np.ndarray:
    """S = Z Z^T, symmetrized so that S_ij and S_ji are bit-identical."""
    S = Z @ Z.T
    return (S + S.T) * 0.5


def decode(Z: np.ndarray) -> np.ndarray:
    """Inner product decoder: A-hat_ij = sigmoid(z_i . z_j), kept strictly inside (0, 1)."""
    return np.clip(sigmoid(decode_logits(Z)), _PROB_FLOOR, _PROB_CEIL)


def positive_weight(g: Graph) -> float:
    """w_pos = (#zero entries of A) / (#one entries of A)."""
    ones = 2 * g.num_edges
    if ones == 0:
        raise GraphClusterException(
            "Reconstruction loss is undefined for a graph without edges", module="gat-autoencoder"
        )
    return (g.n * g.n - ones) / ones


def reconstruction_loss(g: Graph, a_hat: np.ndarray) -> float:
    """
    Class-weighted binary cross-entropy between A and A-hat, averaged over all
    n^2 ordered pairs.
    """
    w_pos = positive_weight(g)
    rows, cols = _ordered_edges(g)
    clipped = np.clip(a_hat, _LOG_FLOOR, 1.0 - 1e-16)
    negative_terms = -np.log1p(-clipped)
    total = negative_terms.sum() - negative_terms[rows, cols].sum()
    total += w_pos * -np.log(clipped[rows, cols]).sum()
    return float(total / (g.n * g.n))


def reconstruction_loss_and_grad(g: Graph, Z: np.ndarray) -> Tuple[float, np.ndarray]:
    """Full-pair reconstruction loss from logits, with dL/dZ."""
    n2 = float(g.n * g.n)
    w_pos = positive_weight(g)
    rows, cols = _ordered_edges(g)

    S = decode_logits(Z)
    edge_logits = S[rows, cols]
    negative_terms = softplus(S)
    total = negative_terms.sum() - negative_terms[rows, cols].sum()
    total += w_pos * softplus(-edge_logits).sum()

    dS = sigmoid(S) / n2
    dS[rows, cols] = w_pos * (sigmoid(edge_logits) - 1.0) / n2
    dZ = (dS + dS.T) @ Z
    return float(total / n2), dZ


def sample_pairs(g: Graph, rng: np.random.Generator) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """All ordered positive pairs plus as many uniformly drawn non-edge pairs."""
    rows, cols = _ordered_edges(g)
    count = rows.size
    edge_keys = np.sort(rows.astype(np.int64) * g.n + cols)

    negatives = np.empty(0, dtype=np.int64)
    while negatives.size < count:
        draw = rng.integers(0, g.n * g.n, size=2 * (count - negatives.size))
        hit = np.searchsorted(edge_keys, draw)
        hit = np.minimum(hit, edge_keys.size - 1)
        negatives = np.concatenate([negatives, draw[edge_keys[hit] != draw]])
    negatives = negatives[:count]

    pair_rows = np.concatenate([rows, negatives // g.n])
    pair_cols = np.concatenate([cols, negatives % g.n])
    targets = np.concatenate([np.ones(count), np.zeros(count)])
    return pair_rows, pair_cols, targets


def sampled_reconstruction_loss_and_grad(g: Graph, Z: np.ndarray,
                                         rng: np.random.Generator) -> Tuple[float, np.ndarray]:
    """Balanced cross-entropy over positives plus sampled negatives, with dL/dZ."""
    pair_rows, pair_cols, targets = sample_pairs(g, rng)
    logits = edge_dot(Z, Z, pair_rows, pair_cols)
    count = float(targets.size)
    loss = (targets * softplus(-logits) + (1.0 - targets) * softplus(logits)).sum() / count

    d_logits = (sigmoid(logits) - targets) / count
    D = sp.csr_matrix((d_logits, (pair_rows, pair_cols)), shape=(g.n, g.n))
    dZ = D @ Z + D.T @ Z
    return float(loss), np.asarray(dZ)


def _ordered_edges(g: Graph) -> Tuple[np.ndarray, np.ndarray]:
    """Both orientations of every undirected edge."""
    rows = np.concatenate([g.edges[:, 0], g.edges[:, 1]])
    cols = np.concatenate([g.edges[:, 1], g.edges[:, 0]])
    return rows, cols


def encode(g: Graph, prox: ProximityMatrix, params: ParamStore,
           embedding_activation: str = "identity", shared_attention: bool = False) -> EncoderOutput:
    """Encode a graph with the given parameters (inference mode)."""
    model = GATAutoencoder(params, embedding_activation, shared_attention)
    return model.encode(g, prox)


__all__ = [
    "GATAutoencoder",
    "attention_coefficients",
    "decode",
    "decode_logits",
    "encode",
    "positive_weight",
    "reconstruction_loss",
    "reconstruction_loss_and_grad",
    "sample_pairs",
    "sampled_reconstruction_loss_and_grad",
]
