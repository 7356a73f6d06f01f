"""
Differentiable array kernels used by the encoder, decoder and clustering losses.

Every forward kernel has a matching `*_backward` that maps the gradient of a
scalar loss w.r.t. the kernel's output onto its inputs. Sparse rows are given
in CSR layout: a flat value array plus an `indptr` of length n + 1.
"""

from typing import Tuple

import numpy as np
from scipy.special import expit

from .exceptions import KernelException

LEAKY_SLOPE = 0.2

# Rows per chunk when gathering (nnz x width) temporaries
EDGE_CHUNK = 16384


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense matrix product with a shape check."""
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise KernelException(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def matmul_backward(grad: np.ndarray, a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Gradients of a @ b w.r.t. a and b."""
    return grad @ b.T, a.T @ grad


def leaky_relu(x: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    if not 0.0 < slope < 1.0:
        raise KernelException(f"LeakyReLU slope must lie in (0, 1), got {slope}")
    return np.where(x > 0, x, slope * x)


def leaky_relu_backward(grad: np.ndarray, x: np.ndarray, slope: float = LEAKY_SLOPE) -> np.ndarray:
    return grad * np.where(x > 0, 1.0, slope)


def sigmoid(x: np.ndarray) -> np.ndarray:
    """Logistic function; saturates without overflow."""
    return expit(x)


def sigmoid_backward(grad: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Gradient through y = sigmoid(x), given the forward output y."""
    return grad * y * (1.0 - y)


def softplus(x: np.ndarray) -> np.ndarray:
    """log(1 + exp(x)), computed stably."""
    return np.logaddexp(0.0, x)


def segment_sum(values: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Sum of each CSR row; every row must be nonempty."""
    return np.add.reduceat(values, indptr[:-1], axis=0)


def masked_row_softmax(logits: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """
    Softmax of each CSR row over its own support.

    Raises:
        KernelException: If any row is empty.
    """
    counts = np.diff(indptr)
    if np.any(counts == 0):
        empty = int(np.flatnonzero(counts == 0)[0])
        raise KernelException(f"Softmax row {empty} is empty")

    rows = np.repeat(np.arange(counts.size), counts)
    row_max = np.maximum.reduceat(logits, indptr[:-1])
    exp = np.exp(logits - row_max[rows])
    return exp / segment_sum(exp, indptr)[rows]


def masked_row_softmax_backward(grad: np.ndarray, out: np.ndarray, indptr: np.ndarray) -> np.ndarray:
    """Gradient through a row softmax, given its output."""
    rows = np.repeat(np.arange(indptr.size - 1), np.diff(indptr))
    inner = segment_sum(grad * out, indptr)
    return out * (grad - inner[rows])


def edge_dot(a: np.ndarray, b: np.ndarray, rows: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Row-wise dot products a[rows[e]] . b[cols[e]] for every edge e."""
    out = np.empty(rows.size, dtype=np.float64)
    for start in range(0, rows.size, EDGE_CHUNK):
        stop = start + EDGE_CHUNK
        out[start:stop] = np.einsum("ij,ij->i", a[rows[start:stop]], b[cols[start:stop]])
    return out


def check_finite(name: str, *arrays: np.ndarray) -> None:
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise KernelException(f"Non-finite values in {name}")
