"""
Central finite-difference check of hand-wired backward passes.
"""

import logging
from typing import Callable, Iterable, Optional

import numpy as np

from .exceptions import KernelException
from .params import Tensor

logger = logging.getLogger(__name__)


def grad_check(f: Callable[[], float],
               params: Iterable[Tensor],
               eps: float = 1e-5,
               samples_per_tensor: Optional[int] = None,
               seed: int = 0) -> float:
    """
    Compare analytic gradients with central differences.

    Args:
        f: Computes the scalar loss from the current tensor values and
           accumulates its gradient into each tensor's `grad`.
        params: Tensors to check.
        eps: Finite-difference step.
        samples_per_tensor: Coordinates sampled per tensor; all when None.
        seed: Seed of the coordinate sampler.

    Returns:
        max |analytic - numeric| / max(1, |numeric|) over the checked coordinates.

    Raises:
        KernelException: If f returns a non-finite loss.
    """
    tensors = list(params)
    _evaluate(f, tensors)
    analytic = [tensor.grad.copy() for tensor in tensors]

    rng = np.random.default_rng(seed)
    worst = 0.0
    for tensor, grad in zip(tensors, analytic):
        flat = tensor.data.reshape(-1)
        indices = np.arange(flat.size)
        if samples_per_tensor is not None and samples_per_tensor < flat.size:
            indices = rng.choice(flat.size, size=samples_per_tensor, replace=False)

        for index in indices:
            original = flat[index]
            flat[index] = original + eps
            plus = _evaluate(f, tensors)
            flat[index] = original - eps
            minus = _evaluate(f, tensors)
            flat[index] = original

            numeric = (plus - minus) / (2.0 * eps)
            error = abs(grad.reshape(-1)[index] - numeric) / max(1.0, abs(numeric))
            if error > worst:
                worst = error
                logger.debug("grad_check: %s[%d] analytic=%r numeric=%r",
                             tensor.name, index, grad.reshape(-1)[index], numeric)

    for tensor, grad in zip(tensors, analytic):
        tensor.grad[...] = grad
    return float(worst)


def _evaluate(f: Callable[[], float], tensors: Iterable[Tensor]) -> float:
    for tensor in tensors:
        tensor.zero_grad()
    value = float(f())
    if not np.isfinite(value):
        raise KernelException(f"Non-finite loss during gradient check: {value!r}")
    return value
