"""
Trainable tensors, the encoder parameter store, initialization and optimizers.
"""

from typing import Any, Dict, Iterator, List, Sequence, Tuple

import numpy as np

from .exceptions import KernelException


class Tensor:
    """A named float64 array with a same-shape gradient accumulator."""

    def __init__(self, data: np.ndarray, name: str = "tensor"):
        self.name = name
        self.data = np.array(data, dtype=np.float64, order="C")
        self.grad = np.zeros_like(self.data)

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return int(self.data.size)

    def zero_grad(self) -> None:
        self.grad.fill(0.0)

    def accumulate(self, grad: np.ndarray) -> None:
        if grad.shape != self.data.shape:
            raise KernelException(
                f"Gradient for '{self.name}' has shape {grad.shape}, expected {self.data.shape}"
            )
        self.grad += grad

    def __repr__(self) -> str:
        return f"Tensor(name={self.name!r}, shape={self.shape})"


class ParamStore:
    """
    Encoder parameters: W0 (m x hidden), W1 (hidden x embed) and the attention
    vectors a0 (2 * hidden) and a1 (2 * embed).

    Shapes are fixed at construction. The store also owns the seeded random
    generator used for dropout masks.
    """

    NAMES = ("W0", "W1", "a0", "a1")

    def __init__(self, in_dim: int, hidden_dim: int = 256, embed_dim: int = 16,
                 seed: int = 0, initialize: bool = True):
        self.in_dim = in_dim
        self.hidden_dim = hidden_dim
        self.embed_dim = embed_dim
        self.seed = seed
        self._tensors: Dict[str, Tensor] = {
            "W0": Tensor(np.zeros((in_dim, hidden_dim)), "W0"),
            "W1": Tensor(np.zeros((hidden_dim, embed_dim)), "W1"),
            "a0": Tensor(np.zeros(2 * hidden_dim), "a0"),
            "a1": Tensor(np.zeros(2 * embed_dim), "a1"),
        }
        self.rng = np.random.default_rng([seed, 1])
        if initialize:
            xavier_init(self, seed)

    def __getitem__(self, name: str) -> Tensor:
        return self._tensors[name]

    def __iter__(self) -> Iterator[Tensor]:
        return iter(self.tensors())

    def tensors(self) -> List[Tensor]:
        return [self._tensors[name] for name in self.NAMES]

    def shapes(self) -> Dict[str, List[int]]:
        return {name: list(self._tensors[name].shape) for name in self.NAMES}

    def zero_grad(self) -> None:
        for tensor in self._tensors.values():
            tensor.zero_grad()

    def copy(self) -> "ParamStore":
        clone = ParamStore(self.in_dim, self.hidden_dim, self.embed_dim, self.seed, initialize=False)
        for name in self.NAMES:
            clone[name].data[...] = self[name].data
        clone.rng.bit_generator.state = self.rng.bit_generator.state
        return clone


def xavier_init(store: ParamStore, seed: int) -> None:
    """
    Glorot-uniform initialization, layer by layer in a fixed order.

    Matrices use their (rows, cols) as fan-in/fan-out; attention vectors are
    treated as (2 * width, 1) columns.
    """
    rng = np.random.default_rng(seed)
    for tensor in store.tensors():
        if tensor.data.ndim == 2:
            fan_in, fan_out = tensor.shape
        else:
            fan_in, fan_out = tensor.size, 1
        limit = np.sqrt(6.0 / (fan_in + fan_out))
        tensor.data[...] = rng.uniform(-limit, limit, size=tensor.shape)
        tensor.zero_grad()


def adam_step(params: Sequence[Tensor], first: Sequence[np.ndarray], second: Sequence[np.ndarray],
              step: int, lr: float, betas: Tuple[float, float] = (0.9, 0.999),
              eps: float = 1e-8) -> None:
    """
    One bias-corrected adaptive moment update, in place.

    Args:
        params: Tensors whose `grad` holds the current gradient.
        first, second: Moment buffers, one per tensor, updated in place.
        step: 1-based update count used for bias correction.
    """
    beta1, beta2 = betas
    correction1 = 1.0 - beta1 ** step
    correction2 = 1.0 - beta2 ** step
    for tensor, m, v in zip(params, first, second):
        m *= beta1
        m += (1.0 - beta1) * tensor.grad
        v *= beta2
        v += (1.0 - beta2) * np.square(tensor.grad)
        tensor.data -= lr * (m / correction1) / (np.sqrt(v / correction2) + eps)


class AdamOptimizer:
    """Adaptive moment estimation over a fixed list of tensors."""

    def __init__(self, params: Sequence[Tensor], lr: float,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 0.0):
        self.params = list(params)
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.step_count = 0
        self.first = [np.zeros_like(p.data) for p in self.params]
        self.second = [np.zeros_like(p.data) for p in self.params]

    def step(self) -> None:
        _apply_weight_decay(self.params, self.weight_decay)
        self.step_count += 1
        adam_step(self.params, self.first, self.second, self.step_count,
                  self.lr, self.betas, self.eps)

    def state_arrays(self) -> Dict[str, np.ndarray]:
        arrays: Dict[str, np.ndarray] = {}
        for tensor, m, v in zip(self.params, self.first, self.second):
            arrays[f"adam_m.{tensor.name}"] = m
            arrays[f"adam_v.{tensor.name}"] = v
        return arrays

    def load_state(self, step_count: int, arrays: Dict[str, np.ndarray]) -> None:
        self.step_count = step_count
        for tensor, m, v in zip(self.params, self.first, self.second):
            m[...] = arrays[f"adam_m.{tensor.name}"]
            v[...] = arrays[f"adam_v.{tensor.name}"]


class SGDOptimizer:
    """Plain gradient descent."""

    def __init__(self, params: Sequence[Tensor], lr: float, weight_decay: float = 0.0):
        self.params = list(params)
        self.lr = lr
        self.weight_decay = weight_decay
        self.step_count = 0

    def step(self) -> None:
        _apply_weight_decay(self.params, self.weight_decay)
        self.step_count += 1
        for tensor in self.params:
            tensor.data -= self.lr * tensor.grad

    def state_arrays(self) -> Dict[str, np.ndarray]:
        return {}

    def load_state(self, step_count: int, arrays: Dict[str, np.ndarray]) -> None:
        self.step_count = step_count


def make_optimizer(kind: str, params: Sequence[Tensor], lr: float,
                   betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                   weight_decay: float = 0.0) -> Any:
    """Create the optimizer named by a TrainConfig."""
    if kind == "adam":
        return AdamOptimizer(params, lr, betas=betas, eps=eps, weight_decay=weight_decay)
    if kind == "sgd":
        return SGDOptimizer(params, lr, weight_decay=weight_decay)
    raise KernelException(f"Unknown optimizer '{kind}'")


def _apply_weight_decay(params: Sequence[Tensor], weight_decay: float) -> None:
    # Only weight matrices are decayed; attention vectors and centers are not.
    if weight_decay <= 0.0:
        return
    for tensor in params:
        if tensor.name.startswith("W"):
            tensor.grad += weight_decay * tensor.data
