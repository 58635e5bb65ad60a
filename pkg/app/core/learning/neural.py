"""Small fully connected Q-network in numpy.

ReLU hidden layers, linear output, optional inverted dropout on hidden
activations, exact backpropagation, global-norm gradient clipping, RMSProp.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.core.errors import DimensionMismatchError, DomainError
from app.core.utils.numerics import RngStream

INIT_RANGE = (-0.3, 0.3)


@dataclass
class Mlp:
    sizes: List[int]
    weights: List[np.ndarray]
    biases: List[np.ndarray]
    dropout: List[float] = field(default_factory=list)

    @property
    def n_inputs(self) -> int:
        return self.sizes[0]

    @property
    def n_outputs(self) -> int:
        return self.sizes[-1]

    def parameters(self) -> List[np.ndarray]:
        """Weights then biases, layer by layer (the order gradients use)."""
        params: List[np.ndarray] = []
        for w, b in zip(self.weights, self.biases):
            params.extend((w, b))
        return params

    def to_dict(self) -> Dict[str, Any]:
        return {
            "sizes": list(self.sizes),
            "dropout": list(self.dropout),
            "weights": [w.tolist() for w in self.weights],
            "biases": [b.tolist() for b in self.biases],
        }


@dataclass
class ForwardCache:
    inputs: List[np.ndarray]
    pre_activations: List[np.ndarray]
    masks: List[Optional[np.ndarray]]


@dataclass
class RmspropState:
    accumulators: List[np.ndarray]
    lr: float = 1.0
    rho: float = 0.9
    eps: float = 1e-8

    @classmethod
    def for_net(cls, net: Mlp, lr: float = 1.0, rho: float = 0.9, eps: float = 1e-8) -> "RmspropState":
        return cls(accumulators=[np.zeros_like(p) for p in net.parameters()], lr=lr, rho=rho, eps=eps)


def init(layer_sizes: Sequence[int], rng: RngStream, dropout: Optional[Sequence[float]] = None,
         init_range: Tuple[float, float] = INIT_RANGE) -> Mlp:
    """Weights and biases drawn uniformly from ``init_range``."""
    sizes = [int(s) for s in layer_sizes]
    if len(sizes) < 2 or min(sizes) < 1:
        raise DomainError(f"an MLP needs at least two positive layer sizes, got {sizes}")
    hidden = len(sizes) - 2
    dropout = list(dropout) if dropout is not None else [0.0] * hidden
    if len(dropout) != hidden or any(not 0.0 <= d < 1.0 for d in dropout):
        raise DomainError(f"need {hidden} dropout probabilities in [0, 1), got {dropout}")

    low, high = init_range
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.generator.uniform(low, high, size=(fan_out, fan_in)))
        biases.append(rng.generator.uniform(low, high, size=fan_out))
    return Mlp(sizes=sizes, weights=weights, biases=biases, dropout=dropout)


def forward(net: Mlp, inputs: np.ndarray, mode: str = "eval",
            rng: Optional[RngStream] = None) -> Tuple[np.ndarray, ForwardCache]:
    """Action values for one input vector or a batch (rows)."""
    x = np.asarray(inputs, dtype=float)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.shape[1] != net.n_inputs:
        raise DimensionMismatchError(f"input length {x.shape[1]} does not match layer size {net.n_inputs}")

    cache = ForwardCache(inputs=[], pre_activations=[], masks=[])
    last = len(net.weights) - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        cache.inputs.append(x)
        z = x @ w.T + b
        cache.pre_activations.append(z)
        if i == last:
            x = z
            break
        x = np.maximum(z, 0.0)
        p_drop = net.dropout[i]
        mask = None
        if mode == "train" and p_drop > 0.0:
            if rng is None:
                raise DomainError("train-mode dropout needs a random stream")
            mask = (rng.generator.random(x.shape) >= p_drop) / (1.0 - p_drop)
            x = x * mask
        cache.masks.append(mask)

    return (x[0] if single else x), cache


def backward(net: Mlp, cache: ForwardCache, loss_grads: np.ndarray) -> List[np.ndarray]:
    """Gradients of the loss w.r.t. ``net.parameters()`` given dLoss/dOutput."""
    delta = np.asarray(loss_grads, dtype=float)
    if delta.ndim == 1:
        delta = delta[None, :]

    grads: List[np.ndarray] = []
    for i in range(len(net.weights) - 1, -1, -1):
        grads.append(delta.sum(axis=0))
        grads.append(delta.T @ cache.inputs[i])
        if i == 0:
            break
        delta = delta @ net.weights[i]
        mask = cache.masks[i - 1]
        if mask is not None:
            delta = delta * mask
        delta = delta * (cache.pre_activations[i - 1] > 0.0)

    grads.reverse()
    return grads


def dqn_loss(outputs: np.ndarray, actions: np.ndarray, targets: np.ndarray) -> Tuple[float, np.ndarray]:
    """Mean squared TD error on the taken actions and its gradient on the outputs."""
    batch = outputs.shape[0]
    rows = np.arange(batch)
    errors = targets - outputs[rows, actions]
    grads = np.zeros_like(outputs)
    grads[rows, actions] = -2.0 * errors / batch
    return float(np.mean(errors ** 2)), grads


def global_norm(grads: Sequence[np.ndarray]) -> float:
    return float(np.sqrt(sum(float(np.sum(g * g)) for g in grads)))


def clip_gradients(grads: Sequence[np.ndarray], delta: float) -> List[np.ndarray]:
    """``delta * g / max(||g||_2, delta)`` over the concatenated gradient."""
    if not delta > 0.0:
        raise DomainError(f"clip threshold must be positive, got {delta}")
    scale = delta / max(global_norm(grads), delta)
    return [g * scale for g in grads]


def rmsprop_step(net: Mlp, grads: Sequence[np.ndarray], state: RmspropState) -> Tuple[Mlp, RmspropState]:
    """In-place RMSProp update of ``net``; returns the net and the state."""
    for param, grad, acc in zip(net.parameters(), grads, state.accumulators):
        acc *= state.rho
        acc += (1.0 - state.rho) * grad * grad
        param -= state.lr * grad / (np.sqrt(acc) + state.eps)
    return net, state


def copy_weights(src: Mlp, dst: Mlp) -> Mlp:
    """Overwrite ``dst`` parameters with copies of ``src``'s."""
    if src.sizes != dst.sizes:
        raise DimensionMismatchError(f"cannot copy weights between {src.sizes} and {dst.sizes}")
    for source, target in zip(src.parameters(), dst.parameters()):
        np.copyto(target, source)
    return dst


def clone(net: Mlp) -> Mlp:
    return Mlp(
        sizes=list(net.sizes),
        weights=[w.copy() for w in net.weights],
        biases=[b.copy() for b in net.biases],
        dropout=list(net.dropout),
    )
