"""Fully connected Q-network in plain numpy (ReLU hidden layers, linear output)."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import ShapeError

HIDDEN = (128, 128, 128, 128)


class QNetwork:
    def __init__(self, weights: Sequence[np.ndarray], biases: Sequence[np.ndarray]):
        if len(weights) != len(biases):
            raise ShapeError("one bias per weight matrix")
        for w, b, nxt in zip(weights, biases, list(weights[1:]) + [None]):
            if w.ndim != 2 or b.shape != (w.shape[1],):
                raise ShapeError(f"bad layer shapes {w.shape} / {b.shape}")
            if nxt is not None and nxt.shape[0] != w.shape[1]:
                raise ShapeError("consecutive layers do not chain")
        dtype = weights[0].dtype if np.issubdtype(weights[0].dtype, np.floating) else np.float64
        self.weights = [np.asarray(w, dtype=dtype) for w in weights]
        self.biases = [np.asarray(b, dtype=dtype) for b in biases]

    @property
    def dtype(self) -> np.dtype:
        return self.weights[0].dtype

    def astype(self, dtype) -> "QNetwork":
        return QNetwork([w.astype(dtype) for w in self.weights], [b.astype(dtype) for b in self.biases])

    @classmethod
    def init(cls, input_dim: int, n_actions: int, rng: np.random.Generator,
             hidden: Sequence[int] = HIDDEN) -> "QNetwork":
        """He-initialised weights, zero biases."""
        sizes = [input_dim, *hidden, n_actions]
        weights = [rng.normal(0.0, np.sqrt(2.0 / fan_in), size=(fan_in, fan_out))
                   for fan_in, fan_out in zip(sizes[:-1], sizes[1:])]
        return cls(weights, [np.zeros(s) for s in sizes[1:]])

    @classmethod
    def zeros(cls, input_dim: int, n_actions: int, hidden: Sequence[int] = HIDDEN) -> "QNetwork":
        sizes = [input_dim, *hidden, n_actions]
        return cls([np.zeros((a, b)) for a, b in zip(sizes[:-1], sizes[1:])],
                   [np.zeros(s) for s in sizes[1:]])

    @property
    def layer_sizes(self) -> list[int]:
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def input_dim(self) -> int:
        return self.weights[0].shape[0]

    @property
    def n_actions(self) -> int:
        return self.weights[-1].shape[1]

    def n_params(self) -> int:
        return sum(w.size + b.size for w, b in zip(self.weights, self.biases))

    def copy(self) -> "QNetwork":
        return QNetwork([w.copy() for w in self.weights], [b.copy() for b in self.biases])

    def parameters(self) -> list[np.ndarray]:
        out = []
        for w, b in zip(self.weights, self.biases):
            out += [w, b]
        return out

    def get_flat(self) -> np.ndarray:
        return np.concatenate([p.ravel() for p in self.parameters()])

    def set_flat(self, flat: np.ndarray) -> None:
        i = 0
        for p in self.parameters():
            p[...] = flat[i:i + p.size].reshape(p.shape)
            i += p.size

    def forward(self, x: np.ndarray) -> np.ndarray:
        return self.forward_cache(x)[0]

    def forward_cache(self, x: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
        x = np.asarray(x, dtype=self.dtype)
        single = x.ndim == 1
        if single:
            x = x[None, :]
        if x.ndim != 2 or x.shape[1] != self.input_dim:
            raise ShapeError(f"expected features of length {self.input_dim}, got {x.shape}")
        acts = [x]
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            h = z if i == last else np.maximum(z, 0.0)
            acts.append(h)
        return (h[0] if single else h), acts

    def backward(self, acts: list[np.ndarray], dout: np.ndarray) -> list[np.ndarray]:
        """Gradients of a scalar loss given dLoss/dOutput, in ``parameters()`` order."""
        grads: list[np.ndarray] = []
        delta = dout
        for i in range(len(self.weights) - 1, -1, -1):
            grads.append(delta.sum(axis=0))
            grads.append(acts[i].T @ delta)
            if i:
                delta = (delta @ self.weights[i].T) * (acts[i] > 0)
        grads.reverse()  # now [W0, b0, W1, b1, ...]
        return grads


def forward(net: QNetwork, features: np.ndarray) -> np.ndarray:
    return net.forward(features)


def huber(diff: np.ndarray, delta: float = 1.0) -> np.ndarray:
    a = np.abs(diff)
    return np.where(a <= delta, 0.5 * diff ** 2, delta * (a - 0.5 * delta))


def huber_grad(diff: np.ndarray, delta: float = 1.0) -> np.ndarray:
    return np.clip(diff, -delta, delta)


def q_loss_and_grads(net: QNetwork, obs: np.ndarray, actions: np.ndarray, targets: np.ndarray,
                     delta: float = 1.0) -> tuple[float, list[np.ndarray]]:
    """Mean Huber loss of q(obs)[action] against fixed targets, with its gradient."""
    q, acts = net.forward_cache(obs)
    rows = np.arange(len(actions))
    diff = q[rows, actions] - targets
    loss = float(huber(diff, delta).mean())
    dq = np.zeros_like(q)
    dq[rows, actions] = huber_grad(diff, delta) / len(actions)
    return loss, net.backward(acts, dq)
