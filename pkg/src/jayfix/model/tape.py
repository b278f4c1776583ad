"""Minimal reverse-mode autodiff over numpy arrays.

Just enough machinery for an encoder-decoder transformer: broadcasted
add/mul, batched matmul, relu, embedding gather, fused layer-norm,
fused softmax, masked token cross-entropy, reshape/transpose, and
inverted dropout. Everything runs in float64 so finite-difference
gradient checks have headroom.

Graphs are built eagerly; ``backward(loss)`` walks the tape in reverse
topological order. Wrap inference in ``no_grad()`` to skip bookkeeping.
"""

from __future__ import annotations

from contextlib import contextmanager
from typing import Callable, Optional

import numpy as np

DTYPE = np.float64

_grad_enabled = True


@contextmanager
def no_grad():
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


class Tensor:
    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.asarray(data, dtype=DTYPE)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad and _grad_enabled
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Optional[Callable[[np.ndarray], None]] = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    def accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.data.shape}, grad={self.requires_grad})"


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward) -> Tensor:
    out = Tensor(data)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum grad down to `shape` (inverse of numpy broadcasting)."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad


def _as_array(x) -> np.ndarray:
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=DTYPE)


def add(a: Tensor, b) -> Tensor:
    b_data = _as_array(b)
    out_data = a.data + b_data

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad, a.data.shape))
        if isinstance(b, Tensor) and b.requires_grad:
            b.accumulate(_unbroadcast(grad, b.data.shape))

    parents = (a, b) if isinstance(b, Tensor) else (a,)
    return _make(out_data, parents, backward)


def mul(a: Tensor, b) -> Tensor:
    b_data = _as_array(b)
    out_data = a.data * b_data

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            a.accumulate(_unbroadcast(grad * b_data, a.data.shape))
        if isinstance(b, Tensor) and b.requires_grad:
            b.accumulate(_unbroadcast(grad * a.data, b.data.shape))

    parents = (a, b) if isinstance(b, Tensor) else (a,)
    return _make(out_data, parents, backward)


def matmul(a: Tensor, b: Tensor) -> Tensor:
    out_data = a.data @ b.data

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            ga = grad @ np.swapaxes(b.data, -1, -2)
            a.accumulate(_unbroadcast(ga, a.data.shape))
        if b.requires_grad:
            gb = np.swapaxes(a.data, -1, -2) @ grad
            b.accumulate(_unbroadcast(gb, b.data.shape))

    return _make(out_data, (a, b), backward)


def relu(x: Tensor) -> Tensor:
    mask = x.data > 0
    out_data = x.data * mask

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(grad * mask)

    return _make(out_data, (x,), backward)


def reshape(x: Tensor, shape: tuple[int, ...]) -> Tensor:
    out_data = x.data.reshape(shape)

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(grad.reshape(x.data.shape))

    return _make(out_data, (x,), backward)


def transpose(x: Tensor, axes: tuple[int, ...]) -> Tensor:
    out_data = x.data.transpose(axes)
    inverse = np.argsort(axes)

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(grad.transpose(inverse))

    return _make(out_data, (x,), backward)


def embedding(table: Tensor, ids: np.ndarray) -> Tensor:
    ids = np.asarray(ids, dtype=np.int64)
    if ids.size and (ids.min() < 0 or ids.max() >= table.data.shape[0]):
        raise ValueError("token id out of range")
    out_data = table.data[ids]

    def backward(grad: np.ndarray) -> None:
        if table.requires_grad:
            acc = np.zeros_like(table.data)
            np.add.at(acc, ids, grad)
            table.accumulate(acc)

    return _make(out_data, (table,), backward)


def layer_norm(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    var = (centered**2).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    normed = centered * inv_std
    out_data = normed * gain.data + bias.data

    def backward(grad: np.ndarray) -> None:
        if gain.requires_grad:
            gain.accumulate(_unbroadcast(grad * normed, gain.data.shape))
        if bias.requires_grad:
            bias.accumulate(_unbroadcast(grad, bias.data.shape))
        if x.requires_grad:
            n = x.data.shape[-1]
            g = grad * gain.data
            gx = (
                g - g.mean(axis=-1, keepdims=True)
                - normed * (g * normed).mean(axis=-1, keepdims=True)
            ) * inv_std
            x.accumulate(gx)

    return _make(out_data, (x, gain, bias), backward)


def softmax(x: Tensor, additive_mask: Optional[np.ndarray] = None) -> Tensor:
    scores = x.data if additive_mask is None else x.data + additive_mask
    scores = scores - scores.max(axis=-1, keepdims=True)
    exp = np.exp(scores)
    out_data = exp / exp.sum(axis=-1, keepdims=True)

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            dot = (grad * out_data).sum(axis=-1, keepdims=True)
            x.accumulate((grad - dot) * out_data)

    return _make(out_data, (x,), backward)


def dropout(x: Tensor, p: float, rng: Optional[np.random.Generator], train: bool) -> Tensor:
    if not train or p <= 0.0:
        return x
    assert rng is not None
    keep = (rng.random(x.data.shape) >= p) / (1.0 - p)
    out_data = x.data * keep

    def backward(grad: np.ndarray) -> None:
        if x.requires_grad:
            x.accumulate(grad * keep)

    return _make(out_data, (x,), backward)


def cross_entropy(logits: Tensor, targets: np.ndarray, mask: np.ndarray) -> Tensor:
    """Mean negative log-likelihood over positions where mask is true.

    logits: (..., V); targets: integer array matching logits[...,0] shape;
    an all-false mask yields a loss of exactly 0 with zero gradients.
    """
    targets = np.asarray(targets, dtype=np.int64)
    mask = np.asarray(mask, dtype=bool)
    count = int(mask.sum())
    shifted = logits.data - logits.data.max(axis=-1, keepdims=True)
    log_z = np.log(np.exp(shifted).sum(axis=-1, keepdims=True))
    log_probs = shifted - log_z
    picked = np.take_along_axis(log_probs, targets[..., None], axis=-1)[..., 0]
    if count == 0:
        out_data = np.asarray(0.0)
    else:
        out_data = -(picked * mask).sum() / count

    def backward(grad: np.ndarray) -> None:
        if logits.requires_grad and count > 0:
            probs = np.exp(log_probs)
            one_hot = np.zeros_like(probs)
            np.put_along_axis(one_hot, targets[..., None], 1.0, axis=-1)
            g = (probs - one_hot) * mask[..., None] / count
            logits.accumulate(g * grad)

    return _make(out_data, (logits,), backward)


def log_softmax_last(logits: np.ndarray) -> np.ndarray:
    """Plain-numpy log-softmax over the final axis (inference helper)."""
    shifted = logits - logits.max(axis=-1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))


def backward(loss: Tensor) -> None:
    """Reverse-accumulate gradients from a scalar loss."""
    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited or not node.requires_grad:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            stack.append((parent, False))
    loss.grad = np.ones_like(loss.data)
    for node in reversed(topo):
        if node._backward is not None and node.grad is not None:
            node._backward(node.grad)


def zero_grads(params) -> None:
    for p in params:
        p.grad = None
