"""Shallow network ``h(x) = V.T @ act(W @ x)`` without biases, its losses and
gradients, and stacks of such blocks.

Batches are row-major: ``X`` is (b, m) and the network output is (b, p).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import ActivationKind
from .numerics import ShapeError, as_matrix
from .pathnorm import ShallowParams, path_norm_1
from .prox_multi import prox_full

LOSS_KINDS = ("cross_entropy", "squared")


def init_params(n: int, m: int, p: int, rng: np.random.Generator) -> ShallowParams:
    """Uniform init in ``+-1/sqrt(fan_in)`` for both layers."""
    W = rng.uniform(-1.0, 1.0, size=(n, m)) / np.sqrt(m)
    V = rng.uniform(-1.0, 1.0, size=(n, p)) / np.sqrt(n)
    return ShallowParams(V, W)


def forward(params: ShallowParams, act: ActivationKind, x) -> np.ndarray:
    """Network output for one input (m,) or a batch (b, m)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.inputs:
        raise ShapeError(f"input has {x.shape[-1]} features, network expects {params.inputs}")
    return act(x @ params.W.T) @ params.V


def _check_labels(labels, b: int, p: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.shape != (b,):
        raise ShapeError(f"expected {b} labels, got shape {labels.shape}")
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(np.equal(np.mod(labels, 1), 0)):
            raise ValueError("labels must be integers")
        labels = labels.astype(np.int64)
    if b and (labels.min() < 0 or labels.max() >= p):
        raise ValueError(f"labels must lie in [0, {p}), got range "
                         f"[{labels.min()}, {labels.max()}]")
    return labels


def softmax_xent(logits, labels):
    """Per-sample cross-entropy and its gradient w.r.t. the logits."""
    shifted = logits - logits.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1))
    rows = np.arange(logits.shape[0])
    losses = lse - shifted[rows, labels]
    probs = np.exp(shifted - lse[:, None])
    probs[rows, labels] -= 1.0
    return losses, probs


def _output_loss(H, targets, loss_kind: str):
    """Per-sample losses and d(loss_i)/dH_i."""
    b, p = H.shape
    if loss_kind == "cross_entropy":
        return softmax_xent(H, _check_labels(targets, b, p))
    if loss_kind == "squared":
        T = np.asarray(targets, dtype=np.float64)
        if T.shape != H.shape:
            raise ShapeError(f"targets {T.shape} do not match outputs {H.shape}")
        D = H - T
        return 0.5 * (D * D).sum(axis=1), D
    raise ValueError(f"unknown loss kind {loss_kind!r}")


def loss_and_grad(params: ShallowParams, act: ActivationKind, inputs, targets,
                  loss_kind: str = "cross_entropy"):
    """Mean loss over the batch and its gradients ``(loss, gV, gW)``.

    ``targets`` holds integer class ids for cross-entropy and a (b, p) array
    for the squared loss ``0.5 ||h(x) - t||^2``.
    """
    X = as_matrix(inputs, "inputs")
    if X.shape[1] != params.inputs:
        raise ShapeError(f"inputs have {X.shape[1]} features, network expects {params.inputs}")
    b = X.shape[0]
    if b == 0:
        raise ValueError("empty batch")
    Z = X @ params.W.T
    A = act(Z)
    H = A @ params.V
    losses, G = _output_loss(H, targets, loss_kind)
    G = G / b
    gV = A.T @ G
    gZ = (G @ params.V.T) * act.derivative(Z)
    gW = gZ.T @ X
    return float(losses.mean()), gV, gW


def input_gradient(params: ShallowParams, act: ActivationKind, inputs, labels):
    """Per-sample cross-entropy losses and their gradients w.r.t. the inputs."""
    X = np.asarray(inputs, dtype=np.float64)
    Z = X @ params.W.T
    H = act(Z) @ params.V
    losses, G = softmax_xent(H, _check_labels(labels, X.shape[0], params.outputs))
    gX = ((G @ params.V.T) * act.derivative(Z)) @ params.W
    return losses, gX


def predict(params: ShallowParams, act: ActivationKind, inputs) -> np.ndarray:
    return np.argmax(forward(params, act, inputs), axis=1)


def error_rate(params: ShallowParams, act: ActivationKind, inputs, labels) -> float:
    labels = np.asarray(labels)
    if labels.shape[0] == 0:
        return 0.0
    return float(np.mean(predict(params, act, inputs) != labels))


@dataclass
class MultilayerParams:
    """Shallow blocks applied in sequence with the activation in between.

    Block ``l`` maps ``blocks[l].inputs`` features to ``blocks[l].outputs``,
    which must equal ``blocks[l + 1].inputs``.
    """

    blocks: list

    def __post_init__(self):
        if not self.blocks:
            raise ValueError("need at least one block")
        for l in range(len(self.blocks) - 1):
            out_l = self.blocks[l].outputs
            in_next = self.blocks[l + 1].inputs
            if out_l != in_next:
                raise ShapeError(f"block {l} outputs {out_l} features but "
                                 f"block {l + 1} expects {in_next}")

    @classmethod
    def from_layers(cls, layers) -> "MultilayerParams":
        """Pair consecutive layer matrices ``[W1, V1, W2, V2, ...]`` into blocks.

        ``W`` matrices are (hidden, in) and ``V`` matrices are (hidden, out),
        as in :class:`ShallowParams`. An odd number of layers is rejected.
        """
        layers = list(layers)
        if len(layers) == 0 or len(layers) % 2:
            raise ValueError(f"need an even, non-zero number of layers, got {len(layers)}")
        return cls([ShallowParams(layers[i + 1], layers[i])
                    for i in range(0, len(layers), 2)])


def multilayer_forward(params: MultilayerParams, act: ActivationKind, x) -> np.ndarray:
    h = forward(params.blocks[0], act, x)
    for block in params.blocks[1:]:
        h = forward(block, act, act(h))
    return h


def multilayer_reg(params: MultilayerParams) -> float:
    """Sum of the blocks' 1-path-norms."""
    return float(sum(path_norm_1(b) for b in params.blocks))


def multilayer_prox(params: MultilayerParams, lam: float) -> MultilayerParams:
    """The regularizer separates over blocks, so each block gets its own prox."""
    out = []
    for b in params.blocks:
        V, W = prox_full(b.V, b.W, lam)
        out.append(ShallowParams(V, W))
    return MultilayerParams(out)
