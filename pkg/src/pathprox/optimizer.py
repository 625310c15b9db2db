"""Proximal-gradient training and a plain subgradient baseline.

One step is ``z <- prox_{eta * lam * g}(z - eta * grad f(z))`` with a
constant step size ``eta``. ``g`` is one of

* ``none``      no regularizer
* ``l1``        ``sum|V| + sum|W|`` (soft-thresholding)
* ``path``      the 1-path-norm (exact per-neuron prox)
* ``parseval``  hard bound ``||W||_inf, ||V.T||_inf <= 1/lam`` (projection)
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .activations import ActivationKind
from .model import error_rate, init_params, loss_and_grad
from .numerics import make_rng
from .pathnorm import ShallowParams, path_norm_1
from .prox_baselines import ParsevalConstraint, project_linf_opnorm, soft_threshold
from .prox_multi import prox_full
from .prox_single import prox_block_single

REGULARIZERS = ("none", "l1", "path", "parseval")
METHODS = ("prox", "subgradient")


@dataclass
class TrainConfig:
    reg: str = "path"
    lam: float = 0.0
    step: float = 0.05
    epochs: int = 20
    batch: int = 100
    seed: int = 0
    loss_kind: str = "cross_entropy"
    act: ActivationKind = ActivationKind.ELU
    method: str = "prox"

    def __post_init__(self):
        if self.reg not in REGULARIZERS:
            raise ValueError(f"reg must be one of {REGULARIZERS}, got {self.reg!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if not (self.lam >= 0 and math.isfinite(self.lam)):
            raise ValueError(f"lambda must be finite and non-negative, got {self.lam}")
        if not (self.step > 0 and math.isfinite(self.step)):
            raise ValueError(f"step must be positive, got {self.step}")
        if self.reg == "parseval" and self.lam <= 0:
            raise ValueError("parseval needs lambda > 0 (radius 1/lambda)")
        if self.epochs < 0 or self.batch < 1:
            raise ValueError("epochs must be >= 0 and batch >= 1")
        if isinstance(self.act, str):
            self.act = ActivationKind.parse(self.act)

    def echo(self) -> dict:
        d = asdict(self)
        d["act"] = self.act.value
        return d


@dataclass(frozen=True)
class IterateRecord:
    k: int
    F: float
    f: float
    g: float
    displacement: float  # ||z^k - z^{k-1}||_2, 0 for k = 0


@dataclass
class EpochMetrics:
    epoch: int
    objective: float
    reg_value: float
    nnz_fraction: float
    train_error: float
    clean_error: float | None
    robust_error: float | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(d.pop("extra"))
        return d


def reg_value(params: ShallowParams, reg: str) -> float:
    """Value of ``g``; the Parseval constraint contributes 0 (its indicator on the feasible set)."""
    if reg == "path":
        return path_norm_1(params)
    if reg == "l1":
        return float(np.abs(params.V).sum() + np.abs(params.W).sum())
    return 0.0


def nnz_fraction(params: ShallowParams) -> float:
    total = params.V.size + params.W.size
    if total == 0:
        return 0.0
    return (np.count_nonzero(params.V) + np.count_nonzero(params.W)) / total


def apply_regularizer(V, W, reg: str, coef: float, lam: float):
    """Prox (or projection) of ``coef * g`` at ``(V, W)``."""
    if reg == "none":
        return V, W
    if reg == "path":
        if V.shape[1] == 1:
            v, W = prox_block_single(V[:, 0], W, coef)
            return v[:, None], W
        return prox_full(V, W, coef)
    if reg == "l1":
        return soft_threshold(V, coef), soft_threshold(W, coef)
    c = ParsevalConstraint(1.0 / lam)
    # rows of V.T are the columns of V
    return project_linf_opnorm(V.T, c).T.copy(), project_linf_opnorm(W, c)


def reg_subgradient(params: ShallowParams, reg: str):
    """Almost-everywhere gradient of ``g``, taking 0 at kinks."""
    V, W = params.V, params.W
    if reg == "path":
        return (np.sign(V) * np.abs(W).sum(axis=1, keepdims=True),
                np.sign(W) * np.abs(V).sum(axis=1, keepdims=True))
    if reg == "l1":
        return np.sign(V), np.sign(W)
    return np.zeros_like(V), np.zeros_like(W)


def prox_grad_step(params: ShallowParams, grad_V, grad_W, cfg: TrainConfig) -> ShallowParams:
    """Gradient step on the smooth part, then the regularizer's prox with ``eta * lam``."""
    eta = cfg.step
    V = params.V - eta * np.asarray(grad_V)
    W = params.W - eta * np.asarray(grad_W)
    V, W = apply_regularizer(V, W, cfg.reg, eta * cfg.lam, cfg.lam)
    return ShallowParams(V, W)


def subgradient_step(params: ShallowParams, grad_V, grad_W, cfg: TrainConfig) -> ShallowParams:
    """Baseline: step along ``grad f + lam * subgrad g``.

    The Parseval constraint has no useful subgradient, so it is still
    enforced by projection.
    """
    eta = cfg.step
    sV, sW = reg_subgradient(params, cfg.reg)
    V = params.V - eta * (np.asarray(grad_V) + cfg.lam * sV)
    W = params.W - eta * (np.asarray(grad_W) + cfg.lam * sW)
    if cfg.reg == "parseval":
        V, W = apply_regularizer(V, W, "parseval", 0.0, cfg.lam)
    return ShallowParams(V, W)


class QuadraticObjective:
    """``f(V, W) = 0.5||V - A||^2 + 0.5||W - B||^2``; its gradient is 1-Lipschitz."""

    lipschitz = 1.0

    def __init__(self, A, B):
        self.A = np.asarray(A, dtype=np.float64)
        self.B = np.asarray(B, dtype=np.float64)

    def value_and_grad(self, params: ShallowParams):
        dV = params.V - self.A
        dW = params.W - self.B
        return 0.5 * float((dV * dV).sum() + (dW * dW).sum()), dV, dW


class NetworkObjective:
    """Mean training loss of a shallow network over a fixed dataset."""

    def __init__(self, act: ActivationKind, inputs, targets, loss_kind="cross_entropy"):
        self.act = act
        self.inputs = inputs
        self.targets = targets
        self.loss_kind = loss_kind

    def value_and_grad(self, params: ShallowParams):
        return loss_and_grad(params, self.act, self.inputs, self.targets, self.loss_kind)


def _record(k, objective, params, cfg, displacement):
    f, gV, gW = objective.value_and_grad(params)
    g = reg_value(params, cfg.reg)
    return IterateRecord(k, f + cfg.lam * g, f, g, displacement), gV, gW


def run_prox_grad(objective, cfg: TrainConfig, params: ShallowParams,
                  iters: int) -> list[IterateRecord]:
    """Deterministic full-gradient loop; returns ``iters + 1`` records (start included)."""
    if iters < 1:
        raise ValueError("iters must be >= 1")
    step = prox_grad_step if cfg.method == "prox" else subgradient_step
    rec, gV, gW = _record(0, objective, params, cfg, 0.0)
    records = [rec]
    for k in range(1, iters + 1):
        new = step(params, gV, gW, cfg)
        disp = math.sqrt(float(((new.V - params.V) ** 2).sum()
                               + ((new.W - params.W) ** 2).sum()))
        params = new
        rec, gV, gW = _record(k, objective, params, cfg, disp)
        records.append(rec)
    return records


def sufficient_decrease_check(records, eta: float, L: float) -> bool:
    """``F_{k-1} - F_k >= (1 - eta L) / (2 eta) * ||z^k - z^{k-1}||^2`` for every k."""
    if eta * L >= 1.0:
        raise ValueError(f"needs eta < 1/L, got eta={eta}, L={L}")
    coef = (1.0 - eta * L) / (2.0 * eta)
    for prev, cur in zip(records, records[1:]):
        slack = 1e-10 * max(1.0, abs(prev.F))
        if prev.F - cur.F < coef * cur.displacement ** 2 - slack:
            return False
    return True


def displacement_bound_check(records, eta: float, L: float, F_lower: float) -> bool:
    """``min_k ||z^k - z^{k-1}|| <= sqrt(2 (F_0 - F_lower) / ((1/eta - L) K))``."""
    c = 1.0 / eta
    if c <= L:
        raise ValueError(f"needs 1/eta > L, got 1/eta={c}, L={L}")
    K = len(records) - 1
    if K < 1:
        return True
    bound = math.sqrt(max(0.0, 2.0 * (records[0].F - F_lower)) / ((c - L) * K))
    smallest = min(r.displacement for r in records[1:])
    return smallest <= bound + 1e-12


def _split_seeds(seed: int):
    init, shuffle, attack = np.random.SeedSequence(seed).spawn(3)
    return (np.random.Generator(np.random.PCG64(init)),
            np.random.Generator(np.random.PCG64(shuffle)),
            np.random.Generator(np.random.PCG64(attack)))


def run_stochastic(train, test, cfg: TrainConfig, hidden: int,
                   params: ShallowParams | None = None, classes: int | None = None,
                   attack_eps: float | None = None):
    """Minibatch training; returns ``(params, [EpochMetrics, ...])``.

    ``train``/``test`` expose ``features`` (N, m) and integer ``labels``.
    The training order is shuffled every epoch from ``cfg.seed`` only, so a
    fixed config and dataset give identical metrics. Epoch 0 reports the
    initial point. The objective is the full training loss plus
    ``lam * g`` at the end of each epoch.
    """
    from .attack import AttackConfig, robust_error

    X, y = train.features, np.asarray(train.labels)
    N = X.shape[0]
    if N == 0:
        raise ValueError("empty training set")
    if classes is None:
        classes = max(2, int(y.max()) + 1)
    init_rng, shuffle_rng, attack_rng = _split_seeds(cfg.seed)
    if params is None:
        params = init_params(hidden, X.shape[1], classes, init_rng)
    step = prox_grad_step if cfg.method == "prox" else subgradient_step

    def metrics(epoch):
        f, _, _ = loss_and_grad(params, cfg.act, X, y, cfg.loss_kind)
        g = reg_value(params, cfg.reg)
        clean = rob = None
        if test is not None and test.features.shape[0]:
            clean = error_rate(params, cfg.act, test.features, test.labels)
            if attack_eps is not None:
                rob = robust_error(params, cfg.act, test.features, test.labels,
                                   AttackConfig(attack_eps), attack_rng)
        return EpochMetrics(epoch, f + cfg.lam * g, g, nnz_fraction(params),
                            error_rate(params, cfg.act, X, y), clean, rob)

    history = [metrics(0)]
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(N)
        for start in range(0, N, cfg.batch):
            idx = order[start:start + cfg.batch]
            _, gV, gW = loss_and_grad(params, cfg.act, X[idx], y[idx], cfg.loss_kind)
            params = step(params, gV, gW, cfg)
        history.append(metrics(epoch))
    return params, history
