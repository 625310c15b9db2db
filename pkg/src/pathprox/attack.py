"""l_inf PGD attack on the cross-entropy of a shallow network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .activations import ActivationKind
from .model import forward, input_gradient
from .pathnorm import ShallowParams


@dataclass(frozen=True)
class AttackConfig:
    epsilon: float
    iters: int = 40
    step: float | None = None  # defaults to epsilon / 20
    random_init: bool = True
    clip: tuple[float, float] | None = (0.0, 1.0)

    def __post_init__(self):
        if not self.epsilon >= 0 or not np.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be finite and non-negative, got {self.epsilon}")
        if self.iters < 1:
            raise ValueError("iters must be >= 1")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")

    @property
    def step_size(self) -> float:
        return self.epsilon / 20.0 if self.step is None else self.step


def _project(z, X, eps, clip):
    if clip is not None:
        z = np.clip(z, clip[0], clip[1])
    # box last, so ||z - X||_inf <= eps holds even for inputs outside the clip range
    return np.clip(z, X - eps, X + eps)


def _attack(params, act, X, labels, cfg, rng):
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels)
    eps = cfg.epsilon
    if cfg.random_init and eps > 0:
        z = _project(X + rng.uniform(-eps, eps, size=X.shape), X, eps, cfg.clip)
    else:
        z = X.copy()
    if eps == 0:
        wrong = np.argmax(forward(params, act, X), axis=1) != labels
        return X.copy(), wrong
    losses, g = input_gradient(params, act, z, labels)
    best, best_loss = z.copy(), losses.copy()
    wrong = np.argmax(forward(params, act, z), axis=1) != labels
    for _ in range(cfg.iters):
        z = _project(z + cfg.step_size * np.sign(g), X, eps, cfg.clip)
        losses, g = input_gradient(params, act, z, labels)
        wrong |= np.argmax(forward(params, act, z), axis=1) != labels
        better = losses > best_loss  # strict: earliest iterate wins ties
        best[better] = z[better]
        best_loss[better] = losses[better]
    return best, wrong


def pgd_linf(params: ShallowParams, act: ActivationKind, X, labels,
             cfg: AttackConfig, rng: np.random.Generator) -> np.ndarray:
    """Adversarial inputs for a batch ``X`` (b, m).

    Sign-gradient ascent on the cross-entropy, projected onto the
    ``epsilon``-box around each input and the clip range. Returns the iterate
    with the highest loss (the start point included).
    """
    return _attack(params, act, X, labels, cfg, rng)[0]


def robust_error(params: ShallowParams, act: ActivationKind, X, labels,
                 cfg: AttackConfig, rng: np.random.Generator) -> float:
    """Fraction of inputs misclassified at some point along the attack path."""
    labels = np.asarray(labels)
    if labels.shape[0] == 0:
        return 0.0
    _, wrong = _attack(params, act, X, labels, cfg, rng)
    return float(np.mean(wrong))
