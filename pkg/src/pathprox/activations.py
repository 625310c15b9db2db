"""Smooth activations whose derivative lies in [0, 1]."""
from __future__ import annotations

import enum

import numpy as np


class ActivationKind(enum.Enum):
    ELU = "elu"
    SOFTPLUS = "softplus"
    IDENTITY = "identity"  # tests only

    def __call__(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self is ActivationKind.ELU:
            # expm1 on the clipped branch avoids overflow warnings for large z
            return np.where(z > 0, z, np.expm1(np.minimum(z, 0.0)))
        if self is ActivationKind.SOFTPLUS:
            return np.logaddexp(0.0, z)
        return z.copy()

    def derivative(self, z):
        z = np.asarray(z, dtype=np.float64)
        if self is ActivationKind.ELU:
            return np.where(z > 0, 1.0, np.exp(np.minimum(z, 0.0)))
        if self is ActivationKind.SOFTPLUS:
            # logistic sigmoid, written to stay finite for large |z|
            return np.exp(-np.logaddexp(0.0, -z))
        return np.ones_like(z)

    @classmethod
    def parse(cls, name: str) -> "ActivationKind":
        try:
            return cls(name.lower())
        except ValueError:
            raise ValueError(f"unknown activation {name!r}") from None
