"""Exact proximal operators for 1-path-norm regularized shallow networks."""
from .activations import ActivationKind
from .pathnorm import ShallowParams, path_norm_1, product_bound
from .prox_multi import prox_full, prox_multi
from .prox_single import prox_single

__version__ = "0.1.0"

__all__ = [
    "ActivationKind",
    "ShallowParams",
    "path_norm_1",
    "product_bound",
    "prox_full",
    "prox_multi",
    "prox_single",
]
