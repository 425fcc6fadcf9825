"""Functional-link network: trigonometric expansion, forward pass, gradient.

The network is a single layer: each input vector is expanded by fixed
second-order trigonometric features, multiplied by a trainable square
matrix, and passed through an elementwise activation. There is no hidden
layer, which is the whole point: nonlinearity comes from the expansion.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .linalg import as_matrix

__all__ = [
    "EXPANSION_KINDS",
    "ACTIVATION_KINDS",
    "expansion_factor",
    "expand",
    "expand_batch",
    "activation_pair",
    "NetworkState",
    "init_network",
    "forward",
    "forward_batch",
    "grad_w",
    "sgd_step",
]

EXPANSION_KINDS = ("trig2",)

_ACTIVATIONS = {
    "tanh": (np.tanh, lambda u: 1.0 - np.tanh(u) ** 2),
    "sigmoid": (expit, lambda u: expit(u) * (1.0 - expit(u))),
    "identity": (lambda u: np.asarray(u, dtype=np.float64), np.ones_like),
}
ACTIVATION_KINDS = tuple(_ACTIVATIONS)


def expansion_factor(kind: str = "trig2") -> int:
    """Output/input dimension ratio of an expansion kind."""
    if kind not in EXPANSION_KINDS:
        raise ValueError(f"unknown expansion kind {kind!r}, expected one of {EXPANSION_KINDS}")
    return 5


def expand(x, kind: str = "trig2") -> np.ndarray:
    """Expand a d-vector to 5d features: [x; sin(pi x); cos(pi x); sin(2 pi x); cos(2 pi x)].

    Blocks are stacked by term type, each of length d. Inputs are assumed
    to be scaled to [-1, 1] (the data module enforces this); outside one
    period the trigonometric features alias.
    """
    expansion_factor(kind)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"expand takes a 1-D vector, got shape {x.shape}")
    px = np.pi * x
    return np.concatenate([x, np.sin(px), np.cos(px), np.sin(2.0 * px), np.cos(2.0 * px)])


def expand_batch(x, kind: str = "trig2") -> np.ndarray:
    """Columnwise expansion of a (d, n) matrix to (5d, n)."""
    expansion_factor(kind)
    x = as_matrix(x, "x")
    px = np.pi * x
    return np.vstack([x, np.sin(px), np.cos(px), np.sin(2.0 * px), np.cos(2.0 * px)])


def activation_pair(name: str):
    """Return ``(rho, rho_prime)`` for an activation name."""
    try:
        return _ACTIVATIONS[name]
    except KeyError:
        raise ValueError(
            f"unknown activation {name!r}, expected one of {ACTIVATION_KINDS}"
        ) from None


@dataclass(frozen=True)
class NetworkState:
    """Trainable parameters plus the hyperparameters the updates need.

    ``w`` is the (5d, 5d) parameter matrix, ``mu`` the learning rate and
    ``beta`` the weight-decay strength.
    """

    w: np.ndarray
    activation: str = "tanh"
    expansion: str = "trig2"
    mu: float = 1e-2
    beta: float = 0.0

    def __post_init__(self):
        w = as_matrix(self.w, "w")
        if w.shape[0] != w.shape[1]:
            raise ValueError(f"w must be square, got shape {w.shape}")
        object.__setattr__(self, "w", w)
        activation_pair(self.activation)
        expansion_factor(self.expansion)
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")

    @property
    def expanded_dim(self) -> int:
        return self.w.shape[0]


def init_network(
    input_dim: int,
    rng=None,
    activation: str = "tanh",
    mu: float = 1e-2,
    beta: float = 0.0,
    expansion: str = "trig2",
) -> NetworkState:
    """Fresh network for d-dimensional inputs.

    Entries of ``w`` are drawn i.i.d. uniform on [-1/sqrt(5d), 1/sqrt(5d)]
    so the pre-activations start in the active region of tanh.
    """
    if input_dim < 1:
        raise ValueError(f"input_dim must be >= 1, got {input_dim}")
    rng = np.random.default_rng(rng)
    dim = expansion_factor(expansion) * input_dim
    bound = 1.0 / np.sqrt(dim)
    w = rng.uniform(-bound, bound, size=(dim, dim))
    return NetworkState(w=w, activation=activation, expansion=expansion, mu=mu, beta=beta)


def _check_input_dim(net: NetworkState, d: int, what: str) -> None:
    expected = net.expanded_dim
    if expansion_factor(net.expansion) * d != expected:
        raise ValueError(
            f"{what} has input dimension {d}, but the network expects "
            f"{expected // expansion_factor(net.expansion)}"
        )


def forward(net: NetworkState, x) -> np.ndarray:
    """Single-sample output ``rho(w @ expand(x))``."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"forward takes a 1-D sample, got shape {x.shape}")
    _check_input_dim(net, x.shape[0], "sample")
    rho, _ = activation_pair(net.activation)
    return rho(net.w @ expand(x, net.expansion))


def forward_batch(net: NetworkState, x) -> np.ndarray:
    """Stacked outputs: column i is ``forward(net, x[:, i])``."""
    x = as_matrix(x, "x")
    _check_input_dim(net, x.shape[0], "batch")
    rho, _ = activation_pair(net.activation)
    return rho(net.w @ expand_batch(x, net.expansion))


def grad_w(net: NetworkState, x_i, h_i, h, z_i) -> np.ndarray:
    """Gradient of the per-sample fit plus weight decay with respect to ``w``.

    Computes ``((h_i - h @ z_i) * rho'(w @ expand(x_i))) expand(x_i)^T
    + beta * w``, treating the stacked output matrix ``h`` as a constant
    (only the single-sample output ``h_i`` is differentiated through).
    """
    x_i = np.asarray(x_i, dtype=np.float64)
    h_i = np.asarray(h_i, dtype=np.float64)
    h = as_matrix(h, "h")
    z_i = np.asarray(z_i, dtype=np.float64)
    _check_input_dim(net, x_i.shape[0], "sample")
    dim = net.expanded_dim
    if h_i.shape != (dim,):
        raise ValueError(f"h_i must have shape ({dim},), got {h_i.shape}")
    if h.shape[0] != dim:
        raise ValueError(f"h must have {dim} rows, got {h.shape[0]}")
    if z_i.shape != (h.shape[1],):
        raise ValueError(f"z_i must have shape ({h.shape[1]},), got {z_i.shape}")

    phi = expand(x_i, net.expansion)
    _, rho_prime = activation_pair(net.activation)
    residual = h_i - h @ z_i
    grad = np.outer(residual * rho_prime(net.w @ phi), phi)
    if net.beta != 0.0:
        grad = grad + net.beta * net.w
    return grad


def sgd_step(net: NetworkState, grad) -> NetworkState:
    """One descent step ``w <- w - mu * grad``; other fields unchanged."""
    grad = as_matrix(grad, "grad")
    if grad.shape != net.w.shape:
        raise ValueError(f"grad shape {grad.shape} does not match w {net.w.shape}")
    return replace(net, w=net.w - net.mu * grad)
