"""Optimization drivers: alternating nonlinear fit, convex combination, and
closed-form linear baselines.

Both iterative models alternate stochastic gradient steps on the network
weights with an exact representation update obtained from a Sylvester
solve; the convex-combination variant additionally carries a linear
representation computed once from the raw data.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .flnn import (
    activation_pair,
    forward,
    forward_batch,
    grad_w,
    init_network,
    sgd_step,
    NetworkState,
)
from .graph import SimilarityGraph, laplacian
from .linalg import NumericalError, as_matrix, solve_linear, solve_sylvester

__all__ = [
    "FlnnscConfig",
    "CcscConfig",
    "SolveTrace",
    "Representation",
    "objective_flnnsc",
    "zstep_objective",
    "update_z",
    "fit_flnnsc",
    "fit_ccsc",
    "fit_lsr",
    "fit_linear_smr",
]

# Residual bound for an accepted representation update, relative to the
# Gram matrix norm; the non-increase check on the partial objective uses
# _OBJ_RTOL relative slack.
_Z_RESIDUAL_RTOL = 1e-8
_OBJ_RTOL = 1e-9


@dataclass(frozen=True)
class FlnnscConfig:
    """Hyperparameters of the alternating fit.

    ``alpha`` weighs the Laplacian (grouping) regularizer, ``beta`` the
    weight decay, ``mu`` the learning rate. Convergence is declared when
    the squared Frobenius change of the representation drops to ``tol``.
    ``mu_decay`` multiplies the learning rate once per outer iteration;
    the geometric schedule lets the weight updates die out so the
    representation actually reaches a fixed point (1.0 keeps mu flat).
    """

    alpha: float = 1.0
    beta: float = 1.0
    mu: float = 1e-2
    max_outer_iters: int = 100
    inner_epochs: int = 1
    tol: float = 1e-6
    seed: int = 0
    activation: str = "tanh"
    mu_decay: float = 0.85

    def __post_init__(self):
        if self.alpha < 0:
            raise ValueError(f"alpha must be non-negative, got {self.alpha}")
        if self.beta < 0:
            raise ValueError(f"beta must be non-negative, got {self.beta}")
        if not self.mu > 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be >= 1")
        if self.inner_epochs < 1:
            raise ValueError("inner_epochs must be >= 1")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        activation_pair(self.activation)
        if not 0.0 < self.mu_decay <= 1.0:
            raise ValueError(f"mu_decay must lie in (0, 1], got {self.mu_decay}")


@dataclass(frozen=True)
class CcscConfig:
    """Convex-combination fit: ``lam`` in [0, 1] balances the nonlinear
    representation (lam=1) against the linear one (lam=0)."""

    base: FlnnscConfig = field(default_factory=FlnnscConfig)
    lam: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam}")


@dataclass
class SolveTrace:
    """Per-outer-iteration diagnostics of an alternating fit.

    The first three arrays are the convergence record proper; the last
    three make the exactness of each representation update auditable
    (relative Sylvester residual and the partial objective on either side
    of the update). ``z2_*`` fields are set once for the combination
    model's linear solve.
    """

    objective: list = field(default_factory=list)
    z_delta: list = field(default_factory=list)
    seconds: list = field(default_factory=list)
    z_residual: list = field(default_factory=list)
    zstep_obj_before: list = field(default_factory=list)
    zstep_obj_after: list = field(default_factory=list)
    z2_residual: float | None = None
    z2_obj_before: float | None = None
    z2_obj_after: float | None = None

    @property
    def iterations(self) -> int:
        return len(self.z_delta)


@dataclass(frozen=True)
class Representation:
    """Self-representation matrix; the combination model also stores the
    nonlinear (``z1``) and linear (``z2``) parts it blends."""

    z: np.ndarray
    z1: np.ndarray | None = None
    z2: np.ndarray | None = None


def zstep_objective(h, z, lap, alpha: float) -> float:
    """Partial objective ``0.5 |h - h z|_F^2 + (alpha/2) tr(z lap z^T)``."""
    h = as_matrix(h, "h")
    z = as_matrix(z, "z")
    lap = as_matrix(lap, "laplacian")
    if z.shape != (h.shape[1], h.shape[1]):
        raise ValueError(f"z must be {h.shape[1]}x{h.shape[1]}, got {z.shape}")
    if lap.shape != z.shape:
        raise ValueError(f"laplacian must match z, got {lap.shape} vs {z.shape}")
    fit = 0.5 * float(np.linalg.norm(h - h @ z)) ** 2
    grouping = 0.5 * alpha * float(np.sum((z @ lap) * z))
    return fit + grouping


def objective_flnnsc(h, z, w, lap, alpha: float, beta: float) -> float:
    """Full objective: fit + grouping regularizer + weight decay."""
    w = as_matrix(w, "w")
    return zstep_objective(h, z, lap, alpha) + 0.5 * beta * float(np.linalg.norm(w)) ** 2


def update_z(h, lap, alpha: float) -> np.ndarray:
    """Exact representation update: solve ``h^T h z + alpha z lap = h^T h``.

    This is the stationarity condition of the partial objective in ``z``;
    the accepted solution must satisfy the residual bound relative to
    ``|h^T h|_F`` or a :class:`NumericalError` is raised.
    """
    h = as_matrix(h, "h")
    lap = as_matrix(lap, "laplacian")
    if alpha < 0:
        raise ValueError(f"alpha must be non-negative, got {alpha}")
    n = h.shape[1]
    if lap.shape != (n, n):
        raise ValueError(f"laplacian must be {n}x{n}, got {lap.shape}")
    gram = h.T @ h
    z = solve_sylvester(gram, alpha * lap, gram)
    resid = float(np.linalg.norm(gram @ z + alpha * (z @ lap) - gram))
    bound = _Z_RESIDUAL_RTOL * max(float(np.linalg.norm(gram)), 1e-12)
    if resid > bound:
        raise NumericalError(
            f"representation update residual {resid:.3e} exceeds bound {bound:.3e}"
        )
    return z


def _relative_z_residual(gram: np.ndarray, z: np.ndarray, lap: np.ndarray, alpha: float) -> float:
    denom = max(float(np.linalg.norm(gram)), 1e-12)
    return float(np.linalg.norm(gram @ z + alpha * (z @ lap) - gram)) / denom


def _check_non_increase(before: float, after: float, what: str, iteration: int) -> None:
    if after > before + _OBJ_RTOL * max(1.0, abs(before)):
        raise NumericalError(
            f"{what} objective increased at iteration {iteration}: "
            f"{before:.12g} -> {after:.12g}"
        )


def _validate_fit_inputs(x, graph: SimilarityGraph):
    x = as_matrix(x, "x")
    n = x.shape[1]
    if n < 2:
        raise ValueError(f"need at least 2 samples, got {n}")
    if float(np.max(np.abs(x))) > 1.0 + 1e-9:
        raise ValueError("data must be scaled to [-1, 1] before fitting")
    if graph.s.shape != (n, n):
        raise ValueError(
            f"similarity graph is {graph.s.shape} but the data has {n} samples"
        )
    return x, laplacian(graph)


def _epoch(net: NetworkState, x: np.ndarray, h: np.ndarray, z: np.ndarray,
           order: np.ndarray, lam: float | None) -> NetworkState:
    """One pass of per-sample gradient steps with ``h`` and ``z`` fixed."""
    for i in order:
        xi = x[:, i]
        hi = forward(net, xi)
        g = grad_w(net, xi, hi, h, z[:, i])
        if lam is not None:
            g = lam * g
        net = sgd_step(net, g)
    return net


def fit_flnnsc(x, graph: SimilarityGraph, cfg: FlnnscConfig):
    """Alternating fit of the nonlinear self-representation model.

    Each outer iteration runs ``inner_epochs`` passes of per-sample
    weight updates (network outputs fixed at the previous batch forward
    pass), recomputes the batch outputs, and solves exactly for the
    representation. Stops when the squared change of the representation
    falls to ``cfg.tol`` or after ``cfg.max_outer_iters`` iterations.

    Returns ``(representation, network, trace)``.
    """
    return _fit_alternating(x, graph, cfg, lam=None)


def fit_ccsc(x, graph: SimilarityGraph, cfg: CcscConfig):
    """Alternating fit of the convex-combination model.

    Identical alternation with the gradient scaled by ``lam``; the linear
    representation (solved from the raw data) has no dependence on the
    network, so it is computed once and cached. The returned
    representation blends the two parts: ``z = lam z1 + (1 - lam) z2``.
    At ``lam = 1`` the run reproduces :func:`fit_flnnsc` exactly under
    the same seed.
    """
    return _fit_alternating(x, graph, cfg.base, lam=cfg.lam)


def _fit_alternating(x, graph: SimilarityGraph, cfg: FlnnscConfig, lam: float | None):
    x, lap = _validate_fit_inputs(x, graph)
    d, n = x.shape

    rng = np.random.default_rng(cfg.seed)
    net = init_network(d, rng, activation=cfg.activation, mu=cfg.mu, beta=cfg.beta)
    mu0 = cfg.mu

    trace = SolveTrace()
    z1 = np.zeros((n, n))
    z_combined = np.zeros((n, n))
    h = forward_batch(net, x)

    z2 = None
    if lam is not None:
        gram_x = x.T @ x
        before = zstep_objective(x, np.zeros((n, n)), lap, cfg.alpha)
        z2 = update_z(x, lap, cfg.alpha)
        trace.z2_residual = _relative_z_residual(gram_x, z2, lap, cfg.alpha)
        trace.z2_obj_before = before
        trace.z2_obj_after = zstep_objective(x, z2, lap, cfg.alpha)
        _check_non_increase(trace.z2_obj_before, trace.z2_obj_after, "linear part", 0)

    for it in range(1, cfg.max_outer_iters + 1):
        tic = time.perf_counter()

        if cfg.mu_decay != 1.0:
            net = replace(net, mu=mu0 * cfg.mu_decay ** (it - 1))
        for _ in range(cfg.inner_epochs):
            net = _epoch(net, x, h, z1, rng.permutation(n), lam)

        h = forward_batch(net, x)
        gram = h.T @ h

        obj_before = zstep_objective(h, z1, lap, cfg.alpha)
        z1_new = update_z(h, lap, cfg.alpha)
        obj_after = zstep_objective(h, z1_new, lap, cfg.alpha)
        _check_non_increase(obj_before, obj_after, "representation", it)

        if lam is None:
            z_new = z1_new
            objective = obj_after + 0.5 * cfg.beta * float(np.linalg.norm(net.w)) ** 2
        else:
            z_new = lam * z1_new + (1.0 - lam) * z2
            objective = (
                lam * obj_after
                + (1.0 - lam) * trace.z2_obj_after
                + 0.5 * cfg.beta * float(np.linalg.norm(net.w)) ** 2
            )
        if not np.isfinite(objective):
            raise NumericalError(f"objective became non-finite at iteration {it}")

        z_delta = float(np.linalg.norm(z_new - z_combined)) ** 2

        trace.objective.append(float(objective))
        trace.z_delta.append(z_delta)
        trace.seconds.append(time.perf_counter() - tic)
        trace.z_residual.append(_relative_z_residual(gram, z1_new, lap, cfg.alpha))
        trace.zstep_obj_before.append(obj_before)
        trace.zstep_obj_after.append(obj_after)

        z1 = z1_new
        z_combined = z_new
        if z_delta <= cfg.tol:
            break

    if lam is None:
        rep = Representation(z=z_combined)
    else:
        rep = Representation(z=z_combined, z1=z1, z2=z2)
    return rep, net, trace


def fit_lsr(x, lambda_reg: float) -> Representation:
    """Frobenius-regularized least-squares baseline.

    Closed form: ``z`` solves ``(x^T x + lambda I) z = x^T x``, which is
    SPD for any positive ``lambda_reg``.
    """
    x = as_matrix(x, "x")
    if not lambda_reg > 0:
        raise ValueError(f"lambda_reg must be positive, got {lambda_reg}")
    n = x.shape[1]
    gram = x.T @ x
    z = solve_linear(gram + lambda_reg * np.eye(n), gram)
    return Representation(z=z)


def fit_linear_smr(x, graph: SimilarityGraph, alpha: float) -> Representation:
    """Linear smooth-representation baseline: the representation solve of
    :func:`update_z` applied directly to the raw data matrix."""
    x = as_matrix(x, "x")
    n = x.shape[1]
    if graph.s.shape != (n, n):
        raise ValueError(
            f"similarity graph is {graph.s.shape} but the data has {n} samples"
        )
    return Representation(z=update_z(x, laplacian(graph), alpha))
