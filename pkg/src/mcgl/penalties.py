"""Penalties, the smooth part of the objective, and proximity operators.

The learning objective over edge weights ``w`` is

    F(w) = -lambda1 * huber_gamma(w) + lambda2/2 * ||w||^2
    G(w) = i_C(w) + lambda1 * ||w||_1 + <S, L(w)>
    H(L(w)) = -logdet(L(w) + J)

with ``J = 11^T / n`` and ``C`` the nonnegative orthant. ``lambda1 *
(||w||_1 - huber_gamma(w))`` is the minimax concave (MC) penalty; ``gamma_inv
= 0`` drops it back to plain l1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph_core import apply_L

SINGULAR_RTOL = 1e-12
SYMMETRY_ATOL = 1e-10


class EigenDecompositionError(RuntimeError):
    """The symmetric eigensolver failed to converge."""


@dataclass(frozen=True)
class PenaltyParams:
    """Regularization weights.

    ``gamma_inv`` is the MC concavity parameter; 0 means pure l1.
    """

    lambda1: float = 0.0
    lambda2: float = 0.0
    gamma_inv: float = 0.0

    def __post_init__(self):
        for name in ("lambda1", "lambda2", "gamma_inv"):
            value = getattr(self, name)
            if not (value >= 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be finite and >= 0, got {value}")

    @property
    def gamma(self) -> float:
        return math.inf if self.gamma_inv == 0 else 1.0 / self.gamma_inv

    @property
    def convex_mode(self) -> bool:
        """True when Tikhonov weight convexifies the MC term."""
        return self.lambda2 >= self.gamma_inv * self.lambda1


def _check_gamma(gamma: float) -> None:
    if not (gamma > 0 and math.isfinite(gamma)):
        raise ValueError(f"gamma must be positive and finite, got {gamma}")


def huber_envelope(w, gamma: float) -> float:
    """Moreau envelope of the l1 norm with index ``gamma`` (Huber function)."""
    _check_gamma(gamma)
    a = np.abs(np.asarray(w, dtype=float))
    return float(np.sum(np.where(a <= gamma, a * a / (2 * gamma), a - gamma / 2)))


def mc_penalty(w, gamma: float) -> float:
    """Minimax concave penalty ``||w||_1 - huber_envelope(w, gamma)``.

    Evaluated componentwise in closed form: ``|t| - t^2 / (2 gamma)`` below
    the threshold and the constant ``gamma / 2`` above it.
    """
    _check_gamma(gamma)
    a = np.abs(np.asarray(w, dtype=float))
    return float(np.sum(np.where(a <= gamma, a - a * a / (2 * gamma), gamma / 2)))


def soft_threshold(w, delta) -> np.ndarray:
    """Componentwise soft thresholding with positive thresholds ``delta``."""
    w = np.asarray(w, dtype=float)
    delta = np.asarray(delta, dtype=float)
    if delta.ndim and delta.shape != w.shape:
        raise ValueError(
            f"threshold shape {delta.shape} does not match {w.shape}")
    if np.any(delta <= 0):
        raise ValueError("thresholds must be strictly positive")
    return np.sign(w) * np.maximum(np.abs(w) - delta, 0.0)


def project_nonneg(w) -> np.ndarray:
    return np.maximum(np.asarray(w, dtype=float), 0.0)


def prox_G(w, tau: float, lambda1: float, Ls) -> np.ndarray:
    """Prox of ``tau * (i_C + lambda1 ||.||_1 + <., Ls>)``.

    ``Ls`` is ``apply_L_adjoint(S)``, computed once per problem.
    """
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    w = np.asarray(w, dtype=float)
    return project_nonneg(w - tau * lambda1 - tau * np.asarray(Ls, dtype=float))


def shift_matrix(n: int) -> np.ndarray:
    return np.full((n, n), 1.0 / n)


def sym_eigh(A: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    try:
        return np.linalg.eigh(A)
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc


def logdet_map(mu: np.ndarray, sigma: float) -> np.ndarray:
    """Eigenvalue map of the ``-logdet`` prox with index ``1/sigma``."""
    return 0.5 * (mu + np.sqrt(mu * mu + 4.0 / sigma))


def prox_neg_logdet_shifted(W, sigma: float) -> np.ndarray:
    """Prox of ``sigma^{-1} * (-logdet(. + J))`` at symmetric ``W``.

    Eigendecomposes ``W + J = Q diag(mu) Q^T`` and returns
    ``Q diag((mu + sqrt(mu^2 + 4/sigma)) / 2) Q^T - J``. Every mapped
    eigenvalue is positive, so any symmetric input is accepted, not only
    positive semidefinite ones.
    """
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    W = np.asarray(W, dtype=float)
    if W.ndim != 2 or W.shape[0] != W.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {W.shape}")
    if np.max(np.abs(W - W.T), initial=0.0) > SYMMETRY_ATOL * max(1.0, np.max(np.abs(W))):
        raise ValueError("input matrix is not symmetric")
    J = shift_matrix(W.shape[0])
    mu, Q = sym_eigh(0.5 * (W + W.T) + J)
    X = (Q * logdet_map(mu, sigma)) @ Q.T - J
    return 0.5 * (X + X.T)


def prox_H_conjugate(U, sigma: float) -> np.ndarray:
    """Prox of ``sigma * H^*`` through Moreau's decomposition."""
    U = np.asarray(U, dtype=float)
    return U - sigma * prox_neg_logdet_shifted(U / sigma, sigma)


def smooth_part(w, params: PenaltyParams) -> float:
    """``F(w) = -lambda1 * huber_gamma(w) + lambda2/2 ||w||^2``."""
    w = np.asarray(w, dtype=float)
    value = 0.5 * params.lambda2 * float(w @ w)
    if params.gamma_inv > 0:
        value -= params.lambda1 * huber_envelope(w, params.gamma)
    return value


def smooth_part_box_form(w, params: PenaltyParams) -> float:
    """``F`` written with the squared distance to the l-inf ball of radius gamma.

    Algebraically equal to ``smooth_part``; kept as an independent route.
    """
    w = np.asarray(w, dtype=float)
    if params.gamma_inv == 0:
        return 0.5 * params.lambda2 * float(w @ w)
    gamma = params.gamma
    excess = np.abs(w) - np.clip(np.abs(w), 0.0, gamma)
    return (params.lambda1 * params.gamma_inv * 0.5 * float(excess @ excess)
            + 0.5 * (params.lambda2 - params.gamma_inv * params.lambda1) * float(w @ w))


def grad_F(w, params: PenaltyParams) -> np.ndarray:
    """Gradient of ``smooth_part``.

    ``gamma_inv*lambda1 * soft_gamma(w) + (lambda2 - gamma_inv*lambda1) * w``,
    where ``soft_gamma`` thresholds at ``gamma = 1/gamma_inv`` (the prox of
    ``gamma ||.||_1``). It is ``lambda2``-Lipschitz whenever
    ``params.convex_mode`` holds.
    """
    w = np.asarray(w, dtype=float)
    if params.gamma_inv == 0:
        return params.lambda2 * w
    c = params.gamma_inv * params.lambda1
    return c * soft_threshold(w, params.gamma) + (params.lambda2 - c) * w


def logdet_shifted(theta) -> float:
    """``logdet(theta + J)``, or ``-inf`` when the shifted matrix is singular.

    Singular means the smallest eigenvalue is at most ``1e-12`` times the
    largest (in absolute value).
    """
    theta = np.asarray(theta, dtype=float)
    try:
        mu = np.linalg.eigvalsh(theta + shift_matrix(theta.shape[0]))
    except np.linalg.LinAlgError as exc:
        raise EigenDecompositionError(str(exc)) from exc
    top = np.max(np.abs(mu))
    if not np.isfinite(top) or mu[0] <= SINGULAR_RTOL * top:
        return -math.inf
    return float(np.sum(np.log(mu)))


def objective_P2(w, S, params: PenaltyParams) -> float:
    """Full objective ``F + G + H o L``; ``+inf`` outside the domain."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        return math.inf
    theta = apply_L(w)
    logdet = logdet_shifted(theta)
    if logdet == -math.inf:
        return math.inf
    S = np.asarray(S, dtype=float)
    return (smooth_part(w, params) + params.lambda1 * float(np.sum(w))
            + float(np.sum(S * theta)) - logdet)


def objective_from_adjoint(w, Ls, params: PenaltyParams) -> float:
    """Same as ``objective_P2`` given ``Ls = apply_L_adjoint(S)``."""
    w = np.asarray(w, dtype=float)
    if np.any(w < 0):
        return math.inf
    logdet = logdet_shifted(apply_L(w))
    if logdet == -math.inf:
        return math.inf
    return (smooth_part(w, params) + params.lambda1 * float(np.sum(w))
            + float(Ls @ w) - logdet)

