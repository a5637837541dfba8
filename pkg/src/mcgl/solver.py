"""Primal-dual splitting solver for MC-penalized Laplacian learning.

One iteration:

1. ``w~ = P_C[w - tau L*(V) - tau (lambda1 1 + L*(S)) - tau grad_F(w)]``
2. eigendecompose ``J + V/sigma + L(2 w~ - w)`` and form the dual update
   ``V~ = V + sigma L(2 w~ - w) + sigma J - sigma U diag(map(nu)) U^T``
3. relax: ``(w, V) <- rho (w~, V~) + (1 - rho) (w, V)``

and the loop stops once ``||w_{k+1} - w_k||^2 / ||w_k||^2 <= epsilon`` at a
connected ``w_{k+1}``.
"""
from __future__ import annotations

import enum
import logging
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .graph_core import apply_L, apply_L_adjoint, is_connected, num_edges, symmetrize
from .penalties import (
    PenaltyParams,
    sym_eigh,
    shift_matrix,
    grad_F,
    logdet_map,
    objective_from_adjoint,
    prox_G,
)

log = logging.getLogger(__name__)

STOP_FLOOR = 1e-20
EXPORT_THRESHOLD = 1e-8


class SolverDivergedError(RuntimeError):
    """An iterate became non-finite."""

    def __init__(self, iteration: int, what: str):
        super().__init__(f"non-finite {what} at iteration {iteration}")
        self.iteration = iteration


@dataclass(frozen=True)
class SolverParams:
    penalty: PenaltyParams
    tau: float = 1.0
    sigma: float = 4.9e-3
    rho: float = 1.0
    epsilon: float = 1e-4
    max_iter: int = 5000

    def __post_init__(self):
        for name in ("tau", "sigma", "rho", "epsilon"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.max_iter < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


class Admissibility(enum.Enum):
    PROVABLY_CONVERGENT = "ProvablyConvergent"
    CONVEX_BUT_STEPS_VIOLATED = "ConvexButStepsViolated"
    NONCONVEX_MODE = "NonconvexMode"


@dataclass(frozen=True)
class Verdict:
    status: Admissibility
    violations: tuple[str, ...] = ()

    @property
    def provably_convergent(self) -> bool:
        return self.status is Admissibility.PROVABLY_CONVERGENT

    def __str__(self) -> str:
        if not self.violations:
            return self.status.value
        return f"{self.status.value} ({'; '.join(self.violations)})"


def rho_upper_bound(params: SolverParams, n: int) -> float:
    """Largest admissible relaxation, ``2 - (lambda2/2) / (1/tau - 2 sigma n)``.

    Returns ``-inf`` when ``1/tau <= 2 sigma n`` leaves no room for ``lambda2``.
    """
    slack = 1.0 / params.tau - 2.0 * params.sigma * n
    lam2 = params.penalty.lambda2
    if lam2 == 0:
        return 2.0 if slack >= 0 else -math.inf
    if slack <= 0:
        return -math.inf
    return 2.0 - 0.5 * lam2 / slack


def validate_params(params: SolverParams, n: int) -> Verdict:
    """Classify a parameterization against the convergence conditions.

    Needs ``lambda2 >= gamma_inv * lambda1`` (convex smooth part),
    ``1/tau >= 2 sigma n + lambda2/2`` and ``0 < rho < rho_upper_bound``.
    The verdict is advisory; every parameterization is runnable.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    pen = params.penalty
    violations = []
    if not pen.convex_mode:
        violations.append(
            f"lambda2={pen.lambda2:g} < gamma_inv*lambda1="
            f"{pen.gamma_inv * pen.lambda1:g}")
    step_rhs = 2.0 * params.sigma * n + 0.5 * pen.lambda2
    if not 1.0 / params.tau >= step_rhs:
        violations.append(f"1/tau={1.0 / params.tau:g} < 2*sigma*n + lambda2/2={step_rhs:g}")
    bound = rho_upper_bound(params, n)
    if not params.rho < bound:
        violations.append(f"rho={params.rho:g} >= upper bound {bound:g}")
    if not pen.convex_mode:
        status = Admissibility.NONCONVEX_MODE
    elif violations:
        status = Admissibility.CONVEX_BUT_STEPS_VIOLATED
    else:
        status = Admissibility.PROVABLY_CONVERGENT
    return Verdict(status, tuple(violations))


@dataclass
class SolverState:
    w: np.ndarray
    V: np.ndarray
    iter: int = 0
    rel_change: float = math.inf
    objective: float = math.inf


@dataclass
class SolveReport:
    state: SolverState
    converged: bool
    iterations: int
    objective_trace: list[float] = field(default_factory=list)
    rel_change_trace: list[float] = field(default_factory=list)
    wall_time: float = 0.0
    verdict: Verdict | None = None

    @property
    def w(self) -> np.ndarray:
        return self.state.w

    def weights(self, threshold: float = EXPORT_THRESHOLD) -> np.ndarray:
        """Final weights with entries at or below ``threshold`` zeroed."""
        w = self.state.w.copy()
        w[w <= threshold] = 0.0
        return w

    def laplacian(self, threshold: float = EXPORT_THRESHOLD) -> np.ndarray:
        return apply_L(self.weights(threshold))

    @property
    def theta(self) -> np.ndarray:
        """Raw ``L(w_k)`` returned by the iteration, before thresholding."""
        return apply_L(self.state.w)


def default_init(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Uniform weights ``1/n`` (a connected graph) and a zero dual."""
    return np.full(num_edges(n), 1.0 / n), np.zeros((n, n))


def primal_step(state: SolverState, S_adj: np.ndarray, params: SolverParams) -> np.ndarray:
    pen = params.penalty
    z = state.w - params.tau * apply_L_adjoint(state.V) - params.tau * grad_F(state.w, pen)
    return prox_G(z, params.tau, pen.lambda1, S_adj)


def dual_step(state: SolverState, w_tilde: np.ndarray, params: SolverParams) -> np.ndarray:
    """Dual update via one eigendecomposition of the J-shifted matrix.

    Equal to ``prox_H_conjugate(V + sigma L(2 w~ - w), sigma)``.
    """
    sigma = params.sigma
    n = state.V.shape[0]
    Lbar = apply_L(2.0 * w_tilde - state.w, n)
    J = shift_matrix(n)
    nu, U = sym_eigh(J + symmetrize(state.V) / sigma + Lbar)
    V_new = state.V + sigma * (Lbar + J) - sigma * ((U * logdet_map(nu, sigma)) @ U.T)
    return symmetrize(V_new)


def relax_step(state: SolverState, w_tilde: np.ndarray, V_tilde: np.ndarray,
               rho: float) -> SolverState:
    if not rho > 0:
        raise ValueError(f"rho must be positive, got {rho}")
    if rho == 1.0:
        return SolverState(w_tilde, V_tilde, state.iter + 1)
    return SolverState(rho * w_tilde + (1 - rho) * state.w,
                       rho * V_tilde + (1 - rho) * state.V,
                       state.iter + 1)


def relative_change(w_new: np.ndarray, w_old: np.ndarray) -> float:
    d = w_new - w_old
    return float(d @ d) / max(float(w_old @ w_old), STOP_FLOOR)


def solve(S, params: SolverParams, init: tuple[np.ndarray, np.ndarray] | None = None,
          *, record_objective: bool = True, callback=None) -> SolveReport:
    """Learn a Laplacian from the sample covariance ``S``.

    Parameters
    ----------
    S : array-like, shape (n, n)
        Symmetric sample covariance.
    params : SolverParams
    init : (w0, V0), optional
        Starting point; ``default_init(n)`` when omitted.
    record_objective : bool
        Evaluate the objective after every iteration (one extra
        eigenvalue computation each). Disabled traces hold ``nan``.
    callback : callable, optional
        Called as ``callback(state, w_tilde)`` after every iteration.

    Returns
    -------
    SolveReport
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"covariance must be square, got shape {S.shape}")
    n = S.shape[0]
    if n < 2:
        raise ValueError("need at least two nodes")
    verdict = validate_params(params, n)
    log.info("parameter verdict: %s", verdict)

    if init is None:
        w0, V0 = default_init(n)
    else:
        w0, V0 = (np.array(a, dtype=float) for a in init)
        if w0.shape != (num_edges(n),) or V0.shape != (n, n):
            raise ValueError("initial point does not match the covariance size")
        V0 = symmetrize(V0)
    S_adj = apply_L_adjoint(S)
    state = SolverState(w0, V0)
    objective_trace: list[float] = []
    change_trace: list[float] = []
    converged = False
    start = time.perf_counter()
    for k in range(1, params.max_iter + 1):
        w_tilde = primal_step(state, S_adj, params)
        if not np.all(np.isfinite(w_tilde)):
            raise SolverDivergedError(k, "primal iterate")
        V_tilde = dual_step(state, w_tilde, params)
        if not np.all(np.isfinite(V_tilde)):
            raise SolverDivergedError(k, "dual iterate")
        new = relax_step(state, w_tilde, V_tilde, params.rho)
        new.rel_change = relative_change(new.w, state.w)
        new.objective = (objective_from_adjoint(new.w, S_adj, params.penalty)
                         if record_objective else math.nan)
        objective_trace.append(new.objective)
        change_trace.append(new.rel_change)
        if callback is not None:
            callback(new, w_tilde)
        state = new
        # a disconnected graph has infinite objective, so it cannot end the run
        if state.rel_change <= params.epsilon and is_connected(state.w, n):
            converged = True
            break
    wall = time.perf_counter() - start
    log.info("stopped after %d iterations (converged=%s, rel_change=%.3g)",
             state.iter, converged, state.rel_change)
    return SolveReport(state, converged, state.iter, objective_trace, change_trace,
                       wall, verdict)
