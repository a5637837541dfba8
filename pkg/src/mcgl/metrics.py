"""Relative error and edge-support F-score between two Laplacians."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graph_core import weights_from_laplacian

DEFAULT_SUPPORT_TOL = 1e-8


@dataclass(frozen=True)
class EvalResult:
    relative_error: float
    f_score: float
    tp: int
    fp: int
    fn: int
    tn: int
    nnz_estimate: int
    nnz_truth: int


def relative_error(theta_hat, theta_star) -> float:
    """``||theta_hat - theta_star||_F^2 / ||theta_star||_F^2``."""
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if theta_hat.shape != theta_star.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta_star.shape}")
    denom = float(np.sum(theta_star ** 2))
    if denom == 0:
        raise ValueError("reference Laplacian is zero")
    return float(np.sum((theta_hat - theta_star) ** 2)) / denom


def support(theta, support_tol: float = DEFAULT_SUPPORT_TOL) -> np.ndarray:
    """Boolean edge indicator in weight-vector order, ``|weight| > tol``."""
    return np.abs(weights_from_laplacian(theta)) > support_tol


def f_score(theta_hat, theta_star, support_tol: float = DEFAULT_SUPPORT_TOL) -> EvalResult:
    """Compare edge supports, plus the relative error.

    ``FS = 2 tp / (2 tp + fn + fp)``, taken as 1 when both supports are
    empty.
    """
    if support_tol < 0:
        raise ValueError("support_tol must be nonnegative")
    theta_hat = np.asarray(theta_hat, dtype=float)
    theta_star = np.asarray(theta_star, dtype=float)
    if theta_hat.shape != theta_star.shape:
        raise ValueError(f"shape mismatch: {theta_hat.shape} vs {theta_star.shape}")
    est = support(theta_hat, support_tol)
    tru = support(theta_star, support_tol)
    tp = int(np.count_nonzero(est & tru))
    fp = int(np.count_nonzero(est & ~tru))
    fn = int(np.count_nonzero(~est & tru))
    tn = int(np.count_nonzero(~est & ~tru))
    denom = 2 * tp + fn + fp
    fs = 1.0 if denom == 0 else 2 * tp / denom
    if np.any(theta_star):
        re = relative_error(theta_hat, theta_star)
    else:
        re = float("nan")
    return EvalResult(re, fs, tp, fp, fn, tn, int(est.sum()), int(tru.sum()))


evaluate = f_score
