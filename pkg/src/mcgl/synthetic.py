"""Benchmark graph families and Gaussian (GMRF) data drawn from them.

Random draws go through ``numpy.random.Generator`` on PCG64, which gives the
same stream on every platform for a given seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from .graph_core import apply_L, edge_pairs, is_connected, num_edges

MAX_RESAMPLES = 100
DEFAULT_WEIGHT_RANGE = (0.1, 3.0)


@dataclass(frozen=True)
class Grid:
    """``rows x cols`` lattice, each node joined to its 4 nearest neighbours."""

    rows: int
    cols: int

    @property
    def n(self) -> int:
        return self.rows * self.cols


@dataclass(frozen=True)
class Modular:
    """Stochastic block model with contiguous, equal-size modules."""

    n: int
    p_inter: float = 0.01
    p_intra: float = 0.3
    modules: int = 4


@dataclass(frozen=True)
class ErdosRenyi:
    n: int
    p: float = 0.1


Family = Union[Grid, Modular, ErdosRenyi]


@dataclass(frozen=True)
class GraphSpec:
    family: Family
    weight_range: tuple[float, float] = DEFAULT_WEIGHT_RANGE
    seed: int = 0

    def __post_init__(self):
        low, high = self.weight_range
        if not (0 < low <= high):
            raise ValueError(f"need 0 < low <= high, got {self.weight_range}")
        fam = self.family
        if isinstance(fam, Modular):
            probs = (fam.p_inter, fam.p_intra)
        elif isinstance(fam, ErdosRenyi):
            probs = (fam.p,)
        else:
            probs = ()
        if any(not 0 <= p <= 1 for p in probs):
            raise ValueError(f"probabilities must lie in [0, 1]: {fam}")
        if isinstance(fam, Modular) and not 1 <= fam.modules <= fam.n:
            raise ValueError(f"need 1 <= modules <= n, got {fam.modules}")
        if isinstance(fam, Grid) and (fam.rows < 1 or fam.cols < 1 or fam.n < 2):
            raise ValueError(f"grid too small: {fam}")
        if not isinstance(fam, Grid) and fam.n < 2:
            raise ValueError(f"need n >= 2, got {fam.n}")

    @property
    def n(self) -> int:
        return self.family.n


class DisconnectedGraphError(RuntimeError):
    pass


def module_labels(n: int, modules: int) -> np.ndarray:
    """Contiguous blocks of size ``n // modules``; leftovers join the last."""
    size = n // modules
    return np.minimum(np.arange(n) // size, modules - 1)


def grid_mask(rows: int, cols: int) -> np.ndarray:
    """Boolean edge mask (weight-vector order) of a row-major lattice."""
    n = rows * cols
    r, c = edge_pairs(n)
    same_row = (r // cols == c // cols) & (c - r == 1)
    same_col = c - r == cols
    return same_row | same_col


def edge_mask(family: Family, rng: np.random.Generator) -> np.ndarray:
    n = family.n
    if isinstance(family, Grid):
        return grid_mask(family.rows, family.cols)
    u = rng.random(num_edges(n))
    if isinstance(family, ErdosRenyi):
        return u < family.p
    if isinstance(family, Modular):
        labels = module_labels(n, family.modules)
        r, c = edge_pairs(n)
        prob = np.where(labels[r] == labels[c], family.p_intra, family.p_inter)
        return u < prob
    raise TypeError(f"unknown graph family {family!r}")


def generate_weights(spec: GraphSpec) -> np.ndarray:
    """Draw a connected graph's edge weights.

    Edges come from the family; weights are i.i.d. uniform on
    ``spec.weight_range``. Disconnected draws are redrawn from the same
    generator up to ``MAX_RESAMPLES`` times.
    """
    rng = np.random.default_rng(spec.seed)
    n = spec.n
    low, high = spec.weight_range
    for _ in range(MAX_RESAMPLES):
        mask = edge_mask(spec.family, rng)
        w = np.where(mask, rng.uniform(low, high, size=mask.size), 0.0)
        if is_connected(w, n):
            return w
    raise DisconnectedGraphError(
        f"{spec.family} stayed disconnected after {MAX_RESAMPLES} draws")


def generate_graph(spec: GraphSpec) -> np.ndarray:
    """Ground-truth Laplacian for ``spec``."""
    return apply_L(generate_weights(spec))


def _pinv_factor(theta) -> np.ndarray:
    """``F`` with ``F^T F = pinv(theta)`` for a connected Laplacian."""
    theta = np.asarray(theta, dtype=float)
    lam, Q = np.linalg.eigh(0.5 * (theta + theta.T))
    small = lam < 1e-10 * np.max(np.abs(lam))
    if np.count_nonzero(small) >= 2:
        raise DisconnectedGraphError(
            f"Laplacian has {np.count_nonzero(small)} null eigenvalues")
    keep = ~small
    return (Q[:, keep] / np.sqrt(lam[keep])).T


def sample_gmrf(theta, m: int, seed) -> np.ndarray:
    """Draw ``m`` zero-mean Gaussian samples with covariance ``pinv(theta)``.

    Returns an ``m x n`` array, one observation per row.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    factor = _pinv_factor(theta)
    rng = np.random.default_rng(seed)
    return rng.standard_normal((m, factor.shape[0])) @ factor


def sample_covariance(data, center: bool = False) -> np.ndarray:
    """``(1/m) X^T X``; with ``center`` the column means are removed first."""
    X = np.asarray(data, dtype=float)
    if X.ndim != 2 or X.shape[0] < 1:
        raise ValueError(f"expected an m x n data matrix, got shape {X.shape}")
    if center:
        X = X - X.mean(axis=0)
    S = X.T @ X / X.shape[0]
    return 0.5 * (S + S.T)


def gmrf_covariance(theta, m: int, seed, chunk_size: int = 100_000) -> np.ndarray:
    """Sample covariance of ``m`` GMRF draws without holding them all.

    Consumes the generator exactly as ``sample_gmrf`` does, so the
    underlying draws are identical; only the summation order differs.
    """
    if m < 1:
        raise ValueError(f"need m >= 1, got {m}")
    factor = _pinv_factor(theta)
    rank, n = factor.shape
    rng = np.random.default_rng(seed)
    acc = np.zeros((n, n))
    done = 0
    while done < m:
        k = min(chunk_size, m - done)
        X = rng.standard_normal((k, rank)) @ factor
        acc += X.T @ X
        done += k
    S = acc / m
    return 0.5 * (S + S.T)
