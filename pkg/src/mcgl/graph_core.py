"""Half-vectorized edge weights and the Laplacian operator built on them.

A weight vector ``w`` of length ``n(n-1)/2`` lists the upper-triangular
edge weights row by row: ``w_{1,2}, w_{1,3}, ..., w_{1,n}, w_{2,3}, ...``.
``apply_L`` maps it to the combinatorial graph Laplacian ``D - W`` and
``apply_L_adjoint`` is the adjoint with respect to the Frobenius / Euclidean
inner products. Both are matrix-free, O(n^2) per call.

Node labels in ``edge_index`` are 1-based to match the closed-form index
formula; every array in this package is 0-based.
"""
from __future__ import annotations

import math

import numpy as np
from scipy.sparse.csgraph import connected_components


def num_edges(n: int) -> int:
    """Number of candidate edges ``n(n-1)/2`` of an ``n``-node graph."""
    if n < 1:
        raise ValueError(f"node count must be positive, got {n}")
    return n * (n - 1) // 2


def num_nodes(num_weights: int) -> int:
    """Invert ``num_edges``; raises if ``num_weights`` is not triangular."""
    n = int(round((1 + math.sqrt(1 + 8 * num_weights)) / 2))
    if num_edges(n) != num_weights:
        raise ValueError(
            f"length {num_weights} is not n(n-1)/2 for any node count n")
    return n


def edge_index(p: int, q: int, n: int) -> int:
    """1-based flat position of edge ``(p, q)``, ``1 <= p < q <= n``.

    Returns ``(2n - p - 1) p / 2 + q - n``.
    """
    if not (1 <= p < q <= n):
        raise ValueError(f"need 1 <= p < q <= n, got p={p}, q={q}, n={n}")
    return (2 * n - p - 1) * p // 2 + q - n


def edge_pairs(n: int) -> tuple[np.ndarray, np.ndarray]:
    """0-based ``(rows, cols)`` of the upper triangle in weight-vector order."""
    return np.triu_indices(n, k=1)


def _check_weights(w, n: int | None) -> tuple[np.ndarray, int]:
    w = np.asarray(w, dtype=float)
    if w.ndim != 1:
        raise ValueError(f"weight vector must be 1-D, got shape {w.shape}")
    if n is None:
        n = num_nodes(w.size)
    elif w.size != num_edges(n):
        raise ValueError(
            f"weight vector has length {w.size}, expected {num_edges(n)} "
            f"for n={n}")
    return w, n


def apply_L(w, n: int | None = None) -> np.ndarray:
    """Map edge weights to the combinatorial graph Laplacian.

    Parameters
    ----------
    w : array-like, shape (n(n-1)/2,)
        Edge weights in row-major upper-triangular order.
    n : int, optional
        Node count. Inferred from ``len(w)`` when omitted.

    Returns
    -------
    numpy.ndarray, shape (n, n)
        ``Theta`` with ``Theta[p, q] = -w_pq`` off the diagonal and
        ``Theta[p, p] = sum_q w_pq``.
    """
    w, n = _check_weights(w, n)
    rows, cols = edge_pairs(n)
    theta = np.zeros((n, n))
    theta[rows, cols] = -w
    theta[cols, rows] = -w
    theta[np.diag_indices(n)] = -theta.sum(axis=1)
    return theta


def apply_L_adjoint(M) -> np.ndarray:
    """Adjoint of ``apply_L``.

    Component ``(p, q)`` equals ``m_pp + m_qq - m_pq - m_qp``; ``M`` may be
    any square matrix.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    rows, cols = edge_pairs(M.shape[0])
    d = np.diag(M)
    return d[rows] + d[cols] - M[rows, cols] - M[cols, rows]


def weights_from_laplacian(theta) -> np.ndarray:
    """Read the weight vector back off a Laplacian (negated upper triangle)."""
    theta = np.asarray(theta, dtype=float)
    rows, cols = edge_pairs(theta.shape[0])
    return -theta[rows, cols]


def operator_norm(n: int) -> float:
    """Operator norm of ``apply_L`` for ``n`` nodes, ``sqrt(2n)``.

    Attained by the complete graph with unit weights.
    """
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return math.sqrt(2 * n)


def validate_cgl(M, tol: float = 1e-10) -> bool:
    """Check symmetry, zero row sums and sign pattern of a Laplacian.

    All three checks use the absolute tolerance ``tol``; scale it by the
    matrix magnitude at the call site when that matters.
    """
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        return False
    if not np.all(np.isfinite(M)):
        return False
    n = M.shape[0]
    if np.max(np.abs(M - M.T), initial=0.0) > tol:
        return False
    if np.max(np.abs(M.sum(axis=1)), initial=0.0) > tol:
        return False
    if np.any(M[~np.eye(n, dtype=bool)] > tol):
        return False
    return bool(np.all(np.diag(M) >= -tol))


def is_connected(w, n: int | None = None) -> bool:
    """Whether the edges with positive weight connect all ``n`` nodes."""
    w, n = _check_weights(w, n)
    r, c = edge_pairs(n)
    keep = w > 0
    adj = np.zeros((n, n), dtype=bool)
    adj[r[keep], c[keep]] = True
    ncomp, _ = connected_components(adj, directed=False)
    return ncomp == 1


def symmetrize(M: np.ndarray) -> np.ndarray:
    return 0.5 * (M + M.T)
