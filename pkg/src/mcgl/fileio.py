"""Text file formats: edge lists, dense matrices, result tables, manifests."""
from __future__ import annotations

import csv
import hashlib
import json
import os
import threading
from pathlib import Path

import numpy as np

from .graph_core import apply_L, edge_pairs, num_edges, num_nodes, weights_from_laplacian


class FormatError(ValueError):
    pass


def write_edge_list(path, theta_or_w, n: int | None = None) -> None:
    """Write the nonzero upper-triangular edges as ``p q weight`` lines.

    Node labels are 1-based, weights use 6 significant digits, and the first
    line is ``# nodes <n>``. Accepts a Laplacian or a weight vector.
    """
    arr = np.asarray(theta_or_w, dtype=float)
    if arr.ndim == 2:
        n = arr.shape[0]
        w = weights_from_laplacian(arr)
    else:
        w = arr
        if n is None:
            n = num_nodes(w.size)
    rows, cols = edge_pairs(n)
    lines = [f"# nodes {n}"]
    for p, q, weight in zip(rows, cols, w):
        if weight != 0:
            lines.append(f"{p + 1} {q + 1} {weight:.6g}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_edge_list(path) -> np.ndarray:
    """Read an edge list back into a weight vector."""
    n = None
    entries = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                parts = line[1:].split()
                if len(parts) == 2 and parts[0] == "nodes":
                    n = int(parts[1])
                continue
            parts = line.split()
            if len(parts) != 3:
                raise FormatError(f"{path}:{lineno}: expected 'p q weight'")
            entries.append((int(parts[0]), int(parts[1]), float(parts[2])))
    if n is None:
        raise FormatError(f"{path}: missing '# nodes <n>' header")
    w = np.zeros(num_edges(n))
    for p, q, weight in entries:
        if p > q:
            p, q = q, p
        if not 1 <= p < q <= n:
            raise FormatError(f"{path}: invalid edge ({p}, {q}) for n={n}")
        w[(2 * n - p - 1) * p // 2 + q - n - 1] = weight
    return w


def read_laplacian(path) -> np.ndarray:
    return apply_L(read_edge_list(path))


def write_matrix(path, M) -> None:
    """Comma-delimited, full-precision (round-trip exact) decimal text."""
    np.savetxt(path, np.atleast_2d(np.asarray(M, dtype=float)), delimiter=",", fmt="%.17g")


def read_matrix(path) -> np.ndarray:
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2)
    except ValueError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return M


def read_covariance(path, tol: float = 1e-8) -> np.ndarray:
    """Load a covariance matrix and check it is symmetric PSD within ``tol``."""
    S = read_matrix(path)
    if S.shape[0] != S.shape[1]:
        raise FormatError(f"{path}: covariance must be square, got {S.shape}")
    scale = max(float(np.max(np.abs(S))), 1e-300)
    if np.max(np.abs(S - S.T)) > tol * scale:
        raise FormatError(f"{path}: covariance is not symmetric")
    S = 0.5 * (S + S.T)
    if np.linalg.eigvalsh(S)[0] < -tol * scale:
        raise FormatError(f"{path}: covariance is not positive semidefinite")
    return S


class ResultsTable:
    """Append-only CSV with a fixed header; safe to share between threads."""

    def __init__(self, path, columns):
        self.path = Path(path)
        self.columns = list(columns)
        self._lock = threading.Lock()

    def append(self, row: dict) -> None:
        with self._lock:
            fresh = not self.path.exists() or self.path.stat().st_size == 0
            if not fresh:
                with open(self.path, newline="") as fh:
                    header = next(csv.reader(fh), None)
                if header != self.columns:
                    raise FormatError(
                        f"{self.path}: header {header} does not match {self.columns}")
            with open(self.path, "a", newline="") as fh:
                writer = csv.DictWriter(fh, fieldnames=self.columns, lineterminator="\n")
                if fresh:
                    writer.writeheader()
                writer.writerow({k: format_cell(row.get(k, "")) for k in self.columns})

    def extend(self, rows) -> None:
        for row in rows:
            self.append(row)


def write_table(path, columns, rows) -> None:
    """Write a fresh table, replacing any existing file."""
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(columns), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: format_cell(row.get(k, "")) for k in columns})


def format_cell(value) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    return str(value)


def read_table(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), default=_json_default)


def _json_default(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, os.PathLike):
        return os.fspath(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def config_hash(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def write_json(path, obj) -> None:
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n")
