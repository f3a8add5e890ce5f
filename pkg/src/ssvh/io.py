"""File formats used by the command line tools.

Matrices are headerless CSV or JSON ``{"rows": r, "cols": c, "data": [...]}``
(row-major).  Label and loading files are CSV rows ``index,p_1,...,p_K``
with 1-based indices and an optional header line.  Edge lists hold one
``i j`` (optionally ``i j w``) per line, 1-based; corpora are ``word,doc,count``
triplets, 1-based.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import InputError

__all__ = [
    "read_matrix",
    "write_matrix",
    "read_indexed_rows",
    "write_indexed_rows",
    "read_edge_list",
    "read_triplets",
]


def _open(path, what: str):
    try:
        return open(path, newline="")
    except OSError as exc:
        raise InputError(f"cannot read {what} file {path}: {exc.strerror}") from exc


def _float(tok: str, path, lineno: int) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InputError(f"{path}:{lineno}: cannot parse {tok!r} as a number") from None


def read_matrix(path) -> np.ndarray:
    """Read a dense matrix from headerless CSV or the JSON wrapper."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with _open(path, "matrix") as fh:
            try:
                obj = json.load(fh)
                rows, cols = int(obj["rows"]), int(obj["cols"])
                data = np.asarray(obj["data"], dtype=float)
            except (ValueError, KeyError, TypeError) as exc:
                raise InputError(f"{path}: malformed matrix JSON ({exc})") from None
        if data.size != rows * cols:
            raise InputError(f"{path}: {data.size} entries for a {rows} x {cols} matrix")
        return data.reshape(rows, cols)
    out = []
    with _open(path, "matrix") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            vals = [_float(c, path, lineno) for c in row]
            if out and len(vals) != len(out[0]):
                raise InputError(f"{path}:{lineno}: expected {len(out[0])} columns, got {len(vals)}")
            out.append(vals)
    if not out:
        raise InputError(f"{path}: empty matrix")
    return np.asarray(out, dtype=float)


def write_matrix(path, M) -> None:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        for row in M:
            w.writerow([repr(float(v)) for v in row])


def read_indexed_rows(path, what: str = "labels"):
    """Read ``index,p_1,...,p_K`` rows.

    Returns
    -------
    (idx, P) : 0-based integer indices and the (N, K) value matrix.
    """
    idx, rows = [], []
    with _open(path, what) as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                i = int(row[0])
            except ValueError:
                if lineno == 1 and not idx:
                    continue  # header
                raise InputError(f"{path}:{lineno}: bad index {row[0]!r}") from None
            if i < 1:
                raise InputError(f"{path}:{lineno}: indices are 1-based, got {i}")
            vals = [_float(c, path, lineno) for c in row[1:]]
            if rows and len(vals) != len(rows[0]):
                raise InputError(f"{path}:{lineno}: expected {len(rows[0])} values, got {len(vals)}")
            idx.append(i - 1)
            rows.append(vals)
    if not rows:
        raise InputError(f"{path}: no {what} rows")
    return np.asarray(idx, dtype=np.int64), np.asarray(rows, dtype=float)


def write_indexed_rows(path, idx, P, header: str = "index", prefix: str = "p") -> None:
    P = np.asarray(P, dtype=float)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([header] + [f"{prefix}{k + 1}" for k in range(P.shape[1])])
        for i, row in zip(idx, P):
            w.writerow([int(i) + 1] + [repr(float(v)) for v in row])


def read_edge_list(path, n: int | None = None) -> sp.csr_matrix:
    """Symmetric sparse adjacency from an undirected 1-based edge list.

    A third column, if present, is taken as the edge weight (default 1).
    ``n`` defaults to the largest node index seen.
    """
    I, J, Wt = [], [], []
    with _open(path, "edge list") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tok = line.replace(",", " ").split()
            if len(tok) not in (2, 3):
                raise InputError(f"{path}:{lineno}: expected 'i j' or 'i j w', got {line!r}")
            try:
                i, j = int(tok[0]), int(tok[1])
            except ValueError:
                raise InputError(f"{path}:{lineno}: node ids must be integers, got {line!r}") from None
            if i < 1 or j < 1:
                raise InputError(f"{path}:{lineno}: node ids are 1-based")
            I.append(i - 1)
            J.append(j - 1)
            Wt.append(_float(tok[2], path, lineno) if len(tok) == 3 else 1.0)
    size = max(max(I, default=-1), max(J, default=-1)) + 1
    if n is None:
        n = size
    elif size > n:
        raise InputError(f"{path}: node id {size} exceeds n={n}")
    I, J, Wt = np.asarray(I, dtype=np.int64), np.asarray(J, dtype=np.int64), np.asarray(Wt)
    off = I != J
    rows = np.concatenate([I, J[off]])
    cols = np.concatenate([J, I[off]])
    vals = np.concatenate([Wt, Wt[off]])
    return sp.csr_matrix((vals, (rows, cols)), shape=(n, n))


def read_triplets(path, shape=None) -> sp.csc_matrix:
    """Sparse p x n count matrix from ``word,doc,count`` rows (1-based, optional header)."""
    I, J, C = [], [], []
    with _open(path, "corpus") as fh:
        for lineno, row in enumerate(csv.reader(fh), 1):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise InputError(f"{path}:{lineno}: expected word,doc,count")
            try:
                i, j = int(row[0]), int(row[1])
            except ValueError:
                if lineno == 1 and not I:
                    continue
                raise InputError(f"{path}:{lineno}: bad word/doc id") from None
            c = _float(row[2], path, lineno)
            if i < 1 or j < 1 or c < 0:
                raise InputError(f"{path}:{lineno}: ids are 1-based and counts nonnegative")
            I.append(i - 1)
            J.append(j - 1)
            C.append(c)
    if not I:
        raise InputError(f"{path}: empty corpus")
    if shape is None:
        shape = (max(I) + 1, max(J) + 1)
    return sp.csc_matrix((C, (I, J)), shape=shape)
