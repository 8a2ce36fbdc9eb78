"""Matrix Market reader/writer for real general matrices and vectors.

Both ``array`` and ``coordinate`` formats are read; ``array`` is written, with
17 significant digits so that a round trip is bit-exact. Vectors are stored as
n x 1 matrices. Errors report the offending 1-based line number.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from mihs.errors import MatrixMarketError

_BANNER = "%%MatrixMarket"


def _tokens(lines):
    # (line number, stripped text) for non-comment, non-blank lines
    for k, raw in enumerate(lines, start=1):
        text = raw.strip()
        if text and not text.startswith("%"):
            yield k, text


def read_matrix(path) -> np.ndarray:
    """Read a real general Matrix Market file into a dense array."""
    with open(path, "r", encoding="ascii", errors="replace") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise MatrixMarketError("empty file", 1)
    head = lines[0].split()
    if len(head) != 5 or head[0] != _BANNER or head[1].lower() != "matrix":
        raise MatrixMarketError(f"bad banner {lines[0]!r}", 1)
    fmt, field, symmetry = (h.lower() for h in head[2:])
    if fmt not in ("array", "coordinate"):
        raise MatrixMarketError(f"unknown format {fmt!r}", 1)
    if field not in ("real", "double", "integer"):
        raise MatrixMarketError(f"unsupported field {field!r}", 1)
    if symmetry != "general":
        raise MatrixMarketError(f"unsupported symmetry {symmetry!r}", 1)

    body = _tokens(lines[1:])
    try:
        lineno, text = next(body)
    except StopIteration:
        raise MatrixMarketError("missing size line", len(lines)) from None
    lineno += 1
    parts = text.split()
    want = 2 if fmt == "array" else 3
    try:
        dims = [int(p) for p in parts]
    except ValueError:
        raise MatrixMarketError(f"bad size line {text!r}", lineno) from None
    if len(dims) != want or min(dims) < 0:
        raise MatrixMarketError(f"bad size line {text!r}", lineno)
    rows, cols = dims[0], dims[1]
    M = np.zeros((rows, cols))

    if fmt == "array":
        vals = []
        for k, text in body:
            try:
                vals.extend(float(t) for t in text.split())
            except ValueError:
                raise MatrixMarketError(f"bad value {text!r}", k + 1) from None
            if len(vals) > rows * cols:
                raise MatrixMarketError("too many entries", k + 1)
        if len(vals) != rows * cols:
            raise MatrixMarketError(f"expected {rows * cols} entries, found {len(vals)}",
                                    len(lines))
        # column-major order
        return np.array(vals, dtype=float).reshape((cols, rows)).T.copy()

    nnz = dims[2]
    seen = 0
    for k, text in body:
        parts = text.split()
        try:
            i, j, v = int(parts[0]), int(parts[1]), float(parts[2])
            if len(parts) != 3:
                raise ValueError
        except (ValueError, IndexError):
            raise MatrixMarketError(f"bad entry {text!r}", k + 1) from None
        if not (1 <= i <= rows and 1 <= j <= cols):
            raise MatrixMarketError(f"index ({i}, {j}) out of range", k + 1)
        M[i - 1, j - 1] += v
        seen += 1
    if seen != nnz:
        raise MatrixMarketError(f"expected {nnz} entries, found {seen}", len(lines))
    return M


def write_matrix(path, M, comment: str | None = None) -> None:
    """Write a dense matrix in array format with %.17g values."""
    M = np.asarray(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    if M.ndim != 2:
        raise ValueError("only matrices and vectors can be written")
    rows, cols = M.shape
    out = [f"{_BANNER} matrix array real general"]
    if comment:
        out.extend("% " + c for c in comment.splitlines())
    out.append(f"{rows} {cols}")
    out.extend(format(float(v), ".17g") for v in M.T.ravel())
    Path(path).write_text("\n".join(out) + "\n", encoding="ascii")


def read_vector(path) -> np.ndarray:
    M = read_matrix(path)
    if M.ndim != 2 or 1 not in M.shape:
        raise MatrixMarketError(f"expected a vector, found shape {M.shape}")
    return M.ravel()


def write_vector(path, v, comment: str | None = None) -> None:
    v = np.asarray(v, dtype=float)
    if v.ndim != 1:
        raise ValueError("expected a 1-D vector")
    write_matrix(path, v[:, None], comment)
