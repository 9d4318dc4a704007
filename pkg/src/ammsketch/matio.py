"""Matrix CSV files.

One matrix row per line, comma-separated decimals. An optional first line
``# rows cols`` declares the shape; if present it must match the body.
Scalars are written with ``repr`` (shortest round-trippable form), so
write-then-read reproduces every entry exactly.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import MatrixFormatError
from .matcore import as_matrix


def format_scalar(x: float) -> str:
    return repr(float(x))


def dumps_matrix(M, header: bool = True) -> str:
    M = as_matrix(M)
    lines = [f"# {M.shape[0]} {M.shape[1]}"] if header else []
    lines += [",".join(format_scalar(x) for x in row) for row in M]
    return "\n".join(lines) + "\n"


def loads_matrix(text: str) -> np.ndarray:
    declared = None
    rows = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if declared is not None or rows:
                raise MatrixFormatError(f"line {lineno}: header must be the first line")
            parts = line[1:].split()
            try:
                declared = tuple(int(v) for v in parts)
            except ValueError:
                raise MatrixFormatError(f"line {lineno}: bad header {line!r}") from None
            if len(declared) != 2:
                raise MatrixFormatError(f"line {lineno}: header needs 'rows cols'")
            continue
        try:
            rows.append([float(v) for v in line.split(",")])
        except ValueError:
            raise MatrixFormatError(f"line {lineno}: non-numeric entry") from None
    if not rows:
        raise MatrixFormatError("no matrix rows")
    width = len(rows[0])
    if any(len(r) != width for r in rows):
        raise MatrixFormatError("rows have different lengths")
    M = np.array(rows, dtype=np.float64)
    if declared is not None and declared != M.shape:
        raise MatrixFormatError(f"header says {declared[0]}x{declared[1]}, body is {M.shape[0]}x{M.shape[1]}")
    try:
        return as_matrix(M)
    except ValueError as exc:
        raise MatrixFormatError(str(exc)) from None


def write_matrix(path, M, header: bool = True) -> None:
    Path(path).write_text(dumps_matrix(M, header=header))


def read_matrix(path) -> np.ndarray:
    return loads_matrix(Path(path).read_text())
