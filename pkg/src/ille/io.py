"""CSV / JSON persistence.

Matrices are header-less comma-separated decimal text written with 17
significant digits, so a save/load round trip is exact. JSON documents are
written with sorted keys for byte-stable output.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .exceptions import ParseError, ShapeError


def save_matrix(path, M):
    M = np.atleast_2d(np.asarray(M, dtype=float))
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, M, delimiter=",", fmt="%.17g")


def load_matrix(path):
    """Parse a numeric CSV into a 2-D float array.

    Raises :class:`ParseError` with a 1-based (row, column) location for
    non-numeric or non-finite cells and for ragged rows.
    """
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=str(path)) from exc
    rows = []
    width = None
    for r, cells in enumerate(csv.reader(text.splitlines()), start=1):
        if not cells or all(not c.strip() for c in cells):
            continue
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise ParseError(f"expected {width} columns, found {len(cells)}", str(path), r)
        row = []
        for c, cell in enumerate(cells, start=1):
            try:
                value = float(cell)
            except ValueError:
                raise ParseError(f"non-numeric cell {cell.strip()!r}", str(path), r, c) from None
            if not np.isfinite(value):
                raise ParseError(f"non-finite cell {cell.strip()!r}", str(path), r, c)
            row.append(value)
        rows.append(row)
    if not rows:
        raise ParseError("file is empty", str(path))
    return np.array(rows, dtype=float)


def load_labels(path):
    M = load_matrix(path)
    if M.shape[1] != 1:
        raise ParseError(f"label file must have a single column, found {M.shape[1]}", str(path))
    values = M[:, 0]
    bad = np.flatnonzero(values != np.round(values))
    if bad.size:
        raise ParseError(f"non-integer label {values[bad[0]]!r}", str(path), int(bad[0]) + 1, 1)
    return values.astype(np.int64)


def save_labels(path, labels):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    np.savetxt(path, np.asarray(labels, dtype=np.int64).reshape(-1, 1), fmt="%d")


def load_dataset(path, labels_path=None):
    """Load ``X`` (rows are points) and optionally its integer labels."""
    X = load_matrix(path)
    if labels_path is None:
        return X, None
    labels = load_labels(labels_path)
    if labels.size != X.shape[0]:
        raise ShapeError(f"{labels_path} has {labels.size} labels but {path} has {X.shape[0]} rows")
    return X, labels


def save_embedding(path, embedding):
    """Write an embedding with one point per row, shape ``(n, k)``."""
    Y = getattr(embedding, "Y", embedding)
    save_matrix(path, np.asarray(Y).T)


def dumps_json(obj):
    return json.dumps(_plain(obj), indent=2, sort_keys=True) + "\n"


def save_json(path, obj):
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text(dumps_json(obj), encoding="utf-8")


def load_json(path):
    path = Path(path)
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", path=str(path)) from exc
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", str(path), exc.lineno, exc.colno) from exc


def _plain(obj):
    if hasattr(obj, "to_dict"):
        return _plain(obj.to_dict())
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
