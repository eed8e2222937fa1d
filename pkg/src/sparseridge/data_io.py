"""CSV ingestion and output helpers.

Dataset files hold plain decimal numbers, one observation per row, with a
single designated response column (default: the last).  A header row is
opt-in; with a header, the response column may also be named.
"""

from __future__ import annotations

import csv

import numpy as np

from .core import Dataset
from .errors import InvalidArgumentError


def _parse_rows(path: str, header: bool):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        rows = [row for row in reader if row]
    if not rows:
        raise InvalidArgumentError(f"{path}: empty file")
    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        rows = rows[1:]
        if not rows:
            raise InvalidArgumentError(f"{path}: header but no data rows")
    width = len(rows[0])
    data = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        if len(row) != width:
            raise InvalidArgumentError(
                f"{path}: row {i + 1} has {len(row)} fields, expected {width}"
            )
        try:
            data[i] = [float(c) for c in row]
        except ValueError as exc:
            raise InvalidArgumentError(f"{path}: row {i + 1}: {exc}") from None
    return data, names


def _resolve_response(response, width: int, names) -> int:
    if response in (None, "last"):
        return width - 1
    if isinstance(response, str):
        if response.lstrip("-").isdigit():
            response = int(response)
        elif names is not None and response in names:
            return names.index(response)
        else:
            raise InvalidArgumentError(
                f"response column {response!r} not found (no matching header name)"
            )
    col = int(response)
    if not -width <= col < width:
        raise InvalidArgumentError(f"response column {col} out of range")
    return col % width


def load_dataset_csv(
    path: str, response="last", header: bool = False
) -> Dataset:
    """Read a dataset; all columns but the response become features in file order."""
    data, names = _parse_rows(path, header)
    col = _resolve_response(response, data.shape[1], names)
    if data.shape[1] < 2:
        raise InvalidArgumentError(f"{path}: need at least one feature column")
    y = data[:, col]
    X = np.delete(data, col, axis=1)
    feature_names = None
    if names is not None:
        feature_names = tuple(nm for i, nm in enumerate(names) if i != col)
    return Dataset(X=X, y=y, feature_names=feature_names)


def save_dataset_csv(data: Dataset, path: str, header: bool = False) -> None:
    """Write features then the response as the last column."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if header:
            names = data.feature_names or tuple(
                f"x{i}" for i in range(data.p)
            )
            writer.writerow(list(names) + ["y"])
        for i in range(data.n):
            writer.writerow(
                [repr(float(v)) for v in data.X[i]] + [repr(float(data.y[i]))]
            )


def load_matrix_csv(path: str) -> np.ndarray:
    """Read a square numeric matrix (no header)."""
    data, _ = _parse_rows(path, header=False)
    if data.shape[0] != data.shape[1]:
        raise InvalidArgumentError(
            f"{path}: expected a square matrix, got {data.shape}"
        )
    return data
