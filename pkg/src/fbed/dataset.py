"""Numeric datasets for selection runs: validation, CSV I/O and null-data generation."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np


class DatasetError(ValueError):
    """Raised when input data violates the Dataset invariants."""


@dataclass(frozen=True)
class Dataset:
    """Design matrix plus a designated target column.

    Parameters
    ----------
    X : ndarray, shape (n, p)
        Predictor values, one column per variable. Stored read-only.
    y : ndarray, shape (n,)
        Target values.
    names : tuple of str
        Predictor names, aligned with the columns of ``X``.
    target_name : str
        Name of the target column.
    target_kind : {"binary", "continuous"}
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple[str, ...]
    target_name: str = "y"
    target_kind: str = "continuous"

    def __post_init__(self) -> None:
        X = np.array(self.X, dtype=float, order="F")
        y = np.array(self.y, dtype=float)
        if X.ndim != 2:
            raise DatasetError("X must be two-dimensional")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", tuple(self.names))
        validate(self)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def columns(self) -> list[np.ndarray]:
        return [self.X[:, j] for j in range(self.p)]

    def index_of(self, name: str) -> int:
        return self.names.index(name)


def validate(d: Dataset) -> None:
    """Check every Dataset invariant, raising DatasetError on the first violation."""
    n, p = d.X.shape
    if d.y.shape != (n,):
        raise DatasetError(f"target has {d.y.shape[0]} entries, expected {n}")
    if len(d.names) != p:
        raise DatasetError(f"{len(d.names)} names for {p} columns")
    if len(set(d.names)) != p or d.target_name in d.names:
        raise DatasetError("variable names must be unique")
    if not np.all(np.isfinite(d.X)):
        bad = int(np.argwhere(~np.isfinite(d.X))[0][1])
        raise DatasetError(f"column {d.names[bad]!r} contains NaN or Inf")
    if not np.all(np.isfinite(d.y)):
        raise DatasetError("target contains NaN or Inf")
    if d.target_kind not in ("binary", "continuous"):
        raise DatasetError(f"unknown target kind {d.target_kind!r}")
    if d.target_kind == "binary":
        if not np.all((d.y == 0) | (d.y == 1)):
            raise DatasetError("binary target must only contain 0 and 1")
        if d.y.min() == d.y.max():
            raise DatasetError("degenerate binary target: only one class present")
    if n > 0:
        const = np.flatnonzero(np.ptp(d.X, axis=0) == 0)
        if const.size:
            raise DatasetError(f"constant column {d.names[const[0]]!r}")


def _parse_cell(text: str, row: int, col: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise DatasetError(f"non-numeric cell {text!r} at row {row}, column {col!r}") from None
    if math.isnan(value):
        raise DatasetError(f"NaN at row {row}, column {col!r}")
    return value


def load_csv(path: str | Path, target_name: str) -> Dataset:
    """Read a numeric CSV with a header row and split off the target column.

    The target is treated as binary iff all of its values are 0 or 1.
    Data rows are numbered from 1 in error messages (header excluded).
    """
    path = Path(path)
    if not path.is_file():
        raise DatasetError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DatasetError(f"{path} is empty") from None
        hits = header.count(target_name)
        if hits == 0:
            raise DatasetError(f"target {target_name!r} not found in header")
        if hits > 1:
            raise DatasetError(f"target {target_name!r} appears {hits} times in header")
        rows = []
        for i, record in enumerate(reader, start=1):
            if not record:
                continue
            if len(record) != len(header):
                raise DatasetError(f"row {i} has {len(record)} fields, expected {len(header)}")
            rows.append([_parse_cell(cell, i, header[j]) for j, cell in enumerate(record)])

    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    t = header.index(target_name)
    y = data[:, t]
    keep = [j for j in range(len(header)) if j != t]
    kind = "binary" if np.all((y == 0) | (y == 1)) else "continuous"
    return Dataset(
        X=data[:, keep],
        y=y,
        names=tuple(header[j] for j in keep),
        target_name=target_name,
        target_kind=kind,
    )


def save_csv(d: Dataset, path: str | Path) -> None:
    """Write ``d`` as CSV (target first) with 17 significant digits per value."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        fh.write(",".join((d.target_name, *d.names)) + "\n")
        for i in range(d.n):
            values = (d.y[i], *d.X[i])
            fh.write(",".join("%.17g" % v for v in values) + "\n")


def generate_null_dataset(n: int, p: int, seed: int) -> Dataset:
    """Standard-normal predictors with an independent fair-coin binary target.

    Uses numpy's PCG64 generator seeded with ``seed``. The target is redrawn
    until both classes occur.
    """
    if n < 2 or p < 1:
        raise ValueError("need n >= 2 and p >= 1")
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    while True:
        y = rng.integers(0, 2, size=n).astype(float)
        if 0 < y.sum() < n:
            break
    return Dataset(
        X=X,
        y=y,
        names=tuple(f"x{j + 1}" for j in range(p)),
        target_name="y",
        target_kind="binary",
    )


def from_arrays(X: Sequence, y: Sequence, names: Sequence[str] | None = None,
                target_name: str = "y", target_kind: str | None = None) -> Dataset:
    """Build a Dataset from array-likes, inferring the target kind when not given."""
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float)
    if names is None:
        names = [f"x{j + 1}" for j in range(X.shape[1])]
    if target_kind is None:
        target_kind = "binary" if np.all((y == 0) | (y == 1)) else "continuous"
    return Dataset(X=X, y=y, names=tuple(names), target_name=target_name,
                   target_kind=target_kind)
