"""Numerical datasets, discretization grids and elementary hyper-rectangles.

Values are mapped to 0-based interval indices. Intervals are half-open
``[c_j, c_{j+1})`` except the last one per attribute, which is closed so that
the attribute maximum falls into index ``bins - 1``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised for malformed input data or grids."""


@dataclass(frozen=True)
class Dataset:
    """An ``n x k`` matrix of finite reals with named columns.

    Labels, when present, are never used for mining.
    """

    values: np.ndarray
    attributes: tuple
    labels: Optional[np.ndarray] = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 2 or values.shape[0] < 1 or values.shape[1] < 1:
            raise DataError(f"expected a non-empty 2-d matrix, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise DataError("dataset contains non-finite values")
        if len(self.attributes) != values.shape[1]:
            raise DataError("attribute name count does not match column count")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "attributes", tuple(self.attributes))
        if self.labels is not None:
            labels = np.asarray(self.labels)
            if labels.shape != (values.shape[0],):
                raise DataError("one label per object is required")
            object.__setattr__(self, "labels", labels)

    @property
    def n_objects(self) -> int:
        return self.values.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.values.shape[1]

    @classmethod
    def from_array(cls, values, attributes=None, labels=None) -> "Dataset":
        values = np.atleast_2d(np.asarray(values, dtype=float))
        if attributes is None:
            attributes = [f"m{i + 1}" for i in range(values.shape[1])]
        return cls(values, tuple(attributes), labels)


def load_csv(path: Union[str, Path], label_column: Optional[str] = None) -> Dataset:
    """Read a headed, comma-separated file of numbers.

    The optional ``label_column`` is removed from the value matrix and kept as
    per-object labels. Object ids follow row order.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if not rows:
        raise DataError(f"{path} is empty")
    header = [name.strip() for name in rows[0]]
    body = rows[1:]
    if not body:
        raise DataError(f"{path} has a header but no data rows")

    label_idx = None
    if label_column is not None:
        if label_column not in header:
            raise DataError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)

    numeric_idx = [i for i in range(len(header)) if i != label_idx]
    if not numeric_idx:
        raise DataError("no numeric columns left after removing the label column")
    values = np.empty((len(body), len(numeric_idx)))
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise DataError(f"line {r}: expected {len(header)} fields, got {len(row)}")
        for c, i in enumerate(numeric_idx):
            try:
                v = float(row[i])
            except ValueError:
                raise DataError(f"line {r}: non-numeric value {row[i]!r} in column {header[i]!r}") from None
            if not math.isfinite(v):
                raise DataError(f"line {r}: non-finite value in column {header[i]!r}")
            values[r - 2, c] = v

    labels = None
    if label_idx is not None:
        labels = np.array([row[label_idx].strip() for row in body], dtype=object)
    return Dataset(values, tuple(header[i] for i in numeric_idx), labels)


@dataclass(frozen=True)
class DiscretizationGrid:
    """Per-attribute strictly increasing cut points."""

    cuts: tuple

    def __post_init__(self):
        cuts = []
        for i, c in enumerate(self.cuts):
            c = np.array(c, dtype=float)
            if c.ndim != 1 or c.size < 2:
                raise DataError(f"attribute {i}: need at least two cut points")
            if not np.all(np.isfinite(c)):
                raise DataError(f"attribute {i}: non-finite cut point")
            if np.any(np.diff(c) <= 0):
                raise DataError(f"attribute {i}: cut points must be strictly increasing")
            c.setflags(write=False)
            cuts.append(c)
        if not cuts:
            raise DataError("grid needs at least one attribute")
        object.__setattr__(self, "cuts", tuple(cuts))

    @property
    def n_attributes(self) -> int:
        return len(self.cuts)

    @property
    def bins(self) -> np.ndarray:
        """Number of intervals per attribute."""
        return np.array([c.size - 1 for c in self.cuts], dtype=np.int64)

    def bounds(self, lower, upper) -> np.ndarray:
        """Real-valued ``(k, 2)`` extent of the index box ``[lower, upper]``."""
        return np.array([[c[lo], c[hi + 1]] for c, lo, hi in zip(self.cuts, lower, upper)])


def resolve_count(spec, n: int) -> int:
    """Turn an ``int`` or the token ``"sqrt"`` into a positive count."""
    if isinstance(spec, str):
        token = spec.strip().lower()
        if token == "sqrt":
            return max(1, int(round(math.sqrt(n))))
        try:
            spec = int(token)
        except ValueError:
            raise DataError(f"expected a positive integer or 'sqrt', got {spec!r}") from None
    if int(spec) != spec or spec < 1:
        raise DataError(f"count must be a positive integer, got {spec!r}")
    return int(spec)


def equal_width_grid(data: Dataset, bins_spec="sqrt", pad: bool = False) -> DiscretizationGrid:
    """Split every attribute range into equal-width intervals.

    ``bins_spec`` is a single count, ``"sqrt"`` (round of sqrt(n)), or one of
    those per attribute. With ``pad`` the range is first widened to the
    enclosing integers. Constant attributes get a single interval.
    """
    k = data.n_attributes
    if isinstance(bins_spec, (str, int, np.integer)):
        specs = [bins_spec] * k
    else:
        specs = list(bins_spec)
        if len(specs) != k:
            raise DataError(f"got {len(specs)} bin counts for {k} attributes")

    cuts = []
    for i, spec in enumerate(specs):
        nbins = resolve_count(spec, data.n_objects)
        lo = float(data.values[:, i].min())
        hi = float(data.values[:, i].max())
        if pad:
            lo, hi = float(math.floor(lo)), float(math.ceil(hi))
        if hi <= lo:
            # constant attribute: a single unit-width interval around the value
            cuts.append(np.array([lo, lo + 1.0]))
            continue
        c = lo + np.arange(nbins + 1) * (hi - lo) / nbins
        c[-1] = hi
        cuts.append(c)
    return DiscretizationGrid(tuple(cuts))


def parse_grid(text: str) -> DiscretizationGrid:
    cuts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        try:
            row = [float(tok) for tok in line.split(",")]
        except ValueError:
            raise DataError(f"grid line {lineno}: non-numeric cut point") from None
        if any(b <= a for a, b in zip(row, row[1:])):
            raise DataError(f"grid line {lineno}: cut points are not strictly increasing")
        cuts.append(row)
    if not cuts:
        raise DataError("grid file is empty")
    return DiscretizationGrid(tuple(cuts))


def import_grid(path: Union[str, Path], data: Optional[Dataset] = None) -> DiscretizationGrid:
    """Read a grid file, one comma-separated cut line per attribute.

    When ``data`` is given, the attribute count is checked and the outer cut
    points are extended to cover the observed data range.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    grid = parse_grid(path.read_text(encoding="utf-8"))
    if data is None:
        return grid
    return fit_grid(grid, data)


def fit_grid(grid: DiscretizationGrid, data: Dataset) -> DiscretizationGrid:
    """Extend outer cut points so that every data value is covered."""
    if grid.n_attributes != data.n_attributes:
        raise DataError(f"grid has {grid.n_attributes} attributes, data has {data.n_attributes}")
    cuts = []
    for c, column in zip(grid.cuts, data.values.T):
        c = c.copy()
        c[0] = min(c[0], column.min())
        c[-1] = max(c[-1], column.max())
        cuts.append(c)
    return DiscretizationGrid(tuple(cuts))


@dataclass(frozen=True)
class DiscretizedDataset:
    grid: DiscretizationGrid
    cells: np.ndarray
    source: Dataset = field(repr=False)

    @property
    def n_objects(self) -> int:
        return self.cells.shape[0]

    @property
    def n_attributes(self) -> int:
        return self.cells.shape[1]


def discretize(data: Dataset, grid: DiscretizationGrid) -> DiscretizedDataset:
    """Replace each value by the index of the grid interval holding it."""
    if grid.n_attributes != data.n_attributes:
        raise DataError(f"grid has {grid.n_attributes} attributes, data has {data.n_attributes}")
    cells = np.empty(data.values.shape, dtype=np.int64)
    for i, c in enumerate(grid.cuts):
        column = data.values[:, i]
        if column.min() < c[0] or column.max() > c[-1]:
            raise DataError(f"attribute {data.attributes[i]!r} has values outside the grid range")
        idx = np.searchsorted(c, column, side="right") - 1
        cells[:, i] = np.minimum(idx, c.size - 2)
    cells.setflags(write=False)
    return DiscretizedDataset(grid, cells, data)


@dataclass(frozen=True)
class ElementaryCell:
    coords: tuple
    cover: np.ndarray

    @property
    def usage(self) -> int:
        return int(self.cover.size)


def elementary_cells(d: DiscretizedDataset) -> list:
    """Group objects by their cell coordinates, in lexicographic coordinate order."""
    coords, inverse = np.unique(d.cells, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    splits = np.cumsum(np.bincount(inverse, minlength=len(coords)))[:-1]
    covers = np.split(order, splits)
    return [ElementaryCell(tuple(int(v) for v in row), cover) for row, cover in zip(coords, covers)]


def grid_from_cuts(cuts: Sequence[Sequence[float]]) -> DiscretizationGrid:
    return DiscretizationGrid(tuple(np.asarray(c, dtype=float) for c in cuts))
