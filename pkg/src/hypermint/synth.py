"""Two-dimensional benchmark datasets with known ground-truth rectangles."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Union

import numpy as np

from .dataset import DataError, Dataset, load_csv

# (x_lo, y_lo, x_hi, y_hi) in [0, 100]^2. Every layout reaches all four edges
# of the square, so the outer grid cuts sit almost on rectangle sides.
# Rectangles that touch or nest differ clearly in area, so at equal support
# they also differ in density.
LAYOUTS = {
    "simple": (
        (0.0, 0.0, 25.0, 30.0),
        (75.0, 0.0, 100.0, 25.0),
        (0.0, 70.0, 30.0, 100.0),
        (72.0, 75.0, 100.0, 100.0),
    ),
    "variations": (
        (0.0, 0.0, 45.0, 45.0),
        (45.0, 15.0, 60.0, 30.0),
        (60.0, 55.0, 100.0, 100.0),
        (45.0, 70.0, 60.0, 85.0),
    ),
    "inverted": ((0.0, 0.0, 100.0, 100.0),),
    "simple_overlaps": (
        (0.0, 0.0, 30.0, 30.0),
        (24.0, 24.0, 54.0, 54.0),
        (78.0, 78.0, 100.0, 100.0),
        (82.0, 0.0, 100.0, 16.0),
        (0.0, 82.0, 16.0, 100.0),
    ),
    "simple_inclusion": (
        (0.0, 0.0, 45.0, 45.0),
        (10.0, 10.0, 25.0, 25.0),
        (65.0, 65.0, 100.0, 100.0),
        (75.0, 0.0, 100.0, 30.0),
    ),
    "complex_inclusion": (
        (0.0, 0.0, 50.0, 50.0),
        (8.0, 8.0, 32.0, 32.0),
        (14.0, 14.0, 24.0, 24.0),
        (60.0, 60.0, 100.0, 100.0),
        (72.0, 72.0, 90.0, 90.0),
        (75.0, 0.0, 100.0, 30.0),
    ),
}

INVERTED_HOLE = (35.0, 35.0, 65.0, 65.0)


@dataclass(frozen=True)
class GroundTruth:
    rectangles: tuple
    support_per_pattern: int
    layout: str
    seed: int
    hole: Optional[tuple] = None

    def boxes(self) -> list:
        """Rectangles as ``(2, 2)`` arrays of ``[low, high]`` per axis."""
        return [np.array([[r[0], r[2]], [r[1], r[3]]]) for r in self.rectangles]


def _inside(points, rect):
    x, y = points[:, 0], points[:, 1]
    return (x >= rect[0]) & (x <= rect[2]) & (y >= rect[1]) & (y <= rect[3])


def _sample(rng, rect, count, avoid=None):
    lo = np.array(rect[:2])
    hi = np.array(rect[2:])
    if avoid is None:
        return rng.uniform(lo, hi, size=(count, 2))
    out = np.empty((0, 2))
    while len(out) < count:
        batch = rng.uniform(lo, hi, size=(2 * count, 2))
        out = np.vstack([out, batch[~_inside(batch, avoid)]])
    return out[:count]


def generate(layout: str, support: int, seed: int = 0, hole_points: Optional[int] = None):
    """Sample ``support`` uniform points inside every rectangle of ``layout``.

    For ``inverted`` the points avoid the hole, which then receives
    ``hole_points`` sparse points (default: a twentieth of the support).
    Returns ``(Dataset, GroundTruth)``; the labels give each point's source
    rectangle (``-1`` for hole noise).
    """
    if layout not in LAYOUTS:
        raise ValueError(f"unknown layout {layout!r}; choose from {', '.join(LAYOUTS)}")
    if int(support) != support or support < 1:
        raise ValueError("support must be a positive integer")
    rng = np.random.default_rng(seed)
    rects = LAYOUTS[layout]
    hole = INVERTED_HOLE if layout == "inverted" else None

    chunks, labels = [], []
    for i, rect in enumerate(rects):
        chunks.append(_sample(rng, rect, support, avoid=hole))
        labels.append(np.full(support, i))
    if hole is not None:
        extra = max(1, support // 20) if hole_points is None else int(hole_points)
        if extra:
            chunks.append(_sample(rng, hole, extra))
            labels.append(np.full(extra, -1))

    values = np.vstack(chunks)
    data = Dataset(values, ("x", "y"), np.concatenate(labels))
    return data, GroundTruth(tuple(rects), int(support), layout, int(seed), hole)


def export(data: Dataset, truth: GroundTruth, directory: Union[str, Path]) -> tuple:
    """Write ``<layout>_<support>_<seed>.csv`` and a matching ``.truth`` file.

    Values are written with ``repr`` precision, so reloading is exact.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise OSError(f"not a directory: {directory}")
    stem = f"{truth.layout}_{truth.support_per_pattern}_{truth.seed}"
    data_path = directory / f"{stem}.csv"
    truth_path = directory / f"{stem}.truth"

    with data_path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(list(data.attributes) + ["label"])
        labels = data.labels if data.labels is not None else [""] * data.n_objects
        for row, label in zip(data.values, labels):
            w.writerow([repr(float(v)) for v in row] + [label])

    header = f"# layout={truth.layout} seed={truth.seed} support={truth.support_per_pattern}"
    if truth.hole is not None:
        header += " hole=" + ",".join(repr(float(v)) for v in truth.hole)
    lines = [header] + [",".join(repr(float(v)) for v in r) for r in truth.rectangles]
    truth_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return data_path, truth_path


def load_truth(path: Union[str, Path]) -> GroundTruth:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    meta, rects = {}, []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            for token in line[1:].split():
                key, _, value = token.partition("=")
                meta[key] = value
            continue
        try:
            rect = tuple(float(v) for v in line.split(","))
        except ValueError:
            raise DataError(f"{path}:{lineno}: non-numeric coordinate") from None
        if len(rect) != 4 or rect[0] > rect[2] or rect[1] > rect[3]:
            raise DataError(f"{path}:{lineno}: expected x_lo,y_lo,x_hi,y_hi")
        rects.append(rect)
    if not rects:
        raise DataError(f"{path} holds no rectangles")
    hole = tuple(float(v) for v in meta["hole"].split(",")) if "hole" in meta else None
    return GroundTruth(
        tuple(rects),
        int(meta.get("support", 0)),
        meta.get("layout", "unknown"),
        int(meta.get("seed", 0)),
        hole,
    )


def load_export(data_path, truth_path):
    return load_csv(data_path, label_column="label"), load_truth(truth_path)
