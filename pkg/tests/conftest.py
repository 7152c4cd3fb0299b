import numpy as np
import pytest

from hypermint.dataset import Dataset, discretize, elementary_cells, equal_width_grid, grid_from_cuts
from hypermint.mdl import EncodingContext, HyperRectangle, PatternSet, total_bits

# Twelve objects over two attributes; rounding to the nearest integer gives
# seven occupied cells of an 8 x 8 grid.
RUNNING_EXAMPLE = np.array(
    [
        [0.30, 0.15],
        [0.05, 3.90],
        [0.20, 4.35],
        [4.40, 0.00],
        [4.30, 3.70],
        [4.10, 3.90],
        [4.25, 6.60],
        [7.10, 4.15],
        [6.70, 6.50],
        [6.90, 7.40],
        [7.45, 6.75],
        [7.10, 7.35],
    ]
)

# Unit-width intervals centred on the integers 0..7.
RUNNING_GRID_CUTS = [np.arange(9) - 0.5] * 2


def running_example():
    data = Dataset.from_array(RUNNING_EXAMPLE)
    return discretize(data, grid_from_cuts(RUNNING_GRID_CUTS))


@pytest.fixture
def running():
    return running_example()


def triple_fixture():
    """Three cells on a 5-interval line whose pairwise merges all lose bits."""
    values = [0.5] * 2 + [2.5] * 7 + [4.5] * 3
    data = Dataset.from_array(np.array(values)[:, None])
    return discretize(data, grid_from_cuts([np.arange(6.0)]))


def box_blobs(n, dim, n_boxes, seed=0):
    """Uniform points in ``n_boxes`` random axis-aligned boxes of [0, 100]^dim."""
    rng = np.random.default_rng(seed)
    lo = rng.uniform(0, 70, size=(n_boxes, dim))
    width = rng.uniform(10, 30, size=(n_boxes, dim))
    per = n // n_boxes
    parts = [rng.uniform(lo[i], lo[i] + width[i], size=(per, dim)) for i in range(n_boxes)]
    return Dataset.from_array(np.concatenate(parts))


def set_partitions(items):
    """All partitions of a small list (brute force)."""
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]
        yield [[first]] + part


def best_partition_bits(d, cells):
    """Smallest total length over every grouping of cells into joined boxes."""
    ctx = EncodingContext(d.grid, d.n_objects)
    best = np.inf
    for part in set_partitions(list(range(len(cells)))):
        pats = []
        for group in part:
            coords = np.array([cells[i].coords for i in group])
            cover = np.concatenate([cells[i].cover for i in group])
            pats.append(HyperRectangle(coords.min(0), coords.max(0), cover))
        best = min(best, total_bits(PatternSet(pats), ctx).total_bits)
    return best


def random_partition_patterns(rng, d, cells, n_joins):
    """Elementary cells with a few random pairwise joins applied."""
    pats = [HyperRectangle(c.coords, c.coords, c.cover) for c in cells]
    for _ in range(n_joins):
        if len(pats) < 2:
            break
        a, b = sorted(rng.choice(len(pats), size=2, replace=False))
        hb, ha = pats.pop(b), pats.pop(a)
        lower = np.minimum(ha.lower, hb.lower)
        upper = np.maximum(ha.upper, hb.upper)
        pats.append(HyperRectangle(lower, upper, np.union1d(ha.cover, hb.cover)))
    return PatternSet(pats)


def random_instance(rng):
    """Up to 30 objects in up to 3 dimensions, partly merged at random."""
    n = int(rng.integers(2, 31))
    k = int(rng.integers(1, 4))
    values = rng.uniform(0, 10, size=(n, k))
    data = Dataset.from_array(values)
    d = discretize(data, equal_width_grid(data, int(rng.integers(1, 7))))
    cells = elementary_cells(d)
    pats = random_partition_patterns(rng, d, cells, int(rng.integers(0, len(cells))))
    return d, pats
