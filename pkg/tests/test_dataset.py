import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hypermint.dataset import (
    DataError,
    Dataset,
    discretize,
    elementary_cells,
    equal_width_grid,
    fit_grid,
    grid_from_cuts,
    import_grid,
    load_csv,
    parse_grid,
    resolve_count,
)


def write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_load_csv_with_labels(tmp_path):
    p = write(tmp_path, "d.csv", "a,b,cls\n1,2,x\n3.5,-1,y\n")
    data = load_csv(p, label_column="cls")
    assert data.attributes == ("a", "b")
    np.testing.assert_array_equal(data.values, [[1, 2], [3.5, -1]])
    assert list(data.labels) == ["x", "y"]


@pytest.mark.parametrize(
    "text",
    ["", "a,b\n", "a,b\n1,foo\n", "a,b\n1,2,3\n", "a,b\n1,nan\n", "a,b\n1,inf\n"],
)
def test_load_csv_rejects_bad_input(tmp_path, text):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "bad.csv", text))


def test_missing_label_column(tmp_path):
    with pytest.raises(DataError):
        load_csv(write(tmp_path, "d.csv", "a\n1\n"), label_column="cls")


def test_missing_file(tmp_path):
    with pytest.raises(DataError):
        load_csv(tmp_path / "nope.csv")


def test_resolve_count():
    assert resolve_count("sqrt", 150) == 12
    assert resolve_count("SQRT", 2) == 1
    assert resolve_count("7", 10) == 7
    assert resolve_count(3, 10) == 3
    for bad in ("zero", 0, -2, 1.5):
        with pytest.raises(DataError):
            resolve_count(bad, 10)


def test_equal_width_grid_sqrt():
    data = Dataset.from_array(np.linspace(0, 10, 16)[:, None])
    grid = equal_width_grid(data)
    assert grid.bins.tolist() == [4]
    np.testing.assert_allclose(grid.cuts[0], [0, 2.5, 5, 7.5, 10])


def test_max_value_falls_in_last_interval():
    data = Dataset.from_array([[0.0], [5.0], [10.0]])
    d = discretize(data, equal_width_grid(data, 4))
    assert d.cells[:, 0].tolist() == [0, 2, 3]


def test_constant_attribute_gets_one_interval():
    data = Dataset.from_array([[1.0, 0.0], [1.0, 2.0]])
    grid = equal_width_grid(data, 3)
    assert grid.bins.tolist() == [1, 3]
    assert discretize(data, grid).cells[:, 0].tolist() == [0, 0]


def test_grid_pad_widens_to_integers():
    data = Dataset.from_array([[0.3], [4.6]])
    assert equal_width_grid(data, 2, pad=True).cuts[0].tolist() == [0.0, 2.5, 5.0]


def test_per_attribute_bins():
    data = Dataset.from_array(np.arange(12.0).reshape(6, 2))
    assert equal_width_grid(data, [2, 5]).bins.tolist() == [2, 5]
    with pytest.raises(DataError):
        equal_width_grid(data, [2])


def test_values_outside_grid_rejected():
    data = Dataset.from_array([[5.0]])
    with pytest.raises(DataError):
        discretize(data, grid_from_cuts([[0.0, 1.0]]))


def test_bad_grids():
    for text in ("", "1,1\n", "0,x\n", "3,2,1\n"):
        with pytest.raises(DataError):
            parse_grid(text)
    with pytest.raises(DataError):
        grid_from_cuts([[0.0]])


def test_import_grid_fits_data(tmp_path):
    p = write(tmp_path, "g.txt", "0,1,2\n0,5\n")
    data = Dataset.from_array([[-1.0, 2.0], [3.0, 4.0]])
    grid = import_grid(p, data)
    assert grid.cuts[0].tolist() == [-1.0, 1.0, 3.0]
    assert grid.cuts[1].tolist() == [0.0, 5.0]
    with pytest.raises(DataError):
        fit_grid(grid, Dataset.from_array([[1.0]]))


def test_elementary_cells_partition(running):
    cells = elementary_cells(running)
    assert [c.coords for c in cells] == sorted(c.coords for c in cells)
    covers = np.concatenate([c.cover for c in cells])
    assert sorted(covers.tolist()) == list(range(running.n_objects))


def test_bounds_maps_back_to_cuts():
    grid = grid_from_cuts([[0, 1, 3, 6], [10, 20]])
    np.testing.assert_array_equal(grid.bounds((1, 0), (2, 0)), [[1, 6], [10, 20]])


@settings(max_examples=60, deadline=None)
@given(
    arrays(np.float64, st.tuples(st.integers(1, 40), st.integers(1, 3)),
           elements=st.floats(-1e3, 1e3, allow_nan=False)),
    st.integers(1, 12),
)
def test_discretize_properties(values, bins):
    data = Dataset.from_array(values)
    grid = equal_width_grid(data, bins)
    d = discretize(data, grid)
    assert np.all(d.cells >= 0)
    assert np.all(d.cells < grid.bins)
    # every value lies in the real extent of its interval
    for i, c in enumerate(grid.cuts):
        lo = c[d.cells[:, i]]
        hi = c[d.cells[:, i] + 1]
        assert np.all(lo <= values[:, i]) and np.all(values[:, i] <= hi)
    assert sum(cell.usage for cell in elementary_cells(d)) == len(values)


def test_sqrt_rounding_matches_definition():
    for n in (1, 2, 3, 150, 178, 5000):
        assert resolve_count("sqrt", n) == max(1, round(math.sqrt(n)))
