import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_instance
from hypermint.dataset import elementary_cells, grid_from_cuts
from hypermint.mdl import (
    LOG2_C0,
    EncodingContext,
    HyperRectangle,
    PatternSet,
    join,
    merge_gain,
    model_bits,
    pair_gains,
    plugin_data_bits,
    replacement_gain,
    residual_bits,
    total_bits,
    universal_int,
)


def sequential_plugin(sequence, m, eps):
    """Encode symbols one at a time with smoothed running counts."""
    counts = np.zeros(m)
    bits = 0.0
    for t, s in enumerate(sequence):
        bits -= math.log2((counts[s] + eps) / (t + eps * m))
        counts[s] += 1
    return bits


def elementary(d):
    return PatternSet(HyperRectangle(c.coords, c.coords, c.cover) for c in elementary_cells(d))


@pytest.mark.parametrize(
    "n, expected",
    [(1, 0.0), (2, 1.0), (4, 3.0), (16, 7.0), (65536, 16 + 4 + 2 + 1)],
)
def test_universal_int_on_power_towers(n, expected):
    assert universal_int(n) == pytest.approx(math.log2(2.865064) + expected, abs=1e-12)


def test_universal_int_rejects_non_positive():
    for bad in (0, -3, 2.5):
        with pytest.raises(ValueError):
            universal_int(bad)


@given(st.integers(1, 10**6))
def test_universal_int_monotone(n):
    assert universal_int(n + 1) >= universal_int(n)
    assert universal_int(n) >= LOG2_C0


@settings(max_examples=200, deadline=None)
@given(
    st.lists(st.integers(0, 8), min_size=1, max_size=6),
    st.sampled_from([0.1, 0.5, 1.0]),
    st.randoms(use_true_random=False),
)
def test_plugin_matches_sequential_code(usages, eps, rnd):
    seq = [i for i, u in enumerate(usages) for _ in range(u)]
    rnd.shuffle(seq)
    expected = sequential_plugin(seq, len(usages), eps)
    assert plugin_data_bits(usages, eps) == pytest.approx(expected, abs=1e-6)


def test_plugin_validation():
    with pytest.raises(ValueError):
        plugin_data_bits([])
    with pytest.raises(ValueError):
        plugin_data_bits([1, 2], epsilon=0)
    with pytest.raises(ValueError):
        plugin_data_bits([-1, 2])
    assert plugin_data_bits([0, 0]) == 0.0


def test_single_pattern_has_free_data_bits():
    assert plugin_data_bits([17]) == pytest.approx(0.0, abs=1e-12)


def test_hyperrectangle_validation():
    with pytest.raises(ValueError):
        HyperRectangle((2,), (1,), [0])
    with pytest.raises(ValueError):
        HyperRectangle((0, 0), (1,), [0])
    h = HyperRectangle((0, 1), (3, 1), [3, 1, 1])
    assert h.cover.tolist() == [1, 3]
    assert h.sizes == (4, 1)
    assert h.log_size == 2.0


def test_join_is_smallest_enclosing_box():
    a = HyperRectangle((0, 3), (1, 4), [0])
    b = HyperRectangle((2, 0), (2, 1), [1])
    j = join(a, b)
    assert (j.lower, j.upper) == ((0, 0), (2, 4))
    assert j.contains(a) and j.contains(b)
    assert j.cover.tolist() == [0, 1]


def test_running_example_final_model(running):
    # two boxes: indices 0..4 x 0..4 with 4 objects, 4..7 x 4..7 with 8 objects
    ctx = EncodingContext(running.grid, running.n_objects)
    cells = running.cells
    lower_left = np.flatnonzero(np.all(cells <= 4, axis=1) & ~np.all(cells >= 4, axis=1))
    rest = np.setdiff1d(np.arange(12), lower_left)
    assert lower_left.tolist() == [0, 1, 2, 3]
    pats = PatternSet([HyperRectangle((0, 0), (4, 4), lower_left), HyperRectangle((4, 4), (7, 7), rest)])
    ln = universal_int
    assert model_bits(pats, ctx) == pytest.approx(ln(2) + 2 * ln(8) + ln(2) + 4 * math.log2(36), abs=1e-9)
    assert residual_bits(pats) == pytest.approx(32 + 8 * math.log2(5), abs=1e-9)
    total = total_bits(pats, ctx)
    assert total.header_bits == ln(12)
    assert total.data_bits == pytest.approx(sequential_plugin([0] * 4 + [1] * 8, 2, 0.5), abs=1e-9)


def test_total_bits_requires_partition(running):
    ctx = EncodingContext(running.grid, running.n_objects)
    pats = list(elementary(running))
    with pytest.raises(ValueError):
        total_bits(pats[1:], ctx)
    pats.append(HyperRectangle((0, 0), (0, 0), [0]))
    with pytest.raises(ValueError):
        total_bits(pats, ctx)


def check_all_pair_gains(d, pats, eps=0.5):
    ctx = EncodingContext(d.grid, d.n_objects, eps)
    before = total_bits(pats, ctx).total_bits
    worst = 0.0
    for a in range(len(pats)):
        for b in range(a + 1, len(pats)):
            ha, hb = pats[a], pats[b]
            after = total_bits(pats.replace([ha, hb], join(ha, hb)), ctx).total_bits
            worst = max(worst, abs(merge_gain(ha, hb, pats, ctx) - (before - after)))
    return worst


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_merge_gain_matches_recomputation(seed):
    d, pats = random_instance(np.random.default_rng(seed))
    if len(pats) >= 2:
        assert check_all_pair_gains(d, pats) < 1e-6


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 4))
def test_replacement_gain_matches_recomputation(seed, r):
    rng = np.random.default_rng(seed)
    d, pats = random_instance(rng)
    if len(pats) < r:
        return
    ctx = EncodingContext(d.grid, d.n_objects)
    chosen = [pats[i] for i in rng.choice(len(pats), size=r, replace=False)]
    merged = chosen[0]
    for h in chosen[1:]:
        merged = join(merged, h)
    # the joined box may overlap other patterns; covers stay a partition
    new = PatternSet([h for h in pats if not any(h is c for c in chosen)] + [merged])
    expected = total_bits(pats, ctx).total_bits - total_bits(new, ctx).total_bits
    got = replacement_gain(len(pats), [h.usage for h in chosen], [h.log_size for h in chosen], merged.log_size, ctx)
    assert got == pytest.approx(expected, abs=1e-6)


@settings(max_examples=80, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_pair_gains_vectorised_agrees(seed):
    d, pats = random_instance(np.random.default_rng(seed))
    m = len(pats)
    if m < 2:
        return
    ctx = EncodingContext(d.grid, d.n_objects)
    pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]
    uj = [pats[a].usage for a, _ in pairs]
    uk = [pats[b].usage for _, b in pairs]
    sj = [pats[a].log_size for a, _ in pairs]
    sk = [pats[b].log_size for _, b in pairs]
    sjoin = [join(pats[a], pats[b]).log_size for a, b in pairs]
    vec = pair_gains(m, uj, uk, sj, sk, sjoin, ctx)
    scalar = [merge_gain(pats[a], pats[b], pats, ctx) for a, b in pairs]
    np.testing.assert_allclose(vec, scalar, atol=1e-9)


def test_merge_gain_guards(running):
    ctx = EncodingContext(running.grid, running.n_objects)
    pats = elementary(running)
    with pytest.raises(ValueError):
        merge_gain(pats[0], pats[0], pats, ctx)
    stranger = HyperRectangle((0, 0), (0, 0), [0])
    with pytest.raises(ValueError):
        merge_gain(pats[0], stranger, pats, ctx)


def test_model_bits_counts_boundaries():
    grid = grid_from_cuts([np.arange(4.0), np.arange(6.0)])
    ctx = EncodingContext(grid, 10)
    per_pattern = math.log2(3 * 4 / 2) + math.log2(5 * 6 / 2)
    assert ctx.pattern_bits == pytest.approx(per_pattern)
    expected = universal_int(2) + universal_int(3) + universal_int(5) + universal_int(7) + 7 * per_pattern
    assert model_bits(7, ctx) == pytest.approx(expected)
