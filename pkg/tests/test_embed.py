import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pagessa import (
    EmbedError,
    Panel,
    hankel,
    hankel_window,
    numeric_rank,
    page,
    page_tensor,
    stacked_hankel,
    stacked_page,
)


def full_panel(values) -> Panel:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return Panel(values=values, mask=np.ones(values.shape, dtype=bool))


def test_page_direct_indexing():
    pm = page(full_panel([1, 2, 3, 4, 5, 6]), 0, 2)
    assert np.array_equal(pm.data, [[1, 3, 5], [2, 4, 6]])
    assert pm.tail is None


def test_page_two_range_split():
    pm = page(full_panel([1, 2, 3, 4, 5]), 0, 2)
    assert np.array_equal(pm.data, [[1, 3], [2, 4]])
    assert pm.tail == (4, 5)


def test_page_window_one():
    pm = page(full_panel([1, 2, 3]), 0, 1)
    assert pm.data.shape == (1, 3)
    assert np.array_equal(pm.data[0], [1, 2, 3])


def test_page_window_too_long():
    with pytest.raises(EmbedError):
        page(full_panel([1, 2, 3]), 0, 4)


def test_stacked_page_concatenation():
    panel = full_panel([[1, 2, 3, 4], [5, 6, 7, 8]])
    sp = stacked_page(panel, 2)
    assert sp.data.shape == (2, 4)
    assert np.array_equal(sp.series_block(0), page(panel, 0, 2).data)
    assert np.array_equal(sp.series_block(1), page(panel, 1, 2).data)
    assert sp.column_owner(3) == (1, 1)


def test_stacked_page_single_series_is_page():
    panel = full_panel([1.0, 4.0, 2.0, 8.0, 3.0, 0.5])
    assert np.array_equal(stacked_page(panel, 3).data, page(panel, 0, 3).data)


def test_stacked_page_rank_bounded_by_model():
    # R=2 factors, each with a rank-2 Hankel (one harmonic): stacked rank <= 4
    rng = np.random.default_rng(1)
    t = np.arange(1, 241)
    w = np.vstack([np.cos(2 * np.pi * 0.05 * t), np.cos(2 * np.pi * 0.11 * t + 0.4)])
    values = rng.standard_normal((6, 2)) @ w
    sp = stacked_page(full_panel(values), 12)
    assert numeric_rank(sp.data) <= 4


def test_hankel_constant_rank_one():
    assert numeric_rank(hankel(np.full(20, 3.3)).data) == 1


def test_hankel_linear_rank_two():
    assert numeric_rank(hankel(np.arange(1.0, 9.0)).data) == 2


def test_hankel_single_harmonic_rank_two():
    x = np.cos(2 * np.pi * 0.13 * np.arange(1, 41))
    assert numeric_rank(hankel(x).data) == 2


def test_hankel_entries_follow_definition():
    x = np.arange(1.0, 9.0)
    h = hankel(x).data
    assert h.shape == (4, 4)
    for i in range(4):
        for j in range(4):
            assert h[i, j] == x[i + j]  # H[i][j] = f(i+j-1), 1-based


def test_stacked_hankel_shapes_and_single_series():
    panel = full_panel(np.arange(1.0, 9.0))
    assert np.array_equal(stacked_hankel(panel, "horizontal"), hankel(panel.values[0]).data)
    assert np.array_equal(stacked_hankel(panel, "vertical"), hankel(panel.values[0]).data)
    two = full_panel(np.vstack([np.arange(1.0, 9.0), np.arange(9.0, 17.0)]))
    assert stacked_hankel(two, "horizontal").shape == (4, 8)
    assert stacked_hankel(two, "vertical").shape == (8, 4)


def test_page_is_submatrix_of_hankel():
    x = np.sin(0.3 * np.arange(1, 61)) + 0.1 * np.arange(60)
    panel = full_panel(x)
    h = hankel(x).data
    for L in (2, 5, 10, 30):
        pm = page(panel, 0, L).data
        cols = [j * L for j in range(pm.shape[1]) if j * L < h.shape[1]]
        assert np.array_equal(pm[:L, : len(cols)][: h.shape[0]], h[:L, cols])


def test_page_rank_at_most_hankel_rank():
    x = np.cos(2 * np.pi * 0.07 * np.arange(1, 81)) * np.arange(1, 81)
    panel = full_panel(x)
    assert numeric_rank(page(panel, 0, 8).data) <= numeric_rank(hankel(x).data)


def test_page_tensor_matches_stacked_page():
    rng = np.random.default_rng(2)
    panel = full_panel(rng.standard_normal((3, 12)))
    pt = page_tensor(panel, 4)
    sp = stacked_page(panel, 4)
    for n in range(3):
        for s in range(3):
            for l in range(4):
                assert pt.data[n, s, l] == sp.data[l, n * 3 + s]


def test_page_tensor_single_series_matches_page():
    panel = full_panel(np.arange(1.0, 13.0))
    pt = page_tensor(panel, 3)
    pm = page(panel, 0, 3)
    assert np.array_equal(pt.data[0], pm.data.T)


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 40), st.integers(1, 10), st.integers(0, 2**31))
def test_unfold_roundtrip(T, L, seed):
    if L > T:
        L = T
    rng = np.random.default_rng(seed)
    values = rng.standard_normal(T)
    mask = rng.random(T) < 0.7
    panel = Panel(values=values[None, :] * mask[None, :], mask=mask[None, :])
    pm = page(panel, 0, L)
    body = (T // L) * L
    vals, msk = pm.unfold()
    assert np.array_equal(vals, panel.values[0, :body])
    assert np.array_equal(msk, panel.mask[0, :body])


def test_hankel_window_mask_propagation_shape():
    m = hankel_window(np.array([1.0, 0.0, 1.0, 1.0]), 2)
    assert m.shape == (2, 3)
    assert np.array_equal(m, [[1, 0, 1], [0, 1, 1]])
