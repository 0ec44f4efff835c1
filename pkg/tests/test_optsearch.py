import pytest

from pi_discovery import BudgetExceededError, ParameterError, SearchGrid, grid_search

from .conftest import get_hw


def small_grid() -> SearchGrid:
    # 13 ms steps keep Ta and Ts from sharing a large common divisor
    return SearchGrid(ta_range=(0.013, 0.1, 0.013), ts_range=(0.1, 0.3, 0.1), ds_step=0.005)


def test_candidate_count():
    """Test the number of grid points before the duty-cycle filter."""
    assert small_grid().candidate_count() == 7 * (20 + 40 + 60)
    assert SearchGrid.full().candidate_count() == 500 * (500 * 501 // 2)


def test_nothing_beats_singleint():
    """Test a small grid against SingleInt at every candidate's duty-cycle."""
    res = grid_search(small_grid(), get_hw())
    assert res.candidates == 840
    assert res.rows, "no candidate inside the duty-cycle band"
    assert res.violations == [], f"witness {res.witness}"
    for row in res.rows:
        assert 0.001 < row.eta < 0.1
        assert not row.violates
    assert res.witness is not None


def test_parallel_search_matches_serial():
    """Test that workers do not change the search result."""
    serial = grid_search(small_grid(), get_hw(), chunk_size=16)
    parallel = grid_search(small_grid(), get_hw(), workers=2, chunk_size=16)
    assert serial.rows == parallel.rows
    assert serial.min_gap == parallel.min_gap


def test_budget_exceeded():
    """Test that an oversized grid is rejected before any evaluation."""
    with pytest.raises(BudgetExceededError) as info:
        grid_search(SearchGrid.full(), budget=1_000)
    assert info.value.candidates == SearchGrid.full().candidate_count()
    assert info.value.budget == 1_000


def test_eta_targets():
    """Test the duty-cycle filter with target values."""
    grid = SearchGrid(eta_targets=(0.01, 0.05), eta_window=0.001)
    assert grid.accepts(0.0105)
    assert not grid.accepts(0.02)
    assert not SearchGrid().accepts(0.2)


def test_grid_validation():
    """Test rejected grids."""
    with pytest.raises(ParameterError):
        SearchGrid(ta_range=(0.1, 0.05, 0.01))
    with pytest.raises(ParameterError):
        SearchGrid(ts_range=(0.0, 1.0, 0.05))
    with pytest.raises(ParameterError):
        SearchGrid(ds_step=0.0)
    with pytest.raises(ParameterError):
        SearchGrid(eta_band=(0.1, 0.01))
