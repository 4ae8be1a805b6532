import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import scedex
from scedex import (
    DateOrderError,
    DomainError,
    EmptySeasonError,
    PanelFormatError,
    PanelSample,
    SeasonDefinition,
    decluster,
    load_panel,
    split_season,
)
from scedex.panel import SUMMER_MONTHS, WINTER_MONTHS

from conftest import make_panel


# ---------------------------------------------------------------------------
# PanelSample construction
# ---------------------------------------------------------------------------


def test_panel_shape_and_properties(small_panel):
    assert small_panel.n == 8
    assert small_panel.m == 2
    assert small_panel.station_ids == ("S0", "S1")
    assert small_panel.values.flags.writeable is False


def test_panel_rejects_unsorted_dates():
    with pytest.raises(DateOrderError, match="row 2"):
        PanelSample(
            values=np.ones((3, 1)),
            day_labels=np.array(
                ["2001-01-01", "2001-01-05", "2001-01-05"], dtype="datetime64[D]"
            ),
            station_ids=("a",),
            missing_mask=np.zeros((3, 1), dtype=bool),
        )


def test_panel_rejects_negative_and_nonfinite():
    with pytest.raises(DomainError):
        make_panel([[1.0], [-0.5]])
    with pytest.raises(DomainError):
        make_panel([[1.0], [np.inf]])


def test_masked_cells_may_hold_garbage():
    # values under the mask are replaced by NaN, whatever they were
    p = make_panel([[1.0, -99.0]], missing=[[False, True]])
    assert np.isnan(p.values[0, 1])
    assert p.values[0, 0] == 1.0


def test_months_and_years():
    p = make_panel(np.ones((3, 1)), start="1999-12-30")
    assert p.months().tolist() == [12, 12, 1]
    assert p.years().tolist() == [1999, 1999, 2000]


def test_station_index_resolution(small_panel):
    assert small_panel.station_index("S1") == 1
    assert small_panel.station_index(0) == 0
    with pytest.raises(DomainError):
        small_panel.station_index("nope")
    with pytest.raises(DomainError):
        small_panel.station_index(5)


# ---------------------------------------------------------------------------
# CSV loading
# ---------------------------------------------------------------------------


def _write(tmp_path, text, name="panel.csv"):
    f = tmp_path / name
    f.write_text(text)
    return f


def test_load_panel_roundtrip(tmp_path):
    f = _write(
        tmp_path,
        "date,A,B\n"
        "2000-01-01,1.5,0\n"
        "2000-01-02,,2.25\n"
        "2000-01-05,3,nan\n",
    )
    p = load_panel(f)
    assert p.station_ids == ("A", "B")
    assert p.n == 3
    assert p.values[0, 0] == 1.5
    assert p.missing_mask[1, 0] and p.missing_mask[2, 1]
    assert str(p.day_labels[2]) == "2000-01-05"


def test_load_panel_blank_lines_tolerated(tmp_path):
    f = _write(tmp_path, "date,A\n2000-01-01,1\n\n2000-01-02,2\n")
    assert load_panel(f).n == 2


def test_load_panel_error_carries_line_number(tmp_path):
    f = _write(tmp_path, "date,A\n2000-01-01,1\n2000-01-02,oops\n")
    with pytest.raises(PanelFormatError, match="line 3"):
        load_panel(f)

    f2 = _write(tmp_path, "date,A\n2000-01-03,1\n2000-01-02,2\n", name="o.csv")
    with pytest.raises(DateOrderError, match="line 3"):
        load_panel(f2)

    f3 = _write(tmp_path, "d,A\n2000-01-01,1\n", name="h.csv")
    with pytest.raises(PanelFormatError, match="date"):
        load_panel(f3)


def test_load_panel_negative_value(tmp_path):
    f = _write(tmp_path, "date,A\n2000-01-01,-3\n")
    with pytest.raises(DomainError, match="line 2"):
        load_panel(f)


def test_load_panel_station_subset(tmp_path):
    f = _write(tmp_path, "date,A,B,C\n2000-01-01,1,2,3\n")
    p = load_panel(f, station_columns=["C", "A"])
    assert p.station_ids == ("C", "A")
    assert p.values[0].tolist() == [3.0, 1.0]


# ---------------------------------------------------------------------------
# Seasons
# ---------------------------------------------------------------------------


def test_builtin_seasons_are_disjoint():
    assert not (WINTER_MONTHS & SUMMER_MONTHS)
    assert SeasonDefinition.winter().included_months == WINTER_MONTHS
    assert SeasonDefinition.summer().included_months == SUMMER_MONTHS


def test_split_season_keeps_only_matching_months():
    n = 200  # Jan 1 - Jul 18: only 91 winter days, so the thin-year warning fires
    p = make_panel(np.arange(n, dtype=float).reshape(-1, 1) + 1, start="2000-01-01")
    with pytest.warns(UserWarning, match="fewer than 150"):
        w = split_season(p, SeasonDefinition.winter())
    assert set(w.months().tolist()) <= WINTER_MONTHS
    s = split_season(p, SeasonDefinition(SUMMER_MONTHS, min_days_per_year=1))
    assert set(s.months().tolist()) <= SUMMER_MONTHS
    assert w.n + s.n < n  # April dropped from both


def test_split_season_full_year_no_warning():
    # a complete year keeps 152 winter days (Jan-Mar + Nov-Dec), above the floor
    p = make_panel(np.ones((366, 1)), start="2000-01-01")
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("error")
        w = split_season(p, SeasonDefinition.winter())
    assert w.n == 152


def test_split_season_empty_raises():
    p = make_panel(np.ones((3, 1)), start="2000-06-01")
    with pytest.raises(EmptySeasonError):
        split_season(p, SeasonDefinition(frozenset({2})))


def test_season_validation():
    with pytest.raises(DomainError):
        SeasonDefinition(frozenset())
    with pytest.raises(DomainError):
        SeasonDefinition(frozenset({0, 5}))


# ---------------------------------------------------------------------------
# Declustering
# ---------------------------------------------------------------------------


def test_decluster_hand_case():
    # values 9 (day 4) and 8 (day 7) dominate their 2-day windows, wiping
    # out days 2-6 and 8; day 1 sits 3 days from day 4 and survives.
    vals = np.array([[5.0], [6.0], [7.0], [9.0], [6.5], [4.0], [8.0], [1.0]])
    p = make_panel(vals)
    out = decluster(p, gap_days=2)
    assert out.values[:, 0].tolist() == [5.0, 9.0, 8.0]


def test_decluster_tie_prefers_earlier_day():
    vals = np.array([[3.0], [3.0], [1.0]])
    out = decluster(make_panel(vals), gap_days=1)
    # both ties fall in each other's window; the earlier day wins
    assert str(out.day_labels[0]).endswith("01-01")
    assert out.values[:, 0].tolist() == [3.0, 1.0]


def test_decluster_gap_zero_is_identity(small_panel):
    out = decluster(small_panel, gap_days=0)
    assert out.n == small_panel.n
    np.testing.assert_array_equal(out.values, small_panel.values)


def test_decluster_uses_station_max():
    # station 1 carries the big event on day 2; it must suppress day 1's
    # station-0 value even though column 0 alone would keep day 1
    vals = np.array([[5.0, 0.0], [1.0, 9.0], [0.1, 0.2]])
    out = decluster(make_panel(vals), gap_days=1)
    assert out.n == 1
    assert out.values[0].tolist() == [1.0, 9.0]


def test_decluster_drops_all_missing_days():
    vals = np.array([[1.0], [2.0], [3.0]])
    missing = np.array([[False], [True], [False]])
    with pytest.warns(UserWarning, match="all stations missing"):
        out = decluster(make_panel(vals, missing=missing), gap_days=0)
    assert out.n == 2


def test_decluster_respects_calendar_gaps():
    # days 1 and 30: far apart, both kept regardless of value order
    p = PanelSample(
        values=np.array([[2.0], [1.0]]),
        day_labels=np.array(["2000-01-01", "2000-01-30"], dtype="datetime64[D]"),
        station_ids=("a",),
        missing_mask=np.zeros((2, 1), dtype=bool),
    )
    assert decluster(p, gap_days=2).n == 2


def test_decluster_negative_gap():
    with pytest.raises(DomainError):
        decluster(make_panel(np.ones((2, 1))), gap_days=-1)


@settings(max_examples=60, deadline=None)
@given(
    values=st.lists(
        st.floats(min_value=0, max_value=100, allow_nan=False), min_size=1, max_size=40
    ),
    gap=st.integers(min_value=0, max_value=5),
)
def test_decluster_separation_property(values, gap):
    """Kept days are pairwise more than ``gap`` apart, and every removed day
    sits within ``gap`` of a kept day whose maximum is at least as large."""
    p = make_panel(np.asarray(values).reshape(-1, 1))
    out = decluster(p, gap_days=gap)
    kept_days = out.day_numbers()
    if gap > 0 and kept_days.size > 1:
        assert np.diff(kept_days).min() > gap
    kept_set = set(kept_days.tolist())
    kept_max = {int(d): v for d, v in zip(kept_days, out.values[:, 0])}
    for d, v in zip(p.day_numbers(), p.values[:, 0]):
        if int(d) in kept_set:
            continue
        blockers = [
            kept_max[kd]
            for kd in kept_max
            if abs(kd - int(d)) <= gap
        ]
        assert blockers and max(blockers) >= v


def test_public_reexports():
    assert scedex.load_panel is load_panel
    assert scedex.__version__
