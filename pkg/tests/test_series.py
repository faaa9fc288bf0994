# tests/test_series.py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from app.analysis.series import (
    PriceSeries,
    ReturnSeries,
    build_profile,
    exceedance_mask,
    excise,
    log_returns,
    shuffle_surrogate,
    split_periods,
    threshold_filter,
)
from app.core.exceptions import ConfigurationError, DegenerateSeriesError, InputDataError
from app.schemas.config_schemas import PeriodConfig
from tests.conftest import make_returns


def _prices(values, start='2000-01-03'):
    days = np.datetime64(start, 'D') + np.arange(len(values))
    return PriceSeries(dates=days, values=values, label='fx')


class TestLogReturns:
    def test_constant_price_gives_zero_returns(self):
        returns = log_returns(_prices([4.0, 4.0, 4.0, 4.0]))
        assert_array_equal(returns.values, [0.0, 0.0, 0.0])

    def test_exponential_prices(self):
        returns = log_returns(_prices([1.0, np.e, np.e ** 2]))
        assert_allclose(returns.values, [1.0, 1.0], rtol=1e-12)

    def test_single_step(self):
        returns = log_returns(_prices([100.0, 101.0]))
        assert returns.values[0] == pytest.approx(0.00995033085316808, rel=1e-12)

    def test_dates_align_to_later_day(self):
        prices = _prices([1.0, 2.0, 3.0])
        returns = log_returns(prices)
        assert len(returns) == len(prices) - 1
        assert_array_equal(returns.dates, prices.dates[1:])
        assert_array_equal(returns.from_dates, prices.dates[:-1])
        assert returns.meta == 'original'

    def test_non_positive_price_names_date(self):
        with pytest.raises(InputDataError) as info:
            _prices([1.0, 0.0, 2.0])
        assert info.value.detail['date'] == '2000-01-04'

    def test_unordered_dates_rejected(self):
        days = np.array(['2000-01-03', '2000-01-03'], dtype='datetime64[D]')
        with pytest.raises(InputDataError):
            PriceSeries(dates=days, values=[1.0, 2.0])

    def test_needs_two_prices(self):
        with pytest.raises(InputDataError):
            _prices([1.0])

    def test_arrays_are_read_only(self):
        returns = log_returns(_prices([1.0, 2.0, 3.0]))
        with pytest.raises(ValueError):
            returns.values[0] = 5.0


class TestProfile:
    @pytest.mark.parametrize('values, expected', [
        ([5.0, 5.0, 5.0], [0.0, 0.0, 0.0]),
        ([1.0, -1.0, 1.0, -1.0], [1.0, 0.0, 1.0, 0.0]),
        ([1.0, 2.0, 3.0], [-1.0, -1.0, 0.0]),
    ])
    def test_hand_examples(self, values, expected):
        assert_allclose(build_profile(make_returns(values)).values, expected, atol=1e-15)

    def test_source_mean(self):
        assert build_profile([1.0, 2.0, 3.0]).source_mean == 2.0

    def test_telescopes_to_zero(self, rng):
        x = rng.standard_normal(5000) * 3 + 7
        profile = build_profile(x)
        assert len(profile) == x.size
        assert abs(profile.values[-1]) <= 1e-9 * x.size * np.abs(x).max()

    def test_empty_input(self):
        with pytest.raises(InputDataError):
            build_profile(np.array([]))


class TestShuffleSurrogate:
    def test_length_one_is_identity(self):
        x = make_returns([0.3])
        assert_array_equal(shuffle_surrogate(x, 7).values, x.values)

    def test_preserves_multiset(self, rng):
        x = make_returns(rng.standard_normal(500))
        for seed in range(5):
            assert_array_equal(np.sort(shuffle_surrogate(x, seed).values), np.sort(x.values))

    def test_deterministic_per_seed(self, rng):
        x = make_returns(rng.standard_normal(1000))
        assert_array_equal(shuffle_surrogate(x, 11).values, shuffle_surrogate(x, 11).values)

    def test_different_seeds_differ(self, rng):
        x = make_returns(rng.standard_normal(1000))
        assert not np.array_equal(shuffle_surrogate(x, 1).values, shuffle_surrogate(x, 2).values)

    def test_provenance_and_dates(self, rng):
        x = make_returns(rng.standard_normal(10))
        surrogate = shuffle_surrogate(x, 42)
        assert surrogate.meta == 'surrogate(seed=42)'
        assert surrogate.lineage == ('original', 'surrogate(seed=42)')
        assert_array_equal(surrogate.dates, x.dates)


class TestThresholdFilter:
    def test_large_k_is_noop(self, rng):
        x = make_returns(rng.standard_normal(200))
        k = np.abs(x.values).max() / np.std(x.values, ddof=1) + 1.0
        assert_array_equal(threshold_filter(x, k).values, x.values)

    def test_spike_between_equal_neighbours(self):
        filtered = threshold_filter(make_returns([0.0, 0.0, 10.0, 0.0, 0.0]), 1.0)
        assert_array_equal(filtered.values, [0.0, 0.0, 0.0, 0.0, 0.0])

    def test_midpoint_interpolation(self):
        x = make_returns([1.0, 2.0, 9.0, 4.0, 5.0])
        assert_array_equal(exceedance_mask(x, 2.0), [False, False, True, False, False])
        assert_allclose(threshold_filter(x, 2.0).values, [1.0, 2.0, 3.0, 4.0, 5.0])

    def test_edges_take_nearest_survivor(self):
        x = make_returns([20.0, 1.0, 0.0, -1.0, 0.5, -0.5, 1.0, 0.0, 2.0, -20.0])
        filtered = threshold_filter(x, 1.0)
        assert filtered.values[0] == 1.0
        assert filtered.values[-1] == 2.0

    def test_signed_returns_use_magnitude(self):
        x = make_returns([0.0, 0.0, -10.0, 0.0, 0.0])
        assert_array_equal(threshold_filter(x, 1.0).values, np.zeros(5))

    def test_eliminated_sets_are_nested(self, rng):
        x = make_returns(rng.standard_t(3, 2000))
        masks = [exceedance_mask(x, k) for k in (1.0, 2.0, 3.0, 5.0)]
        for looser, stricter in zip(masks, masks[1:]):
            assert not np.any(stricter & ~looser)

    def test_provenance(self):
        filtered = threshold_filter(make_returns([1.0, 2.0, 3.0]), 3.0)
        assert filtered.meta == 'threshold-filtered(k=3)'

    def test_invalid_k(self):
        with pytest.raises(ConfigurationError):
            threshold_filter(make_returns([1.0, 2.0, 3.0]), 0.0)

    def test_too_short(self):
        with pytest.raises(InputDataError):
            threshold_filter(make_returns([1.0, 2.0]), 1.0)

    def test_everything_eliminated(self):
        with pytest.raises(DegenerateSeriesError):
            threshold_filter(make_returns([1.0, -1.0, 1.0, -1.0]), 0.5)


def _daily_returns(start, end, skip_year=None):
    days = np.arange(np.datetime64(start, 'D'), np.datetime64(end, 'D') + 1)
    if skip_year is not None:
        years = days.astype('datetime64[Y]').astype(int) + 1970
        days = days[years != skip_year]
    return ReturnSeries(dates=days[1:], values=np.linspace(-1.0, 1.0, days.size - 1), from_dates=days[:-1],
                        label='fx')


class TestSplitPeriods:
    def test_default_periods(self):
        x = _daily_returns('1991-01-01', '2005-12-31')
        before, after = split_periods(x)
        assert str(before.dates[0]) == '1991-01-02'
        assert str(before.dates[-1]) == '1996-12-31'
        assert str(after.dates[0]) == '1998-01-02'
        assert str(after.dates[-1]) == '2005-12-31'
        assert before.meta == 'period(before)'
        assert after.meta == 'period(after)'

    def test_partition_of_dates(self):
        x = _daily_returns('1991-01-01', '2005-12-31')
        before, after = split_periods(x)
        years = x.dates.astype('datetime64[Y]').astype(int) + 1970
        excised = x.dates[(years == 1997) | (x.dates == np.datetime64('1998-01-01'))]
        assert np.intersect1d(before.dates, after.dates).size == 0
        assert np.intersect1d(before.dates, excised).size == 0
        assert np.intersect1d(after.dates, excised).size == 0
        assert_array_equal(np.sort(np.concatenate([before.dates, excised, after.dates])), x.dates)

    def test_missing_window_rows_only_lose_straddling_return(self):
        x = _daily_returns('1991-01-01', '2005-12-31', skip_year=1997)
        before, after = split_periods(x)
        assert len(before) + len(after) == len(x) - 1
        assert str(before.dates[-1]) == '1996-12-31'
        assert str(after.from_dates[0]) == '1998-01-01'

    def test_excision_idempotent(self):
        with_window = _daily_returns('1991-01-01', '2005-12-31')
        without_window = _daily_returns('1991-01-01', '2005-12-31', skip_year=1997)
        for full, gapped in zip(split_periods(with_window), split_periods(without_window)):
            assert_array_equal(full.dates, gapped.dates)
            assert_array_equal(full.from_dates, gapped.from_dates)

    def test_inside_window_names_both_sides(self):
        x = _daily_returns('1997-02-01', '1997-11-30')
        with pytest.raises(InputDataError) as info:
            split_periods(x)
        assert info.value.detail['empty'] == ['before', 'after']

    def test_configurable_window(self):
        x = _daily_returns('2000-01-01', '2002-12-31')
        periods = PeriodConfig(excise_start='2001-01-01', excise_end='2001-06-30')
        before, after = split_periods(x, periods)
        assert str(before.dates[-1]) == '2000-12-31'
        assert str(after.from_dates[0]) == '2001-07-01'

    def test_excise_joins_both_sides(self):
        x = _daily_returns('1991-01-01', '2005-12-31')
        before, after = split_periods(x)
        whole = excise(x)
        assert_array_equal(whole.dates, np.concatenate([before.dates, after.dates]))
        assert whole.meta == 'excised(1997-01-01..1997-12-31)'
