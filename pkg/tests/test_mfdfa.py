# tests/test_mfdfa.py
import numpy as np
import pytest
from numpy.testing import assert_allclose, assert_array_equal

from app.analysis.mfdfa import DEGENERATE_RTOL, box_fluctuations, fluctuation_function, hurst_exponents
from app.analysis.series import build_profile
from app.core.exceptions import ConfigurationError, DegenerateBoxError, DegenerateSeriesError
from app.schemas.config_schemas import Direction, MfdfaConfig


def normal_equation_residuals(y: np.ndarray, m: int) -> np.ndarray:
    """独立实现：正规方程 (XᵀX)β = Xᵀy 求解后的残差"""
    t = np.arange(y.size, dtype=float)
    t = (t - t.mean()) / t.std()
    design = np.vander(t, m + 1, increasing=True)
    beta = np.linalg.solve(design.T @ design, design.T @ y)
    return y - design @ beta


class TestBoxFluctuations:
    def test_linear_profile_is_annihilated(self):
        profile = 3.0 * np.arange(60) + 1.5
        assert_array_equal(box_fluctuations(profile, 10, 1), np.zeros(6))

    def test_quadratic_profile_with_order_two(self):
        t = np.arange(120, dtype=float)
        assert_array_equal(box_fluctuations(0.01 * t ** 2 - t + 4, 12, 2, Direction.BOTH), np.zeros(20))

    def test_constant_detrend_hand_example(self):
        f2 = box_fluctuations(np.array([0.0, 1.0, 0.0, 1.0, 0.0, 1.0]), 3, 0)
        assert_allclose(f2, [2.0 / 9.0, 2.0 / 9.0])

    def test_bidirectional_adds_tail_boxes(self, rng):
        profile = rng.standard_normal(103)
        forward = box_fluctuations(profile, 10, 1, 'forward')
        both = box_fluctuations(profile, 10, 1, 'both')
        assert both.size == 2 * forward.size
        assert_allclose(both[:forward.size], forward)
        # 反向第一个盒子是最后 10 个点
        tail = profile[-10:]
        expected = np.mean(normal_equation_residuals(tail, 1) ** 2)
        assert both[forward.size] == pytest.approx(expected, rel=1e-10)

    def test_random_profile_matches_normal_equations(self, rng):
        profile = np.cumsum(rng.standard_normal(64))
        f2 = box_fluctuations(profile, 8, 1)
        expected = [np.mean(normal_equation_residuals(box, 1) ** 2) for box in profile.reshape(8, 8)]
        assert_allclose(f2, expected, rtol=1e-10)

    def test_oracle_equivalence_on_random_instances(self, rng):
        for _ in range(100):
            s = int(rng.integers(16, 65))
            m = int(rng.integers(1, 4))
            profile = np.cumsum(rng.standard_normal(3 * s))
            f2 = box_fluctuations(profile, s, m)
            expected = [np.mean(normal_equation_residuals(box, m) ** 2) for box in profile.reshape(3, s)]
            assert_allclose(f2, expected, rtol=1e-10)

    def test_scale_too_small_for_order(self):
        with pytest.raises(ConfigurationError):
            box_fluctuations(np.arange(50, dtype=float), 3, 2)

    def test_scale_longer_than_profile(self):
        with pytest.raises(ConfigurationError):
            box_fluctuations(np.arange(10, dtype=float), 12, 1)

    def test_near_polynomial_box_counts_as_degenerate(self):
        t = np.arange(40, dtype=float)
        profile = 1e6 * t + 1e-9
        f2 = box_fluctuations(profile, 20, 1)
        assert np.all(np.sqrt(f2) <= DEGENERATE_RTOL * np.abs(profile).max())


class TestFluctuationFunction:
    def test_identical_boxes_give_sqrt_c_for_every_q(self):
        profile = np.tile([0.0, 1.0, 0.0], 6)
        for q in (-4.0, -1.0, 0.0, 0.5, 2.0, 6.0):
            assert fluctuation_function(profile, 3, q, 0) == pytest.approx(np.sqrt(2.0 / 9.0), rel=1e-12)

    def test_q2_is_rms(self, rng):
        profile = np.cumsum(rng.standard_normal(200))
        f2 = box_fluctuations(profile, 20, 2)
        assert fluctuation_function(profile, 20, 2.0, 2) == pytest.approx(np.sqrt(f2.mean()), rel=1e-12)

    def test_negative_moment_hand_example(self):
        # 两个盒子，m = 0：F2 分别为 1 与 4
        profile = np.array([1.0, -1.0, 2.0, -2.0])
        assert fluctuation_function(profile, 2, -2.0, 0) == pytest.approx(np.sqrt(8.0 / 5.0), rel=1e-12)

    def test_moments_non_decreasing_in_q(self, rng):
        profile = np.cumsum(rng.standard_t(3, 2000))
        values = [fluctuation_function(profile, 50, q, 2, 'both') for q in np.arange(-10.0, 10.5, 0.5)]
        assert np.all(np.diff(values) >= -1e-12 * np.abs(values[:-1]))

    def test_large_moments_do_not_overflow(self, rng):
        profile = np.cumsum(rng.standard_normal(400)) * 1e20
        value = fluctuation_function(profile, 40, 10.0, 2)
        assert np.isfinite(value) and value > 0

    def test_degenerate_box_with_negative_q(self):
        profile = np.concatenate([np.arange(10, dtype=float), np.array([0.0, 3.0, -1.0, 4.0, 2.0] * 2)])
        with pytest.raises(DegenerateBoxError) as info:
            fluctuation_function(profile, 10, -1.0, 1)
        assert info.value.scale == 10
        assert info.value.box == 1

    def test_degenerate_box_skipped_for_positive_q(self):
        profile = np.concatenate([np.arange(10, dtype=float), np.array([0.0, 3.0, -1.0, 4.0, 2.0] * 2)])
        f2 = box_fluctuations(profile, 10, 1)
        assert fluctuation_function(profile, 10, 2.0, 1) == pytest.approx(np.sqrt(f2[1] / 2.0))

    def test_all_boxes_degenerate(self):
        with pytest.raises(DegenerateSeriesError):
            fluctuation_function(np.arange(30, dtype=float), 10, 2.0, 1)


class TestHurstExponents:
    def _config(self, **overrides):
        defaults = dict(scale_min=16, scale_max=256, scale_count=12, q_min=-5, q_max=5, q_step=1.0)
        defaults.update(overrides)
        return MfdfaConfig(**defaults)

    def test_gaussian_noise_is_half(self):
        x = np.random.default_rng(3).standard_normal(2 ** 14)
        surface, curve = hurst_exponents(x, MfdfaConfig(q_min=-5, q_max=5))
        assert np.all(np.abs(curve.h - 0.5) <= 0.1)
        assert curve.h2 == pytest.approx(0.5, abs=0.05)
        assert surface.values.shape == (len(surface.scales), len(surface.q_grid))
        assert np.all(surface.values > 0)

    def test_grid_order_does_not_matter(self, rng):
        x = rng.standard_normal(4096)
        scales = [16, 24, 40, 64, 100, 160, 256]
        _, ascending = hurst_exponents(x, self._config(scales=scales, q_grid=[-2.0, 0.0, 2.0]))
        _, shuffled = hurst_exponents(x, self._config(scales=scales[::-1], q_grid=[2.0, -2.0, 0.0]))
        assert_array_equal(ascending.h, shuffled.h)
        assert_array_equal(ascending.q_grid, [-2.0, 0.0, 2.0])

    def test_deterministic(self, rng):
        x = rng.standard_normal(4096)
        first = hurst_exponents(x, self._config())[1]
        second = hurst_exponents(x, self._config())[1]
        assert_array_equal(first.h, second.h)

    def test_fit_diagnostics(self, rng):
        x = rng.standard_normal(4096)
        _, curve = hurst_exponents(x, self._config())
        assert curve.h_stderr.shape == curve.h.shape
        assert np.all((curve.r_squared >= 0.0) & (curve.r_squared <= 1.0))
        assert curve.r_squared[curve.q_grid == 2.0][0] > 0.95

    def test_fit_window_restricts_scales(self, rng):
        x = rng.standard_normal(4096)
        _, curve = hurst_exponents(x, self._config(fit_min=32, fit_max=128))
        assert curve.fit_scales.min() >= 32
        assert curve.fit_scales.max() <= 128

    def test_fewer_than_three_fit_scales(self, rng):
        x = rng.standard_normal(4096)
        with pytest.raises(ConfigurationError):
            hurst_exponents(x, self._config(fit_min=200, fit_max=256))

    def test_series_too_short(self, rng):
        with pytest.raises(ConfigurationError):
            hurst_exponents(rng.standard_normal(1000), self._config())

    def test_zero_variance(self):
        with pytest.raises(DegenerateSeriesError, match='zero variance'):
            hurst_exponents(np.full(4096, 0.25), self._config())

    def test_surface_frame(self, rng):
        surface, _ = hurst_exponents(rng.standard_normal(4096), self._config())
        frame = surface.to_frame()
        assert list(frame.columns) == ['scale', 'q', 'F_q']
        assert len(frame) == surface.values.size

    def test_profile_input_equivalent(self, rng):
        x = rng.standard_normal(256)
        assert_allclose(box_fluctuations(build_profile(x), 16, 2), box_fluctuations(build_profile(x).values, 16, 2))
