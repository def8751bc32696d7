"""Tests for dereverb.wpe and dereverb.specm."""

import numpy as np
import pytest
from scipy.signal import lfilter

from dereverb.specm import specm_apply
from dereverb.wpe import (
    WpeConfig,
    WpeFilter,
    floor_power,
    stack_delayed,
    tap_matrix,
    wpe_dereverberate,
    wpe_filter_update,
    wpe_iterations,
    wpe_iterative,
    wpe_masked,
    wpe_objective,
)
from dsp.stft import Spectrogram, StftConfig
from masks import ComplexMask

NARROWBAND = StftConfig(1, 1, 1)
EIGHT_BINS = StftConfig(14, 14, 7)


def narrowband(values):
    """(R, T) complex series as a single-bin spectrogram"""
    return Spectrogram(np.asarray(values)[..., np.newaxis], NARROWBAND)


def complex_noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


def reverberant(rng, frames=2000, channels=2, delay=2, decay=0.6):
    """AR(1) reverberation at lag `delay`: x(t) = s(t) + decay * x(t - delay)"""
    s = complex_noise(rng, (channels, frames))
    a = np.zeros(delay + 1)
    a[0], a[delay] = 1.0, -decay
    return s, lfilter([1.0], a, s, axis=1)


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class TestWpeConfig:
    def test_presets(self):
        assert WpeConfig.single_channel().taps == 18
        assert WpeConfig.single_channel().eps == pytest.approx(1e-5)
        assert WpeConfig.multi_channel().taps == 2
        assert WpeConfig.multi_channel(delay=3).delay == 3

    @pytest.mark.parametrize("field, value", [('taps', -1), ('delay', 0), ('iterations', -1), ('eps', -1e-3)])
    def test_invalid(self, field, value):
        with pytest.raises(ValueError, match=field):
            WpeConfig(**{field: value})

    def test_zero_taps_disables(self):
        assert not WpeConfig(taps=0).enabled


# ---------------------------------------------------------------------------
# Stacking
# ---------------------------------------------------------------------------


class TestTapMatrix:
    def test_layout(self, rng):
        values = complex_noise(rng, (2, 6, 3))
        stacked = tap_matrix(values, taps=2, delay=1)
        assert stacked.shape == (4, 6, 3)
        np.testing.assert_array_equal(stacked[0:2, 1:], values[:, :5])
        np.testing.assert_array_equal(stacked[2:4, 2:], values[:, :4])
        assert not np.any(stacked[0:2, 0])
        assert not np.any(stacked[2:4, :2])

    def test_delay_past_end_is_zero(self, rng):
        assert not np.any(tap_matrix(complex_noise(rng, (1, 3, 2)), taps=2, delay=5))

    def test_stack_delayed_matches_frame_slice(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 8, 257)))
        stacked = tap_matrix(spec.values, 3, 2)
        for t in (0, 3, 7):
            np.testing.assert_array_equal(stack_delayed(spec, 3, 2, t), stacked[:, t])


class TestFloorPower:
    def test_relative_floor(self):
        np.testing.assert_allclose(floor_power(np.array([0.0, 2.0]), rel=0.1), [0.1, 2.0])

    def test_all_zero_without_reference(self):
        np.testing.assert_allclose(floor_power(np.zeros(3), rel=0.5), 0.5)

    def test_floor_follows_reference_not_estimate(self):
        lam = np.array([1e-30, 1e-8, 1e-6])
        floored = floor_power(lam, reference_power=1.0, rel=1e-10)
        np.testing.assert_allclose(floored, [1e-10, 1e-8, 1e-6])
        assert floor_power(lam, rel=1e-10)[0] < 1e-10


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


class TestWpe:
    def test_zero_taps_is_identity(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 10, 257)))
        cfg = WpeConfig(taps=0)
        assert wpe_iterative(spec, cfg) is spec
        output, filt = wpe_masked(spec, ComplexMask.ones(10, 257), cfg, return_filter=True)
        assert output is spec
        assert filt.values.shape == (257, 0, 2)

    def test_zero_iterations_is_identity(self, rng):
        spec = Spectrogram(complex_noise(rng, (1, 10, 257)))
        assert wpe_iterative(spec, WpeConfig(iterations=0)) is spec

    def test_zero_filter_leaves_input(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 5, 257)))
        output = wpe_dereverberate(spec, WpeFilter.zeros(257, 2, 2), 2, 2)
        np.testing.assert_array_equal(output.values, spec.values)

    def test_filter_shape_checked(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 5, 257)))
        with pytest.raises(ValueError, match="filter shape"):
            wpe_dereverberate(spec, WpeFilter.zeros(257, 1, 2), 2, 2)

    def test_white_input_gives_small_filter(self, rng):
        spec = narrowband(complex_noise(rng, (2, 2000)))
        _, filt = wpe_masked(spec, ComplexMask.ones(2000, 1), WpeConfig(taps=1, delay=1, eps=0.0),
                             return_filter=True)
        assert np.linalg.norm(filt.values) < 0.1

    @pytest.mark.parametrize("channels", [1, 2])
    def test_removes_autoregressive_tail(self, rng, channels):
        source, observed = reverberant(rng, channels=channels)
        cfg = WpeConfig(taps=1, delay=2, iterations=3, eps=0.0)
        output = wpe_iterative(narrowband(observed), cfg)
        before = np.linalg.norm(observed - source)
        after = np.linalg.norm(output.values[..., 0] - source)
        assert after < 0.2 * before

    def test_filter_minimises_weighted_error(self, rng):
        _, observed = reverberant(rng, frames=500)
        spec = narrowband(observed)
        lam = floor_power(rng.uniform(0.5, 2.0, (500, 1)))
        filt = wpe_filter_update(spec, lam, taps=2, delay=2)
        best = wpe_objective(spec, filt, lam, 2, 2)
        for _ in range(5):
            nudged = WpeFilter(filt.values + 0.01 * complex_noise(rng, filt.values.shape))
            assert wpe_objective(spec, nudged, lam, 2, 2) > best
        assert wpe_objective(spec, WpeFilter.zeros(1, 2, 2), lam, 2, 2) > best

    def test_iterations_never_increase_cost(self, rng):
        _, observed = reverberant(rng, frames=800)
        spec = narrowband(observed)
        costs = [
            wpe_objective(spec, filt, lam, 2, 2, log_term=True)
            for filt, lam, _ in wpe_iterations(spec, WpeConfig(taps=2, delay=2, iterations=5, eps=0.0))
        ]
        assert len(costs) == 5
        assert all(b <= a + 1e-9 * abs(a) for a, b in zip(costs, costs[1:]))

    def test_unit_mask_matches_first_iteration(self, rng):
        _, observed = reverberant(rng, frames=400)
        spec = narrowband(observed)
        cfg = WpeConfig(taps=2, delay=2, iterations=3)
        first_filter, _, first_estimate = next(wpe_iterations(spec, cfg))
        output, filt = wpe_masked(spec, ComplexMask.ones(400, 1), cfg, return_filter=True)
        np.testing.assert_allclose(filt.values, first_filter.values, atol=1e-12)
        np.testing.assert_allclose(output.values, first_estimate.values, atol=1e-12)

    @pytest.mark.parametrize("level", [0.0, 1e-6])
    def test_near_silent_mask_floors_at_input_power(self, rng, level):
        _, observed = reverberant(rng, frames=600)
        spec = narrowband(observed)
        cfg = WpeConfig(taps=2, delay=2, eps=0.0)
        output, filt = wpe_masked(spec, ComplexMask(np.full((600, 1), level + 0j)), cfg, return_filter=True)
        # a constant floor everywhere means unweighted least squares
        unweighted = wpe_filter_update(spec, np.ones((600, 1)), 2, 2)
        assert np.all(np.isfinite(output.values))
        np.testing.assert_allclose(filt.values, unweighted.values, rtol=1e-8, atol=1e-10)

    def test_masked_lambda_must_match(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 10, 257)))
        with pytest.raises(ValueError, match="do not match"):
            wpe_masked(spec, ComplexMask.ones(9, 257), WpeConfig())

    def test_update_rejects_unfloored_lambda(self, rng):
        spec = narrowband(complex_noise(rng, (1, 20)))
        with pytest.raises(ValueError, match="strictly positive"):
            wpe_filter_update(spec, np.zeros((20, 1)), 1, 1)


class TestLeastSquares:
    """Unit lambda reduces the filter update to ordinary least squares"""

    def instance(self, rng):
        return Spectrogram(complex_noise(rng, (2, 64, 8)), EIGHT_BINS)

    @pytest.mark.parametrize("seed", range(20))
    def test_matches_direct_least_squares(self, seed):
        spec = self.instance(np.random.default_rng(seed))
        filt = wpe_filter_update(spec, np.ones((64, 8)), taps=3, delay=2)
        stacked = tap_matrix(spec.values, 3, 2)
        for f in range(8):
            # d(t)^T = x(t)^T - x~(t)^T conj(W)
            solution = np.linalg.lstsq(stacked[:, :, f].T, spec.values[:, :, f].T, rcond=None)[0]
            np.testing.assert_allclose(filt.values[f], np.conj(solution), rtol=1e-8, atol=1e-10)

    def test_gradient_vanishes_at_solution(self, rng):
        spec = self.instance(rng)
        lam = np.ones((64, 8))
        filt = wpe_filter_update(spec, lam, taps=3, delay=2)
        step = 1e-3
        for direction in (complex_noise(rng, filt.values.shape), 1j * complex_noise(rng, filt.values.shape)):
            plus = wpe_objective(spec, WpeFilter(filt.values + step * direction), lam, 3, 2)
            minus = wpe_objective(spec, WpeFilter(filt.values - step * direction), lam, 3, 2)
            assert abs(plus - minus) / (2 * step) < 1e-6

    def test_lambda_scale_leaves_filter_unchanged(self, rng):
        _, observed = reverberant(rng, frames=300)
        spec = narrowband(observed)
        lam = floor_power(rng.uniform(0.1, 3.0, (300, 1)))
        base = wpe_filter_update(spec, lam, taps=2, delay=2, eps=1e-6)
        doubled = wpe_filter_update(spec, 2.0 * lam, taps=2, delay=2, eps=1e-6)
        np.testing.assert_allclose(doubled.values, base.values, rtol=1e-10, atol=1e-12)


class TestSpecM:
    def test_mask_broadcast_across_channels(self, rng):
        spec = Spectrogram(complex_noise(rng, (3, 4, 257)))
        mask = ComplexMask(np.full((4, 257), 0.5j))
        np.testing.assert_allclose(specm_apply(spec, mask).values, 0.5j * spec.values)
