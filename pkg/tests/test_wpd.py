"""Tests for beamforming.wpd."""

import numpy as np
import pytest

from beamforming.mvdr import ReferenceVector, mvdr_weights
from beamforming.wpd import (
    WpdConfig,
    apply_wpd,
    wpd_beamform,
    wpd_enhance,
    wpd_power,
    wpd_stack,
    wpd_stack_matrix,
    wpd_weights,
)
from dsp.hermitian import masked_psd, power_weighted_covariance
from dsp.stft import Spectrogram, StftConfig
from masks import ComplexMask


def complex_noise(rng, shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2)


class TestWpdConfig:
    def test_defaults(self):
        cfg = WpdConfig()
        assert (cfg.taps, cfg.delay) == (1, 2)
        assert cfg.eps == pytest.approx(1e-4)

    @pytest.mark.parametrize("field, value", [('taps', -1), ('delay', 0), ('eps', -1.0)])
    def test_invalid(self, field, value):
        with pytest.raises(ValueError, match=field):
            WpdConfig(**{field: value})


class TestStacking:
    def test_current_frame_first(self, rng):
        values = complex_noise(rng, (2, 6, 3))
        stacked = wpd_stack_matrix(values, taps=2, delay=2)
        assert stacked.shape == (6, 6, 3)
        np.testing.assert_array_equal(stacked[:2], values)
        np.testing.assert_array_equal(stacked[2:4, 2:], values[:, :4])
        np.testing.assert_array_equal(stacked[4:6, 3:], values[:, :3])

    def test_single_frame(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 5, 257)))
        column = wpd_stack(spec, 1, 2, 4)
        np.testing.assert_array_equal(column[:2], spec.values[:, 4])
        np.testing.assert_array_equal(column[2:], spec.values[:, 2])
        with pytest.raises(ValueError, match="out of range"):
            wpd_stack(spec, 1, 2, 5)

    def test_power_is_floored(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 4, 257)))
        lam = wpd_power(spec, ComplexMask.zeros(4, 257))
        assert np.all(lam > 0)


class TestWpdBeamform:
    def test_distortionless_without_taps(self, rng):
        g = np.array([1.0, 0.4 - 0.7j, -0.2 + 0.3j])
        s = complex_noise(rng, 400)
        spec = Spectrogram(np.outer(g, s)[..., np.newaxis], StftConfig(1, 1, 1))
        ones = ComplexMask.ones(400, 1)
        output = wpd_enhance(spec, ones, ones, WpdConfig(taps=0, eps=1e-3))
        np.testing.assert_allclose(output.values[0, :, 0], s, atol=1e-8)

    def test_weight_dimension(self, rng):
        spec = Spectrogram(complex_noise(rng, (3, 12, 257)))
        ones = ComplexMask.ones(12, 257)
        output, weights = wpd_beamform(spec, ones, ones, WpdConfig(taps=2))
        assert weights.values.shape == (257, 9)
        assert output.shape == (1, 12, 257)

    def test_zero_target_mask_passes_reference(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 12, 257)))
        output, weights = wpd_beamform(spec, ComplexMask.zeros(12, 257), ComplexMask.ones(12, 257),
                                       WpdConfig(taps=1), ReferenceVector(1))
        assert weights.num_degenerate == 257
        np.testing.assert_array_equal(weights.values[0], [0, 1, 0, 0])
        np.testing.assert_allclose(output.values[0], spec.values[1])

    def test_apply_checks_dimension(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 4, 257)))
        ones = ComplexMask.ones(4, 257)
        _, weights = wpd_beamform(spec, ones, ones, WpdConfig(taps=1))
        with pytest.raises(ValueError, match="stacked observations"):
            apply_wpd(weights, spec, 2, 2)


class TestWpdOptimality:
    """Rank-one target covariance: the weights solve the constrained power minimisation"""

    TARGET_FRAME = 5

    def instance(self, rng, frames=8, channels=2):
        spec = Spectrogram(complex_noise(rng, (channels, frames, 1)), StftConfig(1, 1, 1))
        mask_x = np.zeros((frames, 1), dtype=np.complex128)
        mask_x[self.TARGET_FRAME] = 0.8 - 0.3j
        mask_lambda = ComplexMask(rng.uniform(0.2, 1.0, (frames, 1)) * np.exp(2j * np.pi * rng.random((frames, 1))))
        return spec, ComplexMask(mask_x), mask_lambda

    def test_constraint_and_minimum_power(self, rng):
        spec, mask_x, mask_lambda = self.instance(rng)
        cfg = WpdConfig(taps=1, delay=2, eps=0.0)
        w = wpd_weights(spec, mask_x, mask_lambda, cfg).values[0]
        stacked = wpd_stack_matrix(spec.values, cfg.taps, cfg.delay)[:, :, 0]
        target = stacked[:, self.TARGET_FRAME]
        phi = power_weighted_covariance(stacked[..., np.newaxis], wpd_power(spec, mask_lambda)).values[0]

        def cost(v):
            return float(np.real(np.conj(v) @ phi @ v))

        assert np.vdot(w, target) == pytest.approx(target[0], rel=1e-9)
        best = cost(w)
        for _ in range(1000):
            q = complex_noise(rng, w.shape) * 10 ** rng.uniform(-3, 0)
            p = q - target * np.vdot(target, q) / np.vdot(target, target)
            assert abs(np.vdot(w + p, target) - target[0]) < 1e-9 * abs(target[0])
            assert cost(w + p) >= best * (1 - 1e-10)

    def test_distortionless_toward_padded_steering_vector(self, rng):
        g = np.array([1.0, -0.5 + 0.8j])
        values = complex_noise(rng, (2, 12, 1))
        values[:, 0, 0] = 1.7j * g
        spec = Spectrogram(values, StftConfig(1, 1, 1))
        mask_x = np.zeros((12, 1), dtype=np.complex128)
        mask_x[0] = 1.0
        w = wpd_weights(spec, ComplexMask(mask_x), ComplexMask.ones(12, 1), WpdConfig(taps=1, delay=2, eps=0.0))
        padded = np.concatenate([g, np.zeros(2)])
        assert np.vdot(w.values[0], padded) == pytest.approx(1.0, rel=1e-9)


class TestWpdReductions:
    def test_no_taps_constant_power_is_mvdr(self, rng):
        spec = Spectrogram(complex_noise(rng, (3, 40, 257)))
        mask_x = ComplexMask(rng.uniform(0.0, 1.0, (40, 257)) + 0j)
        cfg = WpdConfig(taps=0, eps=1e-4)
        # a zero lambda mask floors lambda to one constant
        wpd = wpd_weights(spec, mask_x, ComplexMask.zeros(40, 257), cfg)
        mvdr = mvdr_weights(masked_psd(spec, mask_x), masked_psd(spec, ComplexMask.ones(40, 257)),
                            ReferenceVector(), cfg.eps)
        np.testing.assert_allclose(wpd.values, mvdr.values, rtol=1e-8, atol=1e-10)

    def test_target_mask_scale_leaves_weights_unchanged(self, rng):
        spec = Spectrogram(complex_noise(rng, (2, 30, 257)))
        values = rng.uniform(0.0, 1.0, (30, 257)) * np.exp(2j * np.pi * rng.random((30, 257)))
        mask_lambda = ComplexMask(rng.uniform(0.1, 1.0, (30, 257)) + 0j)
        cfg = WpdConfig(taps=1, eps=1e-4)
        base = wpd_weights(spec, ComplexMask(values), mask_lambda, cfg)
        scaled = wpd_weights(spec, ComplexMask(3.0 * values), mask_lambda, cfg)
        np.testing.assert_allclose(scaled.values, base.values, rtol=1e-10, atol=1e-12)
