"""Tests for room.mixer (reverberant mixtures at a target SIR and SNR)."""

import numpy as np
import pytest

from conftest import make_scene, speech_like
from room.mixer import REFERENCE_KEYS, gaussian_noise, scale_for_ratio, simulate_mixture

MAX_ORDER = 4


@pytest.fixture
def sources(rng):
    return speech_like(rng, seconds=0.5), speech_like(rng, seconds=0.6, rate_hz=4.5)


class TestScaleForRatio:
    def test_gain(self):
        gain = scale_for_ratio(4.0, 1.0, 0.0)
        assert 10 * np.log10(4.0 / (gain ** 2 * 1.0)) == pytest.approx(0.0)
        assert scale_for_ratio(1.0, 1.0, 20.0) == pytest.approx(0.1)


class TestSimulateMixture:
    @pytest.mark.parametrize("snr, sir", [(0.0, -6.0), (20.0, 6.0)])
    def test_measured_ratios(self, sources, snr, sir):
        target, interferer = sources
        result = simulate_mixture(target, interferer, None, make_scene(snr_db=snr, sir_db=sir),
                                  max_order=MAX_ORDER)
        assert result.measured_snr == pytest.approx(snr, abs=0.01)
        assert result.measured_sir == pytest.approx(sir, abs=0.01)

    def test_mixture_is_sum_of_components(self, sources):
        target, interferer = sources
        result = simulate_mixture(target, interferer, None, make_scene(), max_order=MAX_ORDER)
        refs = result.references
        total = refs['target_reverberant'].samples + refs['interferer_reverberant'].samples + refs['noise'].samples
        np.testing.assert_allclose(result.mixture.samples, total, atol=1e-12)

    def test_shapes_follow_target(self, sources):
        target, interferer = sources
        result = simulate_mixture(target, interferer, None, make_scene(), max_order=MAX_ORDER)
        assert result.mixture.samples.shape == (4, target.size)
        assert set(result.references) == set(REFERENCE_KEYS)
        assert all(ref.samples.shape == (4, target.size) for ref in result.references.values())

    def test_without_interferer(self, sources):
        result = simulate_mixture(sources[0], None, None, make_scene(), max_order=MAX_ORDER)
        assert result.measured_sir is None
        assert not np.any(result.references['interferer_reverberant'].samples)
        assert 'interferer' not in result.rirs

    def test_seeded_noise_is_reproducible(self, sources):
        first = simulate_mixture(sources[0], None, None, make_scene(seed=3), max_order=MAX_ORDER)
        second = simulate_mixture(sources[0], None, None, make_scene(seed=3), max_order=MAX_ORDER)
        np.testing.assert_array_equal(first.mixture.samples, second.mixture.samples)

    def test_short_noise_is_looped(self, sources):
        noise = gaussian_noise(1000, 1)
        result = simulate_mixture(sources[0], None, noise, make_scene(), max_order=MAX_ORDER)
        assert result.measured_snr == pytest.approx(20.0, abs=0.01)

    def test_silent_target(self):
        with pytest.raises(ValueError, match="silent"):
            simulate_mixture(np.zeros(4000), None, None, make_scene(), max_order=MAX_ORDER)

    def test_empty_target(self):
        with pytest.raises(ValueError, match="empty"):
            simulate_mixture(np.zeros(0), None, None, make_scene(), max_order=MAX_ORDER)
