"""Tests for pipeline.architectures."""

import logging

import numpy as np
import pytest

from conftest import make_scene, speech_like
from dsp.stft import Spectrogram, istft, stft
from masks import ComplexMask, MaskProvider, OracleMaskProvider
from dereverb.specm import specm_apply
from dereverb.wpe import WpeConfig, wpe_iterative, wpe_masked
from metrics import sisnr, srmr, stoi
from pipeline.architectures import (
    Architecture,
    DervbKind,
    PipelineConfig,
    enhance,
    run_dervb_then_sep,
    run_joint_wpd,
    run_sep_then_dervb,
)
from room.mixer import simulate_mixture

ORACLE_KEYS = ('target_anechoic', 'target_early', 'interferer_early', 'noise')


class RecordingProvider(MaskProvider):
    """All-ones masks; remembers which stages asked"""
    source = 'test'

    def __init__(self):
        self.calls = []

    def mask(self, stage, stage_input, separated=False):
        self.calls.append((stage, separated))
        return ComplexMask.ones(stage_input.num_frames, stage_input.num_bins)


@pytest.fixture
def noise_spec(rng):
    return Spectrogram(rng.standard_normal((3, 30, 257)) + 1j * rng.standard_normal((3, 30, 257)))


@pytest.fixture(scope='module')
def simulated():
    rng = np.random.default_rng(99)
    target, interferer = speech_like(rng, seconds=1.0), speech_like(rng, seconds=1.0, rate_hz=4.5)
    result = simulate_mixture(target, interferer, None, make_scene(snr_db=20.0, sir_db=0.0), max_order=6)
    mixture = stft(result.mixture)
    provider = OracleMaskProvider.from_waves(
        result.mixture, {key: result.references[key] for key in ORACLE_KEYS})
    return result, mixture, provider


# ---------------------------------------------------------------------------
# Configuration
# ---------------------------------------------------------------------------


class TestPipelineConfig:
    def test_defaults(self):
        cfg = PipelineConfig()
        assert cfg.architecture is Architecture.DERVB_THEN_SEP
        assert cfg.dervb_kind is DervbKind.WPE_MASKED
        assert (cfg.wpe_taps, cfg.wpe_eps) == (2, pytest.approx(1e-6))

    def test_single_channel_wpe_defaults_after_separation(self):
        cfg = PipelineConfig(architecture='sep_then_dervb')
        assert (cfg.wpe_taps, cfg.wpe_eps) == (18, pytest.approx(1e-5))

    def test_explicit_taps_kept(self):
        assert PipelineConfig(architecture='sep_then_dervb', wpe_taps=5).wpe_taps == 5

    def test_unknown_architecture(self):
        with pytest.raises(ValueError, match="unknown architecture 'beamform_twice'"):
            PipelineConfig(architecture='beamform_twice')

    def test_unknown_dervb_kind(self):
        with pytest.raises(ValueError, match="dereverberation kind"):
            PipelineConfig(dervb_kind='cepstral')

    def test_invalid_stage_settings(self):
        with pytest.raises(ValueError, match="delay"):
            PipelineConfig(wpe_delay=0)
        with pytest.raises(ValueError, match="taps"):
            PipelineConfig(wpd_taps=-1)

    def test_dict_round_trip(self):
        cfg = PipelineConfig(architecture='joint_wpd', wpd_taps=3)
        data = cfg.to_dict()
        assert data['architecture'] == 'joint_wpd'
        assert PipelineConfig.from_dict(data) == cfg

    def test_unknown_keys(self):
        with pytest.raises(ValueError, match="Unknown pipeline keys: beam"):
            PipelineConfig.from_dict({'beam': 1})

    def test_overrides_hit_wpd_for_joint(self):
        cfg = PipelineConfig(architecture='joint_wpd').with_overrides(taps=4, delay=3, eps=1e-2)
        assert (cfg.wpd_taps, cfg.wpd_delay, cfg.wpd_eps) == (4, 3, 1e-2)
        assert cfg.stage_taps == 4

    def test_overrides_hit_wpe_otherwise(self):
        cfg = PipelineConfig(architecture='sep_then_dervb').with_overrides(taps=0)
        assert cfg.wpe_taps == 0
        assert cfg.stage_eps == pytest.approx(1e-5)

    def test_sep_only_ignores_taps(self, caplog):
        with caplog.at_level(logging.WARNING):
            cfg = PipelineConfig(architecture='sep_only').with_overrides(taps=3, eps=1e-3)
        assert cfg.mvdr_eps == 1e-3
        assert cfg.stage_taps is None
        assert "ignoring taps" in caplog.text


# ---------------------------------------------------------------------------
# Stage wiring
# ---------------------------------------------------------------------------


class TestStageOrder:
    @pytest.mark.parametrize("architecture, dervb_kind, expected", [
        ('sep_only', 'wpe_masked', [('sep_target', False), ('sep_noise', False)]),
        ('sep_then_dervb', 'wpe_masked', [('sep_target', False), ('sep_noise', False), ('dervb', True)]),
        ('sep_then_dervb', 'specm', [('sep_target', False), ('sep_noise', False), ('dervb', True)]),
        ('dervb_then_sep', 'wpe_masked', [('dervb', False), ('sep_target', False), ('sep_noise', False)]),
        ('dervb_then_sep', 'wpe_iterative', [('sep_target', False), ('sep_noise', False)]),
        ('joint_wpd', 'wpe_masked', [('wpd_target', False), ('wpd_lambda', False)]),
    ])
    def test_masks_requested(self, noise_spec, architecture, dervb_kind, expected):
        provider = RecordingProvider()
        result = enhance(noise_spec, provider, PipelineConfig(architecture=architecture, dervb_kind=dervb_kind))
        assert provider.calls == expected
        assert result.output.shape == (1, 30, 257)

    def test_zero_taps_skips_dereverberation(self, noise_spec):
        provider = RecordingProvider()
        enhance(noise_spec, provider, PipelineConfig(architecture='dervb_then_sep', wpe_taps=0))
        assert ('dervb', False) not in provider.calls

    @pytest.mark.parametrize("architecture", ['sep_then_dervb', 'dervb_then_sep'])
    def test_zero_taps_equals_mvdr(self, noise_spec, architecture):
        reference = enhance(noise_spec, RecordingProvider(), PipelineConfig(architecture='sep_only'))
        disabled = enhance(noise_spec, RecordingProvider(), PipelineConfig(architecture=architecture, wpe_taps=0))
        np.testing.assert_array_equal(disabled.output.values, reference.output.values)

    def test_reference_channel_checked(self, noise_spec):
        with pytest.raises(ValueError, match="out of range"):
            enhance(noise_spec, RecordingProvider(), PipelineConfig(ref_channel=3))

    def test_runner_rejects_other_architecture(self, noise_spec):
        with pytest.raises(ValueError, match="not joint_wpd"):
            run_joint_wpd(noise_spec, RecordingProvider(), PipelineConfig(architecture='sep_only'))


# ---------------------------------------------------------------------------
# Oracle-mask enhancement
# ---------------------------------------------------------------------------


class TestOracleEnhancement:
    @pytest.mark.parametrize("runner", [run_sep_then_dervb, run_dervb_then_sep, run_joint_wpd])
    def test_output_shape(self, simulated, runner):
        _, mixture, provider = simulated
        output = runner(mixture, provider)
        assert output.shape == (1, mixture.num_frames, mixture.num_bins)
        assert np.all(np.isfinite(output.values))

    def test_deterministic(self, simulated):
        _, mixture, provider = simulated
        first = run_dervb_then_sep(mixture, provider)
        second = run_dervb_then_sep(mixture, provider)
        np.testing.assert_array_equal(first.values, second.values)

    @pytest.mark.slow
    @pytest.mark.parametrize("architecture", ['sep_only', 'dervb_then_sep', 'joint_wpd'])
    def test_improves_over_mixture(self, simulated, architecture):
        result, mixture, provider = simulated
        reference = result.references['target_early'].channel(0)
        estimate = istft(enhance(mixture, provider, PipelineConfig(architecture=architecture)).output)
        assert sisnr(estimate, reference) > sisnr(result.mixture.channel(0), reference)


# ---------------------------------------------------------------------------
# Enhancement gains on a reverberant two-speaker set
# ---------------------------------------------------------------------------


@pytest.fixture(scope='module')
def reverberant_set():
    """Three 2 s utterances, T60 0.6 s, 8-mic array, 0 dB SIR"""
    scenes = []
    for seed in (11, 12, 13):
        rng = np.random.default_rng(seed)
        target, interferer = speech_like(rng, seconds=2.0), speech_like(rng, seconds=2.0, rate_hz=4.5)
        scene = make_scene(t60=0.6, snr_db=20.0, sir_db=0.0, seed=seed, mics=8)
        result = simulate_mixture(target, interferer, None, scene, max_order=12)
        provider = OracleMaskProvider.from_waves(
            result.mixture, {key: result.references[key] for key in ORACLE_KEYS})
        scenes.append((result, stft(result.mixture), provider))
    return scenes


def mean_scores(scenes, estimate_for):
    scores = {'sisnr': [], 'stoi': [], 'srmr': []}
    for result, mixture, provider in scenes:
        estimate = estimate_for(result, mixture, provider)
        reference = result.references['target_early'].channel(0)
        scores['sisnr'].append(sisnr(estimate, reference))
        scores['stoi'].append(stoi(estimate, reference))
        scores['srmr'].append(srmr(estimate))
    return {key: float(np.mean(values)) for key, values in scores.items()}


def unprocessed(result, mixture, provider):
    return result.mixture.channel(0)


def enhanced_with(architecture):
    def estimate(result, mixture, provider):
        return istft(enhance(mixture, provider, PipelineConfig(architecture=architecture)).output)
    return estimate


@pytest.mark.slow
class TestEnhancementGains:
    def test_separation_gains_five_db(self, reverberant_set):
        before = mean_scores(reverberant_set, unprocessed)
        after = mean_scores(reverberant_set, enhanced_with('sep_only'))
        assert after['sisnr'] - before['sisnr'] >= 5.0

    def test_joint_wpd_gains_three_db(self, reverberant_set):
        before = mean_scores(reverberant_set, unprocessed)
        after = mean_scores(reverberant_set, enhanced_with('joint_wpd'))
        assert after['sisnr'] - before['sisnr'] >= 3.0

    def test_dereverberation_first_beats_separation_only(self, reverberant_set):
        separated = mean_scores(reverberant_set, enhanced_with('sep_only'))
        integrated = mean_scores(reverberant_set, enhanced_with('dervb_then_sep'))
        assert integrated['stoi'] > separated['stoi']
        assert integrated['srmr'] > separated['srmr']

    @pytest.mark.parametrize("kind", ['wpe_iterative', 'wpe_masked', 'specm'])
    def test_dereverberation_raises_srmr(self, reverberant_set, kind):
        def dereverberated(result, mixture, provider):
            if kind == 'wpe_iterative':
                output = wpe_iterative(mixture, WpeConfig.multi_channel())
            elif kind == 'wpe_masked':
                output = wpe_masked(mixture, provider.mask('dervb', mixture), WpeConfig.multi_channel())
            else:
                output = specm_apply(mixture, provider.mask('dervb', mixture))
            return istft(output).channel(0)

        before = mean_scores(reverberant_set, unprocessed)
        after = mean_scores(reverberant_set, dereverberated)
        assert after['srmr'] > before['srmr']
