"""
Multi-channel mixture synthesis for a sampled scene
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np
from scipy.signal import fftconvolve

from config import Config
from dsp.audio import MultiChannelWave
from .image_method import Rir, image_method_rir
from .scene import RoomScene

logger = logging.getLogger(__name__)

REFERENCE_KEYS = (
    'target_anechoic', 'target_early', 'target_reverberant',
    'interferer_early', 'interferer_reverberant', 'noise',
)


@dataclass
class MixtureResult:
    """
    Simulated mixture and its additive components

    mixture == target_reverberant + interferer_reverberant + noise exactly.
    """
    mixture: MultiChannelWave
    references: Dict[str, MultiChannelWave]
    measured_snr: float
    measured_sir: Optional[float]
    rirs: Dict[str, Rir]


def _energy(signal: np.ndarray) -> float:
    return float(np.sum(signal ** 2))


def _convolve(source: np.ndarray, taps: np.ndarray, length: int) -> np.ndarray:
    out = fftconvolve(source[np.newaxis, :], taps, axes=-1)[:, :length]
    if out.shape[1] < length:
        out = np.pad(out, ((0, 0), (0, length - out.shape[1])))
    return out


def _fit_length(signal: np.ndarray, length: int, offset: int = 0) -> np.ndarray:
    """Place `signal` at `offset` inside a zero buffer of `length` samples"""
    out = np.zeros(length)
    if offset >= length:
        return out
    chunk = signal[:length - offset]
    out[offset:offset + len(chunk)] = chunk
    return out


def _loop_noise(noise: np.ndarray, length: int, start: int) -> np.ndarray:
    """Circularly read `length` samples of noise starting at start mod len"""
    if noise.size == 0:
        raise ValueError("noise signal is empty")
    indices = (start + np.arange(length)) % noise.size
    return noise[indices]


def gaussian_noise(length: int, seed: int) -> np.ndarray:
    return np.random.default_rng(seed).standard_normal(length)


def scale_for_ratio(reference_energy: float, other_energy: float, ratio_db: float) -> float:
    """Gain g with 10 log10(reference / (g^2 other)) == ratio_db"""
    return float(np.sqrt(reference_energy / (other_energy * 10 ** (ratio_db / 10))))


def simulate_mixture(target: np.ndarray, interferer: Optional[np.ndarray], noise: Optional[np.ndarray],
                     scene: RoomScene, sample_rate: int = Config.SAMPLE_RATE,
                     max_order: Optional[int] = None, early_ms: float = Config.EARLY_MS,
                     ref_channel: int = Config.REFERENCE_CHANNEL) -> MixtureResult:
    """
    Convolve sources with their RIRs and mix at the scene's SIR and SNR

    The mixture has the target's length. The interferer is gain-scaled so
    the reverberant target/interferer energy ratio at ref_channel equals
    scene.sir_db; noise is scaled so reverberant speech/noise equals
    scene.snr_db at ref_channel. interferer=None simulates target + noise.

    Args:
        target: Mono target speech
        interferer: Mono interfering speech or None
        noise: Mono noise recording; None uses seeded Gaussian noise
        scene: Sampled scene
        sample_rate: Hz
        max_order: Reflection order cap for the image method
        early_ms: Early/late split for the early references
        ref_channel: Channel at which SIR and SNR are defined

    Raises:
        ValueError: silent target, interferer or noise at the reference channel
    """
    target = np.asarray(target, dtype=np.float64).ravel()
    length = target.size
    if length == 0:
        raise ValueError("target signal is empty")
    geometry = scene.geometry

    def rir_for(position):
        return image_method_rir(scene.room_dims, scene.t60, position, geometry, sample_rate,
                                max_order=max_order, early_ms=early_ms)

    rirs = {'target': rir_for(scene.target_position)}
    target_rev = _convolve(target, rirs['target'].taps, length)
    target_early = _convolve(target, rirs['target'].early_taps(), length)
    target_anechoic = _convolve(target, rirs['target'].direct, length)
    target_energy = _energy(target_rev[ref_channel])
    if target_energy <= 0:
        raise ValueError(f"{scene.utterance_id}: target is silent at the reference channel")

    measured_sir = None
    if interferer is not None:
        interferer = _fit_length(np.asarray(interferer, dtype=np.float64).ravel(), length,
                                 scene.interferer_offset)
        rirs['interferer'] = rir_for(scene.interferer_position)
        interferer_rev = _convolve(interferer, rirs['interferer'].taps, length)
        interferer_early = _convolve(interferer, rirs['interferer'].early_taps(), length)
        interferer_energy = _energy(interferer_rev[ref_channel])
        if interferer_energy <= 0:
            raise ValueError(f"{scene.utterance_id}: interferer is silent at the reference channel")
        gain = scale_for_ratio(target_energy, interferer_energy, scene.sir_db)
        interferer_rev *= gain
        interferer_early *= gain
        measured_sir = 10 * np.log10(target_energy / _energy(interferer_rev[ref_channel]))
    else:
        interferer_rev = np.zeros_like(target_rev)
        interferer_early = np.zeros_like(target_rev)

    if noise is None:
        noise = gaussian_noise(length, scene.seed)
    else:
        noise = _loop_noise(np.asarray(noise, dtype=np.float64).ravel(), length, scene.noise_offset)
    rirs['noise'] = rir_for(scene.noise_position)
    noise_image = _convolve(noise, rirs['noise'].taps, length)

    speech = target_rev + interferer_rev
    speech_energy = _energy(speech[ref_channel])
    noise_energy = _energy(noise_image[ref_channel])
    if noise_energy <= 0:
        raise ValueError(f"{scene.utterance_id}: noise is silent at the reference channel")
    noise_image *= scale_for_ratio(speech_energy, noise_energy, scene.snr_db)
    measured_snr = 10 * np.log10(speech_energy / _energy(noise_image[ref_channel]))

    mixture = speech + noise_image
    logger.debug(
        f"{scene.utterance_id}: SIR {measured_sir} dB, SNR {measured_snr:.2f} dB, T60 {scene.t60:.2f}s"
    )

    references = {
        'target_anechoic': target_anechoic,
        'target_early': target_early,
        'target_reverberant': target_rev,
        'interferer_early': interferer_early,
        'interferer_reverberant': interferer_rev,
        'noise': noise_image,
    }
    return MixtureResult(
        mixture=MultiChannelWave(mixture, sample_rate),
        references={k: MultiChannelWave(v, sample_rate) for k, v in references.items()},
        measured_snr=float(measured_snr),
        measured_sir=None if measured_sir is None else float(measured_sir),
        rirs=rirs,
    )
