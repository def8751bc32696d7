import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
import soundfile as sf

from config import Config

logger = logging.getLogger(__name__)

SUBTYPES = {'pcm16': 'PCM_16', 'float32': 'FLOAT'}


class SampleRateError(ValueError):
    """WAV sample rate differs from the configured rate"""


@dataclass(frozen=True)
class MultiChannelWave:
    """
    Time-domain audio, R channels x N samples

    Mono signals are stored as a single-row matrix.
    """
    samples: np.ndarray
    sample_rate: int = Config.SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1:
            samples = samples[np.newaxis, :]
        if samples.ndim != 2 or samples.shape[0] < 1:
            raise ValueError(f"samples must be (channels, samples), got shape {samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        if not np.all(np.isfinite(samples)):
            raise ValueError("samples contain non-finite values")
        object.__setattr__(self, 'samples', samples)

    @property
    def num_channels(self) -> int:
        return self.samples.shape[0]

    @property
    def num_samples(self) -> int:
        return self.samples.shape[1]

    @property
    def duration(self) -> float:
        return self.num_samples / self.sample_rate

    def channel(self, index: int) -> np.ndarray:
        if not 0 <= index < self.num_channels:
            raise ValueError(f"channel {index} out of range for {self.num_channels} channels")
        return self.samples[index]

    def select(self, channels: Sequence[int]) -> 'MultiChannelWave':
        return MultiChannelWave(self.samples[list(channels)], self.sample_rate)

    @classmethod
    def mono(cls, signal: np.ndarray, sample_rate: int = Config.SAMPLE_RATE) -> 'MultiChannelWave':
        return cls(np.asarray(signal, dtype=np.float64)[np.newaxis, :], sample_rate)


def read_wav(path: str, expected_rate: Optional[int] = Config.SAMPLE_RATE) -> MultiChannelWave:
    """
    Read an interleaved multi-channel WAV file

    Args:
        path: WAV file path
        expected_rate: Required sample rate (None accepts any rate)

    Returns:
        MultiChannelWave with samples as float64 in [-1, 1]
    """
    data, rate = sf.read(path, dtype='float64', always_2d=True)
    if expected_rate is not None and rate != expected_rate:
        raise SampleRateError(f"{path}: sample rate {rate} Hz, expected {expected_rate} Hz")
    return MultiChannelWave(data.T, rate)


def write_wav(path: str, wave: MultiChannelWave, subtype: str = 'float32'):
    """Write a MultiChannelWave as PCM 16-bit or IEEE float 32-bit WAV"""
    if subtype not in SUBTYPES:
        raise ValueError(f"Unknown WAV subtype '{subtype}', expected one of {sorted(SUBTYPES)}")

    samples = wave.samples.T
    if subtype == 'pcm16':
        peak = np.max(np.abs(samples)) if samples.size else 0.0
        if peak > 1.0:
            logger.warning(f"{path}: peak {peak:.3f} exceeds full scale, clipping to PCM16")
            samples = np.clip(samples, -1.0, 1.0)

    sf.write(path, samples, wave.sample_rate, subtype=SUBTYPES[subtype])
