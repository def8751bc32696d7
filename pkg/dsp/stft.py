"""
Short-time Fourier analysis and overlap-add synthesis

Conventions:
- One-sided spectra, F = fft_size // 2 + 1 bins
- window_length - hop zeros padded in front (and at least as many at the end),
  trimmed after synthesis so istft(stft(w)) has exactly w's length
- Frame count T = ceil((N + pad) / hop)
"""

from dataclasses import dataclass, replace
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.signal import check_COLA, get_window

from config import Config
from .audio import MultiChannelWave

# Floor added to |X|^2 before the log in log_power_spectrum
LPS_FLOOR = 1e-12

WINDOWS = ('sqrt_hann', 'hann')


@lru_cache(maxsize=16)
def _windows(window: str, length: int) -> Tuple[np.ndarray, np.ndarray]:
    """Return (analysis, synthesis) windows for a window identifier"""
    hann = get_window('hann', length, fftbins=True)
    if window == 'sqrt_hann':
        root = np.sqrt(hann)
        return root, root
    if window == 'hann':
        return hann, np.ones(length)
    raise ValueError(f"Unknown window '{window}', expected one of {WINDOWS}")


@dataclass(frozen=True)
class StftConfig:
    fft_size: int = Config.FFT_SIZE
    window_length: int = Config.WINDOW_LENGTH
    hop: int = Config.HOP
    window: str = Config.WINDOW

    def __post_init__(self):
        if self.hop <= 0:
            raise ValueError(f"hop must be positive, got {self.hop}")
        if self.hop > self.window_length:
            raise ValueError(f"hop ({self.hop}) exceeds window_length ({self.window_length})")
        if self.window_length > self.fft_size:
            raise ValueError(
                f"window_length ({self.window_length}) exceeds fft_size ({self.fft_size})"
            )
        if self.window not in WINDOWS:
            raise ValueError(f"Unknown window '{self.window}', expected one of {WINDOWS}")

    @property
    def num_bins(self) -> int:
        return self.fft_size // 2 + 1

    @property
    def pad(self) -> int:
        return self.window_length - self.hop

    @property
    def analysis_window(self) -> np.ndarray:
        return _windows(self.window, self.window_length)[0]

    @property
    def synthesis_window(self) -> np.ndarray:
        return _windows(self.window, self.window_length)[1]

    def is_cola(self) -> bool:
        product = self.analysis_window * self.synthesis_window
        return bool(check_COLA(product, self.window_length, self.window_length - self.hop))

    def ola_gain(self) -> float:
        """Constant value of the overlap-added analysis x synthesis window"""
        return float(np.sum(self.analysis_window * self.synthesis_window) / self.hop)

    def num_frames(self, num_samples: int) -> int:
        return -(-(num_samples + self.pad) // self.hop)

    def bin_frequencies(self, sample_rate: int) -> np.ndarray:
        return np.arange(self.num_bins) * sample_rate / self.fft_size


@dataclass(frozen=True)
class Spectrogram:
    """
    Complex STFT tensor, R channels x T frames x F bins

    num_samples remembers the analysed signal length so synthesis can trim
    back to it exactly.
    """
    values: np.ndarray
    config: StftConfig = StftConfig()
    num_samples: Optional[int] = None
    sample_rate: int = Config.SAMPLE_RATE

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim == 2:
            values = values[np.newaxis]
        if values.ndim != 3:
            raise ValueError(f"values must be (channels, frames, bins), got shape {values.shape}")
        if values.shape[2] != self.config.num_bins:
            raise ValueError(
                f"{values.shape[2]} bins inconsistent with fft_size {self.config.fft_size}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("spectrogram contains non-finite values")
        object.__setattr__(self, 'values', values)

    @property
    def num_channels(self) -> int:
        return self.values.shape[0]

    @property
    def num_frames(self) -> int:
        return self.values.shape[1]

    @property
    def num_bins(self) -> int:
        return self.values.shape[2]

    @property
    def shape(self) -> Tuple[int, int, int]:
        return self.values.shape

    def channel(self, index: int) -> 'Spectrogram':
        if not 0 <= index < self.num_channels:
            raise ValueError(f"channel {index} out of range for {self.num_channels} channels")
        return self.with_values(self.values[index:index + 1])

    def with_values(self, values: np.ndarray) -> 'Spectrogram':
        return replace(self, values=values)

    def frequencies(self) -> np.ndarray:
        return self.config.bin_frequencies(self.sample_rate)


def stft(wave: MultiChannelWave, cfg: StftConfig = StftConfig()) -> Spectrogram:
    """
    Analyse every channel of a wave

    Args:
        wave: Input audio
        cfg: STFT configuration

    Returns:
        Spectrogram of shape (R, T, F)
    """
    num_samples = wave.num_samples
    if num_samples == 0:
        raise ValueError("cannot analyse an empty wave")

    frames = cfg.num_frames(num_samples)
    total = (frames - 1) * cfg.hop + cfg.window_length
    padded = np.zeros((wave.num_channels, total))
    padded[:, cfg.pad:cfg.pad + num_samples] = wave.samples

    segments = sliding_window_view(padded, cfg.window_length, axis=-1)[:, ::cfg.hop, :]
    values = np.fft.rfft(segments * cfg.analysis_window, n=cfg.fft_size, axis=-1)
    return Spectrogram(values, cfg, num_samples, wave.sample_rate)


def istft(spec: Spectrogram) -> MultiChannelWave:
    """Overlap-add synthesis back to the analysed length"""
    cfg = spec.config
    if not cfg.is_cola():
        raise ValueError(f"STFT config {cfg} does not satisfy constant overlap-add")

    frames = np.fft.irfft(spec.values, n=cfg.fft_size, axis=-1)[..., :cfg.window_length]
    frames = frames * cfg.synthesis_window

    total = (spec.num_frames - 1) * cfg.hop + cfg.window_length
    out = np.zeros((spec.num_channels, total))
    for t in range(spec.num_frames):
        start = t * cfg.hop
        out[:, start:start + cfg.window_length] += frames[:, t]
    out /= cfg.ola_gain()

    if spec.num_samples is None:
        num_samples = total - 2 * cfg.pad
    else:
        num_samples = spec.num_samples
    return MultiChannelWave(out[:, cfg.pad:cfg.pad + num_samples], spec.sample_rate)


def log_power_spectrum(spec: Spectrogram, channel: int = Config.REFERENCE_CHANNEL,
                       floor: float = LPS_FLOOR) -> np.ndarray:
    """log(|X|^2 + floor) of one channel, shape (T, F)"""
    if not 0 <= channel < spec.num_channels:
        raise ValueError(f"channel {channel} out of range for {spec.num_channels} channels")
    power = np.abs(spec.values[channel]) ** 2
    with np.errstate(divide='ignore'):
        return np.log(power + floor)


def window_energy_gain(cfg: StftConfig = StftConfig()) -> float:
    """
    Overlap-added squared analysis window

    spectral_energy(stft(w)) == window_energy_gain(cfg) * sum(w**2) whenever the
    squared analysis window is itself COLA (1.0 for the square-root Hann default).
    """
    return float(np.sum(cfg.analysis_window ** 2) / cfg.hop)


def spectral_energy(spec: Spectrogram) -> float:
    """One-sided Parseval energy of a spectrogram"""
    n = spec.config.fft_size
    weights = np.full(spec.num_bins, 2.0)
    weights[0] = 1.0
    if n % 2 == 0:
        weights[-1] = 1.0
    return float(np.sum(weights * np.abs(spec.values) ** 2) / n)
