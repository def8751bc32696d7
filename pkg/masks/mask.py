"""
Complex time-frequency masks and the oracle ratio-mask estimator
"""

from dataclasses import dataclass

import numpy as np

from config import Config

# |mixture| below this yields a zero oracle mask
MIXTURE_GUARD = 1e-8


@dataclass(frozen=True)
class ComplexMask:
    """T x F complex mask with |M| <= clip"""
    values: np.ndarray
    clip: float = Config.MASK_CLIP

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2:
            raise ValueError(f"mask must be (frames, bins), got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("mask contains non-finite values")
        peak = np.max(np.abs(values)) if values.size else 0.0
        if peak > self.clip * (1 + 1e-6):
            raise ValueError(f"mask magnitude {peak:.3g} exceeds clip {self.clip}")
        object.__setattr__(self, 'values', values)

    @property
    def num_frames(self) -> int:
        return self.values.shape[0]

    @property
    def num_bins(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self):
        return self.values.shape

    @classmethod
    def ones(cls, frames: int, bins: int) -> 'ComplexMask':
        return cls(np.ones((frames, bins), dtype=np.complex128))

    @classmethod
    def zeros(cls, frames: int, bins: int) -> 'ComplexMask':
        return cls(np.zeros((frames, bins), dtype=np.complex128))

    def check_matches(self, spec):
        if self.values.shape != spec.values.shape[1:]:
            raise ValueError(
                f"mask dims {self.values.shape} do not match spectrogram frames x bins {spec.values.shape[1:]}"
            )


def clip_magnitude(values: np.ndarray, clip: float = Config.MASK_CLIP) -> np.ndarray:
    """Scale entries with |M| > clip back onto the clip radius, keeping phase"""
    magnitude = np.abs(values)
    over = magnitude > clip
    if not np.any(over):
        return values
    values = values.copy()
    values[over] *= clip / magnitude[over]
    return values


def _pick_channel(values: np.ndarray, channel: int) -> np.ndarray:
    if values.shape[0] == 1:
        return values[0]
    if not 0 <= channel < values.shape[0]:
        raise ValueError(f"channel {channel} out of range for {values.shape[0]} channels")
    return values[channel]


def oracle_complex_mask(target, mixture, channel: int = Config.REFERENCE_CHANNEL,
                        clip: float = Config.MASK_CLIP) -> ComplexMask:
    """
    Complex ratio mask target / mixture on one channel

    Single-channel spectrograms are used as-is; multi-channel ones contribute
    `channel`. Bins where |mixture| < MIXTURE_GUARD get a zero mask.
    """
    if target.values.shape[1:] != mixture.values.shape[1:]:
        raise ValueError(
            f"target frames x bins {target.values.shape[1:]} do not match mixture {mixture.values.shape[1:]}"
        )
    numerator = _pick_channel(target.values, channel)
    denominator = _pick_channel(mixture.values, channel)

    valid = np.abs(denominator) >= MIXTURE_GUARD
    ratio = np.zeros_like(numerator)
    ratio[valid] = numerator[valid] / denominator[valid]
    return ComplexMask(clip_magnitude(ratio, clip), clip)
