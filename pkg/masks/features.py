"""
Spatial features: cosine inter-microphone phase differences and the
location-guided angle feature

Both use the cosIPD convention, cos(angle(y_i) - angle(y_j)). The angle
feature compares observed IPDs with far-field plane-wave IPDs toward the
target direction and averages the cosine similarity over pairs.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from config import Config

# Nine pairs on the 15-mic array (0-based; 1/15, 2/14, 3/13, 1/7, 12/4, 11/5, 12/8, 7/10, 8/9 1-based)
DEFAULT_MIC_PAIRS = ((0, 14), (1, 13), (2, 12), (0, 6), (11, 3), (10, 4), (11, 7), (6, 9), (7, 8))


@dataclass(frozen=True)
class MicPairList:
    pairs: Tuple[Tuple[int, int], ...]

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if not pairs:
            raise ValueError("pair list is empty")
        for i, j in pairs:
            if i == j:
                raise ValueError(f"pair ({i}, {j}) uses the same channel twice")
            if i < 0 or j < 0:
                raise ValueError(f"pair ({i}, {j}) has a negative index")
        object.__setattr__(self, 'pairs', pairs)

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def check_channels(self, num_channels: int):
        for i, j in self.pairs:
            if i >= num_channels or j >= num_channels:
                raise ValueError(f"pair ({i}, {j}) invalid for {num_channels} channels")

    @classmethod
    def default_pairs(cls) -> 'MicPairList':
        return cls(DEFAULT_MIC_PAIRS)

    @classmethod
    def from_pairs(cls, pairs: Sequence[Sequence[int]]) -> 'MicPairList':
        return cls(tuple(tuple(p) for p in pairs))


def _observed_ipd(values: np.ndarray, pairs: MicPairList) -> np.ndarray:
    phase = np.angle(values)
    return np.stack([phase[i] - phase[j] for i, j in pairs])


def ipd_features(spec, pairs: MicPairList) -> np.ndarray:
    """cosIPD for every pair, concatenated pair-major: shape (T, F * len(pairs))"""
    pairs.check_channels(spec.num_channels)
    cos_ipd = np.cos(_observed_ipd(spec.values, pairs))
    return np.concatenate(list(cos_ipd), axis=1)


def expected_ipd(geometry, doa: float, freqs_hz: np.ndarray, pairs: MicPairList,
                 sound_speed: float = Config.SOUND_SPEED) -> np.ndarray:
    """Plane-wave phase differences toward `doa`, shape (pairs, F)"""
    tau = geometry.time_delays(doa, sound_speed)
    return np.stack([-2 * np.pi * freqs_hz * (tau[i] - tau[j]) for i, j in pairs])


def angle_feature(spec, doa: float, geometry, pairs: MicPairList,
                  sound_speed: float = Config.SOUND_SPEED) -> np.ndarray:
    """
    Location-guided angle feature, shape (T, F), bounded in [-1, 1]

    AF(t,f) = mean over pairs of cos(observed IPD - steering IPD)
    """
    if geometry.num_mics != spec.num_channels:
        raise ValueError(
            f"geometry has {geometry.num_mics} mics but spectrogram has {spec.num_channels} channels"
        )
    pairs.check_channels(spec.num_channels)

    observed = _observed_ipd(spec.values, pairs)
    steering = expected_ipd(geometry, doa, spec.frequencies(), pairs, sound_speed)
    return np.mean(np.cos(observed - steering[:, None, :]), axis=0)
