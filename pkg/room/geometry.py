"""
Microphone array geometry and far-field steering
"""

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config import Config

# 15-channel symmetric linear array with non-even spacing, in centimetres
DEFAULT_ARRAY_SPACINGS_CM = (7, 6, 5, 4, 3, 2, 1, 1, 2, 3, 4, 5, 6, 7)


@dataclass(frozen=True)
class ArrayGeometry:
    """Microphone positions, (R, 3) in metres"""
    positions: np.ndarray

    def __post_init__(self):
        positions = np.asarray(self.positions, dtype=np.float64)
        if positions.ndim != 2 or positions.shape[1] != 3 or positions.shape[0] < 1:
            raise ValueError(f"positions must be (mics, 3), got shape {positions.shape}")
        if not np.all(np.isfinite(positions)):
            raise ValueError("microphone positions must be finite")
        diffs = positions[:, None, :] - positions[None, :, :]
        distances = np.linalg.norm(diffs, axis=-1)
        np.fill_diagonal(distances, np.inf)
        if np.any(distances < 1e-9):
            raise ValueError("microphone positions must be distinct")
        object.__setattr__(self, 'positions', positions)

    @classmethod
    def linear(cls, spacings_cm: Sequence[float], center: Sequence[float] = (0.0, 0.0, 0.0)) -> 'ArrayGeometry':
        """Linear array along x, centred on `center`, from consecutive spacings"""
        offsets = np.concatenate([[0.0], np.cumsum(spacings_cm)]) / 100.0
        offsets -= offsets.mean()
        positions = np.zeros((len(offsets), 3))
        positions[:, 0] = offsets
        return cls(positions + np.asarray(center, dtype=np.float64))

    @classmethod
    def default_array(cls, center: Sequence[float] = (0.0, 0.0, 0.0)) -> 'ArrayGeometry':
        return cls.linear(DEFAULT_ARRAY_SPACINGS_CM, center)

    @property
    def num_mics(self) -> int:
        return self.positions.shape[0]

    @property
    def center(self) -> np.ndarray:
        return self.positions.mean(axis=0)

    @property
    def aperture(self) -> float:
        return float(np.max(np.linalg.norm(self.positions - self.center, axis=1)))

    def translated(self, center: Sequence[float]) -> 'ArrayGeometry':
        return ArrayGeometry(self.positions - self.center + np.asarray(center, dtype=np.float64))

    def azimuth_to(self, point: Sequence[float]) -> float:
        """Planar azimuth (radians) from the array centre to a point"""
        delta = np.asarray(point, dtype=np.float64) - self.center
        return float(np.arctan2(delta[1], delta[0]))

    def time_delays(self, doa: float, sound_speed: float = Config.SOUND_SPEED) -> np.ndarray:
        """
        Plane-wave arrival delays (seconds) relative to the array centre

        A source in direction k = (cos doa, sin doa, 0) reaches mic m at
        tau_m = -(p_m - centre) . k / c.
        """
        direction = np.array([np.cos(doa), np.sin(doa), 0.0])
        return -((self.positions - self.center) @ direction) / sound_speed

    def steering_vector(self, doa: float, freqs_hz: np.ndarray, ref: Optional[int] = None,
                        sound_speed: float = Config.SOUND_SPEED) -> np.ndarray:
        """
        Far-field steering vectors g(f), shape (F, R)

        With `ref` set the vectors are relative transfer functions (g_ref = 1).
        """
        tau = self.time_delays(doa, sound_speed)
        g = np.exp(-2j * np.pi * np.outer(np.asarray(freqs_hz, dtype=np.float64), tau))
        if ref is not None:
            if not 0 <= ref < self.num_mics:
                raise ValueError(f"reference mic {ref} out of range for {self.num_mics} mics")
            g = g / g[:, ref:ref + 1]
        return g

    def to_dict(self) -> dict:
        return {'positions': self.positions.tolist()}

    @classmethod
    def from_dict(cls, data: dict) -> 'ArrayGeometry':
        return cls(np.asarray(data['positions'], dtype=np.float64))
