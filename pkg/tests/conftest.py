"""Shared fixtures: seeded generators, speech-like sources and small rooms."""

import numpy as np
import pytest
from scipy.signal import lfilter

from room.geometry import ArrayGeometry
from room.scene import RoomScene

FS = 16000


def speech_like(rng: np.random.Generator, seconds: float = 2.0, fs: int = FS, rate_hz: float = 3.0) -> np.ndarray:
    """Coloured noise under a syllable-rate on/off envelope, peak 0.5"""
    n = int(seconds * fs)
    t = np.arange(n) / fs
    envelope = np.clip(np.sin(2 * np.pi * rate_hz * t + rng.uniform(0, 2 * np.pi)), 0.0, None) ** 2
    carrier = lfilter([1.0], [1.0, -0.9], rng.standard_normal(n))
    signal = envelope * carrier
    return 0.5 * signal / np.max(np.abs(signal))


def small_array(center=(3.0, 2.5, 1.5), spacing_cm: float = 5.0, mics: int = 4) -> ArrayGeometry:
    return ArrayGeometry.linear([spacing_cm] * (mics - 1), center)


def make_scene(t60: float = 0.3, snr_db: float = 20.0, sir_db: float = 0.0, seed: int = 7,
               mics: int = 4, utterance_id: str = 'fixture') -> RoomScene:
    """6 x 5 x 3 m room, 4-mic array, target broadside at 1.5 m, interferer 53 degrees away"""
    geometry = small_array(mics=mics)
    center = geometry.center
    return RoomScene(
        utterance_id=utterance_id,
        room_dims=[6.0, 5.0, 3.0],
        t60=t60,
        array_center=center.tolist(),
        mic_positions=geometry.positions.tolist(),
        target_position=(center + [0.0, 1.5, 0.0]).tolist(),
        interferer_position=(center + [1.2, 0.9, 0.0]).tolist(),
        noise_position=[1.0, 1.0, 2.0],
        target_path='target.wav',
        interferer_path='interferer.wav',
        noise_id='gaussian',
        snr_db=snr_db,
        sir_db=sir_db,
        angle_bin=(45.0, 90.0),
        angle_difference=53.13,
        seed=seed,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def speech(rng):
    return speech_like(rng)


@pytest.fixture
def two_speakers(rng):
    return speech_like(rng, rate_hz=3.0), speech_like(rng, rate_hz=4.5)
