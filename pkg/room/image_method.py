"""
Image-method room impulse responses for shoebox rooms

Images are enumerated per axis as (1 - 2p) * (s + 2 r L) for parity p in
{0, 1} and integer r, with |r + p| + |r| wall reflections on that axis. All
walls share one reflection coefficient derived from the requested T60.
Arrivals are placed with an 8-tap Hann-windowed sinc fractional delay.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from config import Config
from dsp.audio import MultiChannelWave

logger = logging.getLogger(__name__)

FRACTIONAL_TAPS = 8

# Image paths attenuated below this amplitude are dropped (-60 dB)
ORDER_ATTENUATION = 1e-3


@dataclass(frozen=True)
class Rir:
    """
    Multi-channel impulse response, taps (R, N)

    direct holds the order-0 (free-field) part only. Taps before split_index
    are the direct path plus early reflections.
    """
    taps: np.ndarray
    direct: np.ndarray
    sample_rate: int
    direct_index: int
    split_index: int

    def __post_init__(self):
        if not np.all(np.isfinite(self.taps)):
            raise ValueError("RIR taps must be finite")
        if not 0 <= self.direct_index < self.split_index < self.taps.shape[1]:
            raise ValueError(
                f"need direct_index < split_index < length, got "
                f"{self.direct_index}, {self.split_index}, {self.taps.shape[1]}"
            )

    @property
    def num_channels(self) -> int:
        return self.taps.shape[0]

    @property
    def length(self) -> int:
        return self.taps.shape[1]

    def early_taps(self) -> np.ndarray:
        """Direct path + early reflections, truncated at split_index"""
        return self.taps[:, :self.split_index]

    def to_wave(self) -> MultiChannelWave:
        return MultiChannelWave(self.taps, self.sample_rate)


def absorption_from_t60(room_dims: Sequence[float], t60: float,
                        sound_speed: float = Config.SOUND_SPEED) -> float:
    """Sabine: alpha = 24 ln(10) V / (c S T60)"""
    lx, ly, lz = room_dims
    volume = lx * ly * lz
    surface = 2 * (lx * ly + ly * lz + lx * lz)
    return 24 * np.log(10) * volume / (sound_speed * surface * t60)


def reflection_coefficient(absorption: float) -> float:
    # energy loss per reflection exp(-alpha), so the decay rate is Sabine's
    return float(np.exp(-absorption / 2))


def default_max_order(beta: float) -> int:
    """Smallest reflection order whose path attenuation reaches -60 dB"""
    if beta <= 0:
        return 0
    return int(np.ceil(np.log(ORDER_ATTENUATION) / np.log(beta)))


def _inside(point: np.ndarray, room_dims: np.ndarray) -> bool:
    return bool(np.all(point > 0) and np.all(point < room_dims))


def _axis_images(source: float, length: float, reach: int):
    """Image coordinates and reflection counts along one axis"""
    r = np.arange(-reach, reach + 1)
    coords = np.concatenate([source + 2 * r * length, -(source + 2 * r * length)])
    counts = np.concatenate([2 * np.abs(r), np.abs(r + 1) + np.abs(r)])
    return coords, counts


def _fractional_delay(delays: np.ndarray, gains: np.ndarray, length: int) -> np.ndarray:
    """Accumulate Hann-windowed sinc kernels for every (delay, gain)"""
    half = FRACTIONAL_TAPS // 2
    base = np.floor(delays).astype(np.int64)
    offsets = np.arange(-half + 1, half + 1)
    indices = base[:, None] + offsets[None, :]
    x = indices - delays[:, None]
    kernel = np.sinc(x) * 0.5 * (1 + np.cos(2 * np.pi * x / FRACTIONAL_TAPS))
    values = kernel * gains[:, None]
    valid = (indices >= 0) & (indices < length)
    return np.bincount(indices[valid], weights=values[valid], minlength=length)[:length]


def image_method_rir(room_dims: Sequence[float], t60: float, source: Sequence[float], geometry,
                     sample_rate: int = Config.SAMPLE_RATE, max_order: Optional[int] = None,
                     absorption: Optional[float] = None, early_ms: float = Config.EARLY_MS,
                     sound_speed: float = Config.SOUND_SPEED) -> Rir:
    """
    Multi-channel RIR from a point source to every microphone

    Args:
        room_dims: (Lx, Ly, Lz) metres
        t60: Reverberation time in seconds; sets the Sabine absorption
        source: Source position
        geometry: ArrayGeometry, mics strictly inside the room
        sample_rate: Hz
        max_order: Total reflection order cap (default: -60 dB attenuation order)
        absorption: Overrides the Sabine absorption, in (0, 1]
        early_ms: Early/late split after the direct path
        sound_speed: m/s

    Returns:
        Rir with at least t60 * sample_rate taps; amplitude beta^order / distance
    """
    room_dims = np.asarray(room_dims, dtype=np.float64)
    source = np.asarray(source, dtype=np.float64)
    if t60 <= 0:
        raise ValueError(f"T60 must be positive, got {t60}")
    if np.any(room_dims <= 0):
        raise ValueError(f"room dimensions must be positive, got {room_dims.tolist()}")
    if not _inside(source, room_dims):
        raise ValueError(f"source {source.tolist()} is outside the room {room_dims.tolist()}")
    for mic in geometry.positions:
        if not _inside(mic, room_dims):
            raise ValueError(f"microphone {mic.tolist()} is outside the room {room_dims.tolist()}")

    if absorption is None:
        absorption = absorption_from_t60(room_dims, t60, sound_speed)
    if not 0 < absorption <= 1:
        raise ValueError(
            f"absorption {absorption:.3f} outside (0, 1]; T60 {t60}s is infeasible for room {room_dims.tolist()}"
        )
    beta = reflection_coefficient(absorption)
    if max_order is None:
        max_order = default_max_order(beta)
    if max_order < 0:
        raise ValueError(f"max_order must be >= 0, got {max_order}")

    length = int(np.ceil(t60 * sample_rate)) + FRACTIONAL_TAPS
    max_distance = (length - FRACTIONAL_TAPS // 2) * sound_speed / sample_rate

    reach = max_order // 2 + 1
    axes = [_axis_images(source[k], room_dims[k], reach) for k in range(3)]
    (cx, nx), (cy, ny), (cz, nz) = axes
    order = nx[:, None, None] + ny[None, :, None] + nz[None, None, :]
    keep = order <= max_order
    ix, iy, iz = np.nonzero(keep)
    images = np.stack([cx[ix], cy[iy], cz[iz]], axis=1)
    orders = order[keep]

    taps = np.zeros((geometry.num_mics, length))
    direct = np.zeros((geometry.num_mics, length))
    direct_delays = []
    for m, mic in enumerate(geometry.positions):
        distances = np.linalg.norm(images - mic, axis=1)
        audible = distances <= max_distance
        delays = distances[audible] * sample_rate / sound_speed
        gains = beta ** orders[audible] / distances[audible]
        taps[m] = _fractional_delay(delays, gains, length)

        direct_distance = np.linalg.norm(source - mic)
        direct_delay = np.array([direct_distance * sample_rate / sound_speed])
        direct[m] = _fractional_delay(direct_delay, np.array([1.0 / direct_distance]), length)
        direct_delays.append(direct_delay[0])

    logger.debug(
        f"RIR: {orders.size} images up to order {max_order}, beta={beta:.3f}, {length} taps"
    )

    direct_index = int(np.floor(min(direct_delays)))
    split_index = direct_index + int(round(early_ms * sample_rate / 1000))
    if split_index >= length:
        extra = split_index + 1 - length
        taps = np.pad(taps, ((0, 0), (0, extra)))
        direct = np.pad(direct, ((0, 0), (0, extra)))
    return Rir(taps, direct, sample_rate, direct_index, split_index)


def schroeder_curve(taps: np.ndarray) -> np.ndarray:
    """Energy decay curve in dB (0 dB at t = 0), backward-integrated"""
    energy = np.cumsum(np.asarray(taps, dtype=np.float64)[::-1] ** 2)[::-1]
    if energy[0] <= 0:
        raise ValueError("cannot compute decay curve of an all-zero response")
    with np.errstate(divide='ignore'):
        return 10 * np.log10(energy / energy[0])


def measure_t60(taps: np.ndarray, sample_rate: int = Config.SAMPLE_RATE,
                fit_range_db=(-5.0, -35.0)) -> float:
    """
    Reverberation time from a single-channel response

    Linear fit of the Schroeder curve between the two levels in fit_range_db,
    extrapolated to -60 dB.
    """
    curve = schroeder_curve(taps)
    upper, lower = fit_range_db
    region = np.nonzero((curve <= upper) & (curve >= lower))[0]
    if region.size < 2:
        raise ValueError(f"decay curve never spans {upper} to {lower} dB")
    start, stop = region[0], region[-1] + 1
    times = np.arange(start, stop) / sample_rate
    slope, _ = np.polyfit(times, curve[start:stop], 1)
    if slope >= 0:
        raise ValueError("decay curve does not decay")
    return float(-60.0 / slope)
