"""
Speech-to-reverberation modulation energy ratio

Non-intrusive: the signal is split by a 23-channel gammatone bank
(ERB-spaced, 125 Hz to fs/2), each channel's Hilbert envelope is decimated
to ENVELOPE_RATE and passed through 8 second-order modulation band-passes
(Q = 2, centres log-spaced 4-128 Hz). The score is the total envelope energy
in modulation bands 1-4 over bands 5-8.

Deviations from the reference toolbox: energies are accumulated over the
whole utterance instead of 256 ms frames, and every acoustic channel
contributes (no bandwidth-adaptive channel cut-off).
"""

from functools import lru_cache
from math import gcd

import numpy as np
from scipy.signal import gammatone, hilbert, iirpeak, lfilter, resample_poly

SRMR_RATE = 16000
ENVELOPE_RATE = 400
NUM_CHANNELS = 23
LOW_FREQ = 125.0
MODULATION_CENTERS = np.geomspace(4.0, 128.0, 8)
MODULATION_Q = 2.0

# Slaney's ERB constants
EAR_Q = 9.26449
MIN_BW = 24.7


def erb_space(low: float, high: float, num: int) -> np.ndarray:
    """num ERB-spaced centre frequencies, ascending, the lowest equal to `low`"""
    c = EAR_Q * MIN_BW
    i = np.arange(1, num + 1)
    cf = -c + np.exp(i * (np.log(low + c) - np.log(high + c)) / num) * (high + c)
    return cf[::-1]


@lru_cache(maxsize=4)
def _acoustic_filters(fs: int):
    return [gammatone(cf, 'iir', fs=fs) for cf in erb_space(LOW_FREQ, fs / 2, NUM_CHANNELS)]


@lru_cache(maxsize=4)
def _modulation_filters(fs: int):
    return [iirpeak(fc, MODULATION_Q, fs=fs) for fc in MODULATION_CENTERS]


def modulation_energy(signal: np.ndarray, fs: int = SRMR_RATE) -> np.ndarray:
    """Envelope energy per (acoustic channel, modulation band), (23, 8)"""
    decimation = fs // ENVELOPE_RATE
    energy = np.zeros((NUM_CHANNELS, len(MODULATION_CENTERS)))
    for k, (b, a) in enumerate(_acoustic_filters(fs)):
        band = lfilter(b, a, signal)
        envelope = np.abs(hilbert(band))
        envelope = resample_poly(envelope, 1, decimation)
        for j, (mb, ma) in enumerate(_modulation_filters(ENVELOPE_RATE)):
            energy[k, j] = np.sum(lfilter(mb, ma, envelope) ** 2)
    return energy


def srmr(wave, fs: int = SRMR_RATE) -> float:
    """
    SRMR of a mono signal, >= 0

    Inputs at other rates are resampled to 16 kHz.
    """
    samples = np.asarray(getattr(wave, 'samples', wave), dtype=np.float64)
    if samples.ndim == 2:
        if samples.shape[0] != 1:
            raise ValueError(f"expected a mono signal, got {samples.shape[0]} channels")
        samples = samples[0]
    if not np.any(samples):
        raise ValueError("cannot compute SRMR of a silent signal")

    if fs != SRMR_RATE:
        common = gcd(int(fs), SRMR_RATE)
        samples = resample_poly(samples, SRMR_RATE // common, int(fs) // common)

    energy = modulation_energy(samples, SRMR_RATE)
    high = energy[:, 4:].sum()
    if high <= 0:
        raise ValueError("no envelope energy in modulation bands 5-8")
    return float(energy[:, :4].sum() / high)
