"""
Short-time objective intelligibility

Classic (non-extended) STOI through pystoi: internal resampling to 10 kHz,
silent-frame removal, 15 one-third-octave bands from 150 Hz, 384 ms
segments, clipped correlation of band envelopes. Envelopes are magnitudes,
so a sign-flipped estimate scores 1.0.
"""

import numpy as np
from pystoi import stoi as pystoi_stoi

from config import Config
from .sisnr import as_mono

# Shortest input the segment analysis accepts
MIN_DURATION = 0.384


def stoi(estimate, reference, fs: int = Config.SAMPLE_RATE) -> float:
    estimate = as_mono(estimate)
    reference = as_mono(reference)
    if estimate.shape != reference.shape:
        raise ValueError(f"length mismatch: estimate {estimate.size}, reference {reference.size}")
    if reference.size < MIN_DURATION * fs:
        raise ValueError(f"signal is {reference.size / fs:.3f}s, STOI needs at least {MIN_DURATION}s")
    if not np.any(reference):
        raise ValueError("reference is silent")
    return float(pystoi_stoi(reference, estimate, fs, extended=False))
