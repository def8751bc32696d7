"""
Mask-based MVDR beamformer

    w(f) = Phi_n^-1 Phi_x / tr(Phi_n^-1 Phi_x) u_r
    S(t,f) = w(f)^H y(t,f)
"""

import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np

from config import Config
from dsp.hermitian import NarrowbandMatrixSet, floor_matrix, masked_psd, solve_hermitian

logger = logging.getLogger(__name__)

# |tr(Phi_n^-1 Phi_x)| of the trace-normalised pair below this is degenerate
TRACE_FLOOR = 1e-10


@dataclass(frozen=True)
class ReferenceVector:
    channel: int = Config.REFERENCE_CHANNEL

    def __post_init__(self):
        if self.channel < 0:
            raise ValueError(f"reference channel must be non-negative, got {self.channel}")

    def check(self, num_channels: int):
        if self.channel >= num_channels:
            raise ValueError(f"reference channel {self.channel} out of range for {num_channels} channels")

    def one_hot(self, dim: int) -> np.ndarray:
        """u_r; for stacked (L+1)R vectors this is the zero-padded reference"""
        self.check(dim)
        u = np.zeros(dim, dtype=np.complex128)
        u[self.channel] = 1.0
        return u


@dataclass(frozen=True)
class BeamformerWeights:
    """One weight vector per bin, (F, M); degenerate bins hold the passthrough u_r"""
    values: np.ndarray
    degenerate: Optional[np.ndarray] = field(default=None)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 2:
            raise ValueError(f"weights must be (bins, dim), got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("beamformer weights contain non-finite values")
        degenerate = self.degenerate
        if degenerate is None:
            degenerate = np.zeros(values.shape[0], dtype=bool)
        object.__setattr__(self, 'values', values)
        object.__setattr__(self, 'degenerate', np.asarray(degenerate, dtype=bool))

    @property
    def num_bins(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    @property
    def num_degenerate(self) -> int:
        return int(self.degenerate.sum())

    @classmethod
    def passthrough(cls, bins: int, dim: int, ref: ReferenceVector = ReferenceVector()) -> 'BeamformerWeights':
        return cls(np.tile(ref.one_hot(dim), (bins, 1)))


def mvdr_weights(phi_x: NarrowbandMatrixSet, phi_n: NarrowbandMatrixSet,
                 ref: ReferenceVector = ReferenceVector(), eps: float = Config.MVDR_EPS) -> BeamformerWeights:
    """
    MVDR weights from target and noise PSD matrices

    Phi_n is floored with `eps` before the solve. Bins whose normalised trace falls below
    TRACE_FLOOR, or whose Phi_x is zero or came from an all-zero mask, fall back to u_r.

    Raises:
        SingularMatrixError: floored Phi_n cannot be factorized
    """
    if phi_x.values.shape != phi_n.values.shape:
        raise ValueError(f"Phi_x {phi_x.values.shape} and Phi_n {phi_n.values.shape} differ in shape")
    dim = phi_x.dim
    ref.check(dim)

    floored = floor_matrix(phi_n.values, eps)
    passthrough = ref.one_hot(dim)
    weights = np.empty((phi_x.num_bins, dim), dtype=np.complex128)
    degenerate = np.zeros(phi_x.num_bins, dtype=bool)

    for f in range(phi_x.num_bins):
        target_trace = np.trace(phi_x.values[f]).real
        if phi_x.degenerate[f] or target_trace <= 0:
            weights[f], degenerate[f] = passthrough, True
            continue
        noise_trace = np.trace(floored[f]).real
        # trace-normalised, so the guard below is scale-free
        numerator = solve_hermitian(floored[f] / (noise_trace if noise_trace > 0 else 1.0),
                                    phi_x.values[f] / target_trace)
        trace = np.trace(numerator)
        if abs(trace) < TRACE_FLOOR:
            weights[f], degenerate[f] = passthrough, True
            continue
        weights[f] = numerator[:, ref.channel] / trace

    if degenerate.any():
        logger.warning(f"MVDR: {int(degenerate.sum())}/{phi_x.num_bins} degenerate bin(s), using passthrough")
    return BeamformerWeights(weights, degenerate)


def apply_filter(weights: BeamformerWeights, spec):
    """S(t,f) = sum_m conj(w_m(f)) y_m(t,f); returns a single-channel Spectrogram"""
    if weights.dim != spec.num_channels:
        raise ValueError(f"weights have dim {weights.dim}, spectrogram has {spec.num_channels} channels")
    if weights.num_bins != spec.num_bins:
        raise ValueError(f"weights have {weights.num_bins} bins, spectrogram has {spec.num_bins}")
    output = np.einsum('fm,mtf->tf', np.conj(weights.values), spec.values)
    return spec.with_values(output[np.newaxis])


def mvdr_beamform(mixture, mask_x, mask_n, ref: ReferenceVector = ReferenceVector(),
                  eps: float = Config.MVDR_EPS) -> Tuple[object, BeamformerWeights]:
    """separate_mvdr that also hands back the weights"""
    mask_x.check_matches(mixture)
    mask_n.check_matches(mixture)
    phi_x = masked_psd(mixture, mask_x)
    phi_n = masked_psd(mixture, mask_n)
    weights = mvdr_weights(phi_x, phi_n, ref, eps)
    return apply_filter(weights, mixture), weights


def separate_mvdr(mixture, mask_x, mask_n, ref: ReferenceVector = ReferenceVector(),
                  eps: float = Config.MVDR_EPS):
    """masked_psd -> mvdr_weights -> apply_filter"""
    return mvdr_beamform(mixture, mask_x, mask_n, ref, eps)[0]
