"""
Mask-based WPD convolutional beamformer

The stacked observation y_bar(t,f) = [y(t,f); y~(t-D,f)] is filtered by a
single (L+1)R weight vector with the MVDR form

    w = Phi_yy^-1 Phi_xx / tr(Phi_yy^-1 Phi_xx) u_r

where Phi_xx is the mask-weighted covariance of y_bar and Phi_yy the
power-normalised covariance sum_t y_bar y_bar^H / lambda.
"""

import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from config import Config
from dereverb.wpe import LAMBDA_FLOOR, floor_power, input_power, tap_matrix
from dsp.hermitian import masked_covariance, power_weighted_covariance
from .mvdr import BeamformerWeights, ReferenceVector, mvdr_weights

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class WpdConfig:
    taps: int = Config.WPD_TAPS
    delay: int = Config.PREDICTION_DELAY
    eps: float = Config.WPD_EPS
    lambda_floor: float = LAMBDA_FLOOR

    def __post_init__(self):
        if self.taps < 0:
            raise ValueError(f"taps must be >= 0, got {self.taps}")
        if self.delay < 1:
            raise ValueError(f"delay must be >= 1, got {self.delay}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")


def wpd_stack_matrix(values: np.ndarray, taps: int, delay: int) -> np.ndarray:
    """y_bar for every frame, ((L+1)R, T, F)"""
    return np.concatenate([values, tap_matrix(values, taps, delay)], axis=0)


def wpd_stack(spec, taps: int, delay: int, t: int) -> np.ndarray:
    """y_bar(t, f) for every bin, ((L+1)R, F)"""
    if not 0 <= t < spec.num_frames:
        raise ValueError(f"frame {t} out of range for {spec.num_frames} frames")
    return wpd_stack_matrix(spec.values, taps, delay)[:, t, :]


def wpd_power(spec, mask_lambda, lambda_floor: float = LAMBDA_FLOOR) -> np.ndarray:
    """lambda(t,f) = (1/R) sum_r |M(t,f) Y_r(t,f)|^2, floored"""
    mask_lambda.check_matches(spec)
    power = input_power(spec.values)
    return floor_power(np.abs(mask_lambda.values) ** 2 * power, float(np.mean(power)), lambda_floor)


def wpd_weights(spec, mask_x, mask_lambda, cfg: WpdConfig = WpdConfig(),
                ref: ReferenceVector = ReferenceVector()) -> BeamformerWeights:
    """
    WPD weights, (F, (L+1)R)

    Degenerate bins fall back to the zero-padded reference passthrough.
    """
    mask_x.check_matches(spec)
    ref.check(spec.num_channels)

    stacked = wpd_stack_matrix(spec.values, cfg.taps, cfg.delay)
    phi_target = masked_covariance(stacked, mask_x.values)
    phi_power = power_weighted_covariance(stacked, wpd_power(spec, mask_lambda, cfg.lambda_floor))
    return mvdr_weights(phi_target, phi_power, ref, cfg.eps)


def apply_wpd(weights: BeamformerWeights, spec, taps: int, delay: int):
    """d(t,f) = w(f)^H y_bar(t,f)"""
    expected = (taps + 1) * spec.num_channels
    if weights.dim != expected:
        raise ValueError(f"weights have dim {weights.dim}, stacked observations have {expected}")
    stacked = wpd_stack_matrix(spec.values, taps, delay)
    output = np.einsum('fm,mtf->tf', np.conj(weights.values), stacked)
    return spec.with_values(output[np.newaxis])


def wpd_beamform(spec, mask_x, mask_lambda, cfg: WpdConfig = WpdConfig(),
                 ref: ReferenceVector = ReferenceVector()) -> Tuple[object, BeamformerWeights]:
    weights = wpd_weights(spec, mask_x, mask_lambda, cfg, ref)
    return apply_wpd(weights, spec, cfg.taps, cfg.delay), weights


def wpd_enhance(spec, mask_x, mask_lambda, cfg: WpdConfig = WpdConfig(),
                ref: ReferenceVector = ReferenceVector()):
    """Joint separation and dereverberation; single-channel Spectrogram"""
    return wpd_beamform(spec, mask_x, mask_lambda, cfg, ref)[0]
