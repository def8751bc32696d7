"""
Weighted prediction error dereverberation

    d(t,f) = x(t,f) - W(f)^H x~(t-D,f)
    x~(t-D,f) = [x(t-D,f)^T, ..., x(t-D-L+1,f)^T]^T
    W(f) = (sum_t x~ x~^H / lambda)^-1 (sum_t x~ x^H / lambda)

lambda comes either from the previous estimate (iterative) or from a mask
(single pass). taps == 0 disables the stage.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from config import Config
from dsp.hermitian import floor_matrix, solve_hermitian

logger = logging.getLogger(__name__)

# lambda floor relative to the mean input power
LAMBDA_FLOOR = 1e-10


@dataclass(frozen=True)
class WpeConfig:
    taps: int = Config.WPE_MULTI_TAPS
    delay: int = Config.PREDICTION_DELAY
    iterations: int = Config.WPE_ITERATIONS
    eps: float = Config.WPE_MULTI_EPS
    lambda_floor: float = LAMBDA_FLOOR

    def __post_init__(self):
        if self.taps < 0:
            raise ValueError(f"taps must be >= 0, got {self.taps}")
        if self.delay < 1:
            raise ValueError(f"delay must be >= 1, got {self.delay}")
        if self.iterations < 0:
            raise ValueError(f"iterations must be >= 0, got {self.iterations}")
        if self.eps < 0:
            raise ValueError(f"eps must be >= 0, got {self.eps}")
        if self.lambda_floor <= 0:
            raise ValueError(f"lambda_floor must be positive, got {self.lambda_floor}")

    @property
    def enabled(self) -> bool:
        return self.taps > 0

    @classmethod
    def single_channel(cls, **overrides) -> 'WpeConfig':
        return cls(**{'taps': Config.WPE_SINGLE_TAPS, 'eps': Config.WPE_SINGLE_EPS, **overrides})

    @classmethod
    def multi_channel(cls, **overrides) -> 'WpeConfig':
        return cls(**{'taps': Config.WPE_MULTI_TAPS, 'eps': Config.WPE_MULTI_EPS, **overrides})


@dataclass(frozen=True)
class WpeFilter:
    """Prediction filters, (F, L*R, R)"""
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.complex128)
        if values.ndim != 3:
            raise ValueError(f"filter must be (bins, taps*channels, channels), got {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("WPE filter contains non-finite values")
        object.__setattr__(self, 'values', values)

    @classmethod
    def zeros(cls, bins: int, taps: int, channels: int) -> 'WpeFilter':
        return cls(np.zeros((bins, taps * channels, channels), dtype=np.complex128))


def tap_matrix(values: np.ndarray, taps: int, delay: int) -> np.ndarray:
    """
    Delayed stacked observations for every frame

    Args:
        values: (R, T, F) spectrogram values
        taps: L
        delay: D

    Returns:
        (L*R, T, F); rows l*R:(l+1)*R hold x(t-D-l), zero before frame 0
    """
    channels, frames, bins = values.shape
    stacked = np.zeros((taps * channels, frames, bins), dtype=np.complex128)
    for l in range(taps):
        shift = delay + l
        if shift >= frames:
            break
        stacked[l * channels:(l + 1) * channels, shift:] = values[:, :frames - shift]
    return stacked


def stack_delayed(spec, taps: int, delay: int, t: int) -> np.ndarray:
    """x~(t-D, f) for every bin, shape (L*R, F); frames before 0 read as zero"""
    channels = spec.num_channels
    vector = np.zeros((taps * channels, spec.num_bins), dtype=np.complex128)
    for l in range(taps):
        frame = t - delay - l
        if 0 <= frame < spec.num_frames:
            vector[l * channels:(l + 1) * channels] = spec.values[:, frame]
    return vector


def floor_power(lam: np.ndarray, reference_power: float = 0.0, rel: float = LAMBDA_FLOOR) -> np.ndarray:
    """
    Floor a power estimate at rel * reference_power

    reference_power is the mean power of the stage input and does not depend on
    lam. Without one the floor is rel * mean(lam), then rel itself.
    """
    mean = float(np.mean(lam))
    if reference_power > 0:
        floor = rel * reference_power
    elif mean > 0:
        floor = rel * mean
    else:
        floor = rel
    return np.maximum(lam, floor)


def input_power(values: np.ndarray) -> np.ndarray:
    """Channel-averaged power, (T, F)"""
    return np.mean(np.abs(values) ** 2, axis=0)


def wpe_filter_update(spec, lam: np.ndarray, taps: int, delay: int, eps: float = 0.0) -> WpeFilter:
    """
    Weighted least-squares prediction filter

    lam must already be floored. The correlation matrix is loaded with
    floor_matrix(eps) before the solve; bins whose correlation has zero trace
    get a zero filter.
    """
    lam = np.asarray(lam, dtype=np.float64)
    if lam.shape != spec.values.shape[1:]:
        raise ValueError(f"lambda shape {lam.shape} does not match frames x bins {spec.values.shape[1:]}")
    if np.any(lam <= 0):
        raise ValueError("lambda must be strictly positive (floor it first)")
    if taps < 1:
        raise ValueError(f"taps must be >= 1 for a filter update, got {taps}")

    x = spec.values
    stacked = tap_matrix(x, taps, delay)
    weighted = stacked / lam
    correlation = np.einsum('itf,jtf->fij', weighted, np.conj(stacked))
    cross = np.einsum('itf,rtf->fir', weighted, np.conj(x))
    correlation = floor_matrix(0.5 * (correlation + np.conj(np.swapaxes(correlation, 1, 2))), eps)

    filters = np.zeros_like(cross)
    for f in range(spec.num_bins):
        if np.trace(correlation[f]).real <= 0:
            continue
        filters[f] = solve_hermitian(correlation[f], cross[f])
    return WpeFilter(filters)


def wpe_dereverberate(spec, filt: WpeFilter, taps: int, delay: int):
    """d(t,f) = x(t,f) - W(f)^H x~(t-D,f)"""
    expected = (spec.num_bins, taps * spec.num_channels, spec.num_channels)
    if filt.values.shape != expected:
        raise ValueError(f"filter shape {filt.values.shape} does not match expected {expected}")
    prediction = np.einsum('fir,itf->rtf', np.conj(filt.values), tap_matrix(spec.values, taps, delay))
    return spec.with_values(spec.values - prediction)


def wpe_objective(spec, filt: WpeFilter, lam: np.ndarray, taps: int, delay: int,
                  log_term: bool = False) -> float:
    """
    Weighted prediction error sum_{t,f} ||d(t,f)||^2 / lambda(t,f)

    With log_term the Gaussian R * log(lambda) term is added, which makes the
    alternating filter/power updates a coordinate descent on one cost.
    """
    residual = wpe_dereverberate(spec, filt, taps, delay).values
    cost = float(np.sum(np.sum(np.abs(residual) ** 2, axis=0) / lam))
    if log_term:
        cost += spec.num_channels * float(np.sum(np.log(lam)))
    return cost


def wpe_iterations(spec, cfg: WpeConfig) -> Iterator[Tuple[WpeFilter, np.ndarray, object]]:
    """
    Iterative WPE, one (filter, lambda, estimate) per iteration

    lambda starts from the input power and is re-estimated as ||d||^2 / R.
    """
    reference = float(np.mean(input_power(spec.values)))
    lam = input_power(spec.values)
    for i in range(cfg.iterations):
        lam = floor_power(lam, reference, cfg.lambda_floor)
        filt = wpe_filter_update(spec, lam, cfg.taps, cfg.delay, cfg.eps)
        estimate = wpe_dereverberate(spec, filt, cfg.taps, cfg.delay)
        logger.debug(f"WPE iteration {i + 1}/{cfg.iterations}")
        yield filt, lam, estimate
        lam = input_power(estimate.values)


def wpe_iterative(spec, cfg: WpeConfig = WpeConfig()):
    """Maximum-likelihood WPE; iterations == 0 or taps == 0 is the identity"""
    if not cfg.enabled or cfg.iterations == 0:
        return spec
    estimate = spec
    for _, _, estimate in wpe_iterations(spec, cfg):
        pass
    return estimate


def mask_power(spec, mask) -> np.ndarray:
    """lambda(t,f) = ||M(t,f) x(t,f)||^2 / R with a channel-shared mask"""
    mask.check_matches(spec)
    return np.abs(mask.values) ** 2 * input_power(spec.values)


def wpe_masked(spec, mask, cfg: WpeConfig = WpeConfig(), return_filter: bool = False):
    """
    Single-pass WPE with lambda taken from a mask

    Returns the dereverberated Spectrogram (and the filter if return_filter).
    """
    if not cfg.enabled:
        identity = WpeFilter.zeros(spec.num_bins, 0, spec.num_channels)
        return (spec, identity) if return_filter else spec

    reference = float(np.mean(input_power(spec.values)))
    lam = floor_power(mask_power(spec, mask), reference, cfg.lambda_floor)
    filt = wpe_filter_update(spec, lam, cfg.taps, cfg.delay, cfg.eps)
    estimate = wpe_dereverberate(spec, filt, cfg.taps, cfg.delay)
    return (estimate, filt) if return_filter else estimate
