import numpy as np

# SISNR is reported within +/- this many dB
SISNR_CAP = 60.0


def as_mono(signal) -> np.ndarray:
    """Accept a 1-D array or a single-channel MultiChannelWave"""
    samples = getattr(signal, 'samples', signal)
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim == 2:
        if samples.shape[0] != 1:
            raise ValueError(f"expected a mono signal, got {samples.shape[0]} channels")
        samples = samples[0]
    if samples.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {samples.shape}")
    return samples


def sisnr(estimate, reference) -> float:
    """
    Scale-invariant SNR in dB, zero-mean, capped at +/- SISNR_CAP

    s_t = <e, s> s / ||s||^2, SISNR = 10 log10(||s_t||^2 / ||e - s_t||^2)
    """
    estimate = as_mono(estimate)
    reference = as_mono(reference)
    if estimate.shape != reference.shape:
        raise ValueError(f"length mismatch: estimate {estimate.size}, reference {reference.size}")

    estimate = estimate - estimate.mean()
    reference = reference - reference.mean()
    reference_energy = np.dot(reference, reference)
    if reference_energy <= 0:
        raise ValueError("reference is silent")

    projection = np.dot(estimate, reference) / reference_energy * reference
    residual = estimate - projection
    target_energy = np.dot(projection, projection)
    residual_energy = np.dot(residual, residual)

    if residual_energy <= target_energy * 10 ** (-SISNR_CAP / 10):
        return SISNR_CAP
    if target_energy <= residual_energy * 10 ** (-SISNR_CAP / 10):
        return -SISNR_CAP
    return float(10 * np.log10(target_energy / residual_energy))


def spectral_mse(estimate, reference) -> float:
    """Mean |estimate - reference|^2 over channels, frames and bins"""
    a = getattr(estimate, 'values', estimate)
    b = getattr(reference, 'values', reference)
    if np.shape(a) != np.shape(b):
        raise ValueError(f"shape mismatch: estimate {np.shape(a)}, reference {np.shape(b)}")
    return float(np.mean(np.abs(np.asarray(a) - np.asarray(b)) ** 2))
