"""
Signal containers, STFT analysis/synthesis and per-frequency Hermitian algebra
"""
from .audio import MultiChannelWave, SampleRateError, read_wav, write_wav
from .stft import (
    StftConfig,
    Spectrogram,
    stft,
    istft,
    log_power_spectrum,
    spectral_energy,
    window_energy_gain,
)
from .hermitian import (
    NarrowbandMatrixSet,
    SingularMatrixError,
    masked_covariance,
    masked_psd,
    power_weighted_covariance,
    floor_matrix,
    solve_hermitian,
    solve_hermitian_batch,
)

__all__ = [
    'MultiChannelWave', 'SampleRateError', 'read_wav', 'write_wav',
    'StftConfig', 'Spectrogram', 'stft', 'istft', 'log_power_spectrum',
    'spectral_energy', 'window_energy_gain',
    'NarrowbandMatrixSet', 'SingularMatrixError', 'masked_covariance', 'masked_psd',
    'power_weighted_covariance', 'floor_matrix', 'solve_hermitian', 'solve_hermitian_batch',
]
