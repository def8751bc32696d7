"""
Enhancement metrics: SISNR, spectral MSE, STOI, SRMR and report aggregation
"""
from .sisnr import SISNR_CAP, sisnr, spectral_mse
from .stoi import stoi
from .srmr import srmr
from .report import METRIC_KEYS, MetricReport, UtteranceMetrics

__all__ = [
    'SISNR_CAP', 'sisnr', 'spectral_mse', 'stoi', 'srmr',
    'METRIC_KEYS', 'MetricReport', 'UtteranceMetrics',
]
