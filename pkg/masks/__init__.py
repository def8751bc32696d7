"""
Time-frequency masks, spatial features and mask providers
"""
from .mask import ComplexMask, oracle_complex_mask, clip_magnitude
from .features import MicPairList, DEFAULT_MIC_PAIRS, ipd_features, angle_feature
from .mask_io import MaskFormatError, load_mask, save_mask
from .providers import STAGES, MaskProvider, OracleMaskProvider, FileMaskProvider, provider_for

__all__ = [
    'ComplexMask', 'oracle_complex_mask', 'clip_magnitude',
    'MicPairList', 'DEFAULT_MIC_PAIRS', 'ipd_features', 'angle_feature',
    'MaskFormatError', 'load_mask', 'save_mask',
    'STAGES', 'MaskProvider', 'OracleMaskProvider', 'FileMaskProvider', 'provider_for',
]
