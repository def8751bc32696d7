"""
Mask-based MVDR and WPD beamformers
"""
from .mvdr import (
    ReferenceVector,
    BeamformerWeights,
    mvdr_weights,
    apply_filter,
    mvdr_beamform,
    separate_mvdr,
)
from .wpd import WpdConfig, wpd_stack, wpd_weights, wpd_beamform, wpd_enhance, apply_wpd

__all__ = [
    'ReferenceVector', 'BeamformerWeights', 'mvdr_weights', 'apply_filter',
    'mvdr_beamform', 'separate_mvdr',
    'WpdConfig', 'wpd_stack', 'wpd_weights', 'wpd_beamform', 'wpd_enhance', 'apply_wpd',
]
