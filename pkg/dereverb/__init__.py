"""
Dereverberation: WPE (iterative and mask-driven) and spectral masking
"""
from .wpe import (
    WpeConfig,
    WpeFilter,
    stack_delayed,
    tap_matrix,
    floor_power,
    wpe_filter_update,
    wpe_dereverberate,
    wpe_objective,
    wpe_iterations,
    wpe_iterative,
    wpe_masked,
)
from .specm import specm_apply

__all__ = [
    'WpeConfig', 'WpeFilter', 'stack_delayed', 'tap_matrix', 'floor_power',
    'wpe_filter_update', 'wpe_dereverberate', 'wpe_objective', 'wpe_iterations',
    'wpe_iterative', 'wpe_masked', 'specm_apply',
]
