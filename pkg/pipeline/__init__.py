"""
Integration architectures and the simulate / enhance / evaluate batch runners
"""
from .architectures import (
    Architecture,
    DervbKind,
    PipelineConfig,
    EnhancementResult,
    enhance,
    run_sep_then_dervb,
    run_dervb_then_sep,
    run_joint_wpd,
)
from .batch import BatchJob, BatchOutcome, run_batch

__all__ = [
    'Architecture', 'DervbKind', 'PipelineConfig', 'EnhancementResult', 'enhance',
    'run_sep_then_dervb', 'run_dervb_then_sep', 'run_joint_wpd',
    'BatchJob', 'BatchOutcome', 'run_batch',
]
