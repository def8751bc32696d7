"""
Image-method room acoustics and cocktail-party mixture simulation
"""
from .geometry import ArrayGeometry, DEFAULT_ARRAY_SPACINGS_CM
from .image_method import (
    Rir,
    image_method_rir,
    absorption_from_t60,
    measure_t60,
    schroeder_curve,
)
from .scene import RoomScene, SceneSamplingError, sample_scene, read_scenes, write_scenes
from .mixer import MixtureResult, simulate_mixture

__all__ = [
    'ArrayGeometry', 'DEFAULT_ARRAY_SPACINGS_CM',
    'Rir', 'image_method_rir', 'absorption_from_t60', 'measure_t60', 'schroeder_curve',
    'RoomScene', 'SceneSamplingError', 'sample_scene', 'read_scenes', 'write_scenes',
    'MixtureResult', 'simulate_mixture',
]
