"""
Cocktail-party scene sampling

Per utterance: draw an interfering utterance from another speaker, a T60
(uniform over its range), a room that can reach it, an array position,
speaker positions 1-5 m from the array, an angle-difference bin
(re-drawing the interferer's position until the azimuth difference lands
in it), an SIR, a noise source and an SNR.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .geometry import DEFAULT_ARRAY_SPACINGS_CM, ArrayGeometry
from .image_method import absorption_from_t60

logger = logging.getLogger(__name__)

ROOM_MIN = (4.0, 4.0, 3.0)
ROOM_MAX = (10.0, 10.0, 6.0)
T60_RANGE = (0.14, 0.92)
DISTANCE_RANGE = (1.0, 5.0)
SOURCE_HEIGHT = (1.2, 2.0)
SNR_CHOICES = (0.0, 5.0, 10.0, 15.0, 20.0)
SIR_CHOICES = (-6.0, 0.0, 6.0)
ANGLE_BINS = ((0.0, 15.0), (15.0, 45.0), (45.0, 90.0), (90.0, 180.0))

ARRAY_WALL_MARGIN = 0.5
SOURCE_WALL_MARGIN = 0.2
REJECTION_BUDGET = 1000

GAUSSIAN_NOISE = 'gaussian'


class SceneSamplingError(RuntimeError):
    """Rejection sampling ran out of budget"""


@dataclass
class RoomScene:
    utterance_id: str
    room_dims: List[float]
    t60: float
    array_center: List[float]
    mic_positions: List[List[float]]
    target_position: List[float]
    interferer_position: List[float]
    noise_position: List[float]
    target_path: str
    interferer_path: str
    noise_id: str
    snr_db: float
    sir_db: float
    angle_bin: Tuple[float, float]
    angle_difference: float
    seed: int
    noise_offset: int = 0
    interferer_offset: int = 0
    extra: Dict = field(default_factory=dict)

    @property
    def geometry(self) -> ArrayGeometry:
        return ArrayGeometry(np.asarray(self.mic_positions))

    def to_dict(self) -> Dict:
        data = asdict(self)
        data['angle_bin'] = list(self.angle_bin)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: Dict) -> 'RoomScene':
        data = dict(data)
        data['angle_bin'] = tuple(data['angle_bin'])
        return cls(**data)


def azimuth_difference(a: float, b: float) -> float:
    """Wrapped planar azimuth difference in degrees, [0, 180]"""
    diff = np.degrees(abs(a - b)) % 360.0
    return float(min(diff, 360.0 - diff))


def in_bin(value: float, angle_bin: Tuple[float, float]) -> bool:
    lo, hi = angle_bin
    if hi >= 180.0:
        return lo <= value <= hi
    return lo <= value < hi


def _sample_source(rng: np.random.Generator, room_dims: np.ndarray, center: np.ndarray) -> np.ndarray:
    """Uniform position in the room at 1-5 m from the array centre"""
    lo = np.array([SOURCE_WALL_MARGIN, SOURCE_WALL_MARGIN, SOURCE_HEIGHT[0]])
    hi = np.array([room_dims[0] - SOURCE_WALL_MARGIN, room_dims[1] - SOURCE_WALL_MARGIN,
                   min(SOURCE_HEIGHT[1], room_dims[2] - SOURCE_WALL_MARGIN)])
    for _ in range(REJECTION_BUDGET):
        point = rng.uniform(lo, hi)
        distance = np.linalg.norm(point - center)
        if DISTANCE_RANGE[0] <= distance <= DISTANCE_RANGE[1]:
            return point
    raise SceneSamplingError(f"no source position 1-5 m from array at {center.tolist()}")


def _pick_interferer(rng: np.random.Generator, entries: Sequence, target_index: int) -> int:
    target_speaker = entries[target_index].speaker
    candidates = [i for i, e in enumerate(entries)
                  if i != target_index and (target_speaker is None or e.speaker != target_speaker)]
    if not candidates:
        logger.warning("No utterance from another speaker in the manifest, reusing the target")
        return target_index
    return candidates[int(rng.integers(len(candidates)))]


def sample_scene(seed: Union[int, np.random.SeedSequence], manifest, target_index: Optional[int] = None,
                 noise_manifest=None, utterance_id: Optional[str] = None,
                 spacings_cm: Sequence[float] = DEFAULT_ARRAY_SPACINGS_CM) -> RoomScene:
    """
    Draw one scene

    Args:
        seed: Integer seed or SeedSequence; the scene is a pure function of it
        manifest: CorpusManifest of source speech
        target_index: Target utterance (drawn uniformly when None)
        noise_manifest: Optional CorpusManifest of noise recordings; seeded
            Gaussian noise stands in when absent
        utterance_id: Identifier stored in the scene record
        spacings_cm: Linear array spacings

    Raises:
        ValueError: empty manifest
        SceneSamplingError: rejection budget exhausted
    """
    entries = list(manifest)
    if not entries:
        raise ValueError("speech manifest is empty")

    sequence = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    rng = np.random.default_rng(sequence)
    seed_value = int(sequence.generate_state(1)[0])

    if target_index is None:
        target_index = int(rng.integers(len(entries)))
    interferer_index = _pick_interferer(rng, entries, target_index)

    # T60 stays uniform over its range; the room is redrawn until Sabine absorption is below 1
    t60 = float(rng.uniform(*T60_RANGE))
    for _ in range(REJECTION_BUDGET):
        room_dims = rng.uniform(ROOM_MIN, ROOM_MAX)
        if absorption_from_t60(room_dims, t60) < 1.0:
            break
    else:
        raise SceneSamplingError(f"no room admits T60 {t60:.3f}s after {REJECTION_BUDGET} draws")

    template = ArrayGeometry.linear(spacings_cm)
    half_aperture = template.aperture
    lo = np.full(3, ARRAY_WALL_MARGIN) + np.array([half_aperture, 0.0, 0.0])
    hi = room_dims - lo
    center = rng.uniform(lo, hi)
    geometry = template.translated(center)

    target = _sample_source(rng, room_dims, center)
    angle_bin = ANGLE_BINS[int(rng.integers(len(ANGLE_BINS)))]
    target_azimuth = geometry.azimuth_to(target)

    for _ in range(REJECTION_BUDGET):
        interferer = _sample_source(rng, room_dims, center)
        difference = azimuth_difference(target_azimuth, geometry.azimuth_to(interferer))
        if in_bin(difference, angle_bin):
            break
    else:
        raise SceneSamplingError(
            f"interferer never landed in angle bin {angle_bin} after {REJECTION_BUDGET} draws"
        )

    sir = float(rng.choice(SIR_CHOICES))
    noise_position = _sample_source(rng, room_dims, center)
    if noise_manifest is not None and len(noise_manifest) > 0:
        noise_id = noise_manifest[int(rng.integers(len(noise_manifest)))].path
    else:
        noise_id = GAUSSIAN_NOISE
    snr = float(rng.choice(SNR_CHOICES))
    noise_offset = int(rng.integers(0, 2 ** 31 - 1))

    return RoomScene(
        utterance_id=utterance_id or f"utt{target_index:05d}",
        room_dims=room_dims.tolist(),
        t60=t60,
        array_center=center.tolist(),
        mic_positions=geometry.positions.tolist(),
        target_position=target.tolist(),
        interferer_position=interferer.tolist(),
        noise_position=noise_position.tolist(),
        target_path=entries[target_index].path,
        interferer_path=entries[interferer_index].path,
        noise_id=noise_id,
        snr_db=snr,
        sir_db=sir,
        angle_bin=angle_bin,
        angle_difference=difference,
        seed=seed_value,
        noise_offset=noise_offset,
    )


def write_scenes(path: str, scenes: Sequence[RoomScene]):
    with open(path, 'w') as f:
        for scene in scenes:
            f.write(scene.to_json() + '\n')


def read_scenes(path: str) -> List[RoomScene]:
    with open(path, 'r') as f:
        return [RoomScene.from_dict(json.loads(line)) for line in f if line.strip()]
