import json
import os
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

load_dotenv()


def _env_bool(name, default):
    return os.getenv(name, default).lower() == 'true'


class Config:
    # ============================================
    # SIGNAL SETTINGS
    # ============================================

    SAMPLE_RATE = int(os.getenv('SAMPLE_RATE', 16000))

    # 512-point STFT, 32 ms square-root Hann window, 16 ms hop at 16 kHz
    FFT_SIZE = int(os.getenv('FFT_SIZE', 512))
    WINDOW_LENGTH = int(os.getenv('WINDOW_LENGTH', 512))
    HOP = int(os.getenv('HOP', 256))
    WINDOW = os.getenv('WINDOW', 'sqrt_hann')

    # Magnitude cap for complex ratio masks
    MASK_CLIP = float(os.getenv('MASK_CLIP', 10.0))

    # ============================================
    # FILTER SETTINGS
    # ============================================

    REFERENCE_CHANNEL = 0
    PREDICTION_DELAY = 2

    # Diagonal flooring per filter
    MVDR_EPS = 1e-5
    WPE_SINGLE_TAPS = 18
    WPE_SINGLE_EPS = 1e-5
    WPE_MULTI_TAPS = 2
    WPE_MULTI_EPS = 1e-6
    WPE_ITERATIONS = 3
    WPD_TAPS = 1
    WPD_EPS = 1e-4

    # ============================================
    # ROOM SIMULATION
    # ============================================

    SOUND_SPEED = float(os.getenv('SOUND_SPEED', 343.0))

    # Direct + early reflections window after the direct path
    EARLY_MS = float(os.getenv('EARLY_MS', 50.0))

    # ============================================
    # BATCH SETTINGS
    # ============================================

    SEED = int(os.getenv('SEED', 42))
    WORKERS = int(os.getenv('WORKERS', 1))
    OUTPUT_DIR = os.getenv('OUTPUT_DIR', 'experiments')
    LOG_DIR = os.getenv('LOG_DIR', 'logs')

    # Number of failed utterances tolerated before a batch exits non-zero
    FAILURE_TOLERANCE = int(os.getenv('FAILURE_TOLERANCE', 0))

    # ============================================
    # STATE MANAGEMENT
    # ============================================

    # Kept outside the corpora so outputs stay byte-identical between runs
    STATE_DIR = os.getenv('STATE_DIR', 'experiments/.state')
    MAX_RETRIES = int(os.getenv('MAX_RETRIES', 3))
    ENABLE_STATE_MANAGEMENT = _env_bool('ENABLE_STATE_MANAGEMENT', 'true')

    # ============================================

    @classmethod
    def validate(cls):
        invalid = []
        if cls.SAMPLE_RATE <= 0:
            invalid.append('SAMPLE_RATE must be positive')
        if cls.HOP <= 0 or cls.HOP > cls.WINDOW_LENGTH:
            invalid.append('HOP must be in (0, WINDOW_LENGTH]')
        if cls.WINDOW_LENGTH > cls.FFT_SIZE:
            invalid.append('WINDOW_LENGTH must not exceed FFT_SIZE')
        if cls.WORKERS < 1:
            invalid.append('WORKERS must be >= 1')
        if cls.MAX_RETRIES < 1:
            invalid.append('MAX_RETRIES must be >= 1')

        if invalid:
            raise ValueError(f"Invalid configuration: {'; '.join(invalid)}")


@dataclass
class SimulateOptions:
    speech_manifest: Optional[str] = None
    noise_manifest: Optional[str] = None
    output_dir: str = os.path.join(Config.OUTPUT_DIR, 'simulated')
    num_utterances: int = 10
    max_order: Optional[int] = None
    early_ms: float = Config.EARLY_MS
    # Seconds per utterance when sources are trimmed/padded; None keeps the target length
    duration: Optional[float] = None


@dataclass
class EnhanceOptions:
    manifest: Optional[str] = None
    output_dir: str = os.path.join(Config.OUTPUT_DIR, 'enhanced')
    masks: str = 'oracle'
    pipeline: Dict[str, Any] = field(default_factory=dict)


@dataclass
class EvaluateOptions:
    manifest: Optional[str] = None
    output_dir: str = os.path.join(Config.OUTPUT_DIR, 'reports')
    min_stoi: Optional[float] = None
    min_sisnr: Optional[float] = None
    min_srmr: Optional[float] = None


@dataclass
class SweepOptions:
    manifest: Optional[str] = None
    output_dir: str = os.path.join(Config.OUTPUT_DIR, 'sweeps')
    masks: str = 'oracle'
    # 'taps' or 'eps' of the architecture's main filter stage
    parameter: str = 'eps'
    values: List[float] = field(default_factory=list)


_SECTIONS = {
    'simulate': SimulateOptions,
    'enhance': EnhanceOptions,
    'evaluate': EvaluateOptions,
    'sweep': SweepOptions,
}


@dataclass
class ExperimentConfig:
    """
    Per-experiment settings: Config defaults < JSON config file < CLI flags
    """
    seed: int = Config.SEED
    workers: int = Config.WORKERS
    simulate: SimulateOptions = field(default_factory=SimulateOptions)
    enhance: EnhanceOptions = field(default_factory=EnhanceOptions)
    evaluate: EvaluateOptions = field(default_factory=EvaluateOptions)
    sweep: SweepOptions = field(default_factory=SweepOptions)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'ExperimentConfig':
        unknown = set(data) - {'seed', 'workers', *_SECTIONS}
        if unknown:
            raise ValueError(f"Unknown config keys: {', '.join(sorted(unknown))}")

        sections = {}
        for name, section_cls in _SECTIONS.items():
            values = data.get(name, {}) or {}
            allowed = {f.name for f in fields(section_cls)}
            extra = set(values) - allowed
            if extra:
                raise ValueError(f"Unknown keys in '{name}': {', '.join(sorted(extra))}")
            sections[name] = section_cls(**values)

        return cls(
            seed=int(data.get('seed', Config.SEED)),
            workers=int(data.get('workers', Config.WORKERS)),
            **sections,
        )

    @classmethod
    def load(cls, path: Optional[str]) -> 'ExperimentConfig':
        if not path:
            return cls()
        if not os.path.exists(path):
            raise ValueError(f"Config file not found: {path}")
        with open(path, 'r') as f:
            return cls.from_dict(json.load(f))

    def validate(self):
        if self.workers < 1:
            raise ValueError(f"workers must be >= 1, got {self.workers}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
