"""
Integration architectures for separation and dereverberation

    sep_only        mask-based MVDR
    sep_then_dervb  MVDR, then single-channel WPE or SpecM on its output
    dervb_then_sep  multi-channel WPE (or SpecM on every channel), then MVDR
    joint_wpd       mask-based WPD

Every architecture returns a single-channel Spectrogram with the mixture's
frames and bins.
"""

import logging
from dataclasses import asdict, dataclass, fields, replace
from enum import Enum
from typing import Any, Callable, Dict, Optional, Tuple

from config import Config
from beamforming.mvdr import BeamformerWeights, ReferenceVector, mvdr_beamform
from beamforming.wpd import WpdConfig, wpd_beamform
from dereverb.specm import specm_apply
from dereverb.wpe import WpeConfig, wpe_iterative, wpe_masked
from dsp.stft import Spectrogram
from masks.providers import SEPARATION_REFERENCES, MaskProvider

logger = logging.getLogger(__name__)


class Architecture(str, Enum):
    SEP_ONLY = 'sep_only'
    SEP_THEN_DERVB = 'sep_then_dervb'
    DERVB_THEN_SEP = 'dervb_then_sep'
    JOINT_WPD = 'joint_wpd'


class DervbKind(str, Enum):
    WPE_ITERATIVE = 'wpe_iterative'
    WPE_MASKED = 'wpe_masked'
    SPECM = 'specm'


def _parse_enum(enum_cls, value, label: str):
    if isinstance(value, enum_cls):
        return value
    try:
        return enum_cls(value)
    except ValueError:
        choices = ', '.join(member.value for member in enum_cls)
        raise ValueError(f"unknown {label} '{value}', expected one of {choices}") from None


@dataclass(frozen=True)
class PipelineConfig:
    """
    Architecture plus per-stage filter settings

    wpe_taps / wpe_eps left as None take the architecture default:
    single-channel WPE after separation (L=18, eps=1e-5), multi-channel WPE
    before it (L=2, eps=1e-6).
    """
    architecture: Architecture = Architecture.DERVB_THEN_SEP
    dervb_kind: DervbKind = DervbKind.WPE_MASKED
    mvdr_eps: float = Config.MVDR_EPS
    wpe_taps: Optional[int] = None
    wpe_delay: int = Config.PREDICTION_DELAY
    wpe_eps: Optional[float] = None
    wpe_iterations: int = Config.WPE_ITERATIONS
    wpd_taps: int = Config.WPD_TAPS
    wpd_delay: int = Config.PREDICTION_DELAY
    wpd_eps: float = Config.WPD_EPS
    ref_channel: int = Config.REFERENCE_CHANNEL
    reestimate_masks: bool = True
    separation_reference: str = 'target_anechoic'

    def __post_init__(self):
        architecture = _parse_enum(Architecture, self.architecture, 'architecture')
        object.__setattr__(self, 'architecture', architecture)
        object.__setattr__(self, 'dervb_kind', _parse_enum(DervbKind, self.dervb_kind, 'dereverberation kind'))

        if architecture == Architecture.SEP_THEN_DERVB:
            default_taps, default_eps = Config.WPE_SINGLE_TAPS, Config.WPE_SINGLE_EPS
        else:
            default_taps, default_eps = Config.WPE_MULTI_TAPS, Config.WPE_MULTI_EPS
        if self.wpe_taps is None:
            object.__setattr__(self, 'wpe_taps', default_taps)
        if self.wpe_eps is None:
            object.__setattr__(self, 'wpe_eps', default_eps)

        if self.mvdr_eps < 0:
            raise ValueError(f"mvdr_eps must be >= 0, got {self.mvdr_eps}")
        if self.ref_channel < 0:
            raise ValueError(f"ref_channel must be >= 0, got {self.ref_channel}")
        if self.separation_reference not in SEPARATION_REFERENCES:
            raise ValueError(
                f"separation_reference must be one of {', '.join(SEPARATION_REFERENCES)}, "
                f"got '{self.separation_reference}'"
            )
        # stage configs raise on invalid taps, delay or eps
        _ = self.wpe_config, self.wpd_config

    @property
    def wpe_config(self) -> WpeConfig:
        return WpeConfig(taps=self.wpe_taps, delay=self.wpe_delay,
                         iterations=self.wpe_iterations, eps=self.wpe_eps)

    @property
    def wpd_config(self) -> WpdConfig:
        return WpdConfig(taps=self.wpd_taps, delay=self.wpd_delay, eps=self.wpd_eps)

    @property
    def reference(self) -> ReferenceVector:
        return ReferenceVector(self.ref_channel)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'PipelineConfig':
        allowed = {f.name for f in fields(cls)}
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"Unknown pipeline keys: {', '.join(sorted(unknown))}")
        return cls(**data)

    def to_dict(self) -> Dict[str, Any]:
        data = asdict(self)
        data['architecture'] = self.architecture.value
        data['dervb_kind'] = self.dervb_kind.value
        return data

    def with_overrides(self, taps: Optional[int] = None, delay: Optional[int] = None,
                       eps: Optional[float] = None) -> 'PipelineConfig':
        """
        Apply --taps/--delay/--eps to the architecture's main filter stage

        sep_only has no taps or delay; only eps (MVDR) applies there.
        """
        arch = self.architecture
        if arch == Architecture.SEP_ONLY:
            if taps is not None or delay is not None:
                logger.warning("sep_only has no filter taps; ignoring taps/delay overrides")
            return self if eps is None else replace(self, mvdr_eps=eps)

        prefix = 'wpd' if arch == Architecture.JOINT_WPD else 'wpe'
        changes = {}
        for key, value in (('taps', taps), ('delay', delay), ('eps', eps)):
            if value is not None:
                changes[f"{prefix}_{key}"] = value
        return replace(self, **changes) if changes else self

    @property
    def stage_taps(self) -> Optional[int]:
        if self.architecture == Architecture.SEP_ONLY:
            return None
        return self.wpd_taps if self.architecture == Architecture.JOINT_WPD else self.wpe_taps

    @property
    def stage_eps(self) -> float:
        if self.architecture == Architecture.SEP_ONLY:
            return self.mvdr_eps
        return self.wpd_eps if self.architecture == Architecture.JOINT_WPD else self.wpe_eps


@dataclass
class EnhancementResult:
    output: Spectrogram
    weights: BeamformerWeights

    @property
    def degenerate_bins(self) -> int:
        return self.weights.num_degenerate


def _dereverberate(spec: Spectrogram, provider: MaskProvider, cfg: PipelineConfig, separated: bool) -> Spectrogram:
    kind = cfg.dervb_kind
    if kind == DervbKind.SPECM:
        return specm_apply(spec, provider.mask('dervb', spec, separated=separated))

    wpe_cfg = cfg.wpe_config
    if not wpe_cfg.enabled:
        return spec
    if kind == DervbKind.WPE_ITERATIVE:
        return wpe_iterative(spec, wpe_cfg)
    return wpe_masked(spec, provider.mask('dervb', spec, separated=separated), wpe_cfg)


def _separate(spec: Spectrogram, provider: MaskProvider, cfg: PipelineConfig) -> Tuple[Spectrogram, BeamformerWeights]:
    mask_x = provider.mask('sep_target', spec)
    mask_n = provider.mask('sep_noise', spec)
    return mvdr_beamform(spec, mask_x, mask_n, cfg.reference, cfg.mvdr_eps)


def _sep_only(mixture: Spectrogram, provider: MaskProvider, cfg: PipelineConfig) -> EnhancementResult:
    return EnhancementResult(*_separate(mixture, provider, cfg))


def _sep_then_dervb(mixture: Spectrogram, provider: MaskProvider, cfg: PipelineConfig) -> EnhancementResult:
    separated, weights = _separate(mixture, provider, cfg)
    return EnhancementResult(_dereverberate(separated, provider, cfg, separated=True), weights)


def _dervb_then_sep(mixture: Spectrogram, provider: MaskProvider, cfg: PipelineConfig) -> EnhancementResult:
    dereverberated = _dereverberate(mixture, provider, cfg, separated=False)
    return EnhancementResult(*_separate(dereverberated, provider, cfg))


def _joint_wpd(mixture: Spectrogram, provider: MaskProvider, cfg: PipelineConfig) -> EnhancementResult:
    mask_x = provider.mask('wpd_target', mixture)
    mask_lambda = provider.mask('wpd_lambda', mixture)
    return EnhancementResult(*wpd_beamform(mixture, mask_x, mask_lambda, cfg.wpd_config, cfg.reference))


_ARCHITECTURES: Dict[Architecture, Callable[..., EnhancementResult]] = {
    Architecture.SEP_ONLY: _sep_only,
    Architecture.SEP_THEN_DERVB: _sep_then_dervb,
    Architecture.DERVB_THEN_SEP: _dervb_then_sep,
    Architecture.JOINT_WPD: _joint_wpd,
}


def _with_architecture(cfg: Optional[PipelineConfig], architecture: Architecture) -> PipelineConfig:
    if cfg is None:
        return PipelineConfig(architecture=architecture)
    if cfg.architecture != architecture:
        raise ValueError(f"config is for {cfg.architecture.value}, not {architecture.value}")
    return cfg


def run_sep_then_dervb(mixture: Spectrogram, provider: MaskProvider,
                       cfg: Optional[PipelineConfig] = None) -> Spectrogram:
    return _sep_then_dervb(mixture, provider, _with_architecture(cfg, Architecture.SEP_THEN_DERVB)).output


def run_dervb_then_sep(mixture: Spectrogram, provider: MaskProvider,
                       cfg: Optional[PipelineConfig] = None) -> Spectrogram:
    return _dervb_then_sep(mixture, provider, _with_architecture(cfg, Architecture.DERVB_THEN_SEP)).output


def run_joint_wpd(mixture: Spectrogram, provider: MaskProvider,
                  cfg: Optional[PipelineConfig] = None) -> Spectrogram:
    return _joint_wpd(mixture, provider, _with_architecture(cfg, Architecture.JOINT_WPD)).output


def enhance(mixture: Spectrogram, provider: MaskProvider, cfg: PipelineConfig = PipelineConfig()) -> EnhancementResult:
    """Run the configured architecture on a multi-channel mixture"""
    cfg.reference.check(mixture.num_channels)
    logger.debug(
        f"Enhancing with {cfg.architecture.value} ({cfg.dervb_kind.value}), "
        f"taps={cfg.stage_taps}, eps={cfg.stage_eps}"
    )
    return _ARCHITECTURES[cfg.architecture](mixture, provider, cfg)
