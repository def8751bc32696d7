"""
Stage mask sources for the enhancement pipelines

A provider answers `mask(stage, stage_input, separated)` with a T x F
ComplexMask. Stage names:

    sep_target   target mask for the MVDR speech covariance
    sep_noise    everything-but-target mask for the MVDR noise covariance
    dervb        dereverberation mask (WPE lambda or SpecM gain)
    wpd_target   target mask for the WPD covariance
    wpd_lambda   mask behind the WPD time-varying power
"""

import logging
import os
from typing import Dict, Optional

import numpy as np

from config import Config
from dsp.stft import Spectrogram, StftConfig, stft
from .mask import ComplexMask, oracle_complex_mask
from .mask_io import load_mask

logger = logging.getLogger(__name__)

STAGES = ('sep_target', 'sep_noise', 'dervb', 'wpd_target', 'wpd_lambda')
SEPARATION_REFERENCES = ('target_anechoic', 'target_early')


def _check_stage(stage: str):
    if stage not in STAGES:
        raise ValueError(f"unknown mask stage '{stage}', expected one of {', '.join(STAGES)}")


class MaskProvider:
    """Base class; subclasses implement mask()"""
    source = 'none'

    def mask(self, stage: str, stage_input: Spectrogram, separated: bool = False) -> ComplexMask:
        raise NotImplementedError


class OracleMaskProvider(MaskProvider):
    """
    Oracle complex ratio masks from the simulator's reference images

    With reestimate=True every stage mask is formed against that stage's own
    input at the reference channel (the MVDR output for dereverberation after
    separation, the WPE output for separation after dereverberation). With
    reestimate=False every mask is formed against the mixture.

    Desired signals:
        sep_target   separation_reference (anechoic target by default)
        sep_noise    stage input minus the separation reference
        dervb        early target after separation; early target + early
                     interferer + noise before it
        wpd_*        early target
    """
    source = 'oracle'

    def __init__(self, mixture: Spectrogram, references: Dict[str, Spectrogram],
                 ref_channel: int = Config.REFERENCE_CHANNEL, reestimate: bool = True,
                 separation_reference: str = 'target_anechoic', clip: float = Config.MASK_CLIP):
        if separation_reference not in SEPARATION_REFERENCES:
            raise ValueError(
                f"separation_reference must be one of {', '.join(SEPARATION_REFERENCES)}, "
                f"got '{separation_reference}'"
            )
        missing = {separation_reference, 'target_early', 'interferer_early', 'noise'} - set(references)
        if missing:
            raise ValueError(f"missing reference spectrograms: {', '.join(sorted(missing))}")
        for name, spec in references.items():
            if spec.values.shape[1:] != mixture.values.shape[1:]:
                raise ValueError(
                    f"reference '{name}' frames x bins {spec.values.shape[1:]} "
                    f"do not match mixture {mixture.values.shape[1:]}"
                )

        self.mixture = mixture
        self.references = references
        self.ref_channel = ref_channel
        self.reestimate = reestimate
        self.separation_reference = separation_reference
        self.clip = clip

    @classmethod
    def from_waves(cls, mixture, references: Dict, cfg: StftConfig = StftConfig(), **kwargs) -> 'OracleMaskProvider':
        """Build from MultiChannelWave mixture and references"""
        return cls(
            stft(mixture, cfg),
            {name: stft(wave, cfg) for name, wave in references.items()},
            **kwargs,
        )

    def _reference(self, name: str) -> np.ndarray:
        values = self.references[name].values
        return values[self.ref_channel if values.shape[0] > 1 else 0]

    def _denominator(self, stage_input: Spectrogram) -> Spectrogram:
        return stage_input if self.reestimate else self.mixture

    def _ratio(self, desired: np.ndarray, denominator: Spectrogram) -> ComplexMask:
        desired_spec = denominator.with_values(desired[np.newaxis])
        return oracle_complex_mask(desired_spec, denominator, self.ref_channel, self.clip)

    def mask(self, stage: str, stage_input: Spectrogram, separated: bool = False) -> ComplexMask:
        _check_stage(stage)
        if stage_input.values.shape[1:] != self.mixture.values.shape[1:]:
            raise ValueError(
                f"stage input frames x bins {stage_input.values.shape[1:]} "
                f"do not match mixture {self.mixture.values.shape[1:]}"
            )
        denominator = self._denominator(stage_input)

        if stage == 'sep_target':
            return self._ratio(self._reference(self.separation_reference), denominator)
        if stage == 'sep_noise':
            values = denominator.values
            observed = values[self.ref_channel if values.shape[0] > 1 else 0]
            return self._ratio(observed - self._reference(self.separation_reference), denominator)
        if stage == 'dervb' and not separated:
            desired = self._reference('target_early') + self._reference('interferer_early') + self._reference('noise')
            return self._ratio(desired, denominator)
        return self._ratio(self._reference('target_early'), denominator)


class FileMaskProvider(MaskProvider):
    """Masks from `<directory>/<utterance_id>.<stage>.cfmk` files"""
    source = 'file'

    def __init__(self, directory: str, utterance_id: str):
        if not os.path.isdir(directory):
            raise ValueError(f"mask directory not found: {directory}")
        self.directory = directory
        self.utterance_id = utterance_id

    def path_for(self, stage: str) -> str:
        _check_stage(stage)
        return os.path.join(self.directory, f"{self.utterance_id}.{stage}.cfmk")

    def mask(self, stage: str, stage_input: Spectrogram, separated: bool = False) -> ComplexMask:
        path = self.path_for(stage)
        if not os.path.exists(path):
            raise FileNotFoundError(f"mask file not found: {path}")
        logger.debug(f"Loading {stage} mask from {path}")
        return load_mask(path, stage_input.num_frames, stage_input.num_bins)


def provider_for(masks: str, utterance_id: str, mixture: Optional[Spectrogram] = None,
                 references: Optional[Dict[str, Spectrogram]] = None, **oracle_kwargs) -> MaskProvider:
    """'oracle' builds an OracleMaskProvider, anything else is a mask directory"""
    if masks == 'oracle':
        if mixture is None or not references:
            raise ValueError(f"{utterance_id}: oracle masks need reference signals in the manifest")
        return OracleMaskProvider(mixture, references, **oracle_kwargs)
    return FileMaskProvider(masks, utterance_id)
