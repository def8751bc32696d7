"""
enhance: run one integration architecture over a manifest of mixtures

Input records (JSON Lines): utterance_id, mixture, and for oracle masks a
`references` map of reference-image WAVs (as written by simulate). Paths
are relative to the manifest's directory.

Writes `<utt>.wav` (mono, input length), its `<utt>.json` provenance
record, and `manifest.jsonl` pairing estimates with the early-target
reference for evaluate.
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, Optional

from config import Config, EnhanceOptions
from dsp.audio import read_wav, write_wav
from dsp.stft import StftConfig, istft, stft
from masks.providers import provider_for
from utils.logger import Logger
from utils.manifest import read_jsonl, resolve, write_jsonl
from utils.report_saver import save_provenance
from utils.state_manager import StateManager, fingerprint
from .architectures import PipelineConfig, enhance
from .batch import BatchJob, BatchOutcome, run_batch

logger = logging.getLogger(__name__)

# Reference images an oracle provider needs
ORACLE_REFERENCES = ('target_anechoic', 'target_early', 'interferer_early', 'noise')
EVALUATION_REFERENCE = 'target_early'


@dataclass
class EnhancementSummary:
    total: int
    cfg: PipelineConfig
    outcome: BatchOutcome

    @property
    def failures(self) -> int:
        return len(self.outcome.failures)

    def print_summary(self, output_dir: str):
        done = self.outcome.completed
        print("\n" + "=" * 70)
        print("ENHANCEMENT SUMMARY")
        print("=" * 70)
        print(f"Architecture:        {self.cfg.architecture.value} ({self.cfg.dervb_kind.value})")
        print(f"Taps / eps:          {self.cfg.stage_taps} / {self.cfg.stage_eps}")
        print(f"Enhanced:            {len(done)}/{self.total}")
        print(f"Failed:              {self.failures}")
        print(f"Degenerate bins:     {sum(r['degenerate_bins'] for r in done)}")
        print(f"\nOutputs saved to:    {output_dir}/")
        print("=" * 70)


def enhance_utterance(record: Dict, base_dir: str, options: EnhanceOptions, cfg: PipelineConfig,
                      stft_cfg: StftConfig = StftConfig()) -> Dict:
    """Enhance one manifest record; returns the evaluation record"""
    utterance_id = record['utterance_id']
    mixture_file = resolve(record['mixture'], base_dir)
    mixture = read_wav(mixture_file, Config.SAMPLE_RATE)
    mixture_spec = stft(mixture, stft_cfg)

    reference_files = {key: resolve(path, base_dir) for key, path in (record.get('references') or {}).items()}
    references = None
    if options.masks == 'oracle':
        missing = [key for key in ORACLE_REFERENCES if key not in reference_files]
        if missing:
            raise ValueError(f"{utterance_id}: oracle masks need references {', '.join(missing)}")
        references = {key: stft(read_wav(reference_files[key], Config.SAMPLE_RATE), stft_cfg)
                      for key in ORACLE_REFERENCES}

    provider = provider_for(
        options.masks, utterance_id, mixture_spec, references,
        ref_channel=cfg.ref_channel, reestimate=cfg.reestimate_masks,
        separation_reference=cfg.separation_reference,
    )

    result = enhance(mixture_spec, provider, cfg)
    estimate = istft(result.output)

    output_file = os.path.join(options.output_dir, f"{utterance_id}.wav")
    write_wav(output_file, estimate)
    save_provenance(output_file, {
        'utterance_id': utterance_id,
        'mixture': os.path.relpath(mixture_file, options.output_dir),
        'references': {k: os.path.relpath(v, options.output_dir) for k, v in sorted(reference_files.items())},
        'mask_source': options.masks,
        'pipeline': cfg.to_dict(),
        'stft': {'fft_size': stft_cfg.fft_size, 'window_length': stft_cfg.window_length,
                 'hop': stft_cfg.hop, 'window': stft_cfg.window},
        'degenerate_bins': result.degenerate_bins,
    })
    Logger.log_enhancement(logger, utterance_id, cfg, result.degenerate_bins)

    evaluation = {
        'utterance_id': utterance_id,
        'estimate': f"{utterance_id}.wav",
        'mixture': os.path.relpath(mixture_file, options.output_dir),
        'degenerate_bins': result.degenerate_bins,
    }
    if EVALUATION_REFERENCE in reference_files:
        evaluation['reference'] = os.path.relpath(reference_files[EVALUATION_REFERENCE], options.output_dir)
        evaluation['reference_channel'] = cfg.ref_channel
    return evaluation


def run_enhance(options: EnhanceOptions, cfg: PipelineConfig, workers: int = Config.WORKERS,
                state: Optional[StateManager] = None, resume: bool = False) -> EnhancementSummary:
    """
    Raises:
        ValueError: missing or empty manifest, missing mask directory
    """
    if not options.manifest:
        raise ValueError("enhance needs a manifest (--manifest)")
    records = read_jsonl(options.manifest)
    if not records:
        raise ValueError(f"manifest is empty: {options.manifest}")
    if options.masks != 'oracle' and not os.path.isdir(options.masks):
        raise ValueError(f"mask directory not found: {options.masks}")

    base_dir = os.path.dirname(os.path.abspath(options.manifest))
    os.makedirs(options.output_dir, exist_ok=True)

    jobs = [
        BatchJob(record['utterance_id'], record, fingerprint({
            'record': record, 'masks': options.masks, 'pipeline': cfg.to_dict(),
            'output_dir': os.path.abspath(options.output_dir),
        }))
        for record in records
    ]
    outcome = run_batch('enhance', jobs,
                        lambda job: enhance_utterance(job.payload, base_dir, options, cfg),
                        workers, state, resume)

    write_jsonl(os.path.join(options.output_dir, 'manifest.jsonl'), outcome.completed)
    return EnhancementSummary(len(records), cfg, outcome)
