"""
evaluate: score estimates against references

Input records (JSON Lines): utterance_id, estimate, reference, and
optionally estimate_channel / reference_channel (default 0). Paths are
relative to the manifest's directory.
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import Config, EvaluateOptions
from dsp.audio import MultiChannelWave, read_wav
from dsp.stft import StftConfig, stft
from metrics.report import MetricReport, UtteranceMetrics
from metrics.sisnr import sisnr, spectral_mse
from metrics.srmr import srmr
from metrics.stoi import stoi
from utils.logger import Logger
from utils.manifest import read_jsonl, resolve
from utils.report_saver import save_report
from utils.state_manager import StateManager, fingerprint
from .batch import BatchJob, BatchOutcome, run_batch

logger = logging.getLogger(__name__)


@dataclass
class EvaluationSummary:
    total: int
    report: MetricReport
    outcome: BatchOutcome
    violations: List[str]

    @property
    def failures(self) -> int:
        return len(self.outcome.failures)

    def print_summary(self, output_dir: str):
        means = self.report.aggregate()
        print("\n" + "=" * 70)
        print("EVALUATION SUMMARY")
        print("=" * 70)
        print(f"Scored:              {len(self.report)}/{self.total}")
        print(f"Failed:              {self.failures}")
        print(f"Mean SISNR:          {means['sisnr']:.2f} dB")
        print(f"Mean STOI (x100):    {means['stoi'] * 100:.2f}")
        print(f"Mean SRMR:           {means['srmr']:.3f}")
        print(f"Mean spectral MSE:   {means['spectral_mse']:.4e}")
        for violation in self.violations:
            print(f"GATE FAILED:         {violation}")
        print(f"\nReport saved to:     {output_dir}/")
        print("=" * 70)


def trim_to_shortest(estimate: np.ndarray, reference: np.ndarray, utterance_id: str) -> Tuple[np.ndarray, np.ndarray]:
    if estimate.size != reference.size:
        length = min(estimate.size, reference.size)
        logger.warning(
            f"{utterance_id}: estimate has {estimate.size} samples, reference {reference.size}; trimming to {length}"
        )
        return estimate[:length], reference[:length]
    return estimate, reference


def score(utterance_id: str, estimate: np.ndarray, reference: np.ndarray,
          sample_rate: int = Config.SAMPLE_RATE, stft_cfg: StftConfig = StftConfig()) -> UtteranceMetrics:
    """All metrics for one mono estimate/reference pair"""
    estimate, reference = trim_to_shortest(estimate, reference, utterance_id)
    estimate_spec = stft(MultiChannelWave.mono(estimate, sample_rate), stft_cfg)
    reference_spec = stft(MultiChannelWave.mono(reference, sample_rate), stft_cfg)
    return UtteranceMetrics(
        utterance_id=utterance_id,
        sisnr=sisnr(estimate, reference),
        spectral_mse=spectral_mse(estimate_spec, reference_spec),
        stoi=stoi(estimate, reference, sample_rate),
        srmr=srmr(estimate, sample_rate),
    )


def evaluate_utterance(record: Dict, base_dir: str) -> Dict:
    utterance_id = record['utterance_id']
    if not record.get('estimate') or not record.get('reference'):
        raise ValueError(f"{utterance_id}: record needs both 'estimate' and 'reference'")
    estimate = read_wav(resolve(record['estimate'], base_dir), Config.SAMPLE_RATE)
    reference = read_wav(resolve(record['reference'], base_dir), Config.SAMPLE_RATE)

    metrics = score(
        utterance_id,
        estimate.channel(int(record.get('estimate_channel', 0))),
        reference.channel(int(record.get('reference_channel', 0))),
    )
    Logger.log_metrics(logger, metrics)
    return metrics.to_record()


def run_evaluate(options: EvaluateOptions, workers: int = Config.WORKERS,
                 state: Optional[StateManager] = None, resume: bool = False) -> EvaluationSummary:
    """
    Raises:
        ValueError: missing or empty manifest
    """
    if not options.manifest:
        raise ValueError("evaluate needs a manifest (--manifest)")
    records = read_jsonl(options.manifest)
    if not records:
        raise ValueError(f"manifest is empty: {options.manifest}")
    base_dir = os.path.dirname(os.path.abspath(options.manifest))

    jobs = [BatchJob(record['utterance_id'], record, fingerprint({'record': record, 'base_dir': base_dir}))
            for record in records]
    outcome = run_batch('evaluate', jobs, lambda job: evaluate_utterance(job.payload, base_dir),
                        workers, state, resume)

    report = MetricReport()
    for record in outcome.completed:
        report.add(UtteranceMetrics(**record))
    save_report(report, options.output_dir)

    violations = report.violations(options.min_stoi, options.min_sisnr, options.min_srmr)
    return EvaluationSummary(len(records), report, outcome, violations)
