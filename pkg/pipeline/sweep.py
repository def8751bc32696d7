"""
sweep: enhance + evaluate once per filter-taps or flooring-eps setting

Each setting gets `<output_dir>/<label>/enhanced` and
`<output_dir>/<label>/report`; `sweep.jsonl` and `sweep.txt` in
output_dir hold one row of mean metrics per setting.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional

from config import Config, EnhanceOptions, EvaluateOptions, SweepOptions
from metrics.report import METRIC_KEYS
from utils.state_manager import StateManager
from .architectures import Architecture, PipelineConfig
from .enhancer import run_enhance
from .evaluator import run_evaluate

logger = logging.getLogger(__name__)

SWEEP_PARAMETERS = ('taps', 'eps')


def setting_label(parameter: str, value) -> str:
    """Directory name of one setting, e.g. taps_2 or eps_1e-05"""
    return f"{parameter}_{value:g}"


def sweep_values(options: SweepOptions, cfg: PipelineConfig) -> List:
    """
    Raises:
        ValueError: unknown parameter, empty or invalid values
    """
    if options.parameter not in SWEEP_PARAMETERS:
        raise ValueError(f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}, got '{options.parameter}'")
    if not options.values:
        raise ValueError("sweep needs at least one value (--sweep-taps or --sweep-eps)")

    if options.parameter == 'eps':
        values = [float(v) for v in options.values]
        if any(v < 0 for v in values):
            raise ValueError(f"sweep eps values must be >= 0, got {values}")
        return values

    if cfg.architecture == Architecture.SEP_ONLY:
        raise ValueError("sep_only has no filter taps to sweep")
    values = [int(v) for v in options.values]
    if any(v < 0 or v != raw for v, raw in zip(values, options.values)):
        raise ValueError(f"sweep taps must be non-negative integers, got {options.values}")
    return values


@dataclass
class SweepPoint:
    label: str
    value: float
    cfg: PipelineConfig
    means: Dict[str, float]
    scored: int
    failures: int

    def to_record(self, parameter: str) -> Dict:
        return {'setting': self.label, parameter: self.value, 'scored': self.scored,
                'failures': self.failures, **self.means}


@dataclass
class SweepSummary:
    parameter: str
    total: int
    points: List[SweepPoint] = field(default_factory=list)

    @property
    def failures(self) -> int:
        return sum(p.failures for p in self.points)

    def print_summary(self, output_dir: str):
        print("\n" + "=" * 70)
        print(f"SWEEP SUMMARY ({self.parameter})")
        print("=" * 70)
        print(f"{'setting':<16}{'SISNR(dB)':>12}{'STOI(x100)':>12}{'SRMR':>10}{'failed':>8}")
        for p in self.points:
            print(f"{p.label:<16}{p.means['sisnr']:>12.2f}{p.means['stoi'] * 100:>12.2f}"
                  f"{p.means['srmr']:>10.3f}{p.failures:>8}")
        print(f"\nReports saved to:    {output_dir}/")
        print("=" * 70)


def save_sweep(summary: SweepSummary, output_dir: str) -> Dict[str, str]:
    """Write sweep.jsonl and a fixed-width sweep.txt; STOI is shown x100 in the table"""
    os.makedirs(output_dir, exist_ok=True)
    jsonl_path = os.path.join(output_dir, 'sweep.jsonl')
    text_path = os.path.join(output_dir, 'sweep.txt')

    with open(jsonl_path, 'w') as f:
        for point in summary.points:
            f.write(json.dumps(point.to_record(summary.parameter), sort_keys=True) + '\n')

    header = f"{'setting':<16}{'SISNR(dB)':>12}{'STOI(x100)':>12}{'SRMR':>10}{'MSE':>14}"
    with open(text_path, 'w') as f:
        f.write(header + '\n')
        f.write('-' * len(header) + '\n')
        for p in summary.points:
            f.write(
                f"{p.label:<16}{p.means['sisnr']:>12.2f}{p.means['stoi'] * 100:>12.2f}"
                f"{p.means['srmr']:>10.3f}{p.means['spectral_mse']:>14.4e}\n"
            )
    return {'jsonl': jsonl_path, 'text': text_path}


def run_sweep(options: SweepOptions, cfg: PipelineConfig, workers: int = Config.WORKERS,
              state: Optional[StateManager] = None, resume: bool = False) -> SweepSummary:
    """
    Run the enhance and evaluate batches once per setting of options.parameter

    Raises:
        ValueError: invalid sweep, missing or empty manifest
    """
    if not options.manifest:
        raise ValueError("sweep needs a manifest (--manifest)")
    values = sweep_values(options, cfg)

    summary = SweepSummary(options.parameter, len(values))
    for value in values:
        label = setting_label(options.parameter, value)
        setting = cfg.with_overrides(**{options.parameter: value})
        setting_dir = os.path.join(options.output_dir, label)
        logger.info(f"sweep {label}: {setting.architecture.value} ({setting.dervb_kind.value})")

        enhance_options = EnhanceOptions(
            manifest=options.manifest,
            output_dir=os.path.join(setting_dir, 'enhanced'),
            masks=options.masks,
            pipeline=setting.to_dict(),
        )
        enhanced = run_enhance(enhance_options, setting, workers, state, resume)

        evaluate_options = EvaluateOptions(
            manifest=os.path.join(enhance_options.output_dir, 'manifest.jsonl'),
            output_dir=os.path.join(setting_dir, 'report'),
        )
        if enhanced.outcome.completed:
            evaluated = run_evaluate(evaluate_options, workers, state, resume)
            means, scored, failures = evaluated.report.aggregate(), len(evaluated.report), evaluated.failures
        else:
            logger.error(f"sweep {label}: no utterance enhanced, nothing to score")
            means, scored, failures = {key: float('nan') for key in METRIC_KEYS}, 0, 0

        summary.points.append(SweepPoint(label, value, setting, means, scored, enhanced.failures + failures))

    save_sweep(summary, options.output_dir)
    return summary
