#!/usr/bin/env python3
"""
Metric report and provenance writers
"""
import json
import os
from typing import Dict

from metrics.report import MetricReport


def save_report(report: MetricReport, output_dir: str) -> Dict[str, str]:
    """
    Write report.jsonl (one record per utterance, then a mean record) and a
    fixed-width report.txt table. STOI is shown x100 in the table.
    """
    os.makedirs(output_dir, exist_ok=True)
    jsonl_path = os.path.join(output_dir, 'report.jsonl')
    text_path = os.path.join(output_dir, 'report.txt')
    means = report.aggregate()

    with open(jsonl_path, 'w') as f:
        for record in report.to_records():
            f.write(json.dumps(record, sort_keys=True) + '\n')
        f.write(json.dumps({'utterance_id': '__mean__', **means}, sort_keys=True) + '\n')

    header = f"{'utterance':<24}{'SISNR(dB)':>12}{'STOI(x100)':>12}{'SRMR':>10}{'MSE':>14}"
    with open(text_path, 'w') as f:
        f.write(header + '\n')
        f.write('-' * len(header) + '\n')
        for entry in report.entries:
            f.write(
                f"{entry.utterance_id:<24}{entry.sisnr:>12.2f}{entry.stoi * 100:>12.2f}"
                f"{entry.srmr:>10.3f}{entry.spectral_mse:>14.4e}\n"
            )
        f.write('-' * len(header) + '\n')
        f.write(
            f"{'mean':<24}{means['sisnr']:>12.2f}{means['stoi'] * 100:>12.2f}"
            f"{means['srmr']:>10.3f}{means['spectral_mse']:>14.4e}\n"
        )

    return {'jsonl': jsonl_path, 'text': text_path}


def save_provenance(wav_path: str, record: Dict) -> str:
    """Write `<name>.json` next to an output WAV"""
    path = os.path.splitext(wav_path)[0] + '.json'
    with open(path, 'w') as f:
        json.dump(record, f, indent=2, sort_keys=True)
    return path
