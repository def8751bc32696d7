"""Tests for utils.report_saver."""

import json
import os

from metrics.report import MetricReport, UtteranceMetrics
from utils.report_saver import save_provenance, save_report


def report():
    return MetricReport([
        UtteranceMetrics('utt00000', sisnr=10.0, spectral_mse=1e-3, stoi=0.8, srmr=5.0),
        UtteranceMetrics('utt00001', sisnr=6.0, spectral_mse=3e-3, stoi=0.7, srmr=4.0),
    ])


class TestSaveReport:
    def test_jsonl_ends_with_mean(self, tmp_path):
        paths = save_report(report(), str(tmp_path / 'reports'))
        with open(paths['jsonl']) as f:
            records = [json.loads(line) for line in f]
        assert [r['utterance_id'] for r in records] == ['utt00000', 'utt00001', '__mean__']
        assert records[-1]['sisnr'] == 8.0
        assert 'extra' not in records[0]

    def test_text_table_scales_stoi(self, tmp_path):
        paths = save_report(report(), str(tmp_path))
        with open(paths['text']) as f:
            lines = f.read().splitlines()
        assert lines[0].startswith('utterance')
        assert '80.00' in lines[2]
        assert lines[-1].startswith('mean')
        assert '75.00' in lines[-1]

    def test_empty_report(self, tmp_path):
        paths = save_report(MetricReport(), str(tmp_path))
        with open(paths['jsonl']) as f:
            assert len(f.readlines()) == 1


class TestSaveProvenance:
    def test_sidecar_next_to_wav(self, tmp_path):
        wav = str(tmp_path / 'utt1.wav')
        path = save_provenance(wav, {'utterance_id': 'utt1', 'pipeline': {'architecture': 'sep_only'}})
        assert path == os.path.join(str(tmp_path), 'utt1.json')
        with open(path) as f:
            assert json.load(f)['pipeline']['architecture'] == 'sep_only'
