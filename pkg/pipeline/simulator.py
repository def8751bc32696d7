"""
simulate: build a multi-channel reverberant two-speaker corpus

Output layout under output_dir:

    mixtures/<utt>.wav               R-channel mixture
    references/<utt>.<key>.wav       one R-channel image per reference key
    scenes.jsonl                     one RoomScene per utterance
    manifest.jsonl                   enhancement manifest (paths relative to output_dir)
"""

import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np

from config import Config, SimulateOptions
from dsp.audio import read_wav, write_wav
from room.mixer import REFERENCE_KEYS, simulate_mixture
from room.scene import GAUSSIAN_NOISE, RoomScene, sample_scene, write_scenes
from utils.logger import Logger
from utils.manifest import CorpusManifest, write_jsonl
from utils.state_manager import StateManager, fingerprint
from .batch import BatchJob, BatchOutcome, run_batch

logger = logging.getLogger(__name__)


@dataclass
class SimulationSummary:
    requested: int
    scenes: List[RoomScene]
    outcome: BatchOutcome

    @property
    def failures(self) -> int:
        return len(self.outcome.failures)

    def print_summary(self, output_dir: str):
        done = self.outcome.completed
        print("\n" + "=" * 70)
        print("SIMULATION SUMMARY")
        print("=" * 70)
        print(f"Mixtures written:    {len(done)}/{self.requested}")
        print(f"Failed:              {self.failures}")
        if done:
            sirs = [r['measured_sir'] for r in done if r['measured_sir'] is not None]
            print(f"Mean T60:            {np.mean([r['t60'] for r in done]):.3f} s")
            if sirs:
                print(f"Mean measured SIR:   {np.mean(sirs):.2f} dB")
            print(f"Mean measured SNR:   {np.mean([r['measured_snr'] for r in done]):.2f} dB")
        print(f"\nCorpus saved to:     {output_dir}/")
        print("=" * 70)


def mixture_path(utterance_id: str) -> str:
    return os.path.join('mixtures', f"{utterance_id}.wav")


def reference_path(utterance_id: str, key: str) -> str:
    return os.path.join('references', f"{utterance_id}.{key}.wav")


def _fit_duration(signal: np.ndarray, samples: Optional[int]) -> np.ndarray:
    if samples is None:
        return signal
    if signal.size >= samples:
        return signal[:samples]
    return np.pad(signal, (0, samples - signal.size))


def simulate_utterance(scene: RoomScene, options: SimulateOptions, sample_rate: int = Config.SAMPLE_RATE) -> Dict:
    """Simulate and write one scene; returns its measurement record"""
    duration = None if options.duration is None else int(round(options.duration * sample_rate))
    target = _fit_duration(read_wav(scene.target_path, sample_rate).channel(0), duration)
    interferer = read_wav(scene.interferer_path, sample_rate).channel(0)
    noise = None if scene.noise_id == GAUSSIAN_NOISE else read_wav(scene.noise_id, sample_rate).channel(0)

    result = simulate_mixture(target, interferer, noise, scene, sample_rate,
                              max_order=options.max_order, early_ms=options.early_ms)

    out = options.output_dir
    write_wav(os.path.join(out, mixture_path(scene.utterance_id)), result.mixture)
    for key in REFERENCE_KEYS:
        write_wav(os.path.join(out, reference_path(scene.utterance_id, key)), result.references[key])

    Logger.log_scene(logger, scene, result.measured_snr, result.measured_sir)
    return {
        'utterance_id': scene.utterance_id,
        't60': scene.t60,
        'measured_snr': result.measured_snr,
        'measured_sir': result.measured_sir,
    }


def plan_scenes(manifest: CorpusManifest, count: int, seed: int,
                noise_manifest: Optional[CorpusManifest] = None) -> List[RoomScene]:
    """Scene i is drawn from SeedSequence([seed, i]) with target i mod |manifest|"""
    scenes = []
    for i in range(count):
        scenes.append(sample_scene(
            np.random.SeedSequence([seed, i]),
            manifest,
            target_index=i % len(manifest),
            noise_manifest=noise_manifest,
            utterance_id=f"utt{i:05d}",
        ))
    return scenes


def run_simulate(options: SimulateOptions, seed: int = Config.SEED, workers: int = Config.WORKERS,
                 state: Optional[StateManager] = None, resume: bool = False) -> SimulationSummary:
    """
    Raises:
        ValueError: missing or empty speech manifest
    """
    if not options.speech_manifest:
        raise ValueError("simulate needs a speech manifest (--speech-manifest)")
    manifest = CorpusManifest.load(options.speech_manifest)
    if len(manifest) == 0:
        raise ValueError(f"speech manifest is empty: {options.speech_manifest}")
    noise_manifest = CorpusManifest.load(options.noise_manifest) if options.noise_manifest else None
    if options.num_utterances < 1:
        raise ValueError(f"num_utterances must be >= 1, got {options.num_utterances}")

    scenes = plan_scenes(manifest, options.num_utterances, seed, noise_manifest)
    os.makedirs(os.path.join(options.output_dir, 'mixtures'), exist_ok=True)
    os.makedirs(os.path.join(options.output_dir, 'references'), exist_ok=True)

    jobs = [
        BatchJob(scene.utterance_id, scene, fingerprint({
            'scene': scene.to_dict(), 'max_order': options.max_order,
            'early_ms': options.early_ms, 'duration': options.duration,
            'output_dir': os.path.abspath(options.output_dir),
        }))
        for scene in scenes
    ]
    outcome = run_batch('simulate', jobs, lambda job: simulate_utterance(job.payload, options),
                        workers, state, resume)

    written = [scene for scene, record in zip(scenes, outcome.records) if record is not None]
    write_scenes(os.path.join(options.output_dir, 'scenes.jsonl'), written)
    write_jsonl(os.path.join(options.output_dir, 'manifest.jsonl'), [
        {
            'utterance_id': scene.utterance_id,
            'mixture': mixture_path(scene.utterance_id),
            'references': {key: reference_path(scene.utterance_id, key) for key in REFERENCE_KEYS},
        }
        for scene in written
    ])
    return SimulationSummary(options.num_utterances, written, outcome)
