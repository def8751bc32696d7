#!/usr/bin/env python3
"""
Multi-channel speech enhancement experiments: simulate, enhance, evaluate, sweep
"""

import argparse
import os
import signal
import sys
from typing import Optional, Sequence, Tuple

from config import Config, ExperimentConfig
from pipeline.architectures import Architecture, DervbKind, PipelineConfig
from pipeline.enhancer import run_enhance
from pipeline.evaluator import run_evaluate
from pipeline.simulator import run_simulate
from pipeline.sweep import run_sweep
from utils.logger import Logger
from utils.state_manager import StateManager

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

STATE_FILE = 'batch_state.json'


def parse_args(argv: Optional[Sequence[str]] = None):
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(description='Multi-channel speech enhancement toolkit')
    parser.add_argument('--config', help='JSON experiment config (flags override it)')
    parser.add_argument('--seed', type=int, help=f'Global seed (default: {Config.SEED})')
    parser.add_argument('--workers', type=int, help=f'Utterance-level worker threads (default: {Config.WORKERS})')
    parser.add_argument('--resume', action='store_true', help='Skip utterances completed in a previous run')
    parser.add_argument('--stats', action='store_true', help='Show batch state statistics and exit')
    parser.add_argument('--failed', action='store_true', help='Show failed utterances and exit')
    parser.add_argument('--reset', action='store_true', help='Reset batch state and exit')

    commands = parser.add_subparsers(dest='command')

    simulate = commands.add_parser('simulate', help='Simulate a reverberant two-speaker corpus')
    simulate.add_argument('--speech-manifest', help='Source speech manifest file or directory')
    simulate.add_argument('--noise-manifest', help='Noise manifest (seeded Gaussian noise when omitted)')
    simulate.add_argument('--num-utterances', type=int, help='Number of mixtures to simulate')
    simulate.add_argument('--max-order', type=int, help='Image-method reflection order cap')
    simulate.add_argument('--output-dir', help='Corpus directory')

    enhance = commands.add_parser('enhance', help='Enhance mixtures with one architecture')
    enhance.add_argument('--manifest', help='Enhancement manifest (JSON Lines)')
    enhance.add_argument('--arch', choices=[a.value for a in Architecture], help='Integration architecture')
    enhance.add_argument('--dervb', choices=[k.value for k in DervbKind], help='Dereverberation stage')
    enhance.add_argument('--taps', type=int, help='Filter taps of the dereverberation/joint stage')
    enhance.add_argument('--delay', type=int, help='Prediction delay of the dereverberation/joint stage')
    enhance.add_argument('--eps', type=float, help='Flooring eps of the architecture\'s main stage')
    enhance.add_argument('--masks', help="'oracle' or a directory of <utt>.<stage>.cfmk masks")
    enhance.add_argument('--output-dir', help='Directory for enhanced WAVs')

    evaluate = commands.add_parser('evaluate', help='Score estimates against references')
    evaluate.add_argument('--manifest', help='Evaluation manifest (JSON Lines)')
    evaluate.add_argument('--min-stoi', type=float, help='Fail if mean STOI (0-1) is below this')
    evaluate.add_argument('--min-sisnr', type=float, help='Fail if mean SISNR (dB) is below this')
    evaluate.add_argument('--min-srmr', type=float, help='Fail if mean SRMR is below this')
    evaluate.add_argument('--output-dir', help='Directory for report.jsonl / report.txt')

    sweep = commands.add_parser('sweep', help='Enhance and evaluate once per taps or eps setting')
    sweep.add_argument('--manifest', help='Enhancement manifest (JSON Lines)')
    sweep.add_argument('--arch', choices=[a.value for a in Architecture], help='Integration architecture')
    sweep.add_argument('--dervb', choices=[k.value for k in DervbKind], help='Dereverberation stage')
    sweep.add_argument('--taps', type=int, help='Fixed filter taps while sweeping eps')
    sweep.add_argument('--delay', type=int, help='Prediction delay of the dereverberation/joint stage')
    sweep.add_argument('--eps', type=float, help='Fixed flooring eps while sweeping taps')
    sweep.add_argument('--masks', help="'oracle' or a directory of <utt>.<stage>.cfmk masks")
    sweep.add_argument('--output-dir', help='Directory for per-setting outputs and sweep.jsonl / sweep.txt')
    grid = sweep.add_mutually_exclusive_group()
    grid.add_argument('--sweep-taps', type=int, nargs='+', metavar='L', help='Filter taps settings')
    grid.add_argument('--sweep-eps', type=float, nargs='+', metavar='EPS', help='Flooring eps settings')

    return parser, parser.parse_args(argv)


def _override(section, args, *names):
    for name in names:
        value = getattr(args, name, None)
        if value is not None:
            setattr(section, name, value)


def build_experiment(args) -> Tuple[ExperimentConfig, PipelineConfig]:
    """
    Config defaults < JSON config file < command-line flags

    Raises:
        ValueError: invalid config file, key or value
    """
    experiment = ExperimentConfig.load(args.config)
    if args.seed is not None:
        experiment.seed = args.seed
    if args.workers is not None:
        experiment.workers = args.workers

    if args.command == 'simulate':
        _override(experiment.simulate, args, 'speech_manifest', 'noise_manifest',
                  'num_utterances', 'max_order', 'output_dir')
    elif args.command == 'enhance':
        _override(experiment.enhance, args, 'manifest', 'masks', 'output_dir')
    elif args.command == 'evaluate':
        _override(experiment.evaluate, args, 'manifest', 'min_stoi', 'min_sisnr', 'min_srmr', 'output_dir')
    elif args.command == 'sweep':
        _override(experiment.sweep, args, 'manifest', 'masks', 'output_dir')
        if args.sweep_taps:
            experiment.sweep.parameter, experiment.sweep.values = 'taps', list(args.sweep_taps)
        elif args.sweep_eps:
            experiment.sweep.parameter, experiment.sweep.values = 'eps', list(args.sweep_eps)
    experiment.validate()

    pipeline = dict(experiment.enhance.pipeline)
    if getattr(args, 'arch', None):
        pipeline['architecture'] = args.arch
    if getattr(args, 'dervb', None):
        pipeline['dervb_kind'] = args.dervb
    cfg = PipelineConfig.from_dict(pipeline).with_overrides(
        taps=getattr(args, 'taps', None),
        delay=getattr(args, 'delay', None),
        eps=getattr(args, 'eps', None),
    )
    return experiment, cfg


# Global state manager for signal handler
_state_manager = None
_interrupt_received = False


def signal_handler(signum, frame):
    """Graceful shutdown on Ctrl+C / SIGTERM"""
    global _interrupt_received

    if _interrupt_received:
        print("\nForce quitting...")
        os._exit(EXIT_FAILURE)

    _interrupt_received = True
    print("\n\nInterrupt received, saving state...")

    try:
        if _state_manager:
            _state_manager.complete_run()
            _state_manager.print_summary()
    except Exception as e:
        print(f"Error saving state: {e}")

    print("\nState saved. Re-run with --resume to continue.")
    sys.exit(EXIT_OK)


def _show_failed(state: StateManager):
    failed = state.get_failed_items()
    if not failed:
        print("\nNo failed utterances")
        return
    print("\nFailed Utterances:")
    for item in failed:
        print(f"\n  {item['command']}: {item['item']}")
        print(f"  Attempts: {item['attempts']}")
        print(f"  Error: {item['error']}")


def run(args, experiment: ExperimentConfig, cfg: PipelineConfig, state: Optional[StateManager]) -> int:
    """Dispatch one subcommand; returns the exit status"""
    if args.command == 'simulate':
        options = experiment.simulate
        summary = run_simulate(options, experiment.seed, experiment.workers, state, args.resume)
        summary.print_summary(options.output_dir)
        return EXIT_FAILURE if summary.failures > Config.FAILURE_TOLERANCE else EXIT_OK

    if args.command == 'enhance':
        options = experiment.enhance
        summary = run_enhance(options, cfg, experiment.workers, state, args.resume)
        summary.print_summary(options.output_dir)
        return EXIT_FAILURE if summary.failures > Config.FAILURE_TOLERANCE else EXIT_OK

    if args.command == 'sweep':
        options = experiment.sweep
        summary = run_sweep(options, cfg, experiment.workers, state, args.resume)
        summary.print_summary(options.output_dir)
        return EXIT_FAILURE if summary.failures > Config.FAILURE_TOLERANCE else EXIT_OK

    options = experiment.evaluate
    summary = run_evaluate(options, experiment.workers, state, args.resume)
    summary.print_summary(options.output_dir)
    if summary.violations or summary.failures > Config.FAILURE_TOLERANCE:
        return EXIT_FAILURE
    return EXIT_OK


def main(argv: Optional[Sequence[str]] = None) -> int:
    global _state_manager

    parser, args = parse_args(argv)
    # root logger: library modules propagate to it
    Logger.setup(name=None, command=args.command)

    try:
        Config.validate()
        experiment, cfg = build_experiment(args)
    except ValueError as e:
        print(f"Configuration error: {e}", file=sys.stderr)
        return EXIT_USAGE

    state = None
    if Config.ENABLE_STATE_MANAGEMENT:
        state = StateManager(os.path.join(Config.STATE_DIR, STATE_FILE), Config.MAX_RETRIES)
        _state_manager = state
        signal.signal(signal.SIGINT, signal_handler)
        signal.signal(signal.SIGTERM, signal_handler)

    if state and args.reset:
        confirm = input("WARNING: This will delete all batch progress. Continue? (yes/no): ")
        if confirm.lower() == 'yes':
            state.reset()
        else:
            print("Reset cancelled")
        return EXIT_OK
    if state and args.stats:
        state.print_summary()
        return EXIT_OK
    if state and args.failed:
        _show_failed(state)
        return EXIT_OK

    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE

    print("=" * 70)
    print(f"SPEECH ENHANCEMENT: {args.command.upper()}")
    print("=" * 70)

    try:
        status = run(args, experiment, cfg, state)
    except ValueError as e:
        print(f"Usage error: {e}", file=sys.stderr)
        status = EXIT_USAGE

    if state:
        state.complete_run()
    return status


if __name__ == "__main__":
    try:
        sys.exit(main())
    except KeyboardInterrupt:
        print("\n\nInterrupted by user")
        if _state_manager:
            _state_manager.complete_run()
        sys.exit(EXIT_FAILURE)
