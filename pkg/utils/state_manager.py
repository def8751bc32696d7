#!/usr/bin/env python3
"""
Batch State Manager for simulate / enhance / evaluate

Handles:
- Progress tracking across interruptions
- Retry logic with configurable max attempts
- Input fingerprints so changed inputs are re-processed
- Atomic saves with a backup copy
"""

import hashlib
import json
import logging
import os
import time
from datetime import datetime
from threading import RLock
from typing import Dict, List, Optional, Tuple

logger = logging.getLogger(__name__)

STATE_VERSION = '2.0'
COMMANDS = ('simulate', 'enhance', 'evaluate')


def fingerprint(inputs: Dict) -> str:
    """Short SHA256 of a JSON-serialisable description of an item's inputs"""
    payload = json.dumps(inputs, sort_keys=True, default=str).encode('utf-8')
    return hashlib.sha256(payload).hexdigest()[:16]


class StateManager:
    """
    Thread-safe per-utterance progress, keyed by (command, utterance id)
    """

    def __init__(self, state_file: str, max_retries: int = 3):
        self.state_file = state_file
        self.max_retries = max_retries
        # Re-entrant: public methods hold the lock while calling _save_state()
        self.lock = RLock()

        os.makedirs(os.path.dirname(os.path.abspath(state_file)), exist_ok=True)
        self.state = self._load_state()
        self._current_run_id = self._init_current_run()

    def _load_state(self) -> Dict:
        """Load state from disk, with backup recovery"""
        if not os.path.exists(self.state_file):
            return self._create_new_state()
        try:
            with open(self.state_file, 'r') as f:
                state = json.load(f)
            if state.get('version') == STATE_VERSION and 'items' in state:
                return state
            logger.warning("State file has an old format, resetting")
            return self._create_new_state()

        except json.JSONDecodeError as e:
            logger.warning(f"Corrupted state file: {e}")
            backup = f"{self.state_file}.backup"
            if os.path.exists(backup):
                logger.warning("Attempting restore from backup")
                try:
                    with open(backup, 'r') as f:
                        return json.load(f)
                except (OSError, json.JSONDecodeError):
                    pass
            return self._create_new_state()

    def _create_new_state(self) -> Dict:
        return {
            'version': STATE_VERSION,
            'created_at': datetime.now().isoformat(),
            'last_updated': datetime.now().isoformat(),
            'runs': [],
            'items': {command: {} for command in COMMANDS},
            'statistics': {
                command: {'completed': 0, 'failed': 0, 'skipped': 0} for command in COMMANDS
            },
            'total_processing_time_seconds': 0.0,
        }

    def _init_current_run(self) -> int:
        """Resume an unfinished run or start a new one"""
        runs = self.state.get('runs', [])
        if runs and 'completed_at' not in runs[-1]:
            run_id = runs[-1]['run_id']
            logger.info(f"Resuming run #{run_id}")
            return run_id

        run_id = len(runs) + 1
        runs.append({
            'run_id': run_id,
            'started_at': datetime.now().isoformat(),
            'items_processed': 0,
        })
        self.state['runs'] = runs
        self._save_state()
        logger.info(f"Starting run #{run_id}")
        return run_id

    def _save_state(self):
        """Atomically save state to disk"""
        with self.lock:
            try:
                self.state['last_updated'] = datetime.now().isoformat()

                temp_file = f"{self.state_file}.tmp"
                with open(temp_file, 'w') as f:
                    json.dump(self.state, f, indent=2)

                if os.path.exists(self.state_file):
                    os.replace(self.state_file, f"{self.state_file}.backup")
                os.replace(temp_file, self.state_file)

            except OSError as e:
                logger.warning(f"Failed to save state: {e}")

    def _get_item_state(self, command: str, item_id: str) -> Dict:
        if command not in COMMANDS:
            raise ValueError(f"Unknown command '{command}'")
        items = self.state['items'][command]
        if item_id not in items:
            items[item_id] = {
                'status': 'pending',
                'input_hash': '',
                'attempts': 0,
                'created_at': datetime.now().isoformat(),
            }
        return items[item_id]

    # Public API

    def should_process(self, command: str, item_id: str, input_hash: str = '') -> Tuple[bool, str]:
        """
        Check if an utterance should be processed

        Returns:
            (should_process, reason)
        """
        with self.lock:
            item = self._get_item_state(command, item_id)

            if item['status'] == 'completed':
                if input_hash and input_hash != item.get('input_hash', ''):
                    logger.warning(f"{command}/{item_id}: inputs changed since last run, re-processing")
                    item['status'] = 'pending'
                    item['attempts'] = 0
                    return True, 'inputs_changed'
                return False, 'already_completed'

            if item['status'] in ('failed', 'skipped'):
                if input_hash and input_hash != item.get('input_hash', ''):
                    logger.info(f"{command}/{item_id}: inputs changed, retrying")
                    item['status'] = 'pending'
                    item['attempts'] = 0
                    return True, 'inputs_changed'
                if item['status'] == 'skipped':
                    return False, 'skipped'
                if item['attempts'] >= self.max_retries:
                    return False, 'max_retries_exceeded'

            return True, 'ready'

    def start_processing(self, command: str, item_id: str, input_hash: str = '') -> Dict:
        with self.lock:
            item = self._get_item_state(command, item_id)
            item['attempts'] += 1
            item['status'] = 'processing'
            item['input_hash'] = input_hash
            item['last_attempt'] = datetime.now().isoformat()
            item['start_time'] = time.time()
            self._save_state()
            return item

    def mark_completed(self, command: str, item_id: str, outputs: Optional[Dict] = None):
        with self.lock:
            item = self._get_item_state(command, item_id)
            item['status'] = 'completed'
            item['completed_at'] = datetime.now().isoformat()
            if outputs:
                item['outputs'] = outputs

            if 'start_time' in item:
                duration = time.time() - item.pop('start_time')
                item['processing_time_seconds'] = round(duration, 3)
                self.state['total_processing_time_seconds'] += duration

            self.state['statistics'][command]['completed'] += 1
            runs = self.state['runs']
            if runs:
                runs[-1]['items_processed'] += 1
            self._save_state()

    def mark_failed(self, command: str, item_id: str, error: str):
        with self.lock:
            item = self._get_item_state(command, item_id)
            item['last_error'] = str(error)
            item['last_failed'] = datetime.now().isoformat()
            item.pop('start_time', None)

            if item['attempts'] >= self.max_retries:
                item['status'] = 'failed'
                self.state['statistics'][command]['failed'] += 1
                logger.error(f"{command}/{item_id}: marked as failed (max retries exceeded)")
            else:
                item['status'] = 'pending'
                logger.error(f"{command}/{item_id}: failed (attempt {item['attempts']}/{self.max_retries})")
            self._save_state()

    def mark_skipped(self, command: str, item_id: str, reason: str):
        with self.lock:
            item = self._get_item_state(command, item_id)
            item['status'] = 'skipped'
            item['skip_reason'] = reason
            item['skipped_at'] = datetime.now().isoformat()
            self.state['statistics'][command]['skipped'] += 1
            self._save_state()

    def get_item(self, command: str, item_id: str) -> Dict:
        with self.lock:
            return dict(self._get_item_state(command, item_id))

    def complete_run(self):
        with self.lock:
            runs = self.state['runs']
            if runs and 'completed_at' not in runs[-1]:
                runs[-1]['completed_at'] = datetime.now().isoformat()
                self._save_state()

    def get_summary(self) -> Dict:
        with self.lock:
            summary = {}
            for command in COMMANDS:
                items = self.state['items'][command]
                pending = sum(
                    1 for item in items.values()
                    if item['status'] in ('pending', 'processing') and item['attempts'] < self.max_retries
                )
                summary[command] = {**self.state['statistics'][command], 'pending': pending, 'total': len(items)}
            summary['processing_time'] = self.state['total_processing_time_seconds']
            return summary

    def print_summary(self):
        summary = self.get_summary()

        print("\n" + "=" * 70)
        print("BATCH STATE SUMMARY")
        print("=" * 70)
        print(f"{'command':<12}{'total':>8}{'completed':>12}{'failed':>10}{'skipped':>10}{'pending':>10}")
        for command in COMMANDS:
            s = summary[command]
            print(f"{command:<12}{s['total']:>8}{s['completed']:>12}{s['failed']:>10}{s['skipped']:>10}{s['pending']:>10}")

        seconds = int(summary['processing_time'])
        if seconds > 0:
            print(f"\nTotal processing time: {seconds // 60}m {seconds % 60}s")
        print("=" * 70)

    def reset(self):
        with self.lock:
            self.state = self._create_new_state()
            self._save_state()
            logger.info("State reset complete")

    def get_failed_items(self, command: Optional[str] = None) -> List[Dict]:
        """Permanently failed utterances"""
        with self.lock:
            failed = []
            for name in ([command] if command else COMMANDS):
                for item_id, item in self.state['items'][name].items():
                    if item['status'] == 'failed':
                        failed.append({
                            'command': name,
                            'item': item_id,
                            'attempts': item['attempts'],
                            'error': item.get('last_error', 'Unknown'),
                        })
            return failed

    def has_previous_run(self) -> bool:
        return any(self.state['items'][command] for command in COMMANDS)
