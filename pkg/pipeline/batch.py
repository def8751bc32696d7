"""
Utterance-level batch execution shared by simulate, enhance and evaluate
"""

import logging
import sys
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from tqdm import tqdm

from utils.state_manager import StateManager

logger = logging.getLogger(__name__)


@dataclass
class BatchJob:
    item_id: str
    payload: Any
    input_hash: str = ''


@dataclass
class BatchOutcome:
    """Records in job order; None where an utterance failed"""
    records: List[Optional[Dict]] = field(default_factory=list)
    failures: List[Tuple[str, str]] = field(default_factory=list)
    resumed: int = 0
    skipped: List[str] = field(default_factory=list)

    @property
    def completed(self) -> List[Dict]:
        return [r for r in self.records if r is not None]


def _guarded(worker: Callable[[BatchJob], Dict], job: BatchJob) -> Tuple[Optional[Dict], Optional[str]]:
    try:
        return worker(job), None
    except Exception as e:
        logger.error(f"{job.item_id}: {type(e).__name__}: {e}")
        return None, f"{type(e).__name__}: {e}"


def run_batch(command: str, jobs: Sequence[BatchJob], worker: Callable[[BatchJob], Dict],
              workers: int = 1, state: Optional[StateManager] = None, resume: bool = False) -> BatchOutcome:
    """
    Run `worker` on every job, each utterance end-to-end in one thread

    Failures never abort the batch; they are logged, recorded in the state
    and returned. With resume, completed jobs whose input hash is unchanged
    reuse the record stored in the state, and jobs that already used up
    their retries are marked skipped and reported as failures.
    """
    records: List[Optional[Dict]] = [None] * len(jobs)
    outcome = BatchOutcome()
    pending = []
    errors: Dict[int, str] = {}

    if state is not None and resume:
        if state.has_previous_run():
            logger.info(f"{command}: resuming from the recorded batch state")
        else:
            logger.info(f"{command}: no recorded batch state, processing every utterance")

    for index, job in enumerate(jobs):
        if state is not None and resume:
            should_process, reason = state.should_process(command, job.item_id, job.input_hash)
            if not should_process and reason == 'already_completed':
                records[index] = state.get_item(command, job.item_id).get('outputs')
                outcome.resumed += 1
                continue
            if not should_process:
                if reason == 'max_retries_exceeded':
                    state.mark_skipped(command, job.item_id, f"failed {state.max_retries} time(s)")
                outcome.skipped.append(job.item_id)
                errors[index] = f"skipped: failed {state.get_item(command, job.item_id)['attempts']} time(s)"
                continue
        pending.append(index)

    if outcome.resumed:
        logger.info(f"{command}: skipping {outcome.resumed} already completed utterance(s)")
    if outcome.skipped:
        logger.warning(f"{command}: {len(outcome.skipped)} utterance(s) out of retries: {', '.join(outcome.skipped)}")

    def run(index: int):
        job = jobs[index]
        if state is not None:
            state.start_processing(command, job.item_id, job.input_hash)
        record, error = _guarded(worker, job)
        if state is not None:
            if error is None:
                state.mark_completed(command, job.item_id, record)
            else:
                state.mark_failed(command, job.item_id, error)
        return record, error

    progress = tqdm(total=len(pending), desc=command, unit='utt', disable=not sys.stderr.isatty())
    with ThreadPoolExecutor(max_workers=workers, thread_name_prefix=command) as executor:
        futures = {executor.submit(run, index): index for index in pending}
        for future in as_completed(futures):
            index = futures[future]
            record, error = future.result()
            records[index] = record
            if error is not None:
                errors[index] = error
            progress.update(1)
    progress.close()

    outcome.records = records
    # Failures reported in job order
    outcome.failures = [(jobs[i].item_id, errors[i]) for i in sorted(errors)]
    return outcome
