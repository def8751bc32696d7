import json
import logging
import os
from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Optional

logger = logging.getLogger(__name__)

# Directories never descended into when scanning for audio
EXCLUDE_DIRS = {'.git', '.state', '__pycache__'}


@dataclass(frozen=True)
class ManifestEntry:
    path: str
    speaker: Optional[str] = None


class CorpusManifest:
    """
    List of source recordings

    A manifest file holds one WAV path per line with an optional
    `<TAB>speaker` column; blank lines and `#` comments are skipped and
    relative paths resolve against the manifest's directory. A directory is
    scanned recursively for .wav files, the parent folder naming the speaker.
    """

    def __init__(self, entries: Iterable[ManifestEntry]):
        self.entries: List[ManifestEntry] = list(entries)

    @classmethod
    def load(cls, path: str) -> 'CorpusManifest':
        if os.path.isdir(path):
            return cls.scan(path)
        if not os.path.exists(path):
            raise ValueError(f"Manifest not found: {path}")

        base = os.path.dirname(os.path.abspath(path))
        entries = []
        with open(path, 'r', encoding='utf-8') as f:
            for number, line in enumerate(f, 1):
                line = line.rstrip('\n')
                if not line.strip() or line.lstrip().startswith('#'):
                    continue
                columns = line.split('\t')
                if len(columns) > 2:
                    raise ValueError(f"{path}:{number}: expected 'path[<TAB>speaker]', got {len(columns)} columns")
                wav = columns[0].strip()
                if not os.path.isabs(wav):
                    wav = os.path.join(base, wav)
                speaker = columns[1].strip() if len(columns) == 2 and columns[1].strip() else None
                entries.append(ManifestEntry(wav, speaker))
        return cls(entries)

    @classmethod
    def scan(cls, root: str) -> 'CorpusManifest':
        """Recursively find all .wav files, sorted for a stable order"""
        found = []
        for directory, dirs, files in os.walk(root):
            dirs[:] = sorted(d for d in dirs if d not in EXCLUDE_DIRS)
            for name in sorted(files):
                if name.lower().endswith('.wav'):
                    found.append(ManifestEntry(os.path.join(directory, name), os.path.basename(directory)))
        logger.info(f"Found {len(found)} WAV file(s) under {root}")
        return cls(found)

    def save(self, path: str):
        with open(path, 'w', encoding='utf-8') as f:
            for entry in self.entries:
                f.write(entry.path if entry.speaker is None else f"{entry.path}\t{entry.speaker}")
                f.write('\n')

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self) -> Iterator[ManifestEntry]:
        return iter(self.entries)

    def __getitem__(self, index: int) -> ManifestEntry:
        return self.entries[index]


def write_jsonl(path: str, records: Iterable[Dict]):
    """One JSON object per line, keys sorted"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, 'w', encoding='utf-8') as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True) + '\n')


def read_jsonl(path: str) -> List[Dict]:
    if not os.path.exists(path):
        raise ValueError(f"Manifest not found: {path}")
    records = []
    with open(path, 'r', encoding='utf-8') as f:
        for number, line in enumerate(f, 1):
            if not line.strip():
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{number}: invalid JSON ({e})") from None
    return records


def resolve(path: str, base_dir: str) -> str:
    """Resolve a manifest path relative to the manifest's directory"""
    return path if os.path.isabs(path) else os.path.join(base_dir, path)
