"""
Utilities package for logging, manifests, batch state and reports
"""
from .logger import Logger
from .manifest import CorpusManifest, ManifestEntry, read_jsonl, write_jsonl
from .state_manager import StateManager

__all__ = ['Logger', 'CorpusManifest', 'ManifestEntry', 'read_jsonl', 'write_jsonl', 'StateManager']
