from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np

# Column order of every report; PESQ is not computed
METRIC_KEYS = ('sisnr', 'spectral_mse', 'stoi', 'srmr')


@dataclass
class UtteranceMetrics:
    utterance_id: str
    sisnr: float
    spectral_mse: float
    stoi: float
    srmr: float
    extra: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        for key in METRIC_KEYS:
            value = getattr(self, key)
            if not np.isfinite(value):
                raise ValueError(f"{self.utterance_id}: {key} is not finite ({value})")

    def to_record(self) -> Dict:
        record = asdict(self)
        if not record['extra']:
            del record['extra']
        return record


@dataclass
class MetricReport:
    """
    Per-utterance metrics plus arithmetic-mean aggregates

    stoi is kept in [0, 1]; tables print it x100.
    """
    entries: List[UtteranceMetrics] = field(default_factory=list)

    def add(self, metrics: UtteranceMetrics):
        self.entries.append(metrics)

    def __len__(self):
        return len(self.entries)

    def aggregate(self) -> Dict[str, float]:
        if not self.entries:
            return {key: float('nan') for key in METRIC_KEYS}
        return {key: float(np.mean([getattr(e, key) for e in self.entries])) for key in METRIC_KEYS}

    def to_records(self) -> List[Dict]:
        return [e.to_record() for e in self.entries]

    def violations(self, min_stoi: Optional[float] = None, min_sisnr: Optional[float] = None,
                   min_srmr: Optional[float] = None) -> List[str]:
        """Threshold gates on the aggregate means; an empty list means pass"""
        means = self.aggregate()
        failed = []
        for key, threshold in (('stoi', min_stoi), ('sisnr', min_sisnr), ('srmr', min_srmr)):
            if threshold is not None and not means[key] >= threshold:
                failed.append(f"mean {key} {means[key]:.4f} < {threshold}")
        return failed
