from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional

import numpy as np
from loguru import logger

from src.errors import UnsortedStreamError
from src.experiment.events import NS_PER_S, EventStream
from src.optics.network import SIGNAL_DETECTORS, Detector


@dataclass(frozen=True, eq=False)
class CoincidenceCounts:
    per_detector: Dict[Detector, int]
    per_bin: Optional[np.ndarray] = None  # (n_bins, 8), columns D1..D8

    @property
    def total(self) -> int:
        return sum(self.per_detector.values())

    def __getitem__(self, detector: Detector) -> int:
        return self.per_detector[detector]


def _check_sorted(stream: EventStream, label: str):
    if not stream.is_sorted:
        raise UnsortedStreamError(f"{label} stream is not sorted by timestamp")


def match_detector(
    trigger_times: np.ndarray, signal_times: np.ndarray, window: float
) -> np.ndarray:
    """Indices of triggers that found a signal on one detector.

    Two-pointer merge: signals older than the window can never match a later trigger,
    and a matched signal is consumed, so each trigger takes the earliest unused signal.
    """
    half = window / 2.0
    signals = signal_times.tolist()
    matched: List[int] = []
    j = 0
    for i, t in enumerate(trigger_times.tolist()):
        while j < len(signals) and signals[j] < t - half:
            j += 1
        if j == len(signals):
            break
        if signals[j] <= t + half:
            matched.append(i)
            j += 1
    return np.asarray(matched, dtype=np.int64)


def count_coincidences(
    trigger: EventStream,
    signals: EventStream,
    window: float,
    bin_width: Optional[float] = None,
    n_bins: Optional[int] = None,
) -> CoincidenceCounts:
    """Trigger/signal pairs with |t_signal - t_trigger| <= window / 2, per detector.

    With `bin_width` (seconds) the counts are also split into time bins by the trigger
    timestamp; `n_bins` fixes the number of rows.
    """
    if not window > 0.0:
        raise ValueError(f"coincidence window must be positive, got {window}")
    _check_sorted(trigger, "trigger")
    _check_sorted(signals, "signal")

    per_detector: Dict[Detector, int] = {}
    per_bin = None
    bin_index = None
    if bin_width is not None:
        bin_index = np.floor(trigger.timestamps / (bin_width * NS_PER_S)).astype(np.int64)
        if n_bins is None:
            n_bins = int(bin_index.max()) + 1 if bin_index.size else 0
        per_bin = np.zeros((n_bins, len(SIGNAL_DETECTORS)), dtype=np.int64)

    for detector in SIGNAL_DETECTORS:
        matched = match_detector(trigger.timestamps, signals.for_detector(detector), window)
        per_detector[detector] = int(matched.size)
        if per_bin is not None:
            rows = bin_index[matched]
            rows = rows[rows < n_bins]
            per_bin[:, detector.column] = np.bincount(rows, minlength=n_bins)[:n_bins]

    logger.debug(
        "Coincidences: " + ", ".join(f"{d.name}={n}" for d, n in per_detector.items())
    )
    return CoincidenceCounts(per_detector, per_bin)
