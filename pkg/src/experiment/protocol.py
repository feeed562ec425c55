from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from src.experiment.coincidence import count_coincidences
from src.experiment.config import TRANSITION_TAG, ImperfectionConfig, StagePlan
from src.experiment.events import NS_PER_S, simulate_events
from src.optics.network import SIGNAL_DETECTORS, Detector, SetupId


@dataclass(frozen=True, eq=False)
class ExperimentTrace:
    """Coincidence counts per time bin, the way the rates were recorded over a run."""

    times: np.ndarray  # bin start, s
    stages: Tuple[str, ...]
    counts: np.ndarray  # (n_bins, 8) coincidences on D1..D8
    bin_width: float
    stage_setups: Dict[str, SetupId]
    trigger_counts: Optional[np.ndarray] = None  # (n_bins,) D0 clicks

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (times.size, len(SIGNAL_DETECTORS)):
            raise ValueError(f"counts must be ({times.size}, 8), got {counts.shape}")
        if len(self.stages) != times.size:
            raise ValueError("one stage tag is needed per bin")
        if np.any(np.diff(times) <= 0.0):
            raise ValueError("bin times must be strictly increasing")
        if np.any(counts < 0):
            raise ValueError("coincidence counts cannot be negative")
        triggers = self.trigger_counts
        triggers = np.zeros(times.size, dtype=np.int64) if triggers is None else triggers
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "trigger_counts", np.asarray(triggers, dtype=np.int64))

    def __len__(self) -> int:
        return int(self.times.size)

    @property
    def rates(self) -> np.ndarray:
        """Coincidence rates in counts per second."""
        return self.counts / self.bin_width

    def stage_tags(self) -> List[str]:
        return list(self.stage_setups)

    def stage_mask(self, tag: str) -> np.ndarray:
        return np.array([stage == tag for stage in self.stages])

    def stage_counts(self) -> Dict[str, Dict[Detector, int]]:
        """Total coincidences per stage; transition bins are left out."""
        totals = {}
        for tag in self.stage_tags():
            summed = self.counts[self.stage_mask(tag)].sum(axis=0)
            totals[tag] = {d: int(summed[d.column]) for d in SIGNAL_DETECTORS}
        return totals

    def stage_rate(self, tag: str, detector: Detector) -> Tuple[float, float]:
        """Mean binned rate of one detector over a stage and its standard error."""
        rates = self.rates[self.stage_mask(tag), Detector(detector).column]
        if rates.size == 0:
            return 0.0, 0.0
        error = rates.std(ddof=1) / np.sqrt(rates.size) if rates.size > 1 else 0.0
        return float(rates.mean()), float(error)

    @property
    def transition_bins(self) -> int:
        return sum(1 for stage in self.stages if stage == TRANSITION_TAG)


def run_experiment(plan: StagePlan, config: ImperfectionConfig) -> ExperimentTrace:
    timeline = plan.timeline(config.bin_width)
    for tag, setup in plan.stage_setups().items():
        logger.info(f"📋{tag}: {setup}")

    trigger, signals = simulate_events(plan, config)
    clicks = ", ".join(f"{d.name}={n}" for d, n in sorted(signals.counts().items()))
    logger.debug(f"🔎Signal clicks before coincidence matching: {clicks}")
    coincidences = count_coincidences(
        trigger,
        signals,
        config.coincidence_window,
        bin_width=config.bin_width,
        n_bins=len(timeline),
    )
    trigger_bins = np.floor(trigger.timestamps / (config.bin_width * NS_PER_S)).astype(np.int64)
    trigger_counts = np.bincount(trigger_bins, minlength=len(timeline))[: len(timeline)]

    trace = ExperimentTrace(
        times=np.array([time_bin.start for time_bin in timeline]),
        stages=tuple(time_bin.tag for time_bin in timeline),
        counts=coincidences.per_bin,
        bin_width=config.bin_width,
        stage_setups=plan.stage_setups(),
        trigger_counts=trigger_counts,
    )
    logger.info(
        f"🔁Recorded {len(trace)} bins ({trace.transition_bins} in transitions), "
        f"{coincidences.total} coincidences"
    )
    return trace
