from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from src.experiment.config import ImperfectionConfig, StagePlan, TimeBin
from src.experiment.imperfections import FringeComponents, fringe_components
from src.optics.network import HWP_NAMES, Detector, DetectorDistribution
from src.optics.tuning import interferometer_phases

NS_PER_S = 1e9


@dataclass(frozen=True)
class DetectionEvent:
    timestamp: float  # ns from run start
    detector: Detector


@dataclass(frozen=True, eq=False)
class EventStream:
    """Timestamp-sorted clicks stored column-wise."""

    timestamps: np.ndarray
    detectors: np.ndarray

    def __post_init__(self):
        timestamps = np.asarray(self.timestamps, dtype=np.float64).reshape(-1)
        detectors = np.asarray(self.detectors, dtype=np.int8).reshape(-1)
        if timestamps.shape != detectors.shape:
            raise ValueError("timestamps and detectors must have the same length")
        if timestamps.size and timestamps.min() < 0.0:
            raise ValueError("timestamps must be nonnegative")
        object.__setattr__(self, "timestamps", timestamps)
        object.__setattr__(self, "detectors", detectors)

    @classmethod
    def from_events(cls, events: Iterable[DetectionEvent]) -> EventStream:
        events = list(events)
        return cls(
            np.array([e.timestamp for e in events], dtype=np.float64),
            np.array([int(e.detector) for e in events], dtype=np.int8),
        )

    @classmethod
    def merged(
        cls, timestamps: Sequence[np.ndarray], detectors: Sequence[np.ndarray]
    ) -> EventStream:
        """Concatenate chunks and restore global order (ties broken by detector index)."""
        if not timestamps:
            return cls(np.empty(0), np.empty(0, dtype=np.int8))
        all_times = np.concatenate(timestamps)
        all_detectors = np.concatenate(detectors).astype(np.int8)
        order = np.lexsort((all_detectors, all_times))
        return cls(all_times[order], all_detectors[order])

    def __len__(self) -> int:
        return int(self.timestamps.size)

    def __iter__(self) -> Iterator[DetectionEvent]:
        for t, d in zip(self.timestamps.tolist(), self.detectors.tolist()):
            yield DetectionEvent(t, Detector(d))

    @property
    def is_sorted(self) -> bool:
        return bool(np.all(np.diff(self.timestamps) >= 0.0))

    def for_detector(self, detector: Detector) -> np.ndarray:
        return self.timestamps[self.detectors == int(detector)]

    def counts(self) -> Dict[Detector, int]:
        values, counts = np.unique(self.detectors, return_counts=True)
        return {Detector(int(v)): int(c) for v, c in zip(values, counts)}

    def identical_to(self, other: EventStream) -> bool:
        return self.timestamps.tobytes() == other.timestamps.tobytes() and (
            self.detectors.tobytes() == other.detectors.tobytes()
        )


@dataclass(frozen=True)
class RandomStreams:
    """Independent generators spawned from one seed: waveplates, drift, one per bin."""

    angles: np.random.Generator
    drift: np.random.Generator
    bins: Tuple[np.random.SeedSequence, ...]

    @classmethod
    def spawn(cls, seed: int, n_bins: int) -> RandomStreams:
        angles, drift, bins = np.random.SeedSequence(seed).spawn(3)
        return cls(
            np.random.default_rng(angles), np.random.default_rng(drift), tuple(bins.spawn(n_bins))
        )


def draw_stage_angles(
    rng: np.random.Generator, n_stages: int, sigma: float
) -> List[Dict[str, float]]:
    """Waveplate setting errors, fixed for the whole of each stage."""
    shape = (n_stages, len(HWP_NAMES))
    draws = rng.normal(0.0, sigma, size=shape) if sigma > 0 else np.zeros(shape)
    return [dict(zip(HWP_NAMES, row.tolist())) for row in draws]


def draw_phase_drift(
    rng: np.random.Generator, n_bins: int, config: ImperfectionConfig
) -> np.ndarray:
    """(n_bins, 2) slow phase offsets of the two interferometers.

    Mean-reverting Gaussian random walk starting from the freshly tuned phase, with
    correlation time `phase_coherence_time` and stationary spread `phase_drift_sigma`.
    """
    drift = np.zeros((n_bins, 2))
    if config.phase_drift_sigma == 0.0 or n_bins == 0:
        return drift
    rho = np.exp(-config.bin_width / config.phase_coherence_time)
    kicks = rng.normal(0.0, config.phase_drift_sigma * np.sqrt(1.0 - rho**2), size=(n_bins, 2))
    for b in range(1, n_bins):
        drift[b] = rho * drift[b - 1] + kicks[b]
    return drift


def _interpolate_draws(
    start: Mapping[str, float], end: Mapping[str, float], fraction: float
) -> Dict[str, float]:
    return {name: start[name] + fraction * (end[name] - start[name]) for name in HWP_NAMES}


def bin_distributions(
    timeline: Sequence[TimeBin],
    config: ImperfectionConfig,
    stage_angles: Sequence[Mapping[str, float]],
    drift: np.ndarray,
) -> List[DetectorDistribution]:
    tuned1, tuned2 = interferometer_phases()
    sigma = config.effective_jitter_sigma
    per_stage: Dict[int, FringeComponents] = {}
    distributions = []
    for time_bin in timeline:
        if time_bin.stage_from == time_bin.stage_to:
            stage = time_bin.stage_from
            if stage not in per_stage:
                per_stage[stage] = fringe_components(
                    time_bin.setup, stage_angles[stage], config.pbs_extinction
                )
            components = per_stage[stage]
        else:
            draws = _interpolate_draws(
                stage_angles[time_bin.stage_from],
                stage_angles[time_bin.stage_to],
                time_bin.fraction,
            )
            components = fringe_components(time_bin.setup, draws, config.pbs_extinction)
        offset1, offset2 = drift[time_bin.index]
        distributions.append(components.distribution(tuned1 + offset1, tuned2 + offset2, sigma))
    return distributions


def plan_distributions(
    plan: StagePlan, config: ImperfectionConfig, timeline: Optional[Sequence[TimeBin]] = None
) -> List[DetectorDistribution]:
    """Per-bin click distributions, reproducing the draws simulate_events makes."""
    timeline = plan.timeline(config.bin_width) if timeline is None else timeline
    streams = RandomStreams.spawn(config.rng_seed, len(timeline))
    stage_angles = draw_stage_angles(streams.angles, len(plan.stages), config.hwp_angle_sigma)
    drift = draw_phase_drift(streams.drift, len(timeline), config)
    return bin_distributions(timeline, config, stage_angles, drift)


def simulate_events(
    plan: StagePlan, config: ImperfectionConfig
) -> Tuple[EventStream, EventStream]:
    """Heralded photons, detector losses and dark counts as two sorted click streams.

    Returns (trigger stream on D0, signal stream on D1..D8). Every bin draws from its own
    substream of `rng_seed`, so bins can be generated independently.
    """
    timeline = plan.timeline(config.bin_width)
    streams = RandomStreams.spawn(config.rng_seed, len(timeline))
    stage_angles = draw_stage_angles(streams.angles, len(plan.stages), config.hwp_angle_sigma)
    drift = draw_phase_drift(streams.drift, len(timeline), config)
    distributions = bin_distributions(timeline, config, stage_angles, drift)

    width_ns = config.bin_width * NS_PER_S
    trigger_times: List[np.ndarray] = []
    trigger_detectors: List[np.ndarray] = []
    signal_times: List[np.ndarray] = []
    signal_detectors: List[np.ndarray] = []

    for time_bin, distribution, seed in zip(timeline, distributions, streams.bins):
        rng = np.random.default_rng(seed)
        start_ns = time_bin.start * NS_PER_S

        n_pairs = rng.poisson(config.pair_rate * config.bin_width)
        pair_times = np.sort(rng.uniform(start_ns, start_ns + width_ns, size=n_pairs))
        heralded = pair_times[rng.random(n_pairs) < config.detector_efficiency]
        clicked = heralded[rng.random(heralded.size) < config.detector_efficiency]
        probabilities = distribution.probabilities / distribution.probabilities.sum()
        channels = rng.choice(8, size=clicked.size, p=probabilities) + 1

        trigger_times.append(heralded)
        trigger_detectors.append(np.full(heralded.size, int(Detector.D0), dtype=np.int8))
        signal_times.append(clicked + config.effective_signal_delay)
        signal_detectors.append(channels.astype(np.int8))

        dark_counts = rng.poisson(config.dark_count_rate * config.bin_width, size=9)
        for detector, count in zip(Detector, dark_counts):
            times = rng.uniform(start_ns, start_ns + width_ns, size=count)
            labels = np.full(count, int(detector), dtype=np.int8)
            if detector is Detector.D0:
                trigger_times.append(times)
                trigger_detectors.append(labels)
            else:
                signal_times.append(times)
                signal_detectors.append(labels)

    trigger = EventStream.merged(trigger_times, trigger_detectors)
    signals = EventStream.merged(signal_times, signal_detectors)
    logger.info(
        f"🔦Simulated {plan.total_duration:g} s: {len(trigger)} trigger clicks, "
        f"{len(signals)} signal clicks"
    )
    return trigger, signals
