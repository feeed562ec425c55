from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Any, Dict, List, Optional, Tuple

from src.errors import ConfigError
from src.optics.network import SETUP1, SETUP1_PRIME, SETUP2, SetupId, custom_setup

DEFAULT_SEED = 2003
TRANSITION_TAG = "transition"


def _check_probability(key: str, value: float):
    if not 0.0 <= value <= 1.0:
        raise ConfigError(key, f"must be a probability in [0, 1], got {value}")


def _check_nonnegative(key: str, value: float):
    if not value >= 0.0 or math.isinf(value):
        raise ConfigError(key, f"must be a finite nonnegative number, got {value}")


@dataclass(frozen=True)
class ImperfectionConfig:
    detector_efficiency: float = 0.70
    dark_count_rate: float = 25.0  # counts/s per detector
    coincidence_window: float = 5.0  # ns
    pair_rate: float = 1000.0  # pairs/s
    pbs_extinction: float = 1e-5
    hwp_angle_sigma: float = 0.2  # deg
    phase_coherence_time: float = 300.0  # s
    phase_jitter_sigma: Optional[float] = None  # rad; None derives it from the coherence time
    phase_drift_sigma: float = 0.02  # rad
    bin_width: float = 1.0  # s
    signal_delay: Optional[float] = None  # ns; None derives it from the coincidence window
    rng_seed: int = DEFAULT_SEED

    def __post_init__(self):
        _check_probability("detector_efficiency", self.detector_efficiency)
        _check_probability("pbs_extinction", self.pbs_extinction)
        for key in (
            "dark_count_rate",
            "pair_rate",
            "hwp_angle_sigma",
            "phase_drift_sigma",
        ):
            _check_nonnegative(key, getattr(self, key))
        if self.phase_jitter_sigma is not None:
            _check_nonnegative("phase_jitter_sigma", self.phase_jitter_sigma)
        for key in ("coincidence_window", "phase_coherence_time", "bin_width"):
            value = getattr(self, key)
            if not value > 0.0 or math.isinf(value):
                raise ConfigError(key, f"must be positive and finite, got {value}")
        if self.signal_delay is not None:
            _check_nonnegative("signal_delay", self.signal_delay)
        if self.signal_delay is not None and self.signal_delay > self.coincidence_window / 2:
            raise ConfigError(
                "signal_delay",
                f"{self.signal_delay} ns falls outside the +-{self.coincidence_window / 2} ns "
                "coincidence window",
            )
        if isinstance(self.rng_seed, bool) or not isinstance(self.rng_seed, int):
            raise ConfigError("rng_seed", f"must be an integer, got {self.rng_seed!r}")
        if not 0 <= self.rng_seed < 2**64:
            raise ConfigError(
                "rng_seed", f"must fit in an unsigned 64-bit integer, got {self.rng_seed}"
            )

    @classmethod
    def ideal(cls, rng_seed: int = DEFAULT_SEED) -> ImperfectionConfig:
        return cls(
            detector_efficiency=1.0,
            dark_count_rate=0.0,
            pbs_extinction=0.0,
            hwp_angle_sigma=0.0,
            phase_jitter_sigma=0.0,
            phase_drift_sigma=0.0,
            rng_seed=rng_seed,
        )

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    @property
    def effective_jitter_sigma(self) -> float:
        """Within-bin phase noise; derived from the coherence time when not set."""
        if self.phase_jitter_sigma is not None:
            return self.phase_jitter_sigma
        return math.sqrt(2.0 * self.bin_width / self.phase_coherence_time)

    @property
    def effective_signal_delay(self) -> float:
        """Trigger to signal delay in ns, kept well inside the coincidence window when not set."""
        if self.signal_delay is not None:
            return self.signal_delay
        return min(1.0, self.coincidence_window / 4.0)

    @property
    def visibility(self) -> float:
        """Fringe visibility left by the fast phase noise alone."""
        return math.exp(-self.effective_jitter_sigma**2 / 2.0)

    def with_updates(self, **updates: Any) -> ImperfectionConfig:
        unknown = set(updates) - set(self.field_names())
        if unknown:
            raise ConfigError(sorted(unknown)[0], "not an imperfection parameter")
        return replace(self, **updates)

    def echo(self) -> Dict[str, Any]:
        values = asdict(self)
        values["effective_jitter_sigma"] = self.effective_jitter_sigma
        values["effective_signal_delay"] = self.effective_signal_delay
        return values


@dataclass(frozen=True)
class TimeBin:
    index: int
    start: float  # s from run start
    tag: str
    setup: SetupId
    stage_from: int
    stage_to: int
    fraction: float  # rotation progress while HWP1/HWP2 move between stages


@dataclass(frozen=True)
class StagePlan:
    stages: Tuple[Tuple[SetupId, float], ...]
    transition_gap: float = 2.0  # s

    def __post_init__(self):
        if not self.stages:
            raise ConfigError("stages", "a plan needs at least one stage")
        for setup, duration in self.stages:
            if not duration > 0.0 or math.isinf(duration):
                raise ConfigError(
                    "stage_duration_s", f"stage durations must be positive, got {duration}"
                )
            if setup.is_custom:
                raise ConfigError("first_setup", f"stages must use named setups, got {setup}")
        _check_nonnegative("transition_gap_s", self.transition_gap)

    @classmethod
    def default(
        cls,
        first_setup: SetupId = SETUP1,
        stage_duration: float = 60.0,
        transition_gap: float = 2.0,
    ) -> StagePlan:
        """Calibration setup, Setup2, then the calibration setup again."""
        if first_setup not in (SETUP1, SETUP1_PRIME):
            raise ConfigError("first_setup", f"must be setup1 or setup1p, got {first_setup}")
        stages = (
            (first_setup, stage_duration),
            (SETUP2, stage_duration),
            (first_setup, stage_duration),
        )
        return cls(stages, transition_gap)

    @property
    def total_duration(self) -> float:
        return sum(duration for _, duration in self.stages) + self.transition_gap * (
            len(self.stages) - 1
        )

    @staticmethod
    def stage_tag(stage_index: int) -> str:
        return f"stage{stage_index + 1}"

    def stage_setups(self) -> Dict[str, SetupId]:
        return {self.stage_tag(i): setup for i, (setup, _) in enumerate(self.stages)}

    def timeline(self, bin_width: float) -> List[TimeBin]:
        bins: List[TimeBin] = []

        def n_bins(key: str, span: float) -> int:
            count = span / bin_width
            if abs(count - round(count)) > 1e-9:
                raise ConfigError(key, f"{span} s is not a whole number of {bin_width} s bins")
            return int(round(count))

        gap_bins = n_bins("transition_gap_s", self.transition_gap)
        for i, (setup, duration) in enumerate(self.stages):
            for _ in range(n_bins("stage_duration_s", duration)):
                bins.append(
                    TimeBin(len(bins), len(bins) * bin_width, self.stage_tag(i), setup, i, i, 0.0)
                )
            if i + 1 == len(self.stages):
                break
            following = self.stages[i + 1][0]
            for k in range(gap_bins):
                fraction = (k + 0.5) / gap_bins
                moving = custom_setup(
                    setup.hwp1_angle + fraction * (following.hwp1_angle - setup.hwp1_angle),
                    setup.hwp2_angle + fraction * (following.hwp2_angle - setup.hwp2_angle),
                )
                bins.append(
                    TimeBin(
                        len(bins), len(bins) * bin_width, TRANSITION_TAG, moving, i, i + 1, fraction
                    )
                )
        return bins
