from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Dict, FrozenSet, Mapping, Optional

from loguru import logger

from src.errors import NoDataError
from src.experiment.protocol import ExperimentTrace
from src.nchv.ks_set import (
    PATH_POLARIZATION_KS_SET,
    EpsilonBound,
    KSSet,
    Verdict,
    epsilon_bound,
    qm_allowed_detectors,
    verdict,
)
from src.optics.network import SETUP2, SIGNAL_DETECTORS, Detector
from src.optics.outcomes import OutcomeMap, outcome_map

StageCounts = Mapping[Detector, int]


@dataclass(frozen=True)
class StageSummary:
    setup: str
    counts: Dict[Detector, int]
    qm_detectors: FrozenSet[Detector]

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def wrong(self) -> int:
        """Coincidences on detectors quantum mechanics says stay dark."""
        return sum(n for d, n in self.counts.items() if d not in self.qm_detectors)

    @property
    def error_fraction(self) -> Optional[float]:
        return float(Fraction(self.wrong, self.total)) if self.total else None


@dataclass(frozen=True)
class RunReport:
    stages: Dict[str, StageSummary]
    result1: float
    result2: float
    epsilon: float
    pooled_epsilon: float
    bound: EpsilonBound
    verdict: Verdict
    seed: Optional[int] = None
    config: Dict[str, Any] = field(default_factory=dict)

    @property
    def stage_error_fractions(self) -> Dict[str, Optional[float]]:
        return {tag: stage.error_fraction for tag, stage in self.stages.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "result1": self.result1,
            "result2": self.result2,
            "epsilon": self.epsilon,
            "pooled_epsilon": self.pooled_epsilon,
            "bound": float(self.bound),
            "bound_fraction": str(self.bound.bound),
            "verdict": self.verdict.value,
            "per_stage_counts": {
                tag: {
                    "setup": stage.setup,
                    **{d.name: stage.counts.get(d, 0) for d in SIGNAL_DETECTORS},
                }
                for tag, stage in self.stages.items()
            },
            "stage_error_fractions": self.stage_error_fractions,
            "seed": self.seed,
            "config": self.config,
        }


def analyze(
    stage_counts: Mapping[str, StageCounts],
    outcome_maps: Mapping[str, OutcomeMap],
    ks: KSSet = PATH_POLARIZATION_KS_SET,
    seed: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None,
) -> RunReport:
    """Split each stage's coincidences into detectors QM allows and detectors it forbids.

    result1/result2 are the shares of Setup2 coincidences that agree with QM and with
    noncontextual hidden variables; epsilon is result2. `pooled_epsilon` counts wrong
    clicks over every stage.
    """
    stages: Dict[str, StageSummary] = {}
    for tag, counts in stage_counts.items():
        if tag not in outcome_maps:
            raise KeyError(f"no outcome map for stage '{tag}'")
        mapping = outcome_maps[tag]
        stages[tag] = StageSummary(
            mapping.setup.name,
            {Detector(d): int(n) for d, n in counts.items()},
            qm_allowed_detectors(mapping, ks),
        )

    setup2_stages = [stage for stage in stages.values() if stage.setup == SETUP2.name]
    right = sum(stage.total - stage.wrong for stage in setup2_stages)
    wrong = sum(stage.wrong for stage in setup2_stages)
    if right + wrong == 0:
        raise NoDataError("no Setup2 coincidences recorded; epsilon is undefined")

    result2 = Fraction(wrong, right + wrong)
    all_wrong = sum(stage.wrong for stage in stages.values())
    all_total = sum(stage.total for stage in stages.values())
    bound = epsilon_bound(ks)
    epsilon = float(result2)
    outcome = verdict(epsilon, bound)

    for tag, stage in stages.items():
        if stage.total == 0:
            logger.warning(f"⚠️{tag} ({stage.setup}) recorded no coincidences")
    logger.info(f"🧮epsilon = {epsilon:.4f} against bound {bound.bound} -> {outcome.value}")

    return RunReport(
        stages=stages,
        result1=float(1 - result2),
        result2=float(result2),
        epsilon=epsilon,
        pooled_epsilon=float(Fraction(all_wrong, all_total)),
        bound=bound,
        verdict=outcome,
        seed=seed,
        config=dict(config or {}),
    )


def analyze_trace(
    trace: ExperimentTrace,
    ks: KSSet = PATH_POLARIZATION_KS_SET,
    seed: Optional[int] = None,
    config: Optional[Dict[str, Any]] = None,
) -> RunReport:
    maps = {tag: outcome_map(setup) for tag, setup in trace.stage_setups.items()}
    return analyze(trace.stage_counts(), maps, ks, seed=seed, config=config)
