from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from typing import FrozenSet, List, Sequence, Tuple

from src.errors import InvalidSetupError, NonCommutingError
from src.nchv.assignments import Constraint, consistent_assignments
from src.optics.network import Detector, SetupId
from src.optics.outcomes import OutcomeMap
from src.quantum.core import ObservableName, commutes, observable


@dataclass(frozen=True)
class MeasurementContext:
    """A co-measurable pair together with the product value quantum mechanics demands."""

    pair: Tuple[ObservableName, ObservableName]
    required_product: int

    def __post_init__(self):
        first, second = (ObservableName(name) for name in self.pair)
        if not commutes(observable(first), observable(second)):
            raise NonCommutingError(f"{first.value} and {second.value} cannot be co-measured")
        object.__setattr__(self, "pair", (first, second))

    @property
    def constraint(self) -> Constraint:
        return Constraint.of(*self.pair, required=self.required_product)

    def __str__(self) -> str:
        return f"{{{self.pair[0].value}, {self.pair[1].value}}}: product {self.required_product:+d}"


@dataclass(frozen=True)
class KSSet:
    contexts: Tuple[MeasurementContext, ...]

    def __post_init__(self):
        if not self.contexts:
            raise ValueError("a Kochen-Specker set needs at least one measurement context")

    def constraints(self) -> List[Constraint]:
        return [context.constraint for context in self.contexts]

    def context_for(self, pair: Sequence[ObservableName]) -> MeasurementContext:
        wanted = tuple(ObservableName(name) for name in pair)
        for context in self.contexts:
            if context.pair == wanted:
                return context
        raise KeyError(f"no context measures {[name.value for name in wanted]}")

    def __len__(self) -> int:
        return len(self.contexts)


PATH_POLARIZATION_KS_SET = KSSet(
    (
        MeasurementContext((ObservableName.Z1, ObservableName.Z2), 1),
        MeasurementContext((ObservableName.X1, ObservableName.X2), 1),
        MeasurementContext((ObservableName.Z1X2, ObservableName.X1Z2), -1),
    )
)

# What the preparation stage (PBS0) and the Setup1 runs establish about the photons.
PREPARATION_PREMISES = (
    Constraint.of(ObservableName.Z1Z2, required=1),
    Constraint.of(ObservableName.X1X2, required=1),
)


@dataclass(frozen=True)
class EpsilonBound:
    n_measurements: int

    def __post_init__(self):
        if self.n_measurements < 1:
            raise ValueError(f"number of measurements must be positive, got {self.n_measurements}")

    @property
    def bound(self) -> Fraction:
        return Fraction(1, self.n_measurements)

    def __float__(self) -> float:
        return float(self.bound)


class Verdict(str, Enum):
    DISPROOF_OF_NCHV = "DisproofOfNCHV"
    INCONCLUSIVE = "Inconclusive"


def epsilon_bound(ks: KSSet) -> EpsilonBound:
    return EpsilonBound(len(ks))


def verdict(epsilon: float, bound: EpsilonBound) -> Verdict:
    """Disproof only when the error fraction is strictly below 1/N."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError(f"epsilon must lie in [0, 1], got {epsilon}")
    return Verdict.DISPROOF_OF_NCHV if epsilon < float(bound) else Verdict.INCONCLUSIVE


def nchv_allowed_detectors(
    setup: SetupId,
    outcome_map: OutcomeMap,
    premises: Sequence[Constraint] = PREPARATION_PREMISES,
) -> FrozenSet[Detector]:
    """Active detectors whose outcome some premise-respecting assignment produces."""
    if setup.is_custom:
        raise InvalidSetupError(f"{setup} has no observable interpretation")
    first, second = outcome_map.observables
    survivors = consistent_assignments(premises)
    allowed = set()
    for detector in outcome_map.active_detectors:
        want_first, want_second = outcome_map[detector]
        if any(
            a.value(first) == want_first and a.value(second) == want_second for a in survivors
        ):
            allowed.add(detector)
    return frozenset(allowed)


def qm_allowed_detectors(
    outcome_map: OutcomeMap, ks: KSSet = PATH_POLARIZATION_KS_SET
) -> FrozenSet[Detector]:
    """Active detectors whose outcome satisfies the product the KS set requires."""
    context = ks.context_for(outcome_map.observables)
    return outcome_map.detectors_with_product(context.required_product)
