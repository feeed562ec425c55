from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Mapping, Tuple

from src.errors import InvalidSetupError
from src.optics.network import (
    BS1_DETECTORS,
    BS2_DETECTORS,
    SETUP1,
    SETUP1_PRIME,
    SETUP2,
    SIGNAL_DETECTORS,
    Detector,
    SetupId,
)
from src.quantum.core import ObservableName

Outcome = Tuple[int, int]


@dataclass(frozen=True, eq=False)
class OutcomeMap:
    """Joint outcome of the co-measured pair that each detector click registers."""

    setup: SetupId
    observables: Tuple[ObservableName, ObservableName]
    outcomes: Mapping[Detector, Outcome]
    active_detectors: FrozenSet[Detector]

    def __getitem__(self, detector: Detector) -> Outcome:
        return self.outcomes[Detector(detector)]

    def product(self, detector: Detector) -> int:
        first, second = self[detector]
        return first * second

    def detectors_with_product(self, value: int) -> FrozenSet[Detector]:
        """Active detectors whose registered outcome multiplies to `value`."""
        return frozenset(d for d in self.active_detectors if self.product(d) == value)


# The "plus" output of a beamsplitter is X1 = +1, and the
# analyzer port fed by +45 deg light is X2 = +1. The same labelling holds behind BS2.
_X1X2_OUTCOMES: Dict[Detector, Outcome] = {
    Detector.D1: (1, -1),
    Detector.D2: (1, 1),
    Detector.D3: (-1, 1),
    Detector.D4: (-1, -1),
    Detector.D5: (1, -1),
    Detector.D6: (1, 1),
    Detector.D7: (-1, 1),
    Detector.D8: (-1, -1),
}

# With HWP1/HWP2 at +22.5/-67.5 deg, BS1 carries Z1X2 = +1 and BS2 carries Z1X2 = -1;
# the analyzer ports then split X1Z2.
_Z1X2_X1Z2_OUTCOMES: Dict[Detector, Outcome] = {
    Detector.D1: (1, -1),
    Detector.D2: (1, 1),
    Detector.D3: (1, -1),
    Detector.D4: (1, 1),
    Detector.D5: (-1, 1),
    Detector.D6: (-1, -1),
    Detector.D7: (-1, 1),
    Detector.D8: (-1, -1),
}


def outcome_map(setup: SetupId) -> OutcomeMap:
    if setup.is_custom:
        raise InvalidSetupError(
            f"{setup} has no observable interpretation; only named setups carry an outcome map"
        )
    if setup.name == SETUP1.name:
        return OutcomeMap(
            SETUP1,
            (ObservableName.X1, ObservableName.X2),
            _X1X2_OUTCOMES,
            frozenset(BS1_DETECTORS),
        )
    if setup.name == SETUP1_PRIME.name:
        return OutcomeMap(
            SETUP1_PRIME,
            (ObservableName.X1, ObservableName.X2),
            _X1X2_OUTCOMES,
            frozenset(BS2_DETECTORS),
        )
    return OutcomeMap(
        SETUP2,
        (ObservableName.Z1X2, ObservableName.X1Z2),
        _Z1X2_X1Z2_OUTCOMES,
        frozenset(SIGNAL_DETECTORS),
    )
