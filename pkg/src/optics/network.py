from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Iterable, Mapping, Optional, Tuple

import numpy as np
from loguru import logger

from src.errors import InvalidSetupError, NetworkError
from src.optics.elements import (
    POLARIZATIONS,
    Beamsplitter,
    HalfWavePlate,
    ModeState,
    OpticalElement,
    PhaseShift,
    PolarizingBeamsplitter,
)
from src.quantum.core import NORM_TOLERANCE, StateVector


class Detector(IntEnum):
    D0 = 0  # trigger
    D1 = 1
    D2 = 2
    D3 = 3
    D4 = 4
    D5 = 5
    D6 = 6
    D7 = 7
    D8 = 8

    @property
    def column(self) -> int:
        """Position among the signal detectors D1..D8."""
        return int(self) - 1


SIGNAL_DETECTORS = tuple(Detector(i) for i in range(1, 9))
BS1_DETECTORS = (Detector.D1, Detector.D2, Detector.D3, Detector.D4)
BS2_DETECTORS = (Detector.D5, Detector.D6, Detector.D7, Detector.D8)

HWP_NAMES = ("HWP1", "HWP2", "HWP3", "HWP4", "HWP5", "HWP6")
ANALYZER_ANGLE = 22.5


@dataclass(frozen=True)
class SetupId:
    name: str
    hwp1_angle: float
    hwp2_angle: float

    def __post_init__(self):
        expected = _NAMED_ANGLES.get(self.name)
        if expected is not None and expected != (self.hwp1_angle, self.hwp2_angle):
            raise InvalidSetupError(
                f"{self.name} requires HWP1/HWP2 at {expected}, got "
                f"{(self.hwp1_angle, self.hwp2_angle)}"
            )
        if expected is None and self.name != "custom":
            raise InvalidSetupError(f"unknown setup '{self.name}'")
        for angle in (self.hwp1_angle, self.hwp2_angle):
            if not -90.0 <= angle <= 90.0:
                raise InvalidSetupError(f"waveplate angle {angle} deg outside [-90, 90]")

    @property
    def is_custom(self) -> bool:
        return self.name == "custom"

    def __str__(self) -> str:
        if self.is_custom:
            return f"custom({self.hwp1_angle:g},{self.hwp2_angle:g})"
        return self.name


_NAMED_ANGLES = {
    "setup1": (0.0, 0.0),
    "setup1p": (45.0, 45.0),
    "setup2": (22.5, -67.5),
}

SETUP1 = SetupId("setup1", 0.0, 0.0)
SETUP1_PRIME = SetupId("setup1p", 45.0, 45.0)
SETUP2 = SetupId("setup2", 22.5, -67.5)
NAMED_SETUPS = {setup.name: setup for setup in (SETUP1, SETUP1_PRIME, SETUP2)}


def custom_setup(hwp1_angle: float, hwp2_angle: float) -> SetupId:
    return SetupId("custom", float(hwp1_angle), float(hwp2_angle))


def setup_from_name(name: str) -> SetupId:
    try:
        return NAMED_SETUPS[name.lower()]
    except KeyError:
        raise InvalidSetupError(
            f"unknown setup '{name}', expected one of {sorted(NAMED_SETUPS)}"
        ) from None


@dataclass(frozen=True, eq=False)
class DetectorDistribution:
    """Probability per heralded photon of a click on D1..D8."""

    probabilities: np.ndarray

    def __post_init__(self):
        probabilities = np.asarray(self.probabilities, dtype=float)
        if probabilities.shape != (8,):
            raise ValueError(f"expected 8 detector probabilities, got {probabilities.shape}")
        if np.any(probabilities < -NORM_TOLERANCE):
            raise ValueError("detector probabilities must be nonnegative")
        probabilities = np.clip(probabilities, 0.0, None)
        probabilities.setflags(write=False)
        object.__setattr__(self, "probabilities", probabilities)

    def __getitem__(self, detector: Detector) -> float:
        return float(self.probabilities[Detector(detector).column])

    @property
    def total(self) -> float:
        return float(np.sum(self.probabilities))

    def mass(self, detectors: Iterable[Detector]) -> float:
        return float(sum(self[d] for d in detectors))

    def as_dict(self) -> Dict[str, float]:
        return {d.name: self[d] for d in SIGNAL_DETECTORS}


@dataclass(frozen=True, eq=False)
class OpticalNetwork:
    """Ordered element pipeline from the two rails after PBS0 to the detector ports."""

    setup: SetupId
    elements: Tuple[OpticalElement, ...]
    ports: Mapping[str, Detector]
    input_rails: Tuple[str, str] = ("u", "d")

    def __post_init__(self):
        live = set(self.input_rails)
        for element in self.elements:
            missing = [rail for rail in element.inputs if rail not in live]
            if missing:
                raise NetworkError(f"{element.name} reads rails {missing} that carry no light")
            live.difference_update(element.inputs)
            clash = [rail for rail in element.outputs if rail in live]
            if clash:
                raise NetworkError(f"{element.name} writes onto occupied rails {clash}")
            live.update(element.outputs)
        dangling = live - set(self.ports)
        if dangling:
            raise NetworkError(f"rails {sorted(dangling)} end without a detector")
        unfed = set(self.ports) - live
        if unfed:
            raise NetworkError(f"detector ports {sorted(unfed)} are not fed by any rail")
        if sorted(self.ports.values()) != list(SIGNAL_DETECTORS):
            raise NetworkError("every signal detector D1..D8 needs exactly one port")

    def run(self, modes: ModeState) -> ModeState:
        for element in self.elements:
            modes = element.apply(modes)
        return modes

    def element(self, name: str) -> OpticalElement:
        for element in self.elements:
            if element.name == name:
                return element
        raise KeyError(name)

    def detector_amplitudes(self, state: StateVector) -> np.ndarray:
        """(8, 2) array: polarization amplitudes arriving at D1..D8."""
        modes = self.run(
            ModeState.from_state_vector(state, up=self.input_rails[0], down=self.input_rails[1])
        )
        amplitudes = np.zeros((8, 2), dtype=complex)
        for rail, detector in self.ports.items():
            for pol in POLARIZATIONS:
                amplitudes[detector.column, pol.index] = modes.amplitude(rail, pol)
        return amplitudes

    def transfer_matrix(self) -> np.ndarray:
        """(16, 4) isometry from the path x polarization basis to (detector, polarization)."""
        columns = []
        for index in range(4):
            basis = np.zeros(4, dtype=complex)
            basis[index] = 1.0
            columns.append(self.detector_amplitudes(StateVector(basis)).reshape(-1))
        return np.stack(columns, axis=1)


def build_setup(
    setup: SetupId,
    phase1: float,
    phase2: float,
    angle_offsets: Optional[Mapping[str, float]] = None,
    pbs_extinction: float = 0.0,
) -> OpticalNetwork:
    """Wire the two interferometers for a setup.

    PBS1 sends the up path's reflected light into BS1 and its transmitted light into BS2;
    PBS2 does the opposite for the down path, so HWP1 = HWP2 = 0 deg feeds only BS1 and
    45 deg only BS2. `angle_offsets` perturbs waveplate angles by name (HWP1..HWP6).
    """
    offsets = dict(angle_offsets or {})
    unknown = set(offsets) - set(HWP_NAMES)
    if unknown:
        raise NetworkError(f"no waveplates named {sorted(unknown)}")

    def hwp(name: str, rail: str, nominal: float) -> HalfWavePlate:
        return HalfWavePlate(name, rail, nominal + offsets.get(name, 0.0))

    def pbs(name: str, rail: str, reflected: str, transmitted: str) -> PolarizingBeamsplitter:
        return PolarizingBeamsplitter(name, rail, reflected, transmitted, pbs_extinction)

    elements: Tuple[OpticalElement, ...] = (
        hwp("HWP1", "u", setup.hwp1_angle),
        hwp("HWP2", "d", setup.hwp2_angle),
        pbs("PBS1", "u", "bs1_a", "bs2_a"),
        pbs("PBS2", "d", "bs2_b", "bs1_b"),
        PhaseShift("PHASE1", "bs1_a", phase1),
        PhaseShift("PHASE2", "bs2_a", phase2),
        Beamsplitter("BS1", "bs1_a", "bs1_b", "bs1_plus", "bs1_minus"),
        Beamsplitter("BS2", "bs2_a", "bs2_b", "bs2_plus", "bs2_minus"),
        hwp("HWP3", "bs1_plus", ANALYZER_ANGLE),
        pbs("PBS3", "bs1_plus", "port_d2", "port_d1"),
        hwp("HWP4", "bs1_minus", ANALYZER_ANGLE),
        pbs("PBS4", "bs1_minus", "port_d3", "port_d4"),
        hwp("HWP5", "bs2_plus", ANALYZER_ANGLE),
        pbs("PBS5", "bs2_plus", "port_d6", "port_d5"),
        hwp("HWP6", "bs2_minus", ANALYZER_ANGLE),
        pbs("PBS6", "bs2_minus", "port_d7", "port_d8"),
    )
    ports = {f"port_d{d.value}": d for d in SIGNAL_DETECTORS}
    network = OpticalNetwork(setup, elements, ports)
    logger.debug(f"Built {setup} network (phase1={phase1:.6f}, phase2={phase2:.6f})")
    return network


def propagate(network: OpticalNetwork, state: StateVector) -> DetectorDistribution:
    amplitudes = network.detector_amplitudes(state)
    return DetectorDistribution(np.sum(np.abs(amplitudes) ** 2, axis=1))
