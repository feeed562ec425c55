from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Optional, Tuple, Union

import numpy as np

from src.experiment.config import ImperfectionConfig
from src.optics.network import DetectorDistribution, SetupId, build_setup
from src.optics.tuning import interferometer_phases
from src.quantum.core import StateVector, bell_state

PhaseError = Union[float, Tuple[float, float]]


@dataclass(frozen=True, eq=False)
class FringeComponents:
    """Detector amplitudes split as a + b*exp(i*phase1) + c*exp(i*phase2).

    No path crosses both interferometers, so there is no cross term in the two phases.
    Arrays are (8, 2): detector D1..D8 by polarization.
    """

    constant: np.ndarray
    phase1_term: np.ndarray
    phase2_term: np.ndarray

    def amplitudes(self, phase1: float, phase2: float) -> np.ndarray:
        return (
            self.constant
            + self.phase1_term * np.exp(1j * phase1)
            + self.phase2_term * np.exp(1j * phase2)
        )

    def distribution(
        self, phase1: float, phase2: float, sigma: float = 0.0
    ) -> DetectorDistribution:
        """Click probabilities averaged over independent Gaussian noise on both phases."""
        a, b, c = self.constant, self.phase1_term, self.phase2_term
        damping = np.exp(-(sigma**2) / 2.0)
        mean1 = np.exp(1j * phase1) * damping
        mean2 = np.exp(1j * phase2) * damping
        mean_relative = np.exp(1j * (phase2 - phase1)) * damping**2
        probabilities = (
            np.abs(a) ** 2
            + np.abs(b) ** 2
            + np.abs(c) ** 2
            + 2.0 * np.real(np.conj(a) * b * mean1)
            + 2.0 * np.real(np.conj(a) * c * mean2)
            + 2.0 * np.real(np.conj(b) * c * mean_relative)
        )
        return DetectorDistribution(np.sum(probabilities, axis=1))


def fringe_components(
    setup: SetupId,
    angle_draws: Optional[Mapping[str, float]] = None,
    pbs_extinction: float = 0.0,
    state: Optional[StateVector] = None,
) -> FringeComponents:
    state = bell_state() if state is None else state

    def amplitudes(phase1: float, phase2: float) -> np.ndarray:
        network = build_setup(setup, phase1, phase2, angle_draws, pbs_extinction)
        return network.detector_amplitudes(state)

    at_zero = amplitudes(0.0, 0.0)
    phase1_term = (at_zero - amplitudes(np.pi, 0.0)) / 2.0
    phase2_term = (at_zero - amplitudes(0.0, np.pi)) / 2.0
    return FringeComponents(at_zero - phase1_term - phase2_term, phase1_term, phase2_term)


def ideal_to_imperfect_distribution(
    setup: SetupId,
    config: ImperfectionConfig,
    phase_error: PhaseError = 0.0,
    angle_draws: Optional[Mapping[str, float]] = None,
) -> DetectorDistribution:
    """Exact click distribution with perturbed waveplates, leaky PBSs and phase errors.

    `phase_error` offsets the tuned equal-arm phases (one value for both
    interferometers, or a pair); the configured fast phase jitter washes out the fringes.
    """
    if isinstance(phase_error, tuple):
        error1, error2 = phase_error
    else:
        error1 = error2 = float(phase_error)
    tuned1, tuned2 = interferometer_phases()
    components = fringe_components(setup, angle_draws, config.pbs_extinction)
    return components.distribution(
        tuned1 + error1, tuned2 + error2, config.effective_jitter_sigma
    )
