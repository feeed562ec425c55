from __future__ import annotations

from functools import lru_cache
from typing import Callable, Tuple

import numpy as np
from loguru import logger
from scipy.optimize import minimize_scalar

from src.errors import InvalidSetupError
from src.optics.network import (
    SETUP1,
    SETUP1_PRIME,
    Detector,
    SetupId,
    build_setup,
    propagate,
)
from src.quantum.core import bell_state

GRID_POINTS = 721
REFINE_TOLERANCE = 1e-12

# Ports that must go dark once an interferometer is equal-arm.
DARK_PORTS = {
    SETUP1.name: (Detector.D1, Detector.D3),
    SETUP1_PRIME.name: (Detector.D5, Detector.D7),
}


def phase_objective(setup: SetupId, phase1: float, phase2: float) -> float:
    """Probability that lands on the ports which should be dark for this setup."""
    if setup.name not in DARK_PORTS:
        raise InvalidSetupError(f"only setup1 and setup1p are used for tuning, got {setup}")
    distribution = propagate(build_setup(setup, phase1, phase2), bell_state())
    return distribution.mass(DARK_PORTS[setup.name])


def _minimize_on_circle(objective: Callable[[float], float]) -> float:
    grid = np.linspace(0.0, 2.0 * np.pi, GRID_POINTS, endpoint=False)
    values = np.array([objective(phase) for phase in grid])
    best = int(np.argmin(values))  # first minimum, i.e. the smallest phase on ties
    step = grid[1] - grid[0]
    result = minimize_scalar(
        objective,
        bounds=(grid[best] - step, grid[best] + step),
        method="bounded",
        options={"xatol": REFINE_TOLERANCE},
    )
    phase = float(result.x) if result.fun <= values[best] else float(grid[best])
    phase %= 2.0 * np.pi
    if 2.0 * np.pi - phase < 1e-6:
        phase = 0.0
    return phase


@lru_cache(maxsize=None)
def tune_phases(setup: SetupId) -> Tuple[float, float]:
    """Scan the arm phase of the interferometer this setup routes through.

    Setup1 tunes phase1 (BS1) and returns phase2 = 0; Setup1' tunes phase2 (BS2) and
    returns phase1 = 0.
    """
    if setup.name == SETUP1.name:
        phase1 = _minimize_on_circle(lambda phase: phase_objective(setup, phase, 0.0))
        phases = (phase1, 0.0)
    elif setup.name == SETUP1_PRIME.name:
        phase2 = _minimize_on_circle(lambda phase: phase_objective(setup, 0.0, phase))
        phases = (0.0, phase2)
    else:
        raise InvalidSetupError(f"only setup1 and setup1p are used for tuning, got {setup}")

    residual = phase_objective(setup, *phases)
    logger.info(
        f"🎛️Tuned {setup}: phases=({phases[0]:.9f}, {phases[1]:.9f}), dark mass={residual:.3e}"
    )
    return phases


def interferometer_phases() -> Tuple[float, float]:
    """Equal-arm phases of both interferometers, tuned with Setup1 and Setup1' in turn."""
    phase1, _ = tune_phases(SETUP1)
    _, phase2 = tune_phases(SETUP1_PRIME)
    return phase1, phase2
