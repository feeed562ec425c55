from __future__ import annotations

import math
from functools import lru_cache
from typing import Optional

from loguru import logger
from scipy.optimize import bisect

from src.errors import CalibrationError
from src.experiment.config import ImperfectionConfig
from src.experiment.imperfections import FringeComponents, fringe_components
from src.nchv.ks_set import qm_allowed_detectors
from src.optics.network import HWP_NAMES, SETUP2, SIGNAL_DETECTORS
from src.optics.outcomes import outcome_map
from src.optics.tuning import interferometer_phases

MAX_JITTER_SIGMA = 20.0  # rad; fringes are fully washed out well before this
SIGMA_TOLERANCE = 1e-10


def visibility_to_sigma(visibility: float) -> float:
    return math.sqrt(-2.0 * math.log(visibility))


@lru_cache(maxsize=256)
def _setup2_components(
    pbs_extinction: float, plate: Optional[str] = None, offset: float = 0.0
) -> FringeComponents:
    draws = {plate: offset} if plate is not None else None
    return fringe_components(SETUP2, draws, pbs_extinction)


def _setup2_wrong_fraction(components: FringeComponents, sigma: float) -> float:
    tuned1, tuned2 = interferometer_phases()
    distribution = components.distribution(tuned1, tuned2, sigma)
    allowed = qm_allowed_detectors(outcome_map(SETUP2))
    wrong = distribution.mass(d for d in SIGNAL_DETECTORS if d not in allowed)
    return wrong / distribution.total


def expected_setup2_epsilon(config: ImperfectionConfig) -> float:
    """Expected Setup2 error fraction of a config, without shot noise.

    Within-bin jitter and the stationary drift add in quadrature. Waveplate errors enter
    at second order: each plate is shifted by +-hwp_angle_sigma on its own and the
    excess over the unperturbed value is summed.
    """
    sigma = math.hypot(config.effective_jitter_sigma, config.phase_drift_sigma)
    baseline = _setup2_wrong_fraction(_setup2_components(config.pbs_extinction), sigma)
    if config.hwp_angle_sigma == 0.0:
        return baseline
    excess = 0.0
    for name in HWP_NAMES:
        shifted = [
            _setup2_wrong_fraction(
                _setup2_components(config.pbs_extinction, name, sign * config.hwp_angle_sigma),
                sigma,
            )
            for sign in (1.0, -1.0)
        ]
        excess += (shifted[0] + shifted[1]) / 2.0 - baseline
    return baseline + excess


def calibrate(
    target_epsilon: float, template: Optional[ImperfectionConfig] = None
) -> ImperfectionConfig:
    """Choose phase_jitter_sigma so the expected Setup2 epsilon hits the target.

    Starts from epsilon = (1 - V) / 2 with V = exp(-sigma^2 / 2), then bisects against
    the exact imperfect distribution with the template's other imperfections in place.
    """
    template = ImperfectionConfig() if template is None else template
    if target_epsilon == 0.0:
        logger.info("🎯Target epsilon 0: phase jitter switched off")
        return template.with_updates(phase_jitter_sigma=0.0)
    if not 0.0 < target_epsilon < 0.5:
        raise CalibrationError(f"target epsilon must lie in (0, 0.5), got {target_epsilon}")

    def excess(sigma: float) -> float:
        candidate = template.with_updates(phase_jitter_sigma=sigma)
        return expected_setup2_epsilon(candidate) - target_epsilon

    floor = excess(0.0)
    if floor > 0.0:
        raise CalibrationError(
            f"the template's other imperfections already give epsilon "
            f"{floor + target_epsilon:.4f} above the target {target_epsilon}"
        )
    if floor == 0.0:
        return template.with_updates(phase_jitter_sigma=0.0)

    guess = visibility_to_sigma(1.0 - 2.0 * target_epsilon)
    upper = max(2.0 * guess, 0.1)
    while excess(upper) < 0.0:
        upper *= 2.0
        if upper > MAX_JITTER_SIGMA:
            raise CalibrationError(f"target epsilon {target_epsilon} is out of reach")

    sigma = bisect(excess, 0.0, upper, xtol=SIGMA_TOLERANCE)
    calibrated = template.with_updates(phase_jitter_sigma=sigma)
    logger.info(
        f"🎯Calibrated phase_jitter_sigma = {sigma:.6f} rad (first guess {guess:.6f}), "
        f"visibility {calibrated.visibility:.4f}"
    )
    return calibrated
