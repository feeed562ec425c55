import math

import numpy as np
import pytest

from src.errors import ConfigError
from src.experiment.config import TRANSITION_TAG, ImperfectionConfig, StagePlan
from src.experiment.events import plan_distributions, simulate_events
from src.experiment.imperfections import ideal_to_imperfect_distribution
from src.experiment.protocol import ExperimentTrace, run_experiment
from src.optics.network import (
    SETUP1,
    SETUP1_PRIME,
    SETUP2,
    SIGNAL_DETECTORS,
    Detector,
    build_setup,
    propagate,
)
from src.optics.tuning import interferometer_phases
from src.quantum.core import bell_state

EVEN = (Detector.D2, Detector.D4, Detector.D6, Detector.D8)


@pytest.fixture(scope="module")
def default_trace():
    return run_experiment(StagePlan.default(SETUP1), ImperfectionConfig())


@pytest.fixture(scope="module")
def ideal_trace():
    return run_experiment(StagePlan.default(SETUP1), ImperfectionConfig.ideal())


def test_config_defaults():
    config = ImperfectionConfig()
    assert config.detector_efficiency == 0.70
    assert config.coincidence_window == 5.0
    assert config.rng_seed == 2003
    assert config.effective_jitter_sigma == pytest.approx(math.sqrt(2.0 / 300.0))
    assert config.effective_signal_delay == 1.0


@pytest.mark.parametrize("window, delay", [(5.0, 1.0), (1.0, 0.25), (0.2, 0.05)])
def test_signal_delay_follows_narrow_windows(window, delay):
    config = ImperfectionConfig(coincidence_window=window)
    assert config.effective_signal_delay == pytest.approx(delay)
    assert config.echo()["effective_signal_delay"] == pytest.approx(delay)
    explicit = ImperfectionConfig(coincidence_window=window, signal_delay=0.0)
    assert explicit.effective_signal_delay == 0.0


@pytest.mark.parametrize(
    "updates, key",
    [
        ({"detector_efficiency": 1.5}, "detector_efficiency"),
        ({"dark_count_rate": -1.0}, "dark_count_rate"),
        ({"coincidence_window": 0.0}, "coincidence_window"),
        ({"signal_delay": 3.0}, "signal_delay"),
        ({"rng_seed": -4}, "rng_seed"),
    ],
)
def test_config_validation_names_the_key(updates, key):
    with pytest.raises(ConfigError) as excinfo:
        ImperfectionConfig(**updates)
    assert excinfo.value.key == key


def test_default_plan_timeline():
    plan = StagePlan.default(SETUP1_PRIME)
    timeline = plan.timeline(1.0)
    assert plan.total_duration == 184.0
    assert len(timeline) == 184
    assert [b.tag for b in timeline].count(TRANSITION_TAG) == 4
    assert timeline[0].setup == SETUP1_PRIME
    assert timeline[62].setup == SETUP2
    assert plan.stage_setups() == {
        "stage1": SETUP1_PRIME,
        "stage2": SETUP2,
        "stage3": SETUP1_PRIME,
    }
    transition = timeline[60]
    assert transition.setup.is_custom
    assert SETUP1_PRIME.hwp1_angle > transition.setup.hwp1_angle > SETUP2.hwp1_angle


def test_plan_validation():
    with pytest.raises(ConfigError):
        StagePlan.default(SETUP2)
    with pytest.raises(ConfigError):
        StagePlan(((SETUP1, 0.0),))
    with pytest.raises(ConfigError):
        StagePlan(((SETUP1, 2.5),)).timeline(1.0)


def test_zero_perturbation_matches_ideal_propagation():
    phase1, phase2 = interferometer_phases()
    for setup in (SETUP1, SETUP1_PRIME, SETUP2):
        ideal = propagate(build_setup(setup, phase1, phase2), bell_state())
        imperfect = ideal_to_imperfect_distribution(setup, ImperfectionConfig.ideal())
        np.testing.assert_allclose(imperfect.probabilities, ideal.probabilities, atol=1e-12)
        assert imperfect.total == pytest.approx(1.0, abs=1e-12)


def test_phase_error_pi_lights_up_d1_d3():
    distribution = ideal_to_imperfect_distribution(
        SETUP1, ImperfectionConfig.ideal(), phase_error=(np.pi, 0.0)
    )
    assert distribution[Detector.D1] == pytest.approx(0.5, abs=1e-9)
    assert distribution[Detector.D3] == pytest.approx(0.5, abs=1e-9)


def test_pbs_leakage_only():
    config = ImperfectionConfig.ideal().with_updates(pbs_extinction=1e-5)
    distribution = ideal_to_imperfect_distribution(SETUP2, config)
    assert distribution.mass(EVEN) <= 1e-4
    assert distribution.total == pytest.approx(1.0, abs=1e-12)


def config_epsilon(sigma):
    return (1.0 - math.exp(-(sigma**2) / 2.0)) / 2.0


@pytest.mark.parametrize("sigma", [0.3, 1.0, 2.0])
def test_jitter_washes_out_fringes(sigma):
    config = ImperfectionConfig.ideal().with_updates(phase_jitter_sigma=sigma)
    distribution = ideal_to_imperfect_distribution(SETUP2, config)
    assert distribution.mass(EVEN) == pytest.approx(config_epsilon(sigma), abs=1e-9)


def test_angle_draws_perturb_setup2():
    config = ImperfectionConfig.ideal()
    draws = {"HWP1": 1.0, "HWP4": -1.0}
    distribution = ideal_to_imperfect_distribution(SETUP2, config, angle_draws=draws)
    assert 0.0 < distribution.mass(EVEN) < 0.01
    assert distribution.total == pytest.approx(1.0, abs=1e-12)


def test_lossless_run_pairs_every_trigger():
    config = ImperfectionConfig.ideal()
    trigger, signals = simulate_events(StagePlan(((SETUP2, 1.0),)), config)
    assert len(trigger) == len(signals) > 800
    np.testing.assert_allclose(
        np.sort(signals.timestamps) - trigger.timestamps, config.effective_signal_delay, atol=1e-6
    )
    assert set(trigger.detectors.tolist()) == {0}


def test_dark_counts_are_poisson():
    config = ImperfectionConfig.ideal().with_updates(pair_rate=0.0, dark_count_rate=25.0)
    trigger, signals = simulate_events(StagePlan(((SETUP1, 100.0),)), config)
    for stream, detector in ((trigger, Detector.D0), (signals, Detector.D3)):
        count = stream.for_detector(detector).size
        assert abs(count - 2500) <= 3 * math.sqrt(2500)


def test_streams_are_sorted_and_deterministic():
    plan = StagePlan.default(SETUP1, stage_duration=5.0)
    config = ImperfectionConfig()
    first = simulate_events(plan, config)
    second = simulate_events(plan, config)
    for a, b in zip(first, second):
        assert a.is_sorted
        assert a.identical_to(b)
    other = simulate_events(plan, config.with_updates(rng_seed=7))
    assert not first[1].identical_to(other[1])


def test_monte_carlo_matches_exact_distribution():
    config = ImperfectionConfig(
        detector_efficiency=1.0,
        dark_count_rate=0.0,
        phase_jitter_sigma=1.0,
        phase_drift_sigma=0.0,
    )
    plan = StagePlan(((SETUP2, 100.0),))
    _, signals = simulate_events(plan, config)
    n = len(signals)
    assert n >= 90_000
    # no drift: every bin shares one distribution
    expected = plan_distributions(plan, config)[0].probabilities
    observed = np.array([signals.for_detector(d).size for d in SIGNAL_DETECTORS])
    spread = np.sqrt(n * expected * (1.0 - expected))
    assert np.all(np.abs(observed - n * expected) <= 3.0 * spread)


def test_trace_shape(default_trace):
    assert len(default_trace) == 184
    assert default_trace.counts.shape == (184, 8)
    assert np.all(np.diff(default_trace.times) > 0)
    assert np.all(default_trace.rates >= 0)
    assert default_trace.trigger_counts.sum() > 100_000


def test_d1_is_dark_then_bright_then_dark(default_trace):
    stage1, err1 = default_trace.stage_rate("stage1", Detector.D1)
    stage2, _ = default_trace.stage_rate("stage2", Detector.D1)
    stage3, err3 = default_trace.stage_rate("stage3", Detector.D1)
    assert stage2 > 5 * stage1
    assert stage2 > 5 * stage3
    assert abs(stage1 - stage3) <= 3 * math.hypot(err1, err3)


def test_d2_is_bright_then_dark_then_bright(default_trace):
    stage1, err1 = default_trace.stage_rate("stage1", Detector.D2)
    stage2, _ = default_trace.stage_rate("stage2", Detector.D2)
    stage3, err3 = default_trace.stage_rate("stage3", Detector.D2)
    assert stage1 > 5 * stage2
    assert stage3 > 5 * stage2
    assert abs(stage1 - stage3) <= 3 * math.hypot(err1, err3)


def test_ideal_run_has_no_wrong_clicks(ideal_trace):
    counts = ideal_trace.stage_counts()
    assert counts["stage2"][Detector.D2] == 0
    assert sum(counts["stage2"][d] for d in EVEN) == 0
    assert counts["stage1"][Detector.D1] == counts["stage1"][Detector.D3] == 0
    assert counts["stage2"][Detector.D1] > 0


def test_run_is_deterministic():
    plan = StagePlan.default(SETUP1_PRIME, stage_duration=5.0)
    first = run_experiment(plan, ImperfectionConfig())
    second = run_experiment(plan, ImperfectionConfig())
    np.testing.assert_array_equal(first.counts, second.counts)
    assert first.stages == second.stages


def test_trace_validation():
    with pytest.raises(ValueError):
        ExperimentTrace(
            times=np.array([0.0, 0.0]),
            stages=("stage1", "stage1"),
            counts=np.zeros((2, 8)),
            bin_width=1.0,
            stage_setups={"stage1": SETUP1},
        )
