import numpy as np
import pytest

from src.errors import UnsortedStreamError
from src.experiment.coincidence import count_coincidences
from src.experiment.events import DetectionEvent, EventStream
from src.optics.network import SIGNAL_DETECTORS, Detector

WINDOW = 5.0


def brute_force_counts(trigger, signals, window):
    """Each trigger in time order takes the earliest unused signal inside the window."""
    half = window / 2
    counts = {}
    for detector in SIGNAL_DETECTORS:
        times = list(signals.for_detector(detector))
        used = [False] * len(times)
        counts[detector] = 0
        for t in trigger.timestamps:
            for k, s in enumerate(times):
                if not used[k] and t - half <= s <= t + half:
                    used[k] = True
                    counts[detector] += 1
                    break
    return counts


def stream(times, detectors):
    times = np.asarray(times, dtype=float)
    return EventStream.merged([times], [np.asarray(detectors)])


def test_signal_inside_window():
    counts = count_coincidences(stream([1000.0], [0]), stream([1002.0], [1]), WINDOW)
    assert counts[Detector.D1] == 1


def test_signal_outside_window():
    counts = count_coincidences(stream([1000.0], [0]), stream([1010.0], [1]), WINDOW)
    assert counts.total == 0


def test_window_edges_are_inclusive():
    trigger = stream([1000.0], [0])
    assert count_coincidences(trigger, stream([1002.5], [3]), WINDOW).total == 1
    assert count_coincidences(trigger, stream([997.5], [3]), WINDOW).total == 1


def test_each_trigger_takes_one_signal_per_detector():
    trigger = stream([1000.0], [0])
    signals = stream([999.0, 1001.0, 1001.0], [2, 2, 5])
    counts = count_coincidences(trigger, signals, WINDOW)
    assert counts[Detector.D2] == 1
    assert counts[Detector.D5] == 1


def test_unsorted_input_rejected():
    unsorted = EventStream(np.array([5.0, 1.0]), np.array([1, 1]))
    with pytest.raises(UnsortedStreamError):
        count_coincidences(stream([1.0], [0]), unsorted, WINDOW)
    with pytest.raises(UnsortedStreamError):
        count_coincidences(EventStream(np.array([5.0, 1.0]), np.array([0, 0])), unsorted, WINDOW)


def test_matches_brute_force_on_random_streams():
    rng = np.random.default_rng(20)
    for _ in range(200):
        n_trigger = int(rng.integers(0, 60))
        n_signal = int(rng.integers(0, 60))
        span = float(rng.choice([50.0, 500.0, 5000.0]))
        trigger_times = np.round(rng.uniform(0, span, n_trigger))
        trigger = stream(trigger_times, np.zeros(n_trigger, dtype=int))
        # integer-ns timestamps make exact ties and window-edge hits common
        signal_times = np.round(rng.uniform(0, span, n_signal)) * rng.choice([1.0, 0.5])
        signals = stream(signal_times, rng.integers(1, 9, n_signal))
        expected = brute_force_counts(trigger, signals, WINDOW)
        assert count_coincidences(trigger, signals, WINDOW).per_detector == expected


def test_true_pairs_plus_dark_counts():
    rng = np.random.default_rng(3)
    trigger_times = np.sort(rng.uniform(0, 1e9, 10))
    dark = rng.uniform(0, 1e9, 100)
    signals = stream(
        np.concatenate([trigger_times + 1.0, dark]),
        np.concatenate([np.full(10, 1), rng.integers(1, 9, 100)]),
    )
    trigger = stream(trigger_times, np.zeros(10, dtype=int))
    counts = count_coincidences(trigger, signals, WINDOW)
    assert counts.per_detector == brute_force_counts(trigger, signals, WINDOW)
    # accidentals expected 10 * 100 * 5 ns / 1 s, far below one
    assert counts[Detector.D1] == 10
    assert counts.total - 10 <= 1


def test_accidental_rate_from_dark_counts():
    rng = np.random.default_rng(11)
    duration = 100e9  # 100 s in ns
    trigger_rate, dark_rate = 5_000.0, 5_000.0  # per second
    n_trigger = rng.poisson(trigger_rate * 100)
    n_dark = rng.poisson(dark_rate * 100)
    trigger = stream(rng.uniform(0, duration, n_trigger), np.zeros(n_trigger, dtype=int))
    signals = stream(rng.uniform(0, duration, n_dark), np.full(n_dark, 4))
    expected = trigger_rate * dark_rate * WINDOW * 1e-9 * 100
    observed = count_coincidences(trigger, signals, WINDOW)[Detector.D4]
    assert abs(observed - expected) <= 3 * np.sqrt(expected)


def test_per_bin_counts_follow_trigger_time():
    trigger = stream([0.5e9, 1.5e9, 1.7e9], [0, 0, 0])
    signals = stream([0.5e9 + 1, 1.5e9 + 1, 1.7e9 - 1], [1, 1, 8])
    counts = count_coincidences(trigger, signals, WINDOW, bin_width=1.0, n_bins=3)
    np.testing.assert_array_equal(counts.per_bin[:, 0], [1, 1, 0])
    np.testing.assert_array_equal(counts.per_bin[:, 7], [0, 1, 0])
    assert counts.per_bin.sum() == counts.total


def test_stream_from_hand_written_events():
    events = [
        DetectionEvent(1000.0, Detector.D0),
        DetectionEvent(1001.5, Detector.D3),
        DetectionEvent(2000.0, Detector.D0),
        DetectionEvent(2003.0, Detector.D3),
    ]
    built = EventStream.from_events(events)
    assert list(built) == events
    assert built.counts() == {Detector.D0: 2, Detector.D3: 2}
    assert built.is_sorted

    trigger = EventStream.from_events(e for e in events if e.detector is Detector.D0)
    signals = EventStream.from_events(e for e in events if e.detector is not Detector.D0)
    counts = count_coincidences(trigger, signals, WINDOW)
    assert counts[Detector.D3] == 1
