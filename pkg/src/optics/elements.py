from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Mapping, Tuple, Union

import numpy as np

from src.quantum.core import StateVector


class Polarization(str, Enum):
    Z_PLUS = "z+"  # vertical, reflected by every PBS
    Z_MINUS = "z-"  # horizontal, transmitted

    @property
    def index(self) -> int:
        return 0 if self is Polarization.Z_PLUS else 1


POLARIZATIONS = (Polarization.Z_PLUS, Polarization.Z_MINUS)

Mode = Tuple[str, Polarization]


@dataclass(frozen=True, eq=False)
class ModeState:
    """Photon amplitudes spread over named rails, two polarization modes per rail."""

    amplitudes: Mapping[Mode, complex] = field(default_factory=dict)

    @classmethod
    def from_state_vector(cls, state: StateVector, up: str = "u", down: str = "d") -> ModeState:
        a = state.amplitudes
        return cls(
            {
                (up, Polarization.Z_PLUS): complex(a[0]),
                (up, Polarization.Z_MINUS): complex(a[1]),
                (down, Polarization.Z_PLUS): complex(a[2]),
                (down, Polarization.Z_MINUS): complex(a[3]),
            }
        )

    @property
    def rails(self) -> set[str]:
        return {rail for rail, _ in self.amplitudes}

    @property
    def norm(self) -> float:
        return float(sum(abs(amp) ** 2 for amp in self.amplitudes.values()))

    def amplitude(self, rail: str, polarization: Polarization) -> complex:
        return self.amplitudes.get((rail, polarization), 0j)

    def jones(self, rail: str) -> np.ndarray:
        """Polarization amplitudes on one rail as a (z+, z-) vector."""
        return np.array([self.amplitude(rail, pol) for pol in POLARIZATIONS], dtype=complex)

    def probability(self, rail: str) -> float:
        return float(np.sum(np.abs(self.jones(rail)) ** 2))

    def rerouted(self, consumed: Iterable[str], produced: Mapping[str, np.ndarray]) -> ModeState:
        """Copy with the consumed rails removed and the produced jones vectors written."""
        consumed = set(consumed)
        amplitudes: Dict[Mode, complex] = {
            mode: amp for mode, amp in self.amplitudes.items() if mode[0] not in consumed
        }
        for rail, vector in produced.items():
            for pol in POLARIZATIONS:
                previous = amplitudes.get((rail, pol), 0j)
                amplitudes[(rail, pol)] = previous + complex(vector[pol.index])
        return ModeState(amplitudes)


def hwp_jones(angle: float) -> np.ndarray:
    """Half-wave plate with its fast axis at `angle` degrees, in (z+, z-) ordering.

    0 deg keeps z+/z- (z- picks up a sign), 22.5 deg maps the z basis onto the +-45 deg
    basis, 45 deg swaps z+ and z-.
    """
    if not np.isfinite(angle):
        raise ValueError(f"waveplate angle must be finite, got {angle}")
    two_theta = np.deg2rad(2.0 * angle)
    c, s = np.cos(two_theta), np.sin(two_theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def pbs_transform(
    state: ModeState,
    input_rail: str,
    reflected_rail: str,
    transmitted_rail: str,
    extinction: float = 0.0,
) -> ModeState:
    """Route z+ to the reflected rail and z- to the transmitted rail.

    `extinction` is the probability that a photon leaks into the wrong port; the
    leaky splitter stays unitary.
    """
    if not 0.0 <= extinction <= 1.0:
        raise ValueError(f"extinction must be a probability, got {extinction}")
    v, h = state.jones(input_rail)
    keep, leak = np.sqrt(1.0 - extinction), np.sqrt(extinction)
    reflected = np.array([keep * v, -leak * h], dtype=complex)
    transmitted = np.array([leak * v, keep * h], dtype=complex)
    return state.rerouted([input_rail], {reflected_rail: reflected, transmitted_rail: transmitted})


def bs_transform(
    state: ModeState, rail_a: str, rail_b: str, out_plus: str, out_minus: str
) -> ModeState:
    """50/50 beamsplitter acting as a real Hadamard on the rail index."""
    a, b = state.jones(rail_a), state.jones(rail_b)
    return state.rerouted(
        [rail_a, rail_b],
        {out_plus: (a + b) / np.sqrt(2.0), out_minus: (a - b) / np.sqrt(2.0)},
    )


@dataclass(frozen=True)
class HalfWavePlate:
    name: str
    rail: str
    angle: float  # deg; any finite value, the plate repeats every 180 deg

    @property
    def inputs(self) -> Tuple[str, ...]:
        return (self.rail,)

    @property
    def outputs(self) -> Tuple[str, ...]:
        return (self.rail,)

    def apply(self, state: ModeState) -> ModeState:
        rotated = hwp_jones(self.angle) @ state.jones(self.rail)
        return state.rerouted([self.rail], {self.rail: rotated})


@dataclass(frozen=True)
class PolarizingBeamsplitter:
    name: str
    input_rail: str
    reflected_rail: str
    transmitted_rail: str
    extinction: float = 0.0

    @property
    def inputs(self) -> Tuple[str, ...]:
        return (self.input_rail,)

    @property
    def outputs(self) -> Tuple[str, ...]:
        return (self.reflected_rail, self.transmitted_rail)

    def apply(self, state: ModeState) -> ModeState:
        return pbs_transform(
            state, self.input_rail, self.reflected_rail, self.transmitted_rail, self.extinction
        )


@dataclass(frozen=True)
class Beamsplitter:
    name: str
    rail_a: str
    rail_b: str
    out_plus: str
    out_minus: str

    @property
    def inputs(self) -> Tuple[str, ...]:
        return (self.rail_a, self.rail_b)

    @property
    def outputs(self) -> Tuple[str, ...]:
        return (self.out_plus, self.out_minus)

    def apply(self, state: ModeState) -> ModeState:
        return bs_transform(state, self.rail_a, self.rail_b, self.out_plus, self.out_minus)


@dataclass(frozen=True)
class PhaseShift:
    name: str
    rail: str
    phase: float

    @property
    def inputs(self) -> Tuple[str, ...]:
        return (self.rail,)

    @property
    def outputs(self) -> Tuple[str, ...]:
        return (self.rail,)

    def apply(self, state: ModeState) -> ModeState:
        shifted = np.exp(1j * self.phase) * state.jones(self.rail)
        return state.rerouted([self.rail], {self.rail: shifted})


OpticalElement = Union[HalfWavePlate, PolarizingBeamsplitter, Beamsplitter, PhaseShift]
