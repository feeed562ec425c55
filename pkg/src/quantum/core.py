from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, Tuple

import numpy as np

from src.errors import NonCommutingError, NonHermitianError

NORM_TOLERANCE = 1e-12
COMMUTATION_TOLERANCE = 1e-10

# Path-major ordering: index = 2 * path + polarization, path u=0 / d=1, polarization z+=0 / z-=1.
BASIS_LABELS = ("u,z+", "u,z-", "d,z+", "d,z-")

_I2 = np.eye(2, dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)


@dataclass(frozen=True, eq=False)
class StateVector:
    """Pure state of one photon over the path x polarization basis."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape(-1)
        if amplitudes.shape != (4,):
            raise ValueError(f"a state needs 4 amplitudes, got {amplitudes.shape[0]}")
        norm = float(np.sum(np.abs(amplitudes) ** 2))
        if abs(norm - 1.0) > NORM_TOLERANCE:
            raise ValueError(f"state is not normalized (norm {norm:.15f})")
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    @classmethod
    def normalized(cls, values: Iterable[complex]) -> StateVector:
        amplitudes = np.asarray(list(values), dtype=complex)
        return cls(amplitudes / np.linalg.norm(amplitudes))

    @property
    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def isclose(self, other: StateVector, atol: float = NORM_TOLERANCE) -> bool:
        return bool(np.allclose(self.amplitudes, other.amplitudes, atol=atol, rtol=0.0))

    def __repr__(self) -> str:
        pairs = zip(BASIS_LABELS, self.amplitudes)
        terms = ", ".join(f"{label}: {amp:.6g}" for label, amp in pairs)
        return f"StateVector({terms})"


@dataclass(frozen=True, eq=False)
class Operator:
    entries: np.ndarray

    def __post_init__(self):
        entries = np.asarray(self.entries, dtype=complex)
        if entries.shape != (4, 4):
            raise ValueError(f"operators act on the 4-dim space, got shape {entries.shape}")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    def __matmul__(self, other: Operator) -> Operator:
        return Operator(self.entries @ other.entries)

    def apply(self, state: StateVector) -> StateVector:
        return StateVector(self.entries @ state.amplitudes)

    def is_hermitian(self, atol: float = NORM_TOLERANCE) -> bool:
        return bool(np.allclose(self.entries, self.entries.conj().T, atol=atol, rtol=0.0))

    def is_involution(self, atol: float = NORM_TOLERANCE) -> bool:
        return bool(np.allclose(self.entries @ self.entries, np.eye(4), atol=atol, rtol=0.0))

    def is_unitary(self, atol: float = NORM_TOLERANCE) -> bool:
        gram = self.entries.conj().T @ self.entries
        return bool(np.allclose(gram, np.eye(4), atol=atol, rtol=0.0))

    def isclose(self, other: Operator, atol: float = NORM_TOLERANCE) -> bool:
        return bool(np.allclose(self.entries, other.entries, atol=atol, rtol=0.0))


class ObservableName(str, Enum):
    Z1 = "Z1"
    X1 = "X1"
    Z2 = "Z2"
    X2 = "X2"
    Z1Z2 = "Z1Z2"
    X1X2 = "X1X2"
    Z1X2 = "Z1X2"
    X1Z2 = "X1Z2"

    @property
    def factors(self) -> Tuple[ObservableName, ...]:
        """Base observables whose product this name denotes."""
        text = self.value
        return tuple(ObservableName(text[i : i + 2]) for i in range(0, len(text), 2))

    @property
    def is_product(self) -> bool:
        return len(self.value) > 2


BASE_OBSERVABLES = (ObservableName.Z1, ObservableName.X1, ObservableName.Z2, ObservableName.X2)


def tensor(path_part: np.ndarray, pol_part: np.ndarray) -> Operator:
    path_part = np.asarray(path_part, dtype=complex)
    pol_part = np.asarray(pol_part, dtype=complex)
    if path_part.shape != (2, 2) or pol_part.shape != (2, 2):
        raise ValueError("tensor factors must be 2x2 matrices")
    return Operator(np.kron(path_part, pol_part))


_BASE_MATRICES: Dict[ObservableName, Operator] = {
    ObservableName.Z1: tensor(_Z, _I2),
    ObservableName.X1: tensor(_X, _I2),
    ObservableName.Z2: tensor(_I2, _Z),
    ObservableName.X2: tensor(_I2, _X),
}


def observable(name: ObservableName | str) -> Operator:
    name = ObservableName(name)
    result = Operator(np.eye(4, dtype=complex))
    for factor in name.factors:
        result = result @ _BASE_MATRICES[factor]
    return result


def basis_state(path: str, polarization: str) -> StateVector:
    """Product state such as |u,z+>; path in {u, d}, polarization in {z+, z-}."""
    label = f"{path},{polarization}"
    if label not in BASIS_LABELS:
        raise ValueError(f"unknown basis state |{label}>")
    amplitudes = np.zeros(4, dtype=complex)
    amplitudes[BASIS_LABELS.index(label)] = 1.0
    return StateVector(amplitudes)


def bell_state() -> StateVector:
    """(|u,z+> + |d,z->)/sqrt(2), the state prepared by HWP0 and PBS0."""
    return StateVector(np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0))


def commutator(a: Operator, b: Operator) -> Operator:
    return Operator(a.entries @ b.entries - b.entries @ a.entries)


def commutes(a: Operator, b: Operator, atol: float = COMMUTATION_TOLERANCE) -> bool:
    return float(np.max(np.abs(commutator(a, b).entries))) <= atol


def expectation(state: StateVector, op: Operator) -> float:
    if not op.is_hermitian():
        raise NonHermitianError("expectation values are only defined here for Hermitian operators")
    value = np.vdot(state.amplitudes, op.entries @ state.amplitudes)
    if abs(value.imag) > NORM_TOLERANCE:
        raise NonHermitianError(f"expectation has imaginary part {value.imag:.3e}")
    return float(value.real)


def joint_probabilities(
    state: StateVector, a: Operator, b: Operator
) -> Dict[Tuple[int, int], float]:
    """Distribution of the joint outcome of two commuting +-1 observables."""
    for label, op in (("first", a), ("second", b)):
        if not op.is_hermitian():
            raise NonHermitianError(f"{label} observable is not Hermitian")
        if not op.is_involution():
            raise ValueError(f"{label} observable does not square to the identity")
    if not commutes(a, b):
        residual = float(np.max(np.abs(commutator(a, b).entries)))
        raise NonCommutingError(
            f"observables do not commute (max |[A, B]| = {residual:.3e}); no joint measurement"
        )

    identity = np.eye(4, dtype=complex)
    probabilities: Dict[Tuple[int, int], float] = {}
    for s in (1, -1):
        proj_a = (identity + s * a.entries) / 2
        for t in (1, -1):
            proj_b = (identity + t * b.entries) / 2
            joint = proj_a @ proj_b
            value = np.vdot(state.amplitudes, joint @ state.amplitudes).real
            probabilities[(s, t)] = max(float(value), 0.0)
    return probabilities
