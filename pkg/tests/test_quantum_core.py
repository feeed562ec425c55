import numpy as np
import pytest

from src.errors import NonCommutingError, NonHermitianError
from src.quantum.core import (
    BASE_OBSERVABLES,
    ObservableName,
    Operator,
    StateVector,
    basis_state,
    bell_state,
    commutes,
    expectation,
    joint_probabilities,
    observable,
    tensor,
)


def test_bell_state_is_normalized():
    assert bell_state().norm == pytest.approx(1.0, abs=1e-12)


def test_state_vector_rejects_bad_norm():
    with pytest.raises(ValueError):
        StateVector(np.array([1.0, 1.0, 0.0, 0.0]))


@pytest.mark.parametrize("name", [ObservableName.Z1Z2, ObservableName.X1X2])
def test_preparation_correlations(name):
    assert expectation(bell_state(), observable(name)) == pytest.approx(1.0, abs=1e-12)


def test_mixed_products_are_anticorrelated():
    probabilities = joint_probabilities(
        bell_state(), observable(ObservableName.Z1X2), observable(ObservableName.X1Z2)
    )
    assert probabilities[(1, -1)] == pytest.approx(0.5, abs=1e-12)
    assert probabilities[(-1, 1)] == pytest.approx(0.5, abs=1e-12)
    assert probabilities[(1, 1)] + probabilities[(-1, -1)] == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize(
    "first, second, expected",
    [
        ("Z1", "X1", False),
        ("Z2", "X2", False),
        ("Z1", "Z2", True),
        ("Z1", "X2", True),
        ("X1", "Z2", True),
        ("X1", "X2", True),
        ("Z1Z2", "X1X2", True),
        ("Z1X2", "X1Z2", True),
        ("Z1Z2", "Z1X2", False),
        ("X1X2", "Z1X2", False),
    ],
)
def test_pairwise_commutators(first, second, expected):
    assert commutes(observable(first), observable(second)) is expected
    assert commutes(observable(second), observable(first)) is expected


def test_product_of_mixed_observables_is_minus_z1z2_x1x2():
    product = observable("Z1X2") @ observable("X1Z2")
    expected = observable("Z1Z2") @ observable("X1X2")
    np.testing.assert_allclose(product.entries, -expected.entries, atol=1e-12)


@pytest.mark.parametrize("name", list(ObservableName))
def test_observables_are_hermitian_involutions(name):
    op = observable(name)
    assert op.is_hermitian()
    assert op.is_involution()


def test_non_commuting_pair_has_no_joint_distribution():
    with pytest.raises(NonCommutingError):
        joint_probabilities(bell_state(), observable("Z1"), observable("X1"))


def test_expectation_needs_hermitian_operator():
    skew = Operator(np.diag([1j, 0, 0, 0]))
    with pytest.raises(NonHermitianError):
        expectation(bell_state(), skew)


def test_basis_state_labels():
    state = basis_state("d", "z-")
    np.testing.assert_allclose(state.amplitudes, [0, 0, 0, 1])
    assert expectation(state, observable("Z1")) == pytest.approx(-1.0)
    assert expectation(state, observable("Z2")) == pytest.approx(-1.0)
    with pytest.raises(ValueError):
        basis_state("left", "z+")


def test_base_observables_order():
    assert [name.value for name in BASE_OBSERVABLES] == ["Z1", "X1", "Z2", "X2"]


def test_tensor_orders_path_before_polarization():
    z = np.diag([1.0, -1.0])
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    np.testing.assert_allclose(tensor(z, x).entries, observable(ObservableName.Z1X2).entries)
    np.testing.assert_allclose(tensor(x, z).entries, observable(ObservableName.X1Z2).entries)
    with pytest.raises(ValueError):
        tensor(np.eye(3), z)


def test_tensor_identity_and_bell_symmetry():
    identity = np.eye(2)
    x = np.array([[0.0, 1.0], [1.0, 0.0]])
    assert tensor(identity, identity).isclose(Operator(np.eye(4)))
    assert tensor(np.diag([1.0, -1.0]), identity).isclose(observable("Z1"))
    assert tensor(x, x).apply(bell_state()).isclose(bell_state())
    assert not tensor(x, identity).apply(bell_state()).isclose(bell_state())


HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def plate(angle):
    c, s = np.cos(np.deg2rad(2.0 * angle)), np.sin(np.deg2rad(2.0 * angle))
    return np.array([[c, s], [s, -c]])


@pytest.mark.parametrize(
    "path_part, pol_part",
    [
        (HADAMARD, np.eye(2)),
        (np.eye(2), plate(22.5)),
        (np.eye(2), plate(-67.5)),
        (np.diag([1.0, np.exp(0.7j)]), np.eye(2)),
        (HADAMARD, plate(12.0)),
    ],
)
def test_evolution_operators_are_unitary(path_part, pol_part):
    evolution = tensor(path_part, pol_part)
    assert evolution.is_unitary()
    assert evolution.apply(bell_state()).norm == pytest.approx(1.0, abs=1e-12)


def test_projector_is_not_unitary():
    assert not Operator(np.diag([1.0, 0.0, 0.0, 0.0])).is_unitary()


@pytest.mark.parametrize(
    "first, second",
    [("Z1", "Z2"), ("X1", "X2"), ("Z1Z2", "X1X2"), ("Z1X2", "X1Z2")],
)
def test_joint_probabilities_form_a_distribution(first, second):
    rng = np.random.default_rng(11)
    for _ in range(25):
        state = StateVector.normalized(rng.normal(size=4) + 1j * rng.normal(size=4))
        probabilities = joint_probabilities(state, observable(first), observable(second))
        assert set(probabilities) == {(1, 1), (1, -1), (-1, 1), (-1, -1)}
        assert min(probabilities.values()) >= 0.0
        assert sum(probabilities.values()) == pytest.approx(1.0, abs=1e-12)
