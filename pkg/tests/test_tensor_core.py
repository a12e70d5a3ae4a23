import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qhistory.isometry import Isometry, state_from_isometry
from qhistory.measurement import bell_basis
from qhistory.tensor_core import (
    FullContractionError,
    Ket,
    LabelCollisionError,
    LabelError,
    Operator,
    Projector,
    ShapeError,
    apply,
    fidelity_up_to_phase,
    inner,
    marginal_pure_state,
    partial_inner,
    project,
    reduced_density,
    schmidt_rank,
    tensor,
)

from strategies import dims, seeds

UP, DOWN = np.array([1, 0]), np.array([0, 1])
S2 = 1 / np.sqrt(2)


def phi_plus(a, b):
    return Ket((a, b), np.array([[1, 0], [0, 1]]) * S2)


def psi_minus(a, b):
    return Ket((a, b), np.array([[0, 1], [-1, 0]]) * S2)


# construction


def test_labels_are_stored_canonically():
    amps = np.arange(6).reshape(2, 3)
    k = Ket((5, 1), amps)
    assert k.labels == (1, 5)
    assert k.dims == (3, 2)
    np.testing.assert_array_equal(k.as_array((5, 1)), amps)


def test_mixed_label_types_sort_ints_first():
    k = Ket(("b", 2, "a"), np.zeros((2, 2, 2)))
    assert k.labels == (2, "a", "b")


def test_amplitudes_are_read_only():
    k = Ket.from_vector(0, [1, 0])
    with pytest.raises(ValueError):
        k.amps[0] = 2


def test_flat_vector_needs_matching_dims():
    k = Ket((0, 1), np.arange(4), dims=2)
    assert k.dims == (2, 2)
    with pytest.raises(ShapeError):
        Ket((0, 1), np.arange(5), dims=2)
    with pytest.raises(ShapeError):
        Ket((0, 1), np.arange(4))


def test_repeated_label_rejected():
    with pytest.raises(LabelCollisionError):
        Ket((0, 0), np.zeros((2, 2)))


# tensor


def test_tensor_of_basis_kets():
    k = tensor(Ket.from_vector(0, UP), Ket.from_vector(1, DOWN))
    expected = np.zeros((2, 2))
    expected[0, 1] = 1
    np.testing.assert_array_equal(k.amps, expected)


def test_tensor_input_with_epr_pair():
    alpha, beta = 0.6, 0.8j
    k = tensor(Ket.from_vector(0, [alpha, beta]), phi_plus(2, 3))
    expected = np.array([alpha, 0, 0, alpha, beta, 0, 0, beta]) * S2
    assert k.labels == (0, 2, 3)
    np.testing.assert_allclose(k.vector, expected, atol=1e-15)


def test_tensor_label_collision():
    with pytest.raises(LabelCollisionError):
        tensor(Ket.from_vector(1, UP), Ket.from_vector(1, DOWN))


@given(seeds, dims)
def test_tensor_preserves_normalization(seed, d):
    rng = np.random.default_rng(seed)
    k = tensor(Ket.random((0,), d, rng), Ket.random((1, 2), d, rng))
    assert k.is_normalized(1e-12)


@given(seeds, dims)
def test_tensor_matches_kron(seed, d):
    rng = np.random.default_rng(seed)
    a, b = Ket.random((0,), d, rng), Ket.random((1,), d, rng)
    np.testing.assert_allclose(tensor(a, b).vector, np.kron(a.vector, b.vector), atol=1e-14)


# partial scalar product


def test_partial_inner_on_product():
    chi = np.array([0.6, 0.8j])
    phi = np.array([S2, S2])
    kappa = np.array([1, 1j]) * S2
    state = tensor(Ket.from_vector(2, phi), Ket.from_vector(3, kappa))
    out = partial_inner(Ket.from_vector(2, chi), state)
    np.testing.assert_allclose(out.vector, np.vdot(chi, phi) * kappa, atol=1e-15)


def test_partial_inner_on_singlet():
    out = partial_inner(Ket.from_vector(2, UP), psi_minus(2, 3))
    assert out.labels == (3,)
    np.testing.assert_allclose(out.vector, S2 * DOWN, atol=1e-15)


def test_partial_inner_matches_index_sum(rng):
    bra = Ket.random((0,), 3, rng)
    state = Ket.random((0, 1), 3, rng)
    out = partial_inner(bra, state)
    expected = np.zeros(3, dtype=complex)
    for i in range(3):
        for j in range(3):
            expected[j] += np.conj(bra.vector[i]) * state.amps[i, j]
    np.testing.assert_allclose(out.vector, expected, atol=1e-14)


def test_partial_inner_rejects_full_contraction():
    with pytest.raises(FullContractionError):
        partial_inner(phi_plus(0, 1), phi_plus(0, 1))


def test_partial_inner_rejects_foreign_label():
    with pytest.raises(LabelError):
        partial_inner(Ket.from_vector(7, UP), phi_plus(0, 1))


@given(seeds, dims)
def test_contraction_is_associative(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((0, 1, 2), d, rng)
    s, t = Ket.random((0,), d, rng), Ket.random((1,), d, rng)
    stepwise = partial_inner(t, partial_inner(s, state))
    at_once = partial_inner(tensor(s, t), state)
    np.testing.assert_allclose(stepwise.vector, at_once.vector, atol=1e-12)


# operators


def test_identity_operator_leaves_state():
    state = Ket.random((0, 1), 2, np.random.default_rng(1))
    out = apply(Operator((1,), np.eye(2)), state)
    np.testing.assert_allclose(out.amps, state.amps)


def test_pauli_x_flips_one_factor():
    x = np.array([[0, 1], [1, 0]])
    state = tensor(Ket.from_vector(0, UP), Ket.from_vector(1, UP))
    out = apply(Operator((1,), x), state)
    np.testing.assert_allclose(out.amps, tensor(Ket.from_vector(0, UP), Ket.from_vector(1, DOWN)).amps)


def test_apply_to_relabelled_targets():
    x = np.array([[0, 1], [1, 0]])
    state = Ket.basis((0, 1), (0, 0), 2)
    out = apply(Operator((9,), x), state, target_labels=(0,))
    assert abs(out.amps[1, 0]) == 1


def test_unitary_on_source_rotates_the_basis(rng):
    # (U x 1) sum_i |i> x I|i>  ==  sum_i |u_i> x (I o U^dag)|u_i>
    from qhistory.isometry import compose, linear
    from qhistory.tensor_core import random_unitary

    d = 3
    iso = Isometry(1, 2, random_unitary(d, rng))
    u = random_unitary(d, rng)
    lhs = apply(Operator((1,), u, unitary_hint=True), state_from_isometry(iso))
    rotated = compose(iso, linear(1, u.conj().T))
    np.testing.assert_allclose(lhs.amps, state_from_isometry(rotated, basis=u).amps, atol=1e-12)
    np.testing.assert_allclose(lhs.amps, state_from_isometry(rotated).amps, atol=1e-12)


def test_operator_shape_mismatch():
    with pytest.raises(ShapeError):
        apply(Operator((0,), np.eye(3)), Ket.basis((0,), (0,), 2))


def test_unitary_hint_is_checked():
    with pytest.raises(ValueError):
        Operator((0,), np.array([[1, 1], [0, 1]]), unitary_hint=True)


# projection


def test_project_bell_state_onto_itself():
    st_ = phi_plus(2, 3)
    out, prob = project(Projector.onto(st_), st_)
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert fidelity_up_to_phase(out, st_) == pytest.approx(1.0, abs=1e-12)


def test_bell_projection_teleports_with_quarter_probability():
    phi = np.array([0.6, 0.8j])
    state = tensor(Ket.from_vector(1, phi), phi_plus(2, 3))
    out, prob = project(Projector.onto(phi_plus(1, 2)), state)
    assert prob == pytest.approx(0.25, abs=1e-12)
    bob = marginal_pure_state(out, (3,))
    assert fidelity_up_to_phase(bob, Ket.from_vector(3, phi)) == pytest.approx(1.0, abs=1e-12)


def test_orthogonal_projection_is_a_zero_branch():
    out, prob = project(Projector.onto(Ket.basis((0,), (1,), 2)), Ket.basis((0,), (0,), 2))
    assert out is None
    assert prob == 0.0


def test_project_requires_normalized_state():
    with pytest.raises(ValueError):
        project(Projector.onto(Ket.basis((0,), (0,), 2)), Ket.from_vector(0, [1, 1]))


@given(seeds, dims)
def test_collapsed_state_is_normalized(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((0, 1, 2), d, rng)
    out, prob = project(Projector.onto(Ket.random((0, 1), d, rng)), state)
    if out is not None:
        assert out.is_normalized(1e-12)
        assert 0.0 <= prob <= 1.0


@given(seeds, dims)
def test_projection_is_idempotent(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((0, 1), d, rng)
    p = Projector.onto(Ket.random((1,), d, rng))
    once, _ = project(p, state)
    twice, prob = project(p, once)
    assert prob == pytest.approx(1.0, abs=1e-12)
    assert fidelity_up_to_phase(once, twice) == pytest.approx(1.0, abs=1e-12)


@given(seeds, dims)
def test_complete_set_probabilities_sum_to_one(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((0, 1, 2), d, rng)
    mset = bell_basis(Isometry.identity(0, 1, d))
    total = sum(project(p, state)[1] for p in mset.projectors)
    assert total == pytest.approx(1.0, abs=1e-12)


def test_product_projector_matches_kron():
    a, b = Ket.from_vector(0, UP), Ket.from_vector(2, np.array([1, 1]) * S2)
    p = Projector.product((a, b))
    np.testing.assert_allclose(p.matrix(), np.kron(np.outer(UP, UP), np.full((2, 2), 0.5)), atol=1e-15)


def test_product_projector_parts_must_be_disjoint():
    with pytest.raises(LabelCollisionError):
        Projector.product((Ket.from_vector(0, UP), Ket.from_vector(0, DOWN)))


# fidelity and reductions


def test_fidelity_ignores_global_phase(rng):
    a = Ket.random((0, 1), 3, rng)
    assert fidelity_up_to_phase(a, a.scaled(np.exp(0.7j))) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_orthogonal_kets():
    assert fidelity_up_to_phase(Ket.basis((0,), (0,), 2), Ket.basis((0,), (1,), 2)) == 0.0


def test_fidelity_of_plus_and_minus():
    plus = Ket.from_vector(0, np.array([1, 1]) * S2)
    minus = Ket.from_vector(0, np.array([1, -1]) * S2)
    assert fidelity_up_to_phase(plus, minus) == pytest.approx(0.0, abs=1e-15)


def test_inner_requires_same_labels():
    with pytest.raises(LabelError):
        inner(Ket.basis((0,), (0,), 2), Ket.basis((1,), (0,), 2))


def test_bell_state_reduces_to_maximally_mixed():
    rho = reduced_density(psi_minus(0, 1), (0,))
    np.testing.assert_allclose(rho, np.eye(2) / 2, atol=1e-15)
    assert schmidt_rank(psi_minus(0, 1), (0,)) == 2
    assert marginal_pure_state(psi_minus(0, 1), (0,)) is None


def test_marginal_of_product_state(rng):
    a, b = Ket.random((0,), 3, rng), Ket.random((1,), 3, rng)
    m = marginal_pure_state(tensor(a, b), (1,))
    assert fidelity_up_to_phase(m, b) == pytest.approx(1.0, abs=1e-12)


@given(st.integers(2, 4), seeds)
def test_random_ket_is_normalized(d, seed):
    assert Ket.random((0, 1), d, np.random.default_rng(seed)).is_normalized()
