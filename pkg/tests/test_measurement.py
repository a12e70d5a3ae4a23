import numpy as np
import pytest
from hypothesis import given, settings
from scipy.stats import chisquare

from qhistory.isometry import Isometry, state_from_isometry
from qhistory.measurement import (
    IncompleteMeasurementError,
    MeasurementSet,
    bell_basis,
    commutator_norm,
    commutes,
    computational_basis,
    joint_distribution,
    order_independence_witness,
    outcome_key,
    product_basis,
    run_history,
    sample_history,
    sample_histories,
)
from qhistory.scenarios import build_triple_teleportation
from qhistory.tensor_core import Ket, Projector, fidelity_up_to_phase, random_unitary, tensor

from strategies import dims, seeds


def teleport_state(phi, d=2):
    return tensor(Ket.from_vector(1, phi), state_from_isometry(Isometry.identity(2, 3, d)))


def dense_projector(p, labels, d):
    # full-space matrix of a rank-1 (or product) projector, built by einsum
    n = len(labels)
    v = p.vector.as_array(p.labels)
    letters = "abcdefghij"
    rows, cols = letters[:n], letters[n:2 * n]
    ident = np.eye(d)
    operands, subs = [v, v.conj()], [
        "".join(rows[labels.index(lab)] for lab in p.labels),
        "".join(cols[labels.index(lab)] for lab in p.labels),
    ]
    for lab in labels:
        if lab not in p.labels:
            i = labels.index(lab)
            operands.append(ident)
            subs.append(rows[i] + cols[i])
    out = np.einsum(",".join(subs) + "->" + rows + cols, *operands)
    return out.reshape(d**n, d**n)


def brute_history(initial, sequence, d):
    # probability of every outcome tuple from dense projector products
    labels = initial.labels
    psi = initial.vector
    mats = [[dense_projector(p, labels, d) for p in m.projectors] for m in sequence]
    table = {}
    for idx in np.ndindex(*(len(m) for m in sequence)):
        v = psi
        for m, k in zip(mats, idx):
            v = m[k] @ v
        key = outcome_key(tuple((s.name, k) for s, k in zip(sequence, idx)))
        table[key] = float(np.vdot(v, v).real)
    return table


# measurement sets


def test_bell_basis_is_complete():
    for d in (2, 3, 4):
        m = bell_basis(Isometry.identity(0, 1, d))
        assert len(m) == d * d
        assert m.completeness_error() < 1e-12
        assert all(p.isometry is not None for p in m.projectors)


def test_incomplete_set_is_rejected():
    m = MeasurementSet("half", (Projector.onto(Ket.basis((0,), (0,), 2)),))
    with pytest.raises(IncompleteMeasurementError):
        m.check_complete()
    with pytest.raises(IncompleteMeasurementError):
        run_history(Ket.basis((0,), (0,), 2), [m])


def test_product_basis_index_order():
    m = computational_basis("z", (4, 1), 2)
    assert m.labels == (1, 4)
    np.testing.assert_array_equal(m.projectors[1].vector.amps, Ket.basis((1, 4), (0, 1), 2).amps)


def test_set_outcomes_match_single_projections(rng):
    from qhistory.tensor_core import project

    state = Ket.random((0, 1, 2), 3, rng)
    m = bell_basis(Isometry(0, 2, random_unitary(3, rng)))
    for (k1, p1), proj in zip(m.outcomes(state), m.projectors):
        k2, p2 = project(proj, state)
        assert p1 == pytest.approx(p2, abs=1e-14)
        assert fidelity_up_to_phase(k1, k2) == pytest.approx(1.0, abs=1e-12)


# histories


def test_single_bell_measurement_has_four_equal_branches():
    recs = run_history(teleport_state(np.array([0.6, 0.8j])), [bell_basis(Isometry.identity(1, 2, 2))])
    assert len(recs) == 4
    for r in recs:
        assert r.prob == pytest.approx(0.25, abs=1e-12)
        assert r.final_state.is_normalized()


def test_basis_state_in_its_own_basis():
    recs = run_history(Ket.basis((0,), (1,), 3), [computational_basis("z", (0,), 3)])
    live = [r for r in recs if r.possible]
    assert len(live) == 1
    assert live[0].outcomes == (("z", 1),)
    assert live[0].prob == pytest.approx(1.0)
    assert all(r.final_state is None and r.prob == 0.0 for r in recs if not r.possible)


def test_zero_branches_are_expanded_to_full_length():
    state = Ket.basis((0, 1), (0, 0), 2)
    recs = run_history(state, [computational_basis("a", (0,), 2), computational_basis("b", (1,), 2)])
    assert len(recs) == 4
    assert all(len(r.outcomes) == 2 for r in recs)
    assert sum(r.possible for r in recs) == 1


def test_triple_sequence_enumerates_64_branches():
    sc = build_triple_teleportation(2, np.array([0.6, 0.8]))
    recs = run_history(sc.initial_state(), sc.measurement_order)
    assert len(recs) == 64
    assert sum(r.prob for r in recs) == pytest.approx(1.0, abs=1e-10)


def test_history_matches_dense_oracle(rng):
    sc = build_triple_teleportation(2, Ket.random((0,), 2, rng).vector, iso20_variant="shifted")
    table = joint_distribution(run_history(sc.initial_state(), sc.measurement_order))
    brute = brute_history(sc.initial_state(), sc.measurement_order, 2)
    assert set(table) == set(brute)
    for k in brute:
        assert table[k] == pytest.approx(brute[k], abs=1e-12)


@settings(max_examples=25)
@given(seeds, dims)
def test_probability_is_conserved(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((0, 1, 2), d, rng)
    seq = [
        bell_basis(Isometry(0, 1, random_unitary(d, rng)), "a"),
        bell_basis(Isometry(1, 2, random_unitary(d, rng)), "b"),
    ]
    assert sum(r.prob for r in run_history(state, seq)) == pytest.approx(1.0, abs=1e-10)


def test_duplicate_set_names_rejected():
    m = computational_basis("z", (0,), 2)
    with pytest.raises(ValueError):
        run_history(Ket.basis((0,), (0,), 2), [m, m])


def test_unnormalized_initial_state_rejected():
    with pytest.raises(ValueError):
        run_history(Ket.from_vector(0, [1, 1]), [computational_basis("z", (0,), 2)])


# distributions and order


def test_one_set_table_is_the_outcome_probabilities(rng):
    state = Ket.random((0,), 3, rng)
    table = joint_distribution(run_history(state, [computational_basis("z", (0,), 3)]))
    for k in range(3):
        assert table[(("z", k),)] == pytest.approx(abs(state.vector[k]) ** 2)


def test_keys_ignore_chronological_order():
    assert outcome_key((("b", 1), ("a", 0))) == outcome_key((("a", 0), ("b", 1)))


@settings(max_examples=25)
@given(seeds, dims)
def test_commuting_sets_are_order_free(seed, d):
    rng = np.random.default_rng(seed)
    state = Ket.random((1, 2, 3, 4), d, rng)
    victor = bell_basis(Isometry(2, 3, random_unitary(d, rng)), "victor")
    ab = product_basis("ab", {1: random_unitary(d, rng), 4: random_unitary(d, rng)})
    for p in victor.projectors[:3]:
        assert commutes(p, ab.projectors[0])[0]
    fwd = run_history(state, [victor, ab])
    rev = {r.key: r for r in run_history(state, [ab, victor])}
    for r in fwd:
        other = rev[r.key]
        assert r.prob == pytest.approx(other.prob, abs=1e-10)
        if r.possible and r.prob > 1e-12:
            assert fidelity_up_to_phase(r.final_state, other.final_state) == pytest.approx(1.0, abs=1e-9)


def test_shifted_triple_orders_differ_in_final_states():
    rng = np.random.default_rng(3)
    phi = Ket.random((0,), 3, rng).vector
    fwd = build_triple_teleportation(3, phi, iso20_variant="shifted")
    rev = build_triple_teleportation(3, phi, iso20_variant="shifted", order="reversed")
    a = {r.key: r for r in run_history(fwd.initial_state(), fwd.measurement_order)}
    b = {r.key: r for r in run_history(rev.initial_state(), rev.measurement_order)}
    from qhistory.tensor_core import marginal_pure_state

    gaps = [
        1 - fidelity_up_to_phase(marginal_pure_state(a[k].final_state, (4,)), marginal_pure_state(b[k].final_state, (4,)))
        for k in a if a[k].possible and b[k].possible
    ]
    assert max(gaps) > 0.01


# commutators and witnesses


def test_disjoint_projectors_commute(rng):
    p = Projector.product((Ket.random((1,), 2, rng), Ket.random((4,), 2, rng)))
    q = bell_basis(Isometry.identity(2, 3, 2)).projectors[0]
    assert commutes(p, q) == (True, 0.0)


def test_projector_commutes_with_itself(rng):
    p = Projector.onto(Ket.random((0, 1), 3, rng))
    ok, norm = commutes(p, p)
    assert ok and norm < 1e-12


def test_overlapping_bell_projectors_do_not_commute():
    q02 = bell_basis(Isometry.identity(0, 2, 2)).projectors[0]
    q01 = bell_basis(Isometry.identity(0, 1, 2)).projectors[0]
    ok, norm = commutes(q02, q01)
    assert not ok
    assert norm > 0.1


def test_commutator_matches_dense_matrices(rng):
    p = Projector.onto(Ket.random((0, 2), 2, rng))
    q = Projector.onto(Ket.random((0, 1), 2, rng))
    labels = (0, 1, 2)
    pm, qm = dense_projector(p, labels, 2), dense_projector(q, labels, 2)
    assert commutator_norm(p, q) == pytest.approx(np.max(np.abs(pm @ qm - qm @ pm)), abs=1e-14)


def test_witness_vanishes_for_disjoint_and_equal_projectors(rng):
    state = Ket.random((0, 1, 2), 2, rng)
    p = Projector.onto(Ket.random((0, 1), 2, rng))
    q = Projector.onto(Ket.random((2,), 2, rng))
    assert order_independence_witness(state, p, q) == pytest.approx(0.0, abs=1e-15)
    assert order_independence_witness(state, p, p) == pytest.approx(0.0, abs=1e-15)


def test_witness_detects_order_on_generic_state(rng):
    state = Ket.random((0, 1, 2), 2, rng)
    q02 = bell_basis(Isometry.identity(0, 2, 2))
    q01 = bell_basis(Isometry.identity(0, 1, 2))
    wits = [abs(order_independence_witness(state, p, q)) for p in q02.projectors for q in q01.projectors]
    assert max(wits) > 1e-3


@pytest.mark.parametrize("d,variant", [(2, "default"), (2, "shifted"), (3, "default"), (3, "shifted")])
def test_witness_is_blind_on_the_triple_initial_state(d, variant):
    # every conditional Bell outcome is uniform here, so both orders give 1/d**4
    rng = np.random.default_rng(8)
    sc = build_triple_teleportation(d, Ket.random((0,), d, rng).vector, iso20_variant=variant)
    sets = {m.name: m for m in sc.measurement_order}
    init = sc.initial_state()
    for p in sets["alice_02"].projectors:
        for q in sets["alice_01"].projectors:
            assert abs(order_independence_witness(init, p, q)) < 1e-12


def test_witness_equals_sequential_probability_gap(rng):
    state = Ket.random((0, 1, 2), 2, rng)
    p = Projector.onto(Ket.random((0, 1), 2, rng))
    q = Projector.onto(Ket.random((1, 2), 2, rng))
    qp = np.linalg.norm(p.apply(q.apply(state)).vector) ** 2
    pq = np.linalg.norm(q.apply(p.apply(state)).vector) ** 2
    assert order_independence_witness(state, p, q) == pytest.approx(qp - pq, abs=1e-14)


# sampling


def test_deterministic_sequence_ignores_seed():
    state = Ket.basis((0, 1), (1, 0), 2)
    seq = [computational_basis("a", (0,), 2), computational_basis("b", (1,), 2)]
    for seed in range(5):
        rec = sample_history(state, seq, seed)
        assert rec.outcomes == (("a", 1), ("b", 0))
        assert rec.prob == pytest.approx(1.0)


def test_fixed_seed_is_reproducible():
    state = teleport_state(np.array([0.6, 0.8]))
    seq = [bell_basis(Isometry.identity(1, 2, 2))]
    a, b = sample_history(state, seq, 42), sample_history(state, seq, 42)
    assert a.outcomes == b.outcomes
    np.testing.assert_array_equal(a.final_state.amps, b.final_state.amps)
    assert [r.outcomes for r in sample_histories(state, seq, 50, 9)] == [
        r.outcomes for r in sample_histories(state, seq, 50, 9)
    ]


def test_bell_frequencies_are_near_a_quarter():
    state = teleport_state(np.array([0.6, 0.8j]))
    recs = sample_histories(state, [bell_basis(Isometry.identity(1, 2, 2), "bsm")], 100_000, 2024)
    counts = np.bincount([r.outcomes[0][1] for r in recs], minlength=4)
    np.testing.assert_allclose(counts / len(recs), 0.25, atol=0.01)


def test_sampler_never_draws_zero_branches():
    state = Ket.basis((0, 1), (0, 1), 2)
    seq = [computational_basis("a", (0, 1), 2)]
    assert {r.outcomes for r in sample_histories(state, seq, 200, 1)} == {(("a", 1),)}


def test_sampled_sequence_passes_chi_square(rng):
    state = Ket.random((0, 1, 2), 2, rng)
    seq = [bell_basis(Isometry.identity(0, 1, 2), "a"), computational_basis("b", (1, 2), 2)]
    exact = joint_distribution(run_history(state, seq))
    recs = sample_histories(state, seq, 100_000, 77)
    counts = {}
    for r in recs:
        counts[r.key] = counts.get(r.key, 0) + 1
    keys = [k for k, p in exact.items() if p > 1e-12]
    observed = np.array([counts.get(k, 0) for k in keys])
    expected = np.array([exact[k] for k in keys]) * len(recs)
    expected *= observed.sum() / expected.sum()
    assert chisquare(observed, expected).pvalue >= 1e-3
