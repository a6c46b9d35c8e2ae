"""Correlation-matrix backend against the exact Fock oracle."""

from __future__ import annotations

import numpy as np
import pytest

from feqc import fock
from feqc.circuit import (
    BeamSplitter,
    Circuit,
    Measure,
    PolarizingBeamSplitter,
    PrepBell,
    PrepSpin,
    SpinRotation,
    SwapArms,
)
from feqc.corr import (
    add_electron,
    enumerate_charge_branches,
    evolve,
    init_from_occupations,
    occupation_probability,
    principal_minor_probability,
    project_occupation,
    single_occupancy_monomials,
    single_occupancy_probability,
)
from feqc.errors import NonGaussianOperationError, PreconditionError
from feqc.fock import BEAM_SPLITTER_MATRIX, Spin, beam_splitter, prepare_bell, prepare_spin, vacuum
from feqc.measurement import charge1_expectation, measure_mode
from helpers import dense_two_point, random_unitary

UP, DOWN = Spin.UP, Spin.DOWN


def test_init_examples():
    assert np.allclose(init_from_occupations([], 2).matrix, np.zeros((4, 4)))
    single = init_from_occupations([(1, UP)], 2).matrix
    assert single[0, 0] == 1 and np.count_nonzero(single) == 1
    full = init_from_occupations([(a, s) for a in (1, 2) for s in (UP, DOWN)], 2)
    assert np.allclose(full.matrix, np.eye(4))


def test_add_electron_requires_empty_arm():
    M = add_electron(init_from_occupations([], 1), 1, 1, 1)
    with pytest.raises(PreconditionError):
        add_electron(M, 1, 1, 0)


def test_evolve_identity_and_composition():
    rng = np.random.default_rng(41)
    M = add_electron(init_from_occupations([], 2), 1, 0.6, 0.8)
    out = evolve(M, [(1, UP), (2, UP)], np.eye(2))
    assert np.allclose(out.matrix, M.matrix)
    u = random_unitary(rng, 2)
    v = random_unitary(rng, 2)
    modes = [(1, DOWN), (2, UP)]
    two_step = evolve(evolve(M, modes, u), modes, v)
    one_step = evolve(M, modes, v @ u)
    assert np.allclose(two_step.matrix, one_step.matrix, atol=1e-12)


def test_evolve_splitter_entries():
    M = init_from_occupations([(1, UP)], 2)
    out = evolve(M, [(1, UP), (2, UP)], BEAM_SPLITTER_MATRIX)
    assert out.matrix[0, 0].real == pytest.approx(0.5)
    assert out.matrix[2, 2].real == pytest.approx(0.5)
    assert abs(out.matrix[0, 2]) == pytest.approx(0.5)


def test_evolve_diagonals_match_fock_expectations():
    """Binding index convention: diagonals equal the Fock <n> after the same
    one-particle unitary."""
    rng = np.random.default_rng(42)
    for _ in range(10):
        alpha, beta = rng.normal(size=2) + 1j * rng.normal(size=2)
        state = prepare_spin(vacuum(2), 1, alpha, beta)
        M = add_electron(init_from_occupations([], 2), 1, alpha, beta)
        modes = [(1, UP), (1, DOWN), (2, UP), (2, DOWN)]
        u = random_unitary(rng, 4)
        state = fock.apply_single_particle_unitary(state, modes, u)
        M = evolve(M, modes, u)
        for mode in modes:
            expected = sum(
                abs(a) ** 2
                for k, a in state.amplitudes.items()
                if k >> fock.mode_position(mode, 2) & 1
            )
            assert occupation_probability(M, mode) == pytest.approx(expected, abs=1e-9)


def test_evolve_rejects_non_unitary():
    M = init_from_occupations([], 1)
    with pytest.raises(ValueError):
        evolve(M, [(1, UP), (1, DOWN)], np.array([[1, 1], [0, 1]]))


def test_project_definite_occupancy_is_identity():
    M = init_from_occupations([(1, UP)], 1)
    prob, out = project_occupation(M, (1, UP), 1)
    assert prob == pytest.approx(1.0)
    assert np.allclose(out.matrix, M.matrix)


def test_project_split_electron():
    M = add_electron(init_from_occupations([], 2), 1, 1, 0)
    M = evolve(M, [(1, UP), (2, UP)], BEAM_SPLITTER_MATRIX)
    prob, kept = project_occupation(M, (1, UP), 1)
    assert prob == pytest.approx(0.5)
    assert occupation_probability(kept, (1, UP)) == pytest.approx(1.0)
    assert occupation_probability(kept, (2, UP)) == pytest.approx(0.0, abs=1e-12)
    prob, emptied = project_occupation(M, (1, UP), 0)
    assert prob == pytest.approx(0.5)
    assert occupation_probability(emptied, (2, UP)) == pytest.approx(1.0)


def test_project_rejects_impossible_outcome():
    M = init_from_occupations([(1, UP)], 1)
    with pytest.raises(ValueError):
        project_occupation(M, (1, UP), 0)


def _random_gaussian_pair(rng, num_arms=3, electrons=2, elements=6):
    """Matched (FockState, CorrelationMatrix) evolved through the same random
    bilinear elements."""
    state = vacuum(num_arms)
    M = init_from_occupations([], num_arms)
    arms = rng.permutation(np.arange(1, num_arms + 1))[:electrons]
    for arm in arms:
        v = rng.normal(size=2) + 1j * rng.normal(size=2)
        state = prepare_spin(state, int(arm), v[0], v[1])
        M = add_electron(M, int(arm), v[0], v[1])
    all_modes = [(a, s) for a in range(1, num_arms + 1) for s in (UP, DOWN)]
    for _ in range(elements):
        size = int(rng.integers(2, 4))
        chosen = [all_modes[i] for i in rng.choice(len(all_modes), size=size, replace=False)]
        u = random_unitary(rng, size)
        state = fock.apply_single_particle_unitary(state, chosen, u)
        M = evolve(M, chosen, u)
    return state, M


def test_projection_update_matches_oracle_two_point_functions():
    """The conditional-state closed form is pinned by the Fock oracle: every
    entry of the post-measurement correlation matrix must match."""
    rng = np.random.default_rng(43)
    for _ in range(8):
        state, M = _random_gaussian_pair(rng)
        mode = (int(rng.integers(1, 4)), Spin(int(rng.integers(0, 2))))
        for outcome, prob_fock, post in measure_mode(state, mode):
            prob_corr, M_post = project_occupation(M, mode, outcome)
            assert prob_corr == pytest.approx(prob_fock, abs=1e-9)
            oracle = dense_two_point(post)
            assert np.allclose(M_post.matrix, oracle, atol=1e-8)


def test_purity_preserved_by_evolution_and_projection():
    rng = np.random.default_rng(44)
    for _ in range(5):
        _, M = _random_gaussian_pair(rng)
        m = M.matrix
        assert np.linalg.norm(m @ m - m) <= 1e-8
        mode = (1, UP)
        occ = occupation_probability(M, mode)
        if 1e-6 < occ < 1 - 1e-6:
            _, post = project_occupation(M, mode, 1)
            pm = post.matrix
            assert np.linalg.norm(pm @ pm - pm) <= 1e-8
        M.validate()


def test_trace_conserved_by_evolution():
    rng = np.random.default_rng(45)
    _, M = _random_gaussian_pair(rng)
    u = random_unitary(rng, 3)
    out = evolve(M, [(1, UP), (2, DOWN), (3, UP)], u)
    assert np.trace(out.matrix).real == pytest.approx(np.trace(M.matrix).real, abs=1e-12)


def test_principal_minor_examples():
    M = add_electron(init_from_occupations([], 2), 1, 1, 0)
    assert principal_minor_probability(M, [(1, UP)]) == pytest.approx(1.0)
    diag = init_from_occupations([(1, UP), (2, DOWN)], 2)
    assert principal_minor_probability(diag, [(1, UP), (2, DOWN)]) == pytest.approx(1.0)
    assert principal_minor_probability(diag, [(1, UP), (2, UP)]) == pytest.approx(0.0)


def test_principal_minor_matches_fock_double_occupancy():
    # bunched-singlet statistics: both modes of one arm occupied half the time
    state = beam_splitter(prepare_bell(vacuum(2), 0, 1, 2), 1, 2)
    p_both = sum(
        abs(a) ** 2
        for k, a in state.amplitudes.items()
        if k & 0b0011 == 0b0011
    )
    assert p_both == pytest.approx(0.5)
    # the bunched pair state itself is not Gaussian; the Gaussian analogue is
    # two opposite spins routed into one arm, which is doubly occupied for sure
    M = add_electron(add_electron(init_from_occupations([], 2), 1, 1, 0), 2, 0, 1)
    M = evolve(M, [(1, DOWN), (2, DOWN)], np.array([[0, 1], [1, 0]], dtype=complex))
    assert principal_minor_probability(M, [(1, UP), (1, DOWN)]) == pytest.approx(1.0)


def test_principal_minors_match_oracle_on_gaussian_states():
    rng = np.random.default_rng(46)
    for _ in range(5):
        state, M = _random_gaussian_pair(rng)
        modes = [(1, UP), (2, DOWN)]
        positions = [fock.mode_position(m, 3) for m in modes]
        expected = sum(
            abs(a) ** 2
            for k, a in state.amplitudes.items()
            if all(k >> p & 1 for p in positions)
        )
        assert principal_minor_probability(M, modes) == pytest.approx(expected, abs=1e-9)


def test_single_occupancy_monomial_count_is_three_to_the_m():
    for m in (1, 2, 3):
        assert len(single_occupancy_monomials(range(1, m + 1), 4)) == 3 ** m


def test_single_occupancy_examples():
    M = add_electron(init_from_occupations([], 1), 1, 1, 0)
    assert single_occupancy_probability(M, [1]) == pytest.approx(1.0)
    # two opposite-spin electrons routed into the same arm: never singly occupied
    M = add_electron(add_electron(init_from_occupations([], 2), 1, 1, 0), 2, 0, 1)
    bunched = evolve(M, [(1, DOWN), (2, DOWN)], np.array([[0, 1], [1, 0]], dtype=complex))
    assert single_occupancy_probability(bunched, [1]) == pytest.approx(0.0, abs=1e-12)
    # and kept apart they are: one per arm with certainty
    assert single_occupancy_probability(M, [1, 2]) == pytest.approx(1.0)


def test_single_occupancy_matches_charge1_expectation():
    rng = np.random.default_rng(47)
    for _ in range(10):
        state, M = _random_gaussian_pair(rng)
        arm = int(rng.integers(1, 4))
        assert single_occupancy_probability(M, [arm]) == pytest.approx(
            charge1_expectation(state, arm), abs=1e-9
        )


def test_single_occupancy_joint_matches_fock():
    rng = np.random.default_rng(48)
    for _ in range(10):
        state, M = _random_gaussian_pair(rng, electrons=3, elements=8)
        for arms in ([1], [1, 2], [1, 2, 3]):
            expected = sum(
                abs(a) ** 2
                for k, a in state.amplitudes.items()
                if all(fock.arm_charge(k, arm) == 1 for arm in arms)
            )
            assert single_occupancy_probability(M, arms) == pytest.approx(expected, abs=1e-9)


def test_dual_backend_equivalence_on_random_circuits():
    """Identical joint probabilities and post-measurement diagonals for random
    bilinear circuits with sequential mode-occupation readouts."""
    rng = np.random.default_rng(49)
    for _ in range(20):
        num_arms = int(rng.integers(2, 5))
        electrons = int(rng.integers(1, min(num_arms, 4) + 1))
        state, M = _random_gaussian_pair(rng, num_arms=num_arms, electrons=electrons,
                                         elements=int(rng.integers(3, 11)))
        for _ in range(3):
            mode = (int(rng.integers(1, num_arms + 1)), Spin(int(rng.integers(0, 2))))
            fock_branches = {o: (p, post) for o, p, post in measure_mode(state, mode)}
            outcomes = sorted(fock_branches)
            weights = [fock_branches[o][0] for o in outcomes]
            pick = outcomes[int(rng.choice(len(outcomes), p=np.array(weights) / sum(weights)))]
            prob_fock, state = fock_branches[pick][0], fock_branches[pick][1]
            prob_corr, M = project_occupation(M, mode, pick)
            assert prob_corr == pytest.approx(prob_fock, abs=1e-9)
            for arm in range(1, num_arms + 1):
                for spin in (UP, DOWN):
                    expected = sum(
                        abs(a) ** 2
                        for k, a in state.amplitudes.items()
                        if k >> fock.mode_position((arm, spin), num_arms) & 1
                    )
                    assert occupation_probability(M, (arm, spin)) == pytest.approx(
                        expected, abs=1e-9
                    )


def test_backend_rejects_non_gaussian_circuits():
    with pytest.raises(NonGaussianOperationError):
        enumerate_charge_branches(Circuit(2, [PrepBell(0, 1, 2), Measure("q", "charge", 1)]))
    with pytest.raises(NonGaussianOperationError):
        enumerate_charge_branches(
            Circuit(2, [PrepSpin(1, 1, 0), PrepSpin(2, 1, 1), Measure("p", "parity", 1)])
        )
    with pytest.raises(NonGaussianOperationError):
        enumerate_charge_branches(Circuit(1, [PrepSpin(1, 1, 0), Measure("z", "spin", 1)]))


def test_charge_branches_match_fock_for_terminal_measurements():
    circuit = Circuit(3, [
        PrepSpin(1, 1, 0),
        PrepSpin(2, 1, 1),
        BeamSplitter(1, 2),
        SwapArms(2, 3),
        SpinRotation(3, "h"),
        PolarizingBeamSplitter(1, 3),
        Measure("q1", "charge", 1),
        Measure("q2", "charge", 2),
        Measure("q3", "charge", 3),
    ])
    records, stats = enumerate_charge_branches(circuit)
    from feqc.measurement import enumerate_branches

    fock_records = enumerate_branches(circuit, vacuum(3))
    fock_probs: dict[tuple, float] = {}
    for rec in fock_records:
        key = tuple(sorted(rec.outcomes.items()))
        fock_probs[key] = fock_probs.get(key, 0.0) + rec.probability
    corr_probs: dict[tuple, float] = {}
    for rec in records:
        key = tuple(sorted(rec.outcomes.items()))
        corr_probs[key] = corr_probs.get(key, 0.0) + rec.probability
    assert set(corr_probs) == set(fock_probs)
    for key, p in fock_probs.items():
        assert corr_probs[key] == pytest.approx(p, abs=1e-9)
    assert stats.terms == 3 ** 3
    assert stats.joint_charge1 is not None
