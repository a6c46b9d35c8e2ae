"""Polynomial-cost backend for free-fermion circuits via two-point functions.

A Gaussian state of 2N modes is fully described by the Hermitian matrix
M[mu][nu] = <adag_mu a_nu> over the global mode order.  One-particle
unitaries act by conjugation, occupation readouts condition the matrix with
a rank-one update, and any product of mode occupations is a principal-minor
determinant (Wick's theorem).

An arm-level charge readout that keeps the coherence of its singly occupied
branch is not a Gaussian operation, and neither are parity meters or
entangled-pair preparations; those raise NonGaussianOperationError.  What
this backend can do instead is answer "is every arm in S singly occupied?"
by expanding the product of one-per-arm projectors into 3^|S| occupation
monomials, each a determinant.  That exponential term count is deliberately
surfaced to callers.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    Circuit,
    Conditional,
    Measure,
    PrepBell,
    PrepSpin,
    SpinRotation,
    validate_circuit,
)
from . import circuit as circuit_mod
from . import fock
from .errors import NonGaussianOperationError, PreconditionError
from .fock import Spin, mode_position
from .measurement import BranchLeaf, BranchNode

HERMITIAN_ATOL = 1e-10
EIGENVALUE_SLACK = 1e-9
PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class CorrelationMatrix:
    """Two-point functions <adag_mu a_nu> of a fermionic Gaussian state."""

    num_arms: int
    matrix: np.ndarray

    @property
    def num_modes(self) -> int:
        return 2 * self.num_arms

    def validate(self) -> None:
        m = self.matrix
        if m.shape != (self.num_modes, self.num_modes):
            raise ValueError("matrix shape does not match arm count")
        if not np.allclose(m, m.conj().T, atol=HERMITIAN_ATOL):
            raise ValueError("correlation matrix is not Hermitian")
        eig = np.linalg.eigvalsh((m + m.conj().T) / 2)
        if eig.min() < -EIGENVALUE_SLACK or eig.max() > 1 + EIGENVALUE_SLACK:
            raise ValueError("correlation matrix eigenvalues leave [0, 1]")


def init_from_occupations(occupied, num_arms: int) -> CorrelationMatrix:
    """Diagonal 0/1 matrix with ones at the given (arm, spin) modes."""
    m = np.zeros((2 * num_arms, 2 * num_arms), dtype=complex)
    for mode in occupied:
        pos = mode_position(mode, num_arms)
        m[pos, pos] = 1.0
    return CorrelationMatrix(num_arms, m)


def add_electron(M: CorrelationMatrix, arm: int, alpha: complex, beta: complex) -> CorrelationMatrix:
    """Occupy one fresh orbital of an empty arm with the given spinor."""
    up = mode_position((arm, Spin.UP), M.num_arms)
    block = M.matrix[np.ix_([up, up + 1], [up, up + 1])]
    if np.linalg.norm(block) > 1e-9:
        raise PreconditionError(f"add_electron: arm {arm} is already occupied")
    v = np.zeros(M.num_modes, dtype=complex)
    norm = np.sqrt(abs(alpha) ** 2 + abs(beta) ** 2)
    if norm == 0:
        raise ValueError("spinor must be nonzero")
    v[up] = alpha / norm
    v[up + 1] = beta / norm
    return CorrelationMatrix(M.num_arms, M.matrix + np.outer(v.conj(), v))


def evolve(M: CorrelationMatrix, modes, matrix: np.ndarray) -> CorrelationMatrix:
    """Conjugate by a one-particle unitary on the listed modes.

    The index convention (adag_mu -> sum_nu U[nu][mu] adag_nu, hence
    M -> conj(V) M V^T for the embedded matrix V) is pinned by the
    Fock-backend oracle tests, not by fiat.
    """
    positions = [mode_position(mode, M.num_arms) for mode in modes]
    if len(set(positions)) != len(positions):
        raise ValueError("modes must be distinct")
    u = fock._check_unitary(matrix, len(positions))
    v = np.eye(M.num_modes, dtype=complex)
    v[np.ix_(positions, positions)] = u
    return CorrelationMatrix(M.num_arms, v.conj() @ M.matrix @ v.T)


def occupation_probability(M: CorrelationMatrix, mode) -> float:
    pos = mode_position(mode, M.num_arms)
    return float(min(max(M.matrix[pos, pos].real, 0.0), 1.0))


def project_occupation(
    M: CorrelationMatrix, mode, outcome: int
) -> tuple[float, CorrelationMatrix]:
    """Condition the Gaussian state on one mode reading empty or occupied.

    Rank-one updates (Wick contractions of n M n and (1-n) M (1-n)):
      outcome 1: M' = M - M[:,p] M[p,:] / M[p,p] + e_p e_p^T
      outcome 0: M' = M - e_p e_p^T + w w^dag / (1 - M[p,p]),  w = e_p - M[:,p]
    """
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    pos = mode_position(mode, M.num_arms)
    m = M.matrix
    occ = m[pos, pos].real
    prob = occ if outcome == 1 else 1.0 - occ
    if prob <= PROBABILITY_FLOOR:
        raise ValueError(f"outcome {outcome} on mode {tuple(mode)} has zero probability")
    e = np.zeros(M.num_modes, dtype=complex)
    e[pos] = 1.0
    col = m[:, pos].copy()
    row = m[pos, :].copy()
    if outcome == 1:
        updated = m - np.outer(col, row) / occ + np.outer(e, e)
    else:
        w = e - col
        updated = m - np.outer(e, e) + np.outer(w, w.conj()) / (1.0 - occ)
    return float(min(prob, 1.0)), CorrelationMatrix(M.num_arms, updated)


def principal_minor_probability(M: CorrelationMatrix, modes) -> float:
    """Expectation of a product of mode occupations: det of the submatrix."""
    positions = sorted({mode_position(mode, M.num_arms) for mode in modes})
    if not positions:
        raise ValueError("need at least one mode")
    sub = M.matrix[np.ix_(positions, positions)]
    value = float(np.linalg.det(sub).real)
    if value < -EIGENVALUE_SLACK or value > 1 + EIGENVALUE_SLACK:
        raise ValueError(f"principal minor {value} is not a probability")
    return min(max(value, 0.0), 1.0)


def single_occupancy_monomials(
    arms, num_arms: int
) -> list[tuple[float, tuple[int, ...]]]:
    """Expand prod_i (n_up + n_down - 2 n_up n_down) over the arms of S.

    Returns all 3^|S| (coefficient, mode positions) monomials before any
    collection; the length of this list is the advertised cost of the query.
    """
    arms = sorted(set(arms))
    per_arm = []
    for arm in arms:
        up = mode_position((arm, Spin.UP), num_arms)
        per_arm.append(((1.0, (up,)), (1.0, (up + 1,)), (-2.0, (up, up + 1))))
    monomials = []
    for combo in itertools.product(*per_arm):
        coef = 1.0
        positions: tuple[int, ...] = ()
        for c, pos in combo:
            coef *= c
            positions += pos
        monomials.append((coef, positions))
    return monomials


def single_occupancy_probability(M: CorrelationMatrix, arms) -> float:
    """Probability that every arm in the set holds exactly one electron."""
    total = 0.0
    for coef, positions in single_occupancy_monomials(arms, M.num_arms):
        sub = M.matrix[np.ix_(positions, positions)]
        total += coef * float(np.linalg.det(sub).real)
    if total < -EIGENVALUE_SLACK:
        raise ValueError(f"single-occupancy probability {total} is negative")
    return min(max(total, 0.0), 1.0)


@dataclass
class CorrBranchRecord:
    outcomes: dict[str, int]
    probability: float
    post_matrix: CorrelationMatrix


@dataclass
class CorrRunStats:
    terms: int = 0
    wall_ms: float = 0.0
    measured_arms: list[int] = field(default_factory=list)
    joint_charge1: float | None = None


def _reject_non_gaussian(circuit: Circuit) -> None:
    # Conditionals on parity/spin labels are rejected transitively: the
    # offending measurement always precedes them.
    for ins in circuit.instructions:
        if isinstance(ins, PrepBell):
            raise NonGaussianOperationError(
                "non-Gaussian operation: entangled-pair preparation has no "
                "correlation-matrix representation"
            )
        if isinstance(ins, Measure) and ins.kind in ("parity", "spin"):
            raise NonGaussianOperationError(
                f"non-Gaussian operation: {ins.kind} measurement {ins.label!r} "
                "cannot be tracked by the correlation backend"
            )


def _charge_measurements_terminal(instructions, first_measure: int) -> bool:
    return all(
        isinstance(ins, Measure) for ins in instructions[first_measure:]
    )


def _charge_outcomes(
    M: CorrelationMatrix, arm: int
) -> list[tuple[int, float, CorrelationMatrix]]:
    """Spin-resolved charge readout: the two mode projections in sequence.

    The two single-occupancy outcomes (up vs down) stay distinct branches
    even though both report charge 1; a Gaussian state cannot keep their
    coherence, which is exactly the information an electrometer would not
    reveal.
    """
    outcomes = []
    up = (arm, Spin.UP)
    down = (arm, Spin.DOWN)
    p_up1 = occupation_probability(M, up)
    for n_up, p_up in ((0, 1.0 - p_up1), (1, p_up1)):
        if p_up <= PROBABILITY_FLOOR:
            continue
        _, m_up = project_occupation(M, up, n_up)
        p_down1 = occupation_probability(m_up, down)
        for n_down, p_down in ((0, 1.0 - p_down1), (1, p_down1)):
            if p_down <= PROBABILITY_FLOOR:
                continue
            _, m_both = project_occupation(m_up, down, n_down)
            outcomes.append((n_up + n_down, p_up * p_down, m_both))
    outcomes.sort(key=lambda item: item[0])
    return outcomes


def charge_branch_tree(circuit: Circuit):
    """Expand a Gaussian circuit into a branch tree over charge readouts.

    Charge is read out mode by mode (spin-resolved), the realization a
    correlation matrix can track; parity and spin meters are refused.  When
    every charge readout is terminal, the joint all-arms-singly-occupied
    probability is also evaluated through the exponential monomial expansion
    and its 3^m term count reported in the stats.
    """
    validate_circuit(circuit)
    _reject_non_gaussian(circuit)
    stats = CorrRunStats()
    start = time.perf_counter()
    instructions = circuit.instructions
    measure_indices = [i for i, ins in enumerate(instructions) if isinstance(ins, Measure)]
    stats.measured_arms = sorted({instructions[i].arm for i in measure_indices})

    def walk(index: int, M: CorrelationMatrix, outcomes: dict[str, int], prob: float):
        for i in range(index, len(instructions)):
            ins = instructions[i]
            if isinstance(ins, Measure):
                children = []
                for q, p, post in _charge_outcomes(M, ins.arm):
                    sub = walk(i + 1, post, {**outcomes, ins.label: q}, prob * p)
                    children.append((q, p, sub))
                return BranchNode(ins.label, children)
            if isinstance(ins, PrepSpin):
                M = add_electron(M, ins.arm, ins.alpha, ins.beta)
            elif isinstance(ins, Conditional):
                if outcomes[ins.label] == ins.value:
                    M = _evolve_instruction(M, ins.op)
            else:
                M = _evolve_instruction(M, ins)
        return BranchLeaf(CorrBranchRecord(dict(outcomes), prob, M))

    # The complexity demonstration: price the joint charge-1 query on the
    # state just before a terminal block of charge readouts.
    if measure_indices and _charge_measurements_terminal(instructions, measure_indices[0]):
        M = init_from_occupations([], circuit.arm_count)
        for ins in instructions[: measure_indices[0]]:
            if isinstance(ins, PrepSpin):
                M = add_electron(M, ins.arm, ins.alpha, ins.beta)
            else:
                M = _evolve_instruction(M, ins)
        stats.joint_charge1 = single_occupancy_probability(M, stats.measured_arms)
        stats.terms = len(single_occupancy_monomials(stats.measured_arms, circuit.arm_count))

    root = walk(0, init_from_occupations([], circuit.arm_count), {}, 1.0)
    stats.wall_ms = (time.perf_counter() - start) * 1000.0
    return root, stats


def enumerate_charge_branches(
    circuit: Circuit,
) -> tuple[list[CorrBranchRecord], CorrRunStats]:
    """Flattened charge_branch_tree: every outcome assignment with its
    probability and conditional Gaussian state."""
    root, stats = charge_branch_tree(circuit)
    records: list[CorrBranchRecord] = []
    _collect_leaves(root, records)
    return records, stats


def _collect_leaves(node, out: list) -> None:
    if isinstance(node, BranchLeaf):
        out.append(node.record)
        return
    for _, _, child in node.children:
        _collect_leaves(child, out)


def _evolve_instruction(M: CorrelationMatrix, ins) -> CorrelationMatrix:
    if isinstance(ins, circuit_mod.BeamSplitter):
        M = evolve(M, [(ins.arm_i, Spin.UP), (ins.arm_j, Spin.UP)], fock.BEAM_SPLITTER_MATRIX)
        return evolve(M, [(ins.arm_i, Spin.DOWN), (ins.arm_j, Spin.DOWN)], fock.BEAM_SPLITTER_MATRIX)
    if isinstance(ins, circuit_mod.PolarizingBeamSplitter):
        swap = np.array([[0, 1], [1, 0]], dtype=complex)
        return evolve(M, [(ins.arm_i, Spin.DOWN), (ins.arm_j, Spin.DOWN)], swap)
    if isinstance(ins, circuit_mod.SwapArms):
        swap = np.array([[0, 1], [1, 0]], dtype=complex)
        M = evolve(M, [(ins.arm_i, Spin.UP), (ins.arm_j, Spin.UP)], swap)
        return evolve(M, [(ins.arm_i, Spin.DOWN), (ins.arm_j, Spin.DOWN)], swap)
    if isinstance(ins, SpinRotation):
        return evolve(M, [(ins.arm, Spin.UP), (ins.arm, Spin.DOWN)], fock.ROTATIONS[ins.name])
    raise NonGaussianOperationError(f"cannot evolve {ins!r} on the correlation backend")
