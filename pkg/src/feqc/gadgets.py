"""Feedforward gadgets built from linear optics and charge detection.

Four constructions are provided, all operating in place on caller-chosen
arms of a FockState and returning explicit outcome branches:

* ``bell_analyzer`` sorts a two-electron spin pair into one of the four
  maximally entangled classes through three rounds of splitter + charge
  detector, with feedforward spin rotations in between.
* ``encoder`` entangles a spin qubit with a fresh ancilla through a pair of
  polarizing beam splitters and a parity meter in between, turning
  alpha|up> + beta|down> into alpha|up,up> + beta|down,down>.
* ``cnot`` chains two encoder boxes (the second conjugated by Hadamards)
  and a final ancilla spin readout into an exactly deterministic
  controlled-NOT on two spin qubits.
* ``teleport`` consumes a singlet pair and a Bell analysis to move a spin
  qubit between arms, with a correction table derived by exhaustive search
  and frozen here.

Every branch carries its probability and output state; correction rules
depend only on measurement outcomes, never on the input state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import fock
from .errors import PreconditionError
from .fock import (
    FockState,
    PAULI_X,
    PAULI_Z,
    HADAMARD,
    arm_qubit_density,
    beam_splitter,
    polarizing_beam_splitter,
    require_single_occupancy,
    spin_rotation,
    spinor_fidelity,
)
from .measurement import Branch, measure_charge, measure_parity, measure_spin


def bell_statistic(p1: int, p2: int, p3: int) -> int:
    """Combine the three detector parities into the class index 0..3."""
    return p1 + p1 * p2 + p1 * p2 * p3


@dataclass
class BellOutcome:
    """One analyzer branch: class index, detector parities, scattered state.

    Stages skipped by the early exit report parity 0; they contribute nothing
    to the statistic because their terms already carry a factor p1 or p1*p2.
    """

    b: int
    parities: tuple[int, int, int]
    post_state: FockState


@dataclass
class GadgetBranchRecord:
    outcomes: dict[str, int]
    applied_corrections: list[tuple[int, str]]
    probability: float
    output_state: FockState


def _detect(state: FockState, arm: int, detector: str) -> list[Branch]:
    if detector == "charge":
        return measure_charge(state, arm)
    if detector == "parity":
        return measure_parity(state, arm)
    raise ValueError(f"unknown detector mode {detector!r}")


def bell_analyzer(
    state: FockState, arm_a: int, arm_b: int, detector: str = "parity"
) -> list[tuple[BellOutcome, float]]:
    """Three-stage analyzer: splitter + detector, with sigma_z then sigma_x
    feedforward on arm_b between stages.

    The detector on arm_a may count charge (0, 1, 2) or only its parity; the
    measurement is destructive either way, so both modes give the same class
    statistics.  Bunching at a stage (parity 0) fixes the class and later
    stages are skipped.
    """
    require_single_occupancy(state, arm_a, "bell_analyzer")
    require_single_occupancy(state, arm_b, "bell_analyzer")
    results: list[tuple[BellOutcome, float]] = []
    stage1 = beam_splitter(state, arm_a, arm_b)
    for q1, prob1, post1 in _detect(stage1, arm_a, detector):
        p1 = q1 % 2
        if p1 == 0:
            parities = (0, 0, 0)
            results.append((BellOutcome(bell_statistic(*parities), parities, post1), prob1))
            continue
        stage2 = beam_splitter(spin_rotation(post1, arm_b, PAULI_Z), arm_a, arm_b)
        for q2, prob2, post2 in _detect(stage2, arm_a, detector):
            p2 = q2 % 2
            if p2 == 0:
                parities = (1, 0, 0)
                results.append(
                    (BellOutcome(bell_statistic(*parities), parities, post2), prob1 * prob2)
                )
                continue
            stage3 = beam_splitter(spin_rotation(post2, arm_b, PAULI_X), arm_a, arm_b)
            for q3, prob3, post3 in _detect(stage3, arm_a, detector):
                parities = (1, 1, q3 % 2)
                results.append(
                    (
                        BellOutcome(bell_statistic(*parities), parities, post3),
                        prob1 * prob2 * prob3,
                    )
                )
    return results


def encoder(
    state: FockState, arm_a: int, arm_b: int, apply_correction: bool = True
) -> list[tuple[int, float, FockState]]:
    """Polarizing splitter pair with a parity meter in between.

    With the correction enabled, the parity-0 branch gets a spin flip on
    arm_b and both branches emit the same two-electron encoding of the arm_a
    qubit.  Without it the parity-0 branch comes out with the arm_b spin
    inverted, which is what ``spin_parity_readout`` relies on.
    """
    require_single_occupancy(state, arm_a, "encoder")
    require_single_occupancy(state, arm_b, "encoder")
    mixed = polarizing_beam_splitter(state, arm_a, arm_b)
    branches = []
    for p, prob, post in measure_parity(mixed, arm_a):
        out = polarizing_beam_splitter(post, arm_a, arm_b)
        if apply_correction and p == 0:
            out = spin_rotation(out, arm_b, PAULI_X)
        branches.append((p, prob, out))
    return branches


def spin_parity_readout(
    state: FockState, arm_a: int, arm_b: int
) -> list[tuple[int, float, FockState]]:
    """Nondestructive test whether two single-electron spins are aligned.

    Parity 1 means aligned, parity 0 opposite.  For spin-eigenstate inputs
    the output occupancy equals the input and the parity is deterministic
    (a single branch); general inputs are projected onto the aligned or
    anti-aligned subspace.
    """
    return encoder(state, arm_a, arm_b, apply_correction=False)


def control_branch_formula(x: int, p1: int) -> int:
    """Spin bit handed to the ancilla by the control-side splitter pair."""
    return (x + p1 + 1) % 2


def hadamard_pbs_gadget(
    state: FockState, upper_arm: int, lower_arm: int
) -> list[tuple[int, int, float, FockState]]:
    """Polarizing splitter pair with parity meter, conjugated by Hadamards,
    followed by a spin readout of the upper arm.

    For basis inputs |a> (upper) and |y> (lower) the lower arm comes out in
    (-1)^((p2+1)(a+z)) |a+y+z| mod 2>, the closed form verified row by row by
    the ``appendix-table`` command.  Branches are keyed by (parity, spin).
    """
    require_single_occupancy(state, upper_arm, "hadamard_pbs_gadget")
    require_single_occupancy(state, lower_arm, "hadamard_pbs_gadget")
    s = spin_rotation(spin_rotation(state, upper_arm, HADAMARD), lower_arm, HADAMARD)
    s = polarizing_beam_splitter(s, upper_arm, lower_arm)
    branches = []
    for p2, prob2, post in measure_parity(s, upper_arm):
        out = polarizing_beam_splitter(post, upper_arm, lower_arm)
        out = spin_rotation(spin_rotation(out, upper_arm, HADAMARD), lower_arm, HADAMARD)
        for z, probz, final in measure_spin(out, upper_arm):
            branches.append((p2, z, prob2 * probz, final))
    return branches


_PLUS = (1 / np.sqrt(2), 1 / np.sqrt(2))


def _require_plus_ancilla(state: FockState, arm: int) -> None:
    rho = arm_qubit_density(state, arm)
    if spinor_fidelity(rho, *_PLUS) < 1 - 1e-9:
        raise PreconditionError(
            f"ancilla arm {arm} must carry an unentangled (|up>+|down>)/sqrt(2) electron"
        )


def cnot(
    state: FockState,
    control_arm: int,
    target_arm: int,
    ancilla_arm: int,
    apply_control_correction: bool = True,
    apply_target_correction: bool = True,
) -> list[GadgetBranchRecord]:
    """Deterministic controlled-NOT (control down flips the target spin).

    The control and the ancilla pass through one splitter-pair box (parity
    p1), the ancilla and the target through a second box conjugated by
    Hadamards (parity p2), and the ancilla spin is read out (z).  The
    outcome-dependent corrections are sigma_z on the control when p2 = 0 and
    sigma_x on the target when z + p1 is even.  Each of the eight branches
    has probability 1/8 and outputs the gate result exactly, up to a global
    phase.

    The two correction switches exist for negative controls only: disabling
    either one must break specific branches.
    """
    require_single_occupancy(state, control_arm, "cnot")
    require_single_occupancy(state, target_arm, "cnot")
    require_single_occupancy(state, ancilla_arm, "cnot")
    _require_plus_ancilla(state, ancilla_arm)

    records: list[GadgetBranchRecord] = []
    box1 = polarizing_beam_splitter(state, control_arm, ancilla_arm)
    for p1, prob1, post1 in measure_parity(box1, control_arm):
        s = polarizing_beam_splitter(post1, control_arm, ancilla_arm)
        s = spin_rotation(s, ancilla_arm, HADAMARD)
        s = spin_rotation(s, target_arm, HADAMARD)
        box2 = polarizing_beam_splitter(s, ancilla_arm, target_arm)
        for p2, prob2, post2 in measure_parity(box2, ancilla_arm):
            t = polarizing_beam_splitter(post2, ancilla_arm, target_arm)
            t = spin_rotation(t, ancilla_arm, HADAMARD)
            t = spin_rotation(t, target_arm, HADAMARD)
            for z, probz, final in measure_spin(t, ancilla_arm):
                corrections: list[tuple[int, str]] = []
                out = final
                if apply_control_correction and p2 == 0:
                    out = spin_rotation(out, control_arm, PAULI_Z)
                    corrections.append((control_arm, "z"))
                if apply_target_correction and (z + p1) % 2 == 0:
                    out = spin_rotation(out, target_arm, PAULI_X)
                    corrections.append((target_arm, "x"))
                records.append(
                    GadgetBranchRecord(
                        outcomes={"p1": p1, "p2": p2, "z": z},
                        applied_corrections=corrections,
                        probability=prob1 * prob2 * probz,
                        output_state=out,
                    )
                )
    return records


# Qubit correction per analyzer class, in application order.  Frozen from
# derive_teleport_corrections(); the regression test re-derives it.
TELEPORT_CORRECTIONS: dict[int, tuple[str, ...]] = {
    0: (),
    1: ("z",),
    2: ("z", "x"),
    3: ("x",),
}

_PAULI_BY_NAME = {"x": PAULI_X, "z": PAULI_Z}


def teleport(
    state: FockState, source_arm: int, pair_arm_1: int, pair_arm_2: int
) -> list[GadgetBranchRecord]:
    """Move the spin qubit of ``source_arm`` onto ``pair_arm_2``.

    Expects a singlet pair across (pair_arm_1, pair_arm_2).  The analyzer
    consumes the source and the first pair arm; the class outcome selects a
    Pauli correction on the second pair arm.
    """
    for arm in (source_arm, pair_arm_1, pair_arm_2):
        require_single_occupancy(state, arm, "teleport")
    records = []
    for outcome, prob in bell_analyzer(state, source_arm, pair_arm_1):
        out = outcome.post_state
        corrections = []
        for name in TELEPORT_CORRECTIONS[outcome.b]:
            out = spin_rotation(out, pair_arm_2, _PAULI_BY_NAME[name])
            corrections.append((pair_arm_2, name))
        p1, p2, p3 = outcome.parities
        records.append(
            GadgetBranchRecord(
                outcomes={"p1": p1, "p2": p2, "p3": p3, "b": outcome.b},
                applied_corrections=corrections,
                probability=prob,
                output_state=out,
            )
        )
    return records


def derive_teleport_corrections() -> dict[int, tuple[str, ...]]:
    """Reconstruct the correction table by exhaustive search.

    For each analyzer class, exactly one of the four Pauli products brings
    the second pair arm back to the input qubit with unit overlap on a set of
    spinors that pins the operator uniquely.
    """
    candidates: list[tuple[str, ...]] = [(), ("z",), ("x",), ("z", "x")]
    probes = [(1, 0), (1 / np.sqrt(2), 1 / np.sqrt(2)), (1 / np.sqrt(2), 1j / np.sqrt(2))]
    scores: dict[int, dict[tuple[str, ...], float]] = {b: {} for b in range(4)}
    for alpha, beta in probes:
        base = fock.prepare_spin(fock.vacuum(3), 1, alpha, beta)
        base = fock.prepare_bell(base, 0, 2, 3)
        for outcome, _ in bell_analyzer(base, 1, 2):
            for cand in candidates:
                out = outcome.post_state
                for name in cand:
                    out = spin_rotation(out, 3, _PAULI_BY_NAME[name])
                fid = spinor_fidelity(arm_qubit_density(out, 3), alpha, beta)
                prev = scores[outcome.b].get(cand, 1.0)
                scores[outcome.b][cand] = min(prev, fid)
    table: dict[int, tuple[str, ...]] = {}
    for b in range(4):
        perfect = [cand for cand, fid in scores[b].items() if fid >= 1 - 1e-9]
        if len(perfect) != 1:
            raise RuntimeError(f"correction for class {b} is not unique: {perfect}")
        table[b] = perfect[0]
    return table
