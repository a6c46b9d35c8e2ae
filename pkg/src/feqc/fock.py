"""Sparse Fock-space engine for spinful fermions on spatial arms.

A system of N arms has 2N modes, one per (arm, spin) pair.  Modes are
totally ordered as (1,up) < (1,down) < (2,up) < ... and a basis key is a
bitmask over that order (bit set = mode occupied).  The basis state for a
key is the product of creation operators in ascending mode order applied
to the vacuum, so every ladder operator picks up the usual (-1)^(number of
occupied modes preceding it) sign.

All operations are pure: they take a state and return a new one.  Unitary
operations preserve the norm and the particle number of every key; the
preparation helpers normalize their output and right-multiply their creation
operators, so a sequence of preparations builds the canonical ascending
product with overall phase +1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Sequence

import numpy as np

from .errors import PreconditionError

PRUNE_THRESHOLD = 1e-12
UNITARY_ATOL = 1e-10


class Spin(IntEnum):
    UP = 0
    DOWN = 1


class ModeIndex(NamedTuple):
    """One fermionic mode: a spatial arm (1-based) and a spin."""

    arm: int
    spin: Spin


@dataclass(frozen=True)
class FockState:
    """Sparse complex amplitudes over occupation keys of ``2 * num_arms`` modes."""

    num_arms: int
    amplitudes: dict[int, complex]

    def norm(self) -> float:
        return float(np.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values())))

    @property
    def num_modes(self) -> int:
        return 2 * self.num_arms


def mode_position(mode: ModeIndex | tuple[int, Spin], num_arms: int) -> int:
    """Index of a mode in the global order; validates the arm range."""
    arm, spin = mode
    if not 1 <= arm <= num_arms:
        raise ValueError(f"arm {arm} out of range 1..{num_arms}")
    if spin not in (Spin.UP, Spin.DOWN):
        raise ValueError(f"invalid spin {spin!r}")
    return 2 * (arm - 1) + int(spin)


def format_key(key: int, num_arms: int) -> str:
    """Render a key as a bitstring, leftmost character = mode (1, up)."""
    return "".join("1" if key >> p & 1 else "0" for p in range(2 * num_arms))


def arm_charge(key: int, arm: int) -> int:
    """Occupation 0, 1 or 2 of an arm in a basis key."""
    base = 2 * (arm - 1)
    return (key >> base & 1) + (key >> (base + 1) & 1)


def _jw_sign(key: int, pos: int) -> int:
    """Sign from commuting a ladder operator past the occupied modes below pos."""
    return -1 if (key & ((1 << pos) - 1)).bit_count() & 1 else 1


def _pruned(amplitudes: dict[int, complex]) -> dict[int, complex]:
    return {k: a for k, a in amplitudes.items() if abs(a) >= PRUNE_THRESHOLD}


def normalize(state: FockState) -> FockState:
    n = state.norm()
    if n < PRUNE_THRESHOLD:
        raise ValueError("cannot normalize a zero state")
    return FockState(state.num_arms, _pruned({k: a / n for k, a in state.amplitudes.items()}))


def vacuum(num_arms: int) -> FockState:
    """Empty state on ``num_arms`` arms."""
    if num_arms < 1:
        raise ValueError("num_arms must be >= 1")
    return FockState(num_arms, {0: 1.0 + 0.0j})


def create(state: FockState, mode: ModeIndex | tuple[int, Spin]) -> FockState:
    """Apply a raw creation operator (not normalized; Pauli-blocked keys drop out)."""
    pos = mode_position(mode, state.num_arms)
    out: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        if key >> pos & 1:
            continue
        out[key | (1 << pos)] = amp * _jw_sign(key, pos)
    return FockState(state.num_arms, out)


def _append_mode(state: FockState, mode: ModeIndex | tuple[int, Spin]) -> FockState:
    """Right-multiply by a creation operator: the sign counts occupied modes
    above the insertion point, so preparing arms one after another yields the
    canonical ascending product with phase +1."""
    pos = mode_position(mode, state.num_arms)
    out: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        if key >> pos & 1:
            continue
        sign = -1 if (key >> (pos + 1)).bit_count() & 1 else 1
        out[key | (1 << pos)] = amp * sign
    return FockState(state.num_arms, out)


def _require_arm_empty(state: FockState, arm: int, op: str) -> None:
    for key in state.amplitudes:
        if arm_charge(key, arm) != 0:
            raise PreconditionError(f"{op}: arm {arm} is already occupied")


def require_single_occupancy(state: FockState, arm: int, op: str) -> None:
    """Every key must hold exactly one electron in the arm."""
    for key in state.amplitudes:
        if arm_charge(key, arm) != 1:
            raise PreconditionError(f"{op}: arm {arm} must carry exactly one electron")


def prepare_spin(state: FockState, arm: int, alpha: complex, beta: complex) -> FockState:
    """Add one electron in ``arm`` with (normalized) spinor alpha|up> + beta|down>."""
    if abs(alpha) ** 2 + abs(beta) ** 2 == 0:
        raise ValueError("spinor must be nonzero")
    mode_position((arm, Spin.UP), state.num_arms)
    _require_arm_empty(state, arm, "prepare_spin")
    up = _append_mode(state, (arm, Spin.UP))
    down = _append_mode(state, (arm, Spin.DOWN))
    combined: dict[int, complex] = {}
    for part, coef in ((up, complex(alpha)), (down, complex(beta))):
        for key, amp in part.amplitudes.items():
            combined[key] = combined.get(key, 0j) + coef * amp
    return normalize(FockState(state.num_arms, combined))


def prepare_two_spin(
    state: FockState, arm_a: int, arm_b: int, coeffs: np.ndarray
) -> FockState:
    """Add two electrons across two empty arms with joint spin amplitudes
    coeffs[spin_a][spin_b] (2x2, any nonzero norm); output normalized."""
    if arm_a == arm_b:
        raise ValueError("two-spin preparation needs two distinct arms")
    c = np.asarray(coeffs, dtype=complex)
    if c.shape != (2, 2):
        raise ValueError("coeffs must be a 2x2 array over (spin_a, spin_b)")
    if np.linalg.norm(c) == 0:
        raise ValueError("coeffs must be nonzero")
    _require_arm_empty(state, arm_a, "prepare_two_spin")
    _require_arm_empty(state, arm_b, "prepare_two_spin")
    combined: dict[int, complex] = {}
    for spin_a in (Spin.UP, Spin.DOWN):
        for spin_b in (Spin.UP, Spin.DOWN):
            coef = c[int(spin_a), int(spin_b)]
            if coef == 0:
                continue
            term = _append_mode(_append_mode(state, (arm_a, spin_a)), (arm_b, spin_b))
            for key, amp in term.amplitudes.items():
                combined[key] = combined.get(key, 0j) + coef * amp
    return normalize(FockState(state.num_arms, combined))


# Joint spin amplitudes of the four maximally entangled pair states:
# index 0 = (up,down)-(down,up) singlet; 1 = (up,down)+(down,up);
# 2 = (up,up)+(down,down); 3 = (up,up)-(down,down).
BELL_COEFFS: dict[int, np.ndarray] = {
    0: np.array([[0, 1], [-1, 0]], dtype=complex),
    1: np.array([[0, 1], [1, 0]], dtype=complex),
    2: np.array([[1, 0], [0, 1]], dtype=complex),
    3: np.array([[1, 0], [0, -1]], dtype=complex),
}


def prepare_bell(state: FockState, k: int, arm_a: int, arm_b: int) -> FockState:
    """Add the k-th two-electron entangled pair across (arm_a, arm_b)."""
    if k not in BELL_COEFFS:
        raise ValueError(f"bell index {k} not in 0..3")
    return prepare_two_spin(state, arm_a, arm_b, BELL_COEFFS[k])


def _check_unitary(matrix: np.ndarray, dim: int) -> np.ndarray:
    u = np.asarray(matrix, dtype=complex)
    if u.shape != (dim, dim):
        raise ValueError(f"expected a {dim}x{dim} matrix, got {u.shape}")
    if not np.allclose(u @ u.conj().T, np.eye(dim), atol=UNITARY_ATOL):
        raise ValueError("matrix is not unitary")
    return u


def apply_single_particle_unitary(
    state: FockState,
    modes: Sequence[ModeIndex | tuple[int, Spin]],
    matrix: np.ndarray,
) -> FockState:
    """Heisenberg action of a one-particle unitary on the listed modes.

    Each creation operator on mode j is replaced by sum_i U[i, j] * (creation
    on mode i), extended multiplicatively over every basis key with exact
    anticommutation signs.  Norm and per-key particle number are preserved.
    """
    m = len(modes)
    positions = [mode_position(mode, state.num_arms) for mode in modes]
    if len(set(positions)) != m:
        raise ValueError("modes must be distinct")
    u = _check_unitary(matrix, m)
    pos_to_col = {p: j for j, p in enumerate(positions)}
    images: list[list[tuple[int, complex]]] = [
        [(positions[i], u[i, j]) for i in range(m) if abs(u[i, j]) > PRUNE_THRESHOLD]
        for j in range(m)
    ]
    out: dict[int, complex] = {}
    for key, amp in state.amplitudes.items():
        # Rebuild the key from the vacuum, rightmost (highest) operator first,
        # substituting the image of every listed mode.
        terms: dict[int, complex] = {0: amp}
        pos = key.bit_length() - 1
        while pos >= 0:
            if key >> pos & 1:
                col = pos_to_col.get(pos)
                subs = images[col] if col is not None else [(pos, 1.0 + 0j)]
                next_terms: dict[int, complex] = {}
                for partial, pamp in terms.items():
                    for q, coef in subs:
                        if partial >> q & 1:
                            continue
                        nk = partial | (1 << q)
                        val = pamp * coef * _jw_sign(partial, q)
                        next_terms[nk] = next_terms.get(nk, 0j) + val
                terms = next_terms
            pos -= 1
        for nk, namp in terms.items():
            out[nk] = out.get(nk, 0j) + namp
    return FockState(state.num_arms, _pruned(out))


# 50/50 splitter, real symmetric convention; its own inverse.
BEAM_SPLITTER_MATRIX = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
HADAMARD = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)

ROTATIONS = {"x": PAULI_X, "y": PAULI_Y, "z": PAULI_Z, "h": HADAMARD}

_SWAP2 = np.array([[0, 1], [1, 0]], dtype=complex)


def beam_splitter(state: FockState, arm_i: int, arm_j: int) -> FockState:
    """50/50 splitter between two arms, acting identically on both spins."""
    if arm_i == arm_j:
        raise ValueError("beam splitter needs two distinct arms")
    out = apply_single_particle_unitary(
        state, [(arm_i, Spin.UP), (arm_j, Spin.UP)], BEAM_SPLITTER_MATRIX
    )
    return apply_single_particle_unitary(
        out, [(arm_i, Spin.DOWN), (arm_j, Spin.DOWN)], BEAM_SPLITTER_MATRIX
    )


def polarizing_beam_splitter(state: FockState, arm_i: int, arm_j: int) -> FockState:
    """Transmit spin up, reflect spin down (reflection phase +1)."""
    if arm_i == arm_j:
        raise ValueError("polarizing beam splitter needs two distinct arms")
    return apply_single_particle_unitary(
        state, [(arm_i, Spin.DOWN), (arm_j, Spin.DOWN)], _SWAP2
    )


def swap_arms(state: FockState, arm_i: int, arm_j: int) -> FockState:
    """Exchange the full contents of two arms (pure routing, phase +1)."""
    if arm_i == arm_j:
        raise ValueError("swap needs two distinct arms")
    out = apply_single_particle_unitary(state, [(arm_i, Spin.UP), (arm_j, Spin.UP)], _SWAP2)
    return apply_single_particle_unitary(
        out, [(arm_i, Spin.DOWN), (arm_j, Spin.DOWN)], _SWAP2
    )


def spin_rotation(state: FockState, arm: int, matrix: np.ndarray) -> FockState:
    """Apply a 2x2 unitary on the (up, down) modes of one arm."""
    return apply_single_particle_unitary(
        state, [(arm, Spin.UP), (arm, Spin.DOWN)], matrix
    )


def inner_product(state_a: FockState, state_b: FockState) -> complex:
    if state_a.num_arms != state_b.num_arms:
        raise ValueError("states live on different numbers of arms")
    small, large = state_a.amplitudes, state_b.amplitudes
    if len(small) > len(large):
        return np.conj(inner_product(state_b, state_a))
    return complex(sum(np.conj(a) * large[k] for k, a in small.items() if k in large))


def fidelity(state_a: FockState, state_b: FockState) -> float:
    """|<a|b>|^2; invariant under global phases of either state."""
    return float(min(abs(inner_product(state_a, state_b)) ** 2, 1.0))


def arm_qubit_density(state: FockState, arm: int) -> np.ndarray:
    """2x2 reduced density matrix of the spin carried by a singly occupied arm.

    Keys are grouped by the configuration of all other modes.  The fermionic
    reordering sign between the arm's operator and its environment block is
    the same for both spins (an arm's two modes are adjacent in the order)
    and squares away inside each group, so the trace over the environment is
    a plain sum of spinor outer products.
    """
    up_pos = mode_position((arm, Spin.UP), state.num_arms)
    down_pos = up_pos + 1
    arm_mask = (1 << up_pos) | (1 << down_pos)
    groups: dict[int, np.ndarray] = {}
    for key, amp in state.amplitudes.items():
        u = key >> up_pos & 1
        d = key >> down_pos & 1
        if u + d != 1:
            raise PreconditionError(f"arm {arm} is not singly occupied in every key")
        env = key & ~arm_mask
        spinor = groups.setdefault(env, np.zeros(2, dtype=complex))
        spinor[0 if u else 1] += amp
    rho = np.zeros((2, 2), dtype=complex)
    for spinor in groups.values():
        rho += np.outer(spinor, spinor.conj())
    return rho


def spinor_fidelity(rho: np.ndarray, alpha: complex, beta: complex) -> float:
    """Overlap <psi|rho|psi> of a density matrix with a (normalized) spinor."""
    v = np.array([alpha, beta], dtype=complex)
    v /= np.linalg.norm(v)
    val = float(np.real(v.conj() @ rho @ v))
    return min(max(val, 0.0), 1.0)
