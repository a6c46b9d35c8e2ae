"""Shared brute-force oracles for the test suite.

Everything here recomputes physics through dense linear algebra (explicit
ladder-operator matrices and matrix exponentials), deliberately avoiding the
sparse engine's code paths so the two can check each other.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import expm, schur

from feqc.fock import FockState


def pos_of(mode, num_arms: int) -> int:
    arm, spin = mode
    assert 1 <= arm <= num_arms
    return 2 * (arm - 1) + int(spin)


def dense_creation(pos: int, num_modes: int) -> np.ndarray:
    dim = 1 << num_modes
    mat = np.zeros((dim, dim), dtype=complex)
    for key in range(dim):
        if key >> pos & 1:
            continue
        below = bin(key & ((1 << pos) - 1)).count("1")
        mat[key | (1 << pos), key] = -1.0 if below % 2 else 1.0
    return mat


def dense_vector(state: FockState) -> np.ndarray:
    vec = np.zeros(1 << state.num_modes, dtype=complex)
    for key, amp in state.amplitudes.items():
        vec[key] = amp
    return vec


def from_dense(vec: np.ndarray, num_arms: int, tol: float = 1e-12) -> FockState:
    amps = {k: complex(a) for k, a in enumerate(vec) if abs(a) > tol}
    return FockState(num_arms, amps)


def dense_bilinear_unitary(num_arms: int, modes, u: np.ndarray) -> np.ndarray:
    """Fock-space matrix of a one-particle unitary via expm of the quadratic
    generator: U = exp(i sum_jk h[j,k] adag_j a_k) with h = -i log u."""
    u = np.asarray(u, dtype=complex)
    t, q = schur(u, output="complex")
    theta = np.angle(np.diag(t))
    h_small = q @ np.diag(theta) @ q.conj().T
    num_modes = 2 * num_arms
    positions = [pos_of(mode, num_arms) for mode in modes]
    a_dag = {p: dense_creation(p, num_modes) for p in positions}
    h_fock = np.zeros((1 << num_modes, 1 << num_modes), dtype=complex)
    for j, pj in enumerate(positions):
        for k, pk in enumerate(positions):
            if h_small[j, k] != 0:
                h_fock += h_small[j, k] * (a_dag[pj] @ a_dag[pk].conj().T)
    return expm(1j * h_fock)


def dense_two_point(state: FockState) -> np.ndarray:
    """Correlation matrix <adag_mu a_nu> computed with dense operators."""
    n = state.num_modes
    vec = dense_vector(state)
    a_dag = [dense_creation(p, n) for p in range(n)]
    m = np.zeros((n, n), dtype=complex)
    for mu in range(n):
        for nu in range(n):
            m[mu, nu] = vec.conj() @ a_dag[mu] @ a_dag[nu].conj().T @ vec
    return m


def dense_measure(vec: np.ndarray, predicate) -> list[tuple[int, float, np.ndarray]]:
    """Partition a dense vector by an outcome function of the basis key."""
    groups: dict[int, np.ndarray] = {}
    for key, amp in enumerate(vec):
        if abs(amp) < 1e-14:
            continue
        out = predicate(key)
        groups.setdefault(out, np.zeros_like(vec))[key] = amp
    branches = []
    for out in sorted(groups):
        p = float(np.vdot(groups[out], groups[out]).real)
        branches.append((out, p, groups[out] / np.sqrt(p)))
    return branches


def random_unitary(rng: np.random.Generator, dim: int) -> np.ndarray:
    z = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    q, r = np.linalg.qr(z)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_state(rng: np.random.Generator, num_arms: int, particles: int | None = None) -> FockState:
    """Random normalized sparse state; optionally restricted to a fixed
    particle number (bilinear elements preserve it per key)."""
    num_modes = 2 * num_arms
    keys = [
        k for k in range(1 << num_modes)
        if particles is None or bin(k).count("1") == particles
    ]
    amps = rng.normal(size=len(keys)) + 1j * rng.normal(size=len(keys))
    amps /= np.linalg.norm(amps)
    return FockState(num_arms, {k: complex(a) for k, a in zip(keys, amps) if abs(a) > 1e-12})


def random_spinor(rng: np.random.Generator) -> tuple[complex, complex]:
    v = rng.normal(size=2) + 1j * rng.normal(size=2)
    v /= np.linalg.norm(v)
    return complex(v[0]), complex(v[1])


def haar_two_qubit(rng: np.random.Generator) -> np.ndarray:
    c = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    return c / np.linalg.norm(c)
