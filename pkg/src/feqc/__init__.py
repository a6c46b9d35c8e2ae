"""Simulator of free-electron quantum computation: fermionic linear optics
plus charge detection and classical feedforward, with an exact sparse Fock
backend and a polynomial correlation-matrix backend."""

__version__ = "0.1.0"

from .errors import (
    CircuitError,
    FeqcError,
    NonGaussianOperationError,
    PreconditionError,
)
from .fock import (
    BELL_COEFFS,
    BEAM_SPLITTER_MATRIX,
    HADAMARD,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    FockState,
    ModeIndex,
    Spin,
    apply_single_particle_unitary,
    arm_charge,
    arm_qubit_density,
    beam_splitter,
    create,
    fidelity,
    format_key,
    inner_product,
    mode_position,
    normalize,
    polarizing_beam_splitter,
    prepare_bell,
    prepare_spin,
    prepare_two_spin,
    spin_rotation,
    spinor_fidelity,
    swap_arms,
    vacuum,
)
from .measurement import (
    BranchRecord,
    SampleResult,
    charge1_expectation,
    enumerate_branches,
    measure_charge,
    measure_mode,
    measure_parity,
    measure_spin,
    outcome_signature,
    sample,
)
from .circuit import (
    BeamSplitter,
    Circuit,
    Conditional,
    Measure,
    PolarizingBeamSplitter,
    PrepBell,
    PrepSpin,
    SpinRotation,
    SwapArms,
    print_circuit,
    validate_circuit,
)
from .gadgets import (
    BellOutcome,
    GadgetBranchRecord,
    TELEPORT_CORRECTIONS,
    bell_analyzer,
    bell_statistic,
    cnot,
    control_branch_formula,
    derive_teleport_corrections,
    encoder,
    hadamard_pbs_gadget,
    spin_parity_readout,
    teleport,
)
from .corr import (
    CorrelationMatrix,
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
from .parser import Diagnostic, ParseResult, parse
