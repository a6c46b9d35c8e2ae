"""Declarative circuit description: preps, optical elements, labeled
measurements and feedforward conditionals, plus structural validation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

from . import fock
from .errors import CircuitError

MEASUREMENT_KINDS = ("charge", "parity", "spin")
ROTATION_NAMES = ("x", "y", "z", "h")


@dataclass
class PrepSpin:
    arm: int
    alpha: complex
    beta: complex


@dataclass
class PrepBell:
    k: int
    arm_a: int
    arm_b: int


@dataclass
class BeamSplitter:
    arm_i: int
    arm_j: int


@dataclass
class PolarizingBeamSplitter:
    arm_i: int
    arm_j: int


@dataclass
class SwapArms:
    arm_i: int
    arm_j: int


@dataclass
class SpinRotation:
    arm: int
    name: str


@dataclass
class Measure:
    label: str
    kind: str
    arm: int


@dataclass
class Conditional:
    label: str
    value: int
    op: SpinRotation


Instruction = Union[
    PrepSpin, PrepBell, BeamSplitter, PolarizingBeamSplitter, SwapArms,
    SpinRotation, Measure, Conditional,
]


@dataclass
class Circuit:
    arm_count: int
    instructions: list[Instruction] = field(default_factory=list)


def validate_circuit(circuit: Circuit) -> None:
    """Raise CircuitError on the first structural problem found."""
    if circuit.arm_count < 1:
        raise CircuitError("arm count must be >= 1")

    def check_arm(arm: int, what: str) -> None:
        if not 1 <= arm <= circuit.arm_count:
            raise CircuitError(f"{what}: arm {arm} out of range 1..{circuit.arm_count}")

    seen_labels: set[str] = set()
    prepared: set[int] = set()
    for ins in circuit.instructions:
        if isinstance(ins, PrepSpin):
            check_arm(ins.arm, "electron")
            if ins.arm in prepared:
                raise CircuitError(f"arm {ins.arm} prepared twice")
            prepared.add(ins.arm)
        elif isinstance(ins, PrepBell):
            if ins.k not in range(4):
                raise CircuitError(f"bell index {ins.k} not in 0..3")
            for arm in (ins.arm_a, ins.arm_b):
                check_arm(arm, "bell")
                if arm in prepared:
                    raise CircuitError(f"arm {arm} prepared twice")
                prepared.add(arm)
            if ins.arm_a == ins.arm_b:
                raise CircuitError("bell pair needs two distinct arms")
        elif isinstance(ins, (BeamSplitter, PolarizingBeamSplitter, SwapArms)):
            check_arm(ins.arm_i, "element")
            check_arm(ins.arm_j, "element")
            if ins.arm_i == ins.arm_j:
                raise CircuitError("two-arm element needs distinct arms")
        elif isinstance(ins, SpinRotation):
            check_arm(ins.arm, "rot")
            if ins.name not in ROTATION_NAMES:
                raise CircuitError(f"unknown rotation {ins.name!r}")
        elif isinstance(ins, Measure):
            check_arm(ins.arm, "measurement")
            if ins.kind not in MEASUREMENT_KINDS:
                raise CircuitError(f"unknown measurement kind {ins.kind!r}")
            if ins.label in seen_labels:
                raise CircuitError(f"label {ins.label!r} redefined")
            seen_labels.add(ins.label)
        elif isinstance(ins, Conditional):
            if ins.label not in seen_labels:
                raise CircuitError(
                    f"conditional references label {ins.label!r} before it is measured"
                )
            check_arm(ins.op.arm, "conditional rot")
            if ins.op.name not in ROTATION_NAMES:
                raise CircuitError(f"unknown rotation {ins.op.name!r}")
        else:
            raise CircuitError(f"unknown instruction {ins!r}")


def apply_instruction(state: fock.FockState, ins: Instruction) -> fock.FockState:
    """Apply a preparation or optical element (measurements are handled by the
    measurement module, conditionals by the branch walker)."""
    if isinstance(ins, PrepSpin):
        return fock.prepare_spin(state, ins.arm, ins.alpha, ins.beta)
    if isinstance(ins, PrepBell):
        return fock.prepare_bell(state, ins.k, ins.arm_a, ins.arm_b)
    if isinstance(ins, BeamSplitter):
        return fock.beam_splitter(state, ins.arm_i, ins.arm_j)
    if isinstance(ins, PolarizingBeamSplitter):
        return fock.polarizing_beam_splitter(state, ins.arm_i, ins.arm_j)
    if isinstance(ins, SwapArms):
        return fock.swap_arms(state, ins.arm_i, ins.arm_j)
    if isinstance(ins, SpinRotation):
        return fock.spin_rotation(state, ins.arm, fock.ROTATIONS[ins.name])
    raise CircuitError(f"cannot apply {ins!r} directly")


def _complex_literal(z: complex) -> str:
    return f"({z.real!r},{z.imag!r})"


def _spinor_text(alpha: complex, beta: complex) -> str:
    named = {(1 + 0j, 0j): "up", (0j, 1 + 0j): "down", (1 + 0j, 1 + 0j): "plus"}
    name = named.get((complex(alpha), complex(beta)))
    if name is not None:
        return name
    return f"{_complex_literal(alpha)} {_complex_literal(beta)}"


def print_circuit(circuit: Circuit) -> str:
    """Render a circuit in the text format accepted by the parser."""
    lines = [f"arms {circuit.arm_count}"]
    for ins in circuit.instructions:
        if isinstance(ins, PrepSpin):
            lines.append(f"electron {ins.arm} {_spinor_text(ins.alpha, ins.beta)}")
        elif isinstance(ins, PrepBell):
            lines.append(f"bell {ins.k} {ins.arm_a} {ins.arm_b}")
        elif isinstance(ins, BeamSplitter):
            lines.append(f"bs {ins.arm_i} {ins.arm_j}")
        elif isinstance(ins, PolarizingBeamSplitter):
            lines.append(f"pbs {ins.arm_i} {ins.arm_j}")
        elif isinstance(ins, SwapArms):
            lines.append(f"swap {ins.arm_i} {ins.arm_j}")
        elif isinstance(ins, SpinRotation):
            lines.append(f"rot {ins.arm} {ins.name}")
        elif isinstance(ins, Measure):
            lines.append(f"{ins.label} = {ins.kind} {ins.arm}")
        elif isinstance(ins, Conditional):
            lines.append(f"if {ins.label} == {ins.value} : rot {ins.op.arm} {ins.op.name}")
        else:
            raise CircuitError(f"cannot print {ins!r}")
    return "\n".join(lines) + "\n"
