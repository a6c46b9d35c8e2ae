"""Circuit language: valid corpus, diagnostic corpus, and round-tripping."""

from __future__ import annotations

from pathlib import Path

import pytest

from feqc.fock import vacuum
from feqc.measurement import enumerate_branches
from feqc.parser import (
    ARITY,
    ARM_RANGE,
    ARMS_DECL,
    BAD_LITERAL,
    DUPLICATE_ARM,
    FORWARD_REFERENCE,
    LABEL_REDEFINED,
    RE_PREPARED,
    UNKNOWN_KEYWORD,
    UNKNOWN_LABEL,
    parse,
)
from feqc.circuit import print_circuit

DATA = Path(__file__).parent / "data"

VALID_FILES = sorted(p.name for p in DATA.glob("*.feqc"))

EXPECTED_CODES = {
    "unknown_keyword.feqc": UNKNOWN_KEYWORD,
    "arity.feqc": ARITY,
    "bad_literal.feqc": BAD_LITERAL,
    "bad_spin.feqc": BAD_LITERAL,
    "bell_range.feqc": BAD_LITERAL,
    "arm_range.feqc": ARM_RANGE,
    "duplicate_arm.feqc": DUPLICATE_ARM,
    "label_redefined.feqc": LABEL_REDEFINED,
    "forward_reference.feqc": FORWARD_REFERENCE,
    "unknown_label.feqc": UNKNOWN_LABEL,
    "re_prepared.feqc": RE_PREPARED,
    "arms_decl.feqc": ARMS_DECL,
    "bad_rotation.feqc": BAD_LITERAL,
}


def test_corpus_is_large_enough():
    assert len(VALID_FILES) >= 10
    assert len(list((DATA / "invalid").glob("*.feqc"))) >= 10


@pytest.mark.parametrize("name", VALID_FILES)
def test_valid_corpus_parses_and_runs(name):
    result = parse((DATA / name).read_text(encoding="utf-8"))
    assert result.ok, [str(d) for d in result.diagnostics]
    records = enumerate_branches(result.circuit, vacuum(result.circuit.arm_count))
    assert abs(sum(r.probability for r in records) - 1.0) <= 1e-9


@pytest.mark.parametrize("name,code", sorted(EXPECTED_CODES.items()))
def test_invalid_corpus_reports_intended_code(name, code):
    result = parse((DATA / "invalid" / name).read_text(encoding="utf-8"))
    assert result.circuit is None
    codes = {d.code for d in result.diagnostics}
    assert code in codes, [str(d) for d in result.diagnostics]


def test_diagnostics_carry_line_and_column():
    result = parse("arms 2\nelectron 1 up\nbs 1 1\n")
    (diag,) = result.diagnostics
    assert diag.line == 3
    assert diag.column == 6
    assert diag.code == DUPLICATE_ARM


def test_errors_do_not_suppress_later_ones():
    result = parse((DATA / "invalid" / "multi_error.feqc").read_text(encoding="utf-8"))
    codes = [d.code for d in result.diagnostics]
    assert UNKNOWN_KEYWORD in codes
    assert FORWARD_REFERENCE in codes
    assert DUPLICATE_ARM in codes
    assert len(codes) >= 3


def test_forward_reference_is_distinct_from_unknown_label():
    forward = parse("arms 1\nelectron 1 up\nif q == 1 : rot 1 x\nq = charge 1\n")
    assert {d.code for d in forward.diagnostics} == {FORWARD_REFERENCE}
    unknown = parse("arms 1\nelectron 1 up\nif q == 1 : rot 1 x\n")
    assert {d.code for d in unknown.diagnostics} == {UNKNOWN_LABEL}


@pytest.mark.parametrize("name", VALID_FILES)
def test_print_parse_round_trip(name):
    result = parse((DATA / name).read_text(encoding="utf-8"))
    printed = print_circuit(result.circuit)
    reparsed = parse(printed)
    assert reparsed.ok
    assert reparsed.circuit == result.circuit


def test_cnot_core_circuit_has_eight_uniform_branches():
    result = parse((DATA / "cnot_core.feqc").read_text(encoding="utf-8"))
    records = enumerate_branches(result.circuit, vacuum(3))
    assert len(records) == 8
    for rec in records:
        assert rec.probability == pytest.approx(0.125, abs=1e-9)
        assert set(rec.outcomes) == {"p1", "p2", "z"}


def test_analyzer_circuit_on_aligned_pair_is_single_path():
    result = parse((DATA / "bell_analyzer.feqc").read_text(encoding="utf-8"))
    records = enumerate_branches(result.circuit, vacuum(2))
    assert len(records) == 1
    assert records[0].outcomes == {"p1": 1, "p2": 1, "p3": 0}
    assert records[0].probability == pytest.approx(1.0, abs=1e-9)


def test_comments_and_blank_lines_are_ignored():
    result = parse("# header\n\narms 1   # trailing\nelectron 1 up\n")
    assert result.ok
    assert result.circuit.arm_count == 1


def test_complex_literal_spinor():
    result = parse("arms 1\nelectron 1 (0.6,0) (0,0.8)\n")
    assert result.ok
    prep = result.circuit.instructions[0]
    assert prep.alpha == 0.6 + 0j
    assert prep.beta == 0.8j
