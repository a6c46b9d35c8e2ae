"""Command line runner: parse .feqc circuits, run either backend, and print
JSON reports (or a readable rendering with --pretty).

Exit codes: 0 on success, 2 on parse or validation errors, 1 on runtime
errors such as occupancy violations or a backend refusing an operation.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from pathlib import Path

import numpy as np

from . import corr, fock, gadgets, measurement
from .circuit import Circuit
from .errors import CircuitError, FeqcError, NonGaussianOperationError, PreconditionError
from .fock import FockState, format_key, vacuum
from .measurement import outcome_signature, sample_tree
from .parser import parse

REPORT_VERSION = "1"


def _build_argparser() -> argparse.ArgumentParser:
    top = argparse.ArgumentParser(prog="feqc", description=__doc__)
    sub = top.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a circuit file")
    run.add_argument("file", help="circuit source (.feqc)")
    run.add_argument("--backend", choices=("fock", "corr"), default="fock")
    run.add_argument("--mode", choices=("enumerate", "sample"), default="enumerate")
    run.add_argument("--shots", type=int, default=1024)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--emit-state", action="store_true",
                     help="include final amplitudes per branch (fock backend)")
    _output_flags(run)

    gadget = sub.add_parser("gadget", help="run a prebuilt gadget")
    gsub = gadget.add_subparsers(dest="name", required=True)

    bell = gsub.add_parser("bell", help="analyze one of the four entangled pair states")
    bell.add_argument("--input", type=int, required=True, choices=range(4),
                      help="pair state index 0..3")
    bell.add_argument("--detector", choices=("parity", "charge"), default="parity")
    _output_flags(bell)

    enc = gsub.add_parser("encoder", help="entangle a qubit with a fresh ancilla")
    enc.add_argument("--qubit", default="(1,0),(0,0)", help='spinor as "(re,im),(re,im)"')
    enc.add_argument("--no-correction", action="store_true",
                     help="skip the spin flip in the parity-0 branch")
    _output_flags(enc)

    cnot = gsub.add_parser("cnot", help="deterministic controlled-NOT on basis inputs")
    cnot.add_argument("--control", type=int, required=True, choices=(0, 1))
    cnot.add_argument("--target", type=int, required=True, choices=(0, 1))
    _output_flags(cnot)

    tele = gsub.add_parser("teleport", help="teleport a spin qubit over a singlet pair")
    tele.add_argument("--qubit", default="(1,0),(0,0)", help='spinor as "(re,im),(re,im)"')
    _output_flags(tele)

    app = gsub.add_parser("appendix-table",
                          help="16-row closed-form check of the Hadamard-PBS block")
    _output_flags(app)
    return top


def _output_flags(p: argparse.ArgumentParser) -> None:
    fmt = p.add_mutually_exclusive_group()
    fmt.add_argument("--json", dest="pretty", action="store_false", default=False,
                     help="JSON to stdout (default)")
    fmt.add_argument("--pretty", dest="pretty", action="store_true",
                     help="human-readable rendering")


_SPINOR_RE = re.compile(
    r"\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\s*,\s*\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)\Z"
)


def _parse_spinor(text: str) -> tuple[complex, complex]:
    m = _SPINOR_RE.match(text.strip())
    if not m:
        raise ValueError(f'expected "(re,im),(re,im)", got {text!r}')
    vals = [float(g) for g in m.groups()]
    alpha = complex(vals[0], vals[1])
    beta = complex(vals[2], vals[3])
    if abs(alpha) ** 2 + abs(beta) ** 2 == 0:
        raise ValueError("spinor must be nonzero")
    return alpha, beta


def _state_entries(state: FockState) -> list[dict]:
    return [
        {"key": format_key(key, state.num_arms), "re": float(amp.real), "im": float(amp.imag)}
        for key, amp in sorted(state.amplitudes.items())
    ]


def _merge_branches(entries: list[dict]) -> list[dict]:
    merged: dict[str, dict] = {}
    for entry in entries:
        sig = outcome_signature(entry["outcomes"])
        if sig in merged:
            merged[sig]["probability"] += entry["probability"]
        else:
            merged[sig] = dict(entry)
    return list(merged.values())


def _run_report(args, circuit: Circuit) -> dict:
    report = {
        "version": REPORT_VERSION,
        "backend": args.backend,
        "mode": args.mode,
        "seed": args.seed if args.mode == "sample" else None,
        "arm_count": circuit.arm_count,
    }
    if args.backend == "fock":
        root = measurement.branch_tree(circuit, vacuum(circuit.arm_count))
        records: list[measurement.BranchRecord] = []
        measurement._collect(root, records)
        branches = []
        for rec in records:
            entry: dict = {"outcomes": rec.outcomes, "probability": rec.probability}
            if args.emit_state:
                entry["state"] = _state_entries(rec.post_state)
            branches.append(entry)
        report["branches"] = branches
    else:
        root, stats = corr.charge_branch_tree(circuit)
        records = []
        corr._collect_leaves(root, records)
        report["branches"] = _merge_branches(
            [{"outcomes": r.outcomes, "probability": r.probability} for r in records]
        )
    if args.mode == "sample":
        result = sample_tree(root, args.seed, args.shots)
        report["frequencies"] = result.frequencies
    if args.backend == "corr":
        report["corr"] = {
            "terms": stats.terms,
            "wall_ms": stats.wall_ms,
            "measured_arms": stats.measured_arms,
            "joint_charge1": stats.joint_charge1,
        }
    return report


def _cmd_run(args) -> int:
    try:
        source = Path(args.file).read_text(encoding="utf-8")
    except OSError as err:
        print(f"error: {err}", file=sys.stderr)
        return 1
    result = parse(source)
    if result.circuit is None:
        for diag in result.diagnostics:
            print(f"{args.file}:{diag}", file=sys.stderr)
        return 2
    report = _run_report(args, result.circuit)
    _emit(report, args.pretty, _render_run)
    return 0


def _spin_state(num_arms: int, prep: list[tuple[int, complex, complex]]) -> FockState:
    state = vacuum(num_arms)
    for arm, alpha, beta in prep:
        state = fock.prepare_spin(state, arm, alpha, beta)
    return state


def _gadget_bell(args) -> dict:
    state = fock.prepare_bell(vacuum(2), args.input, 1, 2)
    results = gadgets.bell_analyzer(state, 1, 2, detector=args.detector)
    branches = []
    success = 0.0
    for outcome, prob in results:
        p1, p2, p3 = outcome.parities
        branches.append(
            {"outcomes": {"p1": p1, "p2": p2, "p3": p3, "b": outcome.b}, "probability": prob}
        )
        if outcome.b == args.input:
            success += prob
    return {
        "options": {"input": args.input, "detector": args.detector},
        "branches": branches,
        "success_probability": success,
    }


def _gadget_encoder(args) -> dict:
    alpha, beta = _parse_spinor(args.qubit)
    state = _spin_state(2, [(1, alpha, beta), (2, 1, 1)])
    ideal = fock.prepare_two_spin(
        vacuum(2), 1, 2, np.array([[alpha, 0], [0, beta]], dtype=complex)
    )
    branches = []
    success = 0.0
    for p, prob, out in gadgets.encoder(state, 1, 2, apply_correction=not args.no_correction):
        fid = fock.fidelity(out, ideal)
        branches.append({"outcomes": {"p": p}, "probability": prob, "fidelity": fid})
        success += prob * fid
    return {
        "options": {"qubit": args.qubit, "correction": not args.no_correction},
        "branches": branches,
        "success_probability": success,
    }


def _gadget_cnot(args) -> dict:
    x, y = args.control, args.target
    state = _spin_state(3, [(1, 1 - x, x), (2, 1 - y, y), (3, 1, 1)])
    branches = []
    success = 0.0
    for rec in gadgets.cnot(state, control_arm=1, target_arm=2, ancilla_arm=3):
        z = rec.outcomes["z"]
        ideal = _spin_state(3, [(1, 1 - x, x), (2, 1 - (x + y) % 2, (x + y) % 2), (3, 1 - z, z)])
        fid = fock.fidelity(rec.output_state, ideal)
        branches.append(
            {
                "outcomes": rec.outcomes,
                "probability": rec.probability,
                "fidelity": fid,
                "corrections": [list(c) for c in rec.applied_corrections],
            }
        )
        success += rec.probability * fid
    return {
        "options": {"control": x, "target": y},
        "branches": branches,
        "success_probability": success,
    }


def _gadget_teleport(args) -> dict:
    alpha, beta = _parse_spinor(args.qubit)
    state = fock.prepare_bell(fock.prepare_spin(vacuum(3), 1, alpha, beta), 0, 2, 3)
    branches = []
    success = 0.0
    for rec in gadgets.teleport(state, 1, 2, 3):
        rho = fock.arm_qubit_density(rec.output_state, 3)
        fid = fock.spinor_fidelity(rho, alpha, beta)
        branches.append(
            {
                "outcomes": rec.outcomes,
                "probability": rec.probability,
                "fidelity": fid,
                "corrections": [list(c) for c in rec.applied_corrections],
            }
        )
        success += rec.probability * fid
    return {
        "options": {"qubit": args.qubit},
        "branches": branches,
        "success_probability": success,
    }


def _gadget_appendix_table(args) -> dict:
    rows = []
    all_match = True
    for a in (0, 1):
        for y in (0, 1):
            state = _spin_state(2, [(1, 1 - a, a), (2, 1 - y, y)])
            for p2, z, prob, out in gadgets.hadamard_pbs_gadget(state, 1, 2):
                expected_bit = (a + y + z) % 2
                expected_phase = float((-1) ** (((p2 + 1) * (a + z)) % 2))
                key, amp = max(out.amplitudes.items(), key=lambda kv: abs(kv[1]))
                up_pos = fock.mode_position((2, fock.Spin.UP), 2)
                output_bit = 0 if key >> up_pos & 1 else 1
                match = bool(
                    output_bit == expected_bit
                    and len(out.amplitudes) == 1
                    and abs(amp - expected_phase) <= 1e-9
                )
                all_match = all_match and match
                rows.append(
                    {
                        "a": a, "y": y, "p2": p2, "z": z,
                        "probability": prob,
                        "output_bit": output_bit,
                        "expected_bit": expected_bit,
                        "phase_re": float(amp.real),
                        "phase_im": float(amp.imag),
                        "expected_phase": expected_phase,
                        "match": match,
                    }
                )
    return {"rows": rows, "all_match": all_match}


_GADGETS = {
    "bell": _gadget_bell,
    "encoder": _gadget_encoder,
    "cnot": _gadget_cnot,
    "teleport": _gadget_teleport,
    "appendix-table": _gadget_appendix_table,
}


def _cmd_gadget(args) -> int:
    body = _GADGETS[args.name](args)
    report = {"version": REPORT_VERSION, "command": "gadget", "name": args.name, **body}
    _emit(report, args.pretty, _render_gadget)
    return 0


def _emit(report: dict, pretty: bool, renderer) -> None:
    if pretty:
        print(renderer(report))
    else:
        print(json.dumps(report))


def _render_run(report: dict) -> str:
    lines = [
        f"backend={report['backend']} mode={report['mode']} arms={report['arm_count']}"
    ]
    for entry in report["branches"]:
        sig = outcome_signature(entry["outcomes"]) or "(no measurements)"
        lines.append(f"  {sig:30s} p={entry['probability']:.6f}")
        for amp in entry.get("state", []):
            lines.append(f"    |{amp['key']}>  {amp['re']:+.6f}{amp['im']:+.6f}i")
    if "frequencies" in report:
        lines.append(f"frequencies (seed={report['seed']}):")
        for sig, count in report["frequencies"].items():
            lines.append(f"  {sig:30s} {count}")
    if "corr" in report:
        c = report["corr"]
        lines.append(
            f"corr: terms={c['terms']} wall_ms={c['wall_ms']:.3f} "
            f"joint_charge1={c['joint_charge1']}"
        )
    return "\n".join(lines)


def _render_gadget(report: dict) -> str:
    lines = [f"gadget {report['name']}"]
    for key, value in report.get("options", {}).items():
        lines.append(f"  {key} = {value}")
    if "rows" in report:
        lines.append("  a y p2 z   bit expect  phase     match")
        for r in report["rows"]:
            lines.append(
                f"  {r['a']} {r['y']} {r['p2']}  {r['z']}    {r['output_bit']}   "
                f"{r['expected_bit']}     {r['phase_re']:+.3f}    {str(r['match']).lower()}"
            )
        lines.append(f"all match: {report['all_match']}")
        return "\n".join(lines)
    for entry in report["branches"]:
        sig = outcome_signature(entry["outcomes"])
        extra = ""
        if "fidelity" in entry:
            extra = f" fidelity={entry['fidelity']:.9f}"
        lines.append(f"  {sig:24s} p={entry['probability']:.6f}{extra}")
    if "success_probability" in report:
        lines.append(f"success probability: {report['success_probability']:.9f}")
    return "\n".join(lines)


def main(argv=None) -> int:
    args = _build_argparser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_gadget(args)
    except CircuitError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    except (PreconditionError, NonGaussianOperationError, FeqcError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
