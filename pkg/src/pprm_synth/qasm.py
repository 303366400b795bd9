"""OpenQASM 2.0 export of NCV circuits, plus a reader for the emitted subset.

Controlled-V is the controlled square root of X, written as ``h; cu1(pi/2);
h`` on the target.  CV† has no primitive of its own and is emitted as CV
followed by CNOT (V·X = V³ = V†), or CNOT first when requested.  Negative
controls are wrapped in X gates on the control line.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

from .circuit import Circuit, Line, NcvGate, INPUT
from .ncv import quantum_cost

__all__ = ["CVDAG_ORDERS", "format_qasm", "export_qasm", "QasmOp", "parse_qasm", "qasm_to_circuit"]

CVDAG_ORDERS = ("cv-first", "cnot-first")

_CV_DEF = "gate cv a,b { h b; cu1(pi/2) a,b; h b; }"


def _ops_for(g: NcvGate, cvdag_order: str) -> list[str]:
    if g.kind == "NOT":
        return [f"x q[{g.target}];"]
    ctrl, pos = g.control
    pair = f"q[{ctrl}],q[{g.target}]"
    if g.kind == "CNOT":
        body = [f"cx {pair};"]
    elif g.kind == "CV":
        body = [f"cv {pair};"]
    elif cvdag_order == "cv-first":
        body = [f"cv {pair};", f"cx {pair};"]
    else:
        body = [f"cx {pair};", f"cv {pair};"]
    if not pos:
        body = [f"x q[{ctrl}];"] + body + [f"x q[{ctrl}];"]
    return body


def format_qasm(c: Circuit, cvdag_order: str = "cv-first") -> str:
    if c.stage != "NCV":
        raise ValueError("export expects an NCV circuit")
    if cvdag_order not in CVDAG_ORDERS:
        raise ValueError(f"cvdag_order must be one of {CVDAG_ORDERS}")
    cost = quantum_cost(c)
    out = [
        "OPENQASM 2.0;",
        'include "qelib1.inc";',
        f"// qc annotated={cost.qc_total} strict-export={cost.strict_export_qc}",
        "// lines " + " ".join(f"{i}:{l.name}:{l.kind}" for i, l in enumerate(c.lines)),
        _CV_DEF,
        f"qreg q[{c.width}];",
    ]
    for g in c.gates:
        out.extend(_ops_for(g, cvdag_order))
    return "\n".join(out) + "\n"


def export_qasm(c: Circuit, path, cvdag_order: str = "cv-first") -> None:
    Path(path).write_text(format_qasm(c, cvdag_order), encoding="utf-8")


@dataclass(frozen=True)
class QasmOp:
    name: str
    qubits: tuple[int, ...]
    params: tuple[str, ...] = ()


_OP = re.compile(r"^(?P<name>[a-z][a-z0-9_]*)\s*(?:\((?P<params>[^)]*)\))?\s+(?P<args>[^;]+);$")
_QUBIT = re.compile(r"^q\[(\d+)\]$")


def parse_qasm(text: str) -> tuple[int, list[QasmOp]]:
    """Width and flat op list for the subset written by :func:`format_qasm`."""
    width = None
    ops: list[QasmOp] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("//", 1)[0].strip()
        if not line or line.startswith(("OPENQASM", "include", "gate ")):
            continue
        m = re.match(r"^qreg\s+q\[(\d+)\];$", line)
        if m:
            width = int(m.group(1))
            continue
        m = _OP.match(line)
        if not m:
            raise ValueError(f"line {lineno}: cannot parse {raw!r}")
        qubits = []
        for a in m.group("args").split(","):
            qm = _QUBIT.match(a.strip())
            if not qm:
                raise ValueError(f"line {lineno}: bad operand {a!r}")
            qubits.append(int(qm.group(1)))
        params = tuple(p.strip() for p in m.group("params").split(",")) if m.group("params") else ()
        ops.append(QasmOp(m.group("name"), tuple(qubits), params))
    if width is None:
        raise ValueError("no qreg declaration")
    return width, ops


def qasm_to_circuit(text: str, lines: tuple[Line, ...] | None = None) -> Circuit:
    """Rebuild an NCV circuit (negative controls appear as explicit X gates)."""
    width, ops = parse_qasm(text)
    kinds = {"x": "NOT", "cx": "CNOT", "cv": "CV"}
    gates = []
    for op in ops:
        if op.name not in kinds:
            raise ValueError(f"unsupported op {op.name!r}")
        if op.name == "x":
            gates.append(NcvGate("NOT", op.qubits[0]))
        else:
            gates.append(NcvGate(kinds[op.name], op.qubits[1], (op.qubits[0], True)))
    if lines is None:
        lines = tuple(Line(f"q{i}", INPUT) for i in range(width))
    return Circuit(lines, tuple(gates), "NCV")
