"""Line-oriented circuit text format.

::

    circuit <n_wires>
    register <name> <start> <size>
    H <w> [basis]
    X <w> [basis]
    CNOT <control> <target> [basis]
    RZ <target> <theta> [basis]
    PHASE <target> <lambda> [basis]
    GPHASE <theta>
    MCRZ <target> <theta> <c:v,c:v,...|->
    UNITARY <label> <w,w,...> <re:im,re:im,...>      (row-major)
    CTRL <control> <value> {
      ...nested gates...
    }

Floats are written with ``repr`` so a print/parse round trip is exact.
"""
from __future__ import annotations

import numpy as np

from .ir import Gate, QuantumCircuit


def _f(x: float) -> str:
    return repr(float(x))


def _lines(gates, indent=""):
    out = []
    for g in gates:
        b = " basis" if g.basis else ""
        k = g.kind
        if k in ("H", "X"):
            out.append(f"{indent}{k} {g.wires[0]}{b}")
        elif k == "CNOT":
            out.append(f"{indent}CNOT {g.wires[0]} {g.wires[1]}{b}")
        elif k in ("RZ", "PHASE"):
            out.append(f"{indent}{k} {g.wires[0]} {_f(g.theta)}{b}")
        elif k == "GPHASE":
            out.append(f"{indent}GPHASE {_f(g.theta)}")
        elif k == "MCRZ":
            ctl = ",".join(f"{c}:{v}" for c, v in zip(g.controls, g.ctrl_values)) or "-"
            out.append(f"{indent}MCRZ {g.target} {_f(g.theta)} {ctl}")
        elif k == "UNITARY":
            data = ",".join(f"{_f(z.real)}:{_f(z.imag)}" for z in g.matrix.ravel())
            label = g.label.replace(" ", "_") or "U"
            out.append(f"{indent}UNITARY {label} {','.join(map(str, g.wires))} {data}")
        elif k == "CTRL":
            out.append(f"{indent}CTRL {g.wires[0]} {g.ctrl_values[0]} {{")
            out.extend(_lines(g.sub.gates, indent + "  "))
            out.append(f"{indent}}}")
    return out


def dumps(circuit: QuantumCircuit) -> str:
    head = [f"circuit {circuit.n_wires}"]
    for name, (s, n) in circuit.registers.items():
        head.append(f"register {name} {s} {n}")
    return "\n".join(head + _lines(circuit.gates)) + "\n"


def _parse_block(lines, pos, n_wires):
    gates = []
    while pos < len(lines):
        tok = lines[pos].split()
        pos += 1
        if not tok or tok[0].startswith("#"):
            continue
        k = tok[0]
        if k == "}":
            return gates, pos
        basis = tok[-1] == "basis"
        if k in ("H", "X"):
            gates.append(Gate(k, (int(tok[1]),), basis=basis))
        elif k == "CNOT":
            gates.append(Gate(k, (int(tok[1]), int(tok[2])), basis=basis))
        elif k in ("RZ", "PHASE"):
            gates.append(Gate(k, (int(tok[1]),), theta=float(tok[2]), basis=basis))
        elif k == "GPHASE":
            gates.append(Gate(k, (), theta=float(tok[1])))
        elif k == "MCRZ":
            pairs = [] if tok[3] == "-" else [p.split(":") for p in tok[3].split(",")]
            ctrls = tuple(int(c) for c, _ in pairs)
            vals = tuple(int(v) for _, v in pairs)
            gates.append(Gate(k, ctrls + (int(tok[1]),), theta=float(tok[2]), ctrl_values=vals))
        elif k == "UNITARY":
            wires = tuple(int(w) for w in tok[2].split(","))
            z = np.array([complex(float(a), float(b))
                          for a, b in (e.split(":") for e in tok[3].split(","))])
            dim = 2 ** len(wires)
            gates.append(Gate(k, wires, matrix=z.reshape(dim, dim), label=tok[1]))
        elif k == "CTRL":
            sub, pos = _parse_block(lines, pos, n_wires)
            gates.append(Gate(k, (int(tok[1]),), ctrl_values=(int(tok[2]),),
                              sub=QuantumCircuit(n_wires, sub)))
        else:
            raise ValueError(f"unknown gate line {lines[pos - 1]!r}")
    return gates, pos


def loads(text: str) -> QuantumCircuit:
    lines = text.splitlines()
    pos = 0
    while not lines[pos].strip():
        pos += 1
    head = lines[pos].split()
    if head[0] != "circuit":
        raise ValueError("missing 'circuit <n_wires>' header")
    n = int(head[1])
    pos += 1
    regs = {}
    while pos < len(lines) and lines[pos].startswith("register"):
        _, name, s, size = lines[pos].split()
        regs[name] = (int(s), int(size))
        pos += 1
    gates, _ = _parse_block(lines, pos, n)
    return QuantumCircuit(n, gates, regs)
