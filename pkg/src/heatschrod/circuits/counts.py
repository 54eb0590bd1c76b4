"""Gate counting with a documented multi-controlled-rotation cost model.

Cost model for an Rz rotation with k controls (ancilla-free):

* k = 0: one single-qubit rotation, no CNOTs.
* k = 1: the standard CNOT sandwich, 2 CNOTs and 2 single-qubit rotations.
* k >= 2: Rz(t/2) . C^kX . Rz(-t/2) . C^kX, each C^kX charged 8k - 6
  CNOT-equivalents (linear-depth relative-phase Toffoli ladder), giving
  16k - 12 CNOT-equivalents and 2 single-qubit rotations.

Controls on value 0 add two X gates each.  ``cnot_equivalent`` includes
plain CNOTs.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .builders import expand_controls
from .ir import QuantumCircuit

COST_MODEL = ("k=0: 0 CNOT; k=1: 2 CNOT + 2 Rz; k>=2: 16k-12 CNOT-equivalents + 2 Rz; "
              "negated controls: +2 X each")


def mcrz_cnot_cost(k: int) -> int:
    if k <= 0:
        return 0
    if k == 1:
        return 2
    return 16 * k - 12


@dataclass
class GateCounts:
    single_qubit: int = 0
    cnot: int = 0
    multi_controlled_rz: int = 0
    controlled_subcircuit_expansions: int = 0
    cnot_equivalent: int = 0
    single_qubit_decomposed: int = 0
    global_phase: int = 0
    dense_blocks: int = 0

    def __add__(self, other: "GateCounts") -> "GateCounts":
        return GateCounts(**{k: v + getattr(other, k) for k, v in asdict(self).items()})

    def as_dict(self) -> dict:
        return asdict(self)


def _n_ctrl_blocks(circuit: QuantumCircuit) -> int:
    n = 0
    for g in circuit.gates:
        if g.kind == "CTRL":
            n += 1 + _n_ctrl_blocks(g.sub)
    return n


def count_gates(circuit: QuantumCircuit) -> GateCounts:
    c = GateCounts(controlled_subcircuit_expansions=_n_ctrl_blocks(circuit))
    for g in expand_controls(circuit).gates:
        k = g.kind
        if k in ("H", "X", "RZ", "PHASE"):
            c.single_qubit += 1
            c.single_qubit_decomposed += 1
        elif k == "CNOT":
            c.cnot += 1
            c.cnot_equivalent += 1
        elif k == "GPHASE":
            c.global_phase += 1
        elif k == "MCRZ":
            nc = len(g.controls)
            neg = sum(1 for v in g.ctrl_values if v == 0)
            if nc == 0:
                c.single_qubit += 1
                c.single_qubit_decomposed += 1
            else:
                c.multi_controlled_rz += 1
                c.cnot_equivalent += mcrz_cnot_cost(nc)
                c.single_qubit_decomposed += 2 + 2 * neg
        elif k == "UNITARY":
            c.dense_blocks += 1
    return c
