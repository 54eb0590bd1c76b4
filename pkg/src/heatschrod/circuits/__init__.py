from .builders import (MODIFIED, ORIGINAL, H0_matrix, HeatLayout, Hheat_matrix, build_B_hat,
                       build_U1_corner, build_V0, build_V1_periodic, build_Vheat, build_Vtilde0,
                       build_W, expand_controls, heat_constant, shift_block)
from .counts import COST_MODEL, GateCounts, count_gates, mcrz_cnot_cost
from .ir import (CNOT, CTRL, GPHASE, MCRZ, PHASE, RZ, UNITARY, Gate, H, QuantumCircuit,
                 Statevector, X)
from .serialize import dumps, loads
from .sim import apply, circuit_to_matrix

__all__ = [
    "MODIFIED", "ORIGINAL", "H0_matrix", "HeatLayout", "Hheat_matrix", "build_B_hat",
    "build_U1_corner", "build_V0", "build_V1_periodic", "build_Vheat", "build_Vtilde0",
    "build_W", "expand_controls", "heat_constant", "shift_block", "COST_MODEL", "GateCounts", "count_gates",
    "mcrz_cnot_cost", "CNOT", "CTRL", "GPHASE", "MCRZ", "PHASE", "RZ", "UNITARY", "Gate", "H",
    "QuantumCircuit", "Statevector", "X", "dumps", "loads", "apply", "circuit_to_matrix",
]
