"""Gate-list circuit representation.

Wire 0 holds the most significant bit of the basis index.  Gates flagged
``basis`` are basis changes that always occur in conjugate pairs around a
controlled core; adding a control to a circuit leaves them untouched.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

MAX_WIRES = 24

KINDS = ("H", "X", "CNOT", "RZ", "PHASE", "GPHASE", "MCRZ", "CTRL", "UNITARY")


@dataclass(frozen=True, eq=False)
class Gate:
    kind: str
    wires: tuple = ()
    theta: float = 0.0
    ctrl_values: tuple = ()  # MCRZ: one value per control; CTRL: (value,)
    sub: "QuantumCircuit | None" = None
    matrix: np.ndarray | None = None
    label: str = ""
    basis: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown gate kind {self.kind}")
        if len(set(self.wires)) != len(self.wires):
            raise ValueError(f"{self.kind}: repeated wire in {self.wires}")

    @property
    def controls(self) -> tuple:
        if self.kind == "MCRZ":
            return self.wires[:-1]
        if self.kind == "CNOT":
            return self.wires[:1]
        return ()

    @property
    def target(self) -> int:
        return self.wires[-1]

    def adjoint(self) -> "Gate":
        k = self.kind
        if k in ("H", "X", "CNOT"):
            return self
        if k in ("RZ", "PHASE", "GPHASE", "MCRZ"):
            return replace(self, theta=-self.theta)
        if k == "CTRL":
            return replace(self, sub=self.sub.adjoint())
        return replace(self, matrix=self.matrix.conj().T,
                       label=self.label[:-1] if self.label.endswith("'") else self.label + "'")

    def all_wires(self) -> set:
        ws = set(self.wires)
        if self.sub is not None:
            for g in self.sub.gates:
                ws |= g.all_wires()
        return ws

    def remap(self, m) -> "Gate":
        w = tuple(m[x] for x in self.wires)
        sub = self.sub.remap(m) if self.sub is not None else None
        return replace(self, wires=w, sub=sub)


# ---------------------------------------------------------------- constructors


def H(w, basis=False):
    return Gate("H", (w,), basis=basis)


def X(w, basis=False):
    return Gate("X", (w,), basis=basis)


def CNOT(c, t, basis=False):
    return Gate("CNOT", (c, t), basis=basis)


def RZ(theta, t, basis=False):
    return Gate("RZ", (t,), theta=float(theta), basis=basis)


def PHASE(lam, t, basis=False):
    return Gate("PHASE", (t,), theta=float(lam), basis=basis)


def GPHASE(theta):
    return Gate("GPHASE", (), theta=float(theta))


def MCRZ(theta, controls, target, values=None):
    controls = tuple(controls)
    values = tuple(values) if values is not None else (1,) * len(controls)
    if target in controls:
        raise ValueError("MCRZ target among controls")
    return Gate("MCRZ", controls + (target,), theta=float(theta), ctrl_values=values)


def CTRL(control, value, sub):
    if value not in (0, 1):
        raise ValueError("control value must be 0 or 1")
    if control in sub.used_wires():
        raise ValueError("control wire used inside controlled block")
    return Gate("CTRL", (control,), ctrl_values=(int(value),), sub=sub)


def UNITARY(matrix, wires, label="U"):
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.shape != (2 ** len(wires),) * 2:
        raise ValueError("matrix size does not match wire count")
    return Gate("UNITARY", tuple(wires), matrix=matrix, label=label)


@dataclass
class QuantumCircuit:
    n_wires: int
    gates: list = field(default_factory=list)
    registers: dict = field(default_factory=dict)  # name -> (start, size)

    def __post_init__(self):
        if self.n_wires > MAX_WIRES:
            raise ValueError(f"{self.n_wires} wires exceed the {MAX_WIRES}-wire cap")
        for g in self.gates:
            self._check(g)

    def _check(self, g: Gate):
        bad = [w for w in g.all_wires() if not 0 <= w < self.n_wires]
        if bad:
            raise ValueError(f"gate {g.kind} uses out-of-range wires {bad}")

    def append(self, g: Gate) -> "QuantumCircuit":
        self._check(g)
        self.gates.append(g)
        return self

    def extend(self, other) -> "QuantumCircuit":
        gates = other.gates if isinstance(other, QuantumCircuit) else other
        for g in gates:
            self.append(g)
        return self

    def copy(self) -> "QuantumCircuit":
        return QuantumCircuit(self.n_wires, list(self.gates), dict(self.registers))

    def adjoint(self) -> "QuantumCircuit":
        return QuantumCircuit(self.n_wires, [g.adjoint() for g in reversed(self.gates)],
                              dict(self.registers))

    def repeat(self, k: int) -> "QuantumCircuit":
        return QuantumCircuit(self.n_wires, list(self.gates) * k, dict(self.registers))

    def used_wires(self) -> set:
        ws = set()
        for g in self.gates:
            ws |= g.all_wires()
        return ws

    def remap(self, mapping, n_wires: int | None = None) -> "QuantumCircuit":
        """Relabel wires; ``mapping`` is an int offset or a sequence/dict."""
        if isinstance(mapping, int):
            off = mapping
            mapping = {w: w + off for w in range(self.n_wires)}
        elif not isinstance(mapping, dict):
            mapping = dict(enumerate(mapping))
        n = n_wires if n_wires is not None else max(mapping.values()) + 1
        return QuantumCircuit(n, [g.remap(mapping) for g in self.gates])

    def __add__(self, other: "QuantumCircuit") -> "QuantumCircuit":
        if other.n_wires != self.n_wires:
            raise ValueError("wire count mismatch")
        regs = dict(self.registers)
        regs.update(other.registers)
        return QuantumCircuit(self.n_wires, self.gates + other.gates, regs)

    def __len__(self) -> int:
        return len(self.gates)


@dataclass
class Statevector:
    amplitudes: np.ndarray
    registers: dict = field(default_factory=dict)

    @property
    def n_wires(self) -> int:
        return int(np.log2(self.amplitudes.shape[0]))

    @classmethod
    def basis(cls, n_wires: int, index: int = 0, registers=None) -> "Statevector":
        a = np.zeros(2**n_wires, dtype=complex)
        a[index] = 1.0
        return cls(a, dict(registers or {}))

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))
