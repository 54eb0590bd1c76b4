"""Circuits for the Schrodingerised heat evolution.

Local conventions: a W_j block acts on j wires whose first wire is the
Bell-pair pivot ("qubit 0").  An x-register of n wires hosts W_j on its last
j wires.  p-register digit of significance m sits on p-wire n_p - 1 - m.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .ir import (CNOT, CTRL, GPHASE, MCRZ, PHASE, RZ, UNITARY, H, Gate, QuantumCircuit,
                 X)

ORIGINAL = "original"
MODIFIED = "modified"


def build_B_hat(j: int, lam: float = 0.0) -> QuantumCircuit:
    """Bell-basis change diagonalising the j-qubit shift block S(lam).

    Time order: H on the pivot, CNOTs from the pivot onto the other j-1 wires,
    then the phase P(-lam) on the pivot (omitted when lam = 0).
    """
    if j < 1:
        raise ValueError("j >= 1")
    qc = QuantumCircuit(j)
    qc.append(H(0, basis=True))
    for m in range(1, j):
        qc.append(CNOT(0, m, basis=True))
    if lam != 0.0:
        qc.append(PHASE(-lam, 0, basis=True))
    return qc


def build_W(j: int, gamma_tau: float, lam: float = 0.0) -> QuantumCircuit:
    """exp(i gamma_tau S(lam)) as B_hat . MCRz(-2 gamma_tau) . B_hat^dagger."""
    B = build_B_hat(j, lam)
    qc = B.adjoint()
    qc.append(MCRZ(-2.0 * gamma_tau, range(1, j), 0))
    qc.extend(B)
    return qc


def build_V0(tau: float, n_x: int, gamma0: float) -> QuantumCircuit:
    """Product formula for exp(i tau gamma0 (S^+ + S^- - 2I)) on n_x wires."""
    if n_x < 1:
        raise ValueError("n_x >= 1")
    qc = QuantumCircuit(n_x, registers={"x": (0, n_x)})
    qc.append(GPHASE(-2.0 * gamma0 * tau))
    # operator product W_1 W_2 ... W_n: W_n acts first
    for j in range(n_x, 0, -1):
        qc.extend(build_W(j, gamma0 * tau).remap(n_x - j, n_x))
    return qc


def build_U1_corner(tau: float, n_x: int, gamma0: float) -> QuantumCircuit:
    """exp(i tau gamma0 (sigma01^n + sigma10^n)) via X-conjugation onto S_n."""
    qc = QuantumCircuit(n_x, registers={"x": (0, n_x)})
    flips = [X(w, basis=True) for w in range(1, n_x)]
    qc.extend(flips)
    qc.extend(build_W(n_x, gamma0 * tau))
    qc.extend(flips)
    return qc


def build_V1_periodic(tau: float, n_x: int, gamma0: float) -> QuantumCircuit:
    """V1 = V0 . U1_corner (the corner factor acts first)."""
    qc = build_U1_corner(tau, n_x, gamma0)
    qc.extend(build_V0(tau, n_x, gamma0))
    return qc


@dataclass(frozen=True)
class HeatLayout:
    """Wire map: d x-registers (axis d-1 first), then the p-register."""

    d: int
    n_x: int
    n_p: int
    offset: int = 0

    @property
    def n_wires(self) -> int:
        return self.offset + self.d * self.n_x + self.n_p

    def x_wires(self, axis: int) -> list:
        start = self.offset + (self.d - 1 - axis) * self.n_x
        return list(range(start, start + self.n_x))

    @property
    def p_wires(self) -> list:
        start = self.offset + self.d * self.n_x
        return list(range(start, start + self.n_p))

    def p_wire(self, significance: int) -> int:
        return self.p_wires[self.n_p - 1 - significance]

    def registers(self) -> dict:
        regs = {f"x{ax}": (self.x_wires(ax)[0], self.n_x) for ax in range(self.d)}
        if self.n_p:
            regs["p"] = (self.p_wires[0], self.n_p)
        return regs


def build_Vtilde0(tau: float, layout: HeatLayout, gamma0: float,
                  periodic: bool = False) -> QuantumCircuit:
    """Product of the per-axis one-dimensional factors."""
    qc = QuantumCircuit(layout.n_wires, registers=layout.registers())
    one = build_V1_periodic if periodic else build_V0
    for ax in range(layout.d):
        qc.extend(one(tau, layout.n_x, gamma0).remap(layout.x_wires(ax), layout.n_wires))
    return qc


def build_Vheat(tau: float, n_x: int, n_p: int, d: int, gamma0: float,
                mode: str = MODIFIED, periodic: bool = False,
                layout: HeatLayout | None = None) -> QuantumCircuit:
    """Select oracle sum_k Vtilde0^{k - N_p/2} (x) |k><k| on x and p registers.

    original: controlled powers Vtilde0(tau)^{2^m}; modified: controlled
    Vtilde0(2^m tau).  The offset power -N_p/2 is merged with the top p-wire
    as a block controlled on value 0, applied last.
    """
    lay = layout or HeatLayout(d, n_x, n_p)
    if (lay.d, lay.n_x, lay.n_p) != (d, n_x, n_p):
        raise ValueError("layout does not match (d, n_x, n_p)")
    qc = QuantumCircuit(lay.n_wires, registers=lay.registers())
    base = build_Vtilde0(tau, lay, gamma0, periodic)
    for m in range(n_p - 1):
        if mode == ORIGINAL:
            block = base.repeat(2**m)
        elif mode == MODIFIED:
            block = build_Vtilde0(2**m * tau, lay, gamma0, periodic)
        else:
            raise ValueError(f"unknown mode {mode!r}")
        qc.append(CTRL(lay.p_wire(m), 1, block))
    half = 2 ** (n_p - 1)
    if mode == ORIGINAL:
        inv = base.adjoint().repeat(half)
    else:
        inv = build_Vtilde0(-half * tau, lay, gamma0, periodic)
    qc.append(CTRL(lay.p_wire(n_p - 1), 0, inv))
    return qc


def heat_constant(d: int, n_x: int, n_p: int, gamma0: float) -> float:
    """C_heat = d N_p (n_x - 1) gamma0^2 / 4."""
    return d * 2**n_p * (n_x - 1) * gamma0**2 / 4.0


# ---------------------------------------------------------------- dense targets


def shift_block(j: int, lam: float = 0.0) -> np.ndarray:
    """S(lam) = e^{i lam} sigma01 (x) sigma10^(j-1) + h.c. on j wires."""
    from ..discretize import SIGMA01, SIGMA10, kron_all

    M = np.exp(1j * lam) * kron_all([SIGMA01] + [SIGMA10] * (j - 1))
    return M + M.conj().T


@lru_cache(maxsize=64)
def _shift_sum(n: int, periodic: bool) -> np.ndarray:
    from ..discretize import corner_coupling, shift_ops

    so = shift_ops(n)
    M = so.S_plus + so.S_minus
    if periodic:
        M = M + corner_coupling(n)
    return M


def H0_matrix(n_x: int, gamma0: float, periodic: bool = False) -> np.ndarray:
    """gamma0 (S^+ + S^- - 2I) (+ corner terms)."""
    return gamma0 * (_shift_sum(n_x, periodic) - 2 * np.eye(2**n_x))


def Hheat_matrix(n_x: int, n_p: int, d: int, gamma0: float, R: float = 1.0,
                 periodic: bool = False) -> np.ndarray:
    """sum_alpha (H0)_alpha (x) diag(k - N_p/2), the generator V_heat targets.

    With gamma0 = a/(dx^2 R) this equals a D (x) D_eta, i.e. minus the
    Schrodingerised Hamiltonian of the heat equation.
    """
    from ..discretize import kron_all

    H0 = H0_matrix(n_x, gamma0, periodic)
    Ix = np.eye(2**n_x)
    Hx = np.zeros((2 ** (d * n_x),) * 2, dtype=complex)
    for ax in range(d):
        f = [Ix] * d
        f[d - 1 - ax] = H0
        Hx += kron_all(f)
    N = 2**n_p
    return np.kron(Hx, np.diag(np.arange(N) - N // 2).astype(complex))


# ---------------------------------------------------------------- control expansion


def _promote(g: Gate, c: int, v: int) -> list:
    """Add the control (c = v) to one primitive gate."""
    if g.basis:
        return [g]
    k = g.kind
    if k == "MCRZ":
        return [Gate("MCRZ", g.controls + (c, g.target), theta=g.theta,
                     ctrl_values=g.ctrl_values + (v,))]
    if k == "RZ":
        return [MCRZ(g.theta, (c,), g.wires[0], (v,))]
    if k == "GPHASE":
        if v == 1:
            return [PHASE(g.theta, c)]
        return [GPHASE(g.theta), PHASE(-g.theta, c)]
    if k == "PHASE":
        # P(l) = e^{il/2} Rz(l)
        return _promote(GPHASE(g.theta / 2), c, v) + [MCRZ(g.theta, (c,), g.wires[0], (v,))]
    if k == "UNITARY":
        n = len(g.wires)
        big = np.eye(2 ** (n + 1), dtype=complex)
        s = slice(v * 2**n, (v + 1) * 2**n)
        big[s, s] = g.matrix
        return [UNITARY(big, (c,) + g.wires, label=f"c{v}-{g.label}")]
    raise NotImplementedError(f"cannot add a control to a non-basis {k} gate")


def expand_controls(circuit: QuantumCircuit) -> QuantumCircuit:
    """Flatten controlled blocks into primitive gates.

    Basis-change gates inside a block stay uncontrolled: every block built
    here is a product of conjugations B core B^dagger, and when the control
    is off each pair cancels.
    """
    out = QuantumCircuit(circuit.n_wires, registers=dict(circuit.registers))
    for g in circuit.gates:
        if g.kind != "CTRL":
            out.append(g)
            continue
        inner = expand_controls(g.sub)
        c, v = g.wires[0], g.ctrl_values[0]
        for h in inner.gates:
            out.extend(_promote(h, c, v))
    return out
