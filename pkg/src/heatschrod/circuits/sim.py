"""Statevector engine working directly on basis-index bits."""
from __future__ import annotations

import numpy as np

from ..numerics import DENSE_CAP_QUBITS, CapExceeded
from .ir import QuantumCircuit, Statevector

_SQ2 = 1 / np.sqrt(2)
_H = np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex)


def _index(n: int, fixed: dict) -> tuple:
    return tuple(fixed.get(w, slice(None)) for w in range(n))


def _one_qubit(psi, n, U, t, ctx):
    i0 = _index(n, {**ctx, t: 0})
    i1 = _index(n, {**ctx, t: 1})
    a0 = psi[i0].copy()
    a1 = psi[i1].copy()
    psi[i0] = U[0, 0] * a0 + U[0, 1] * a1
    psi[i1] = U[1, 0] * a0 + U[1, 1] * a1


def _diag(psi, n, d0, d1, t, ctx):
    if d0 != 1:
        psi[_index(n, {**ctx, t: 0})] *= d0
    if d1 != 1:
        psi[_index(n, {**ctx, t: 1})] *= d1


def _swap(psi, n, t, ctx):
    i0 = _index(n, {**ctx, t: 0})
    i1 = _index(n, {**ctx, t: 1})
    tmp = psi[i0].copy()
    psi[i0] = psi[i1]
    psi[i1] = tmp


def _dense(psi, n, U, wires, ctx):
    idx = _index(n, ctx)
    sub = psi[idx]
    k = len(wires)
    axes = [w - sum(1 for c in ctx if c < w) for w in wires]
    Ut = U.reshape((2,) * (2 * k))
    out = np.tensordot(Ut, sub, axes=(list(range(k, 2 * k)), axes))
    psi[idx] = np.moveaxis(out, list(range(k)), axes)


def _run(psi, n, gates, ctx):
    for g in gates:
        k = g.kind
        if k == "H":
            _one_qubit(psi, n, _H, g.wires[0], ctx)
        elif k == "X":
            _swap(psi, n, g.wires[0], ctx)
        elif k == "CNOT":
            c, t = g.wires
            if ctx.get(c, 1) == 1:
                _swap(psi, n, t, {**ctx, c: 1})
        elif k == "RZ":
            e = np.exp(-0.5j * g.theta)
            _diag(psi, n, e, np.conj(e), g.wires[0], ctx)
        elif k == "PHASE":
            _diag(psi, n, 1.0, np.exp(1j * g.theta), g.wires[0], ctx)
        elif k == "GPHASE":
            psi[_index(n, ctx)] *= np.exp(1j * g.theta)
        elif k == "MCRZ":
            sub_ctx = dict(ctx)
            skip = False
            for c, v in zip(g.controls, g.ctrl_values):
                if sub_ctx.get(c, v) != v:
                    skip = True
                sub_ctx[c] = v
            if not skip:
                e = np.exp(-0.5j * g.theta)
                _diag(psi, n, e, np.conj(e), g.target, sub_ctx)
        elif k == "CTRL":
            c, v = g.wires[0], g.ctrl_values[0]
            if ctx.get(c, v) == v:
                _run(psi, n, g.sub.gates, {**ctx, c: v})
        elif k == "UNITARY":
            _dense(psi, n, g.matrix, g.wires, ctx)
        else:  # pragma: no cover
            raise ValueError(k)


def apply(circuit: QuantumCircuit, state) -> Statevector | np.ndarray:
    """Apply the gates in order.  Accepts a Statevector, a vector, or a
    (2**n, batch) array of column states; returns the same kind."""
    n = circuit.n_wires
    is_sv = isinstance(state, Statevector)
    amps = state.amplitudes if is_sv else np.asarray(state)
    if amps.shape[0] != 2**n:
        raise ValueError(f"state length {amps.shape[0]} does not match {n} wires")
    batch = amps.shape[1:]
    psi = np.array(amps, dtype=complex).reshape((2,) * n + batch)
    _run(psi, n, circuit.gates, {})
    out = psi.reshape((2**n,) + batch)
    if is_sv:
        return Statevector(out, dict(state.registers or circuit.registers))
    return out


def circuit_to_matrix(circuit: QuantumCircuit) -> np.ndarray:
    n = circuit.n_wires
    if n > DENSE_CAP_QUBITS:
        raise CapExceeded(f"{n} wires exceed the dense cap of {DENSE_CAP_QUBITS}")
    return apply(circuit, np.eye(2**n, dtype=complex))
