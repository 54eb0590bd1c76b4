"""Duhamel quadrature realised as a linear combination of unitaries.

The inhomogeneous part of w~(T) = e^{iHT} w~(0) + int_0^T e^{iH(T-s)} b~(s) ds
is approximated by the left Riemann sum

    w~_b^{aa} = U_K sum_j ds U_j b~(s_j),   U_j = V_heat(ds)^j,  U_K = V_heat(-ds)^K,

where V_heat(tau) approximates e^{-iH tau}.  A coefficient oracle, a source
oracle and a select over the control register's bits prepare it coherently;
a rotation on one extra wire merges it with the homogeneous branch.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .circuits import MODIFIED, ORIGINAL, HeatLayout, build_Vheat
from .circuits.ir import CTRL, UNITARY, QuantumCircuit
from .circuits.sim import apply
from .numerics import reference_solution
from .pipelines import HeatEvolution, SelectBlocks, compile_select, exact_select
from .schrodingerise import SchrodingerisedSystem
from .signals import Source

MAX_SLICE_AMPLITUDES = 2**23


@dataclass
class QueryMeter:
    counts: Counter = field(default_factory=Counter)

    def add(self, name: str, k: int = 1):
        if k < 0:
            raise ValueError("meters only increase")
        self.counts[name] += k

    def __getitem__(self, name):
        return self.counts.get(name, 0)

    def as_dict(self) -> dict:
        keys = ("O_H", "O_coef", "O_b", "O_prep", "SEL_H-expansions")
        out = {k: int(self.counts.get(k, 0)) for k in keys}
        out.update({k: int(v) for k, v in self.counts.items() if k not in out})
        return out


def reflector(target: np.ndarray) -> np.ndarray:
    """Unitary Householder-type map sending e_0 to the unit vector ``target``."""
    t = np.asarray(target, dtype=complex)
    t = t / np.linalg.norm(t)
    phase = t[0] / abs(t[0]) if abs(t[0]) > 0 else 1.0
    v = -t / phase
    v[0] += 1.0
    nv = np.vdot(v, v).real
    U = np.eye(t.size, dtype=complex)
    if nv > 1e-30:
        U -= 2.0 * np.outer(v, v.conj()) / nv
    return U * phase


def _reflect_rows(psi: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Apply the (self-adjoint, real) reflector with first column c along axis 0."""
    v = -c.astype(complex)
    v[0] += 1.0
    nv = np.vdot(v, v).real
    if nv < 1e-30:
        return psi
    return psi - (2.0 / nv) * np.outer(v, v.conj() @ psi)


# ---------------------------------------------------------------- planning


def source_bound_terms(H_norm: float, src: Source, T: float, samples: int = 2**10):
    ts = np.linspace(0.0, T, samples + 1)
    sup = float(np.max(H_norm * src.norms(ts) + src.derivative().norms(ts)))
    return src.integrated_norm(T), sup


def choose_K(delta1: float, T: float, H: np.ndarray | float, b_signal: Source | None,
             C_heat: float) -> int:
    """Smallest power of two K with K >= (T^2/delta1) max{2 C_heat |b~|_avg,
    sup_t(|H| |b~(t)| + |b~'(t)|)}."""
    if delta1 <= 0:
        raise ValueError("delta1 > 0 required")
    if b_signal is None or b_signal.is_zero():
        return 1
    H_norm = H if np.isscalar(H) else float(np.linalg.norm(H, 2))
    bavg, sup = source_bound_terms(H_norm, b_signal, T)
    need = T**2 / delta1 * max(2 * C_heat * bavg, sup)
    return 1 << max(0, math.ceil(math.log2(max(need, 1.0))))


@dataclass
class LcuPlan:
    """Quadrature plan.  The source is kept factored, b~(s_j) = vectors @ G[:, j],
    so that K node vectors never have to be held at once."""

    K: int
    T: float
    r: int
    nodes: np.ndarray
    alpha: np.ndarray
    vectors: np.ndarray  # (dim, m)
    G: np.ndarray  # (m, K)
    meter: QueryMeter = field(default_factory=QueryMeter)

    @property
    def n_s(self) -> int:
        return int(round(math.log2(self.K)))

    @property
    def ds(self) -> float:
        return self.T / self.K

    @property
    def tau(self) -> float:
        return self.T / self.r

    @property
    def alpha_l1(self) -> float:
        return float(self.alpha.sum())

    def b_node(self, j: int) -> np.ndarray:
        return self.vectors @ self.G[:, j]

    @property
    def coef_amplitudes(self) -> np.ndarray:
        if self.alpha_l1 == 0:
            return np.eye(1, self.K)[0]
        return np.sqrt(self.alpha / self.alpha_l1)


def make_plan(ss: SchrodingerisedSystem, T: float, K: int, r: int) -> LcuPlan:
    if K < 1 or K & (K - 1):
        raise ValueError("K must be a power of two")
    ds = T / K
    nodes = ds * np.arange(K)
    dim = ss.H.shape[0]
    if ss.source is None or not ss.source.signals:
        vectors, G = np.zeros((dim, 1), dtype=complex), np.zeros((1, K))
    else:
        vectors, G = ss.source.vectors, ss.source.signal_matrix(nodes).astype(complex)
    gram = vectors.conj().T @ vectors
    sq = np.einsum("mj,mn,nj->j", G.conj(), gram, G).real
    alpha = ds * np.sqrt(np.maximum(sq, 0.0))
    return LcuPlan(K, T, r, nodes, alpha, vectors, G)


# ---------------------------------------------------------------- sliced simulation


@dataclass
class LcuState:
    """Outcome of the coherent preparation.

    ``branch`` is the system vector on the |0>_c |0^{n_s}> outcome (eta
    representation); ``probabilities`` partitions the full measurement
    record of the control wires.
    """

    branch: np.ndarray
    probabilities: dict
    meter: QueryMeter
    statevector: np.ndarray | None = None

    @property
    def branch_probability(self) -> float:
        return float(np.vdot(self.branch, self.branch).real)


def _powers(V: SelectBlocks, n: int) -> list:
    out = [V]
    for _ in range(1, n):
        out.append(out[-1] @ out[-1])
    return out


def _sel_slice(psi: np.ndarray, powers_k: list) -> np.ndarray:
    """Controlled powers on the rows of one p-slice: row j gets prod_m P_m^{bit m of j}."""
    K = psi.shape[0]
    for m, P in enumerate(powers_k):
        view = psi.reshape(K >> (m + 1), 2, 1 << m, psi.shape[1])
        view[:, 1] = view[:, 1] @ P.T
    return psi


def prepare_inhomogeneous(plan: LcuPlan, ss: SchrodingerisedSystem, V: SelectBlocks,
                          Vinv: SelectBlocks) -> LcuState:
    """Coherent Duhamel sum on the |0^{n_s}> branch of the control register.

    ``V`` are the compiled blocks of V_heat(ds), ``Vinv`` those of V_heat(-ds).
    Every operation after the source oracle is block-diagonal in the p
    register, so the full state is propagated one p-slice at a time.
    """
    K, N = plan.K, ss.pgrid.N
    dim_x = ss.dim_u
    if K * dim_x > MAX_SLICE_AMPLITUDES:
        raise ValueError("control register too large for the sliced simulator")
    meter = plan.meter
    c = plan.coef_amplitudes
    # c_j * b^_j = sqrt(alpha_j / |alpha|_1) * ds * b~(s_j) / alpha_j
    live = plan.alpha > 0
    scale = np.zeros(K)
    scale[live] = c[live] * plan.ds / plan.alpha[live]
    vecs = plan.vectors.reshape(dim_x, N, -1)
    n_s = plan.n_s
    powers = _powers(V, n_s) if n_s else []
    UK = Vinv.power(K) if K > 1 else Vinv
    meter.add("O_coef", 2)
    meter.add("O_b", 1)
    meter.add("SEL_H-expansions", n_s)
    meter.add("O_H", (K - 1) + K)
    branch = np.zeros((dim_x, N), dtype=complex)
    zero_prob = rest_prob = 0.0
    for k in range(N):
        psi = (scale[:, None] * plan.G.T) @ vecs[:, k, :].T  # (K, dim_x)
        if n_s:
            psi = _sel_slice(psi, [P.blocks[k] for P in powers])
        psi = _reflect_rows(psi, c)
        psi = psi @ UK.blocks[k].T
        branch[:, k] = psi[0]
        p0 = float(np.vdot(psi[0], psi[0]).real)
        zero_prob += p0
        rest_prob += float(np.vdot(psi, psi).real) - p0
    return LcuState(branch.ravel(), {"s=0": zero_prob, "s!=0": rest_prob}, meter)


def duhamel_matrix_path(plan: LcuPlan, V: SelectBlocks, Vinv: SelectBlocks) -> np.ndarray:
    """Horner evaluation of ds * Vinv^K sum_j V^j b~(s_j), no circuit involved."""
    acc = plan.b_node(plan.K - 1)
    for j in range(plan.K - 2, -1, -1):
        acc = V.apply(acc) + plan.b_node(j)
    return plan.ds * Vinv.power(plan.K).apply(acc)


def quadrature_exact_path(ss: SchrodingerisedSystem, T: float, K: int) -> np.ndarray:
    """Left Riemann sum with exact exponentials: isolates the quadrature error."""
    plan = make_plan(ss, T, K, 1)
    fwd = exact_select(ss, -plan.ds)  # e^{-iH ds}, the exact V_heat(ds)
    return duhamel_matrix_path(plan, fwd, fwd.adjoint())


def duhamel_reference(ss: SchrodingerisedSystem, T: float, tol: float = 1e-10) -> np.ndarray:
    """int_0^T e^{iH(T-s)} b~(s) ds by the fine-quadrature oracle."""

    class _Sys:
        A = 1j * ss.H
        f = ss.source
        u0 = np.zeros(ss.H.shape[0], dtype=complex)

    return reference_solution(_Sys, T, tol=tol)


# ---------------------------------------------------------------- combination


@dataclass
class CombinedResult:
    wt_branch: np.ndarray  # (w~_H^a + w~_b^{aa}) / (eta0 + eta1)
    w_branch: np.ndarray  # same, p-space representation
    eta0: float
    eta1: float
    probabilities: dict
    meter: QueryMeter
    inhomogeneous: LcuState | None

    @property
    def branch_probability(self) -> float:
        return float(np.vdot(self.wt_branch, self.wt_branch).real)


def rotation_Rt(eta0: float, eta1: float) -> np.ndarray:
    s = eta0 + eta1
    a, b = math.sqrt(eta0 / s), math.sqrt(eta1 / s)
    return np.array([[a, -b], [b, a]], dtype=complex)


def combine_homogeneous_inhomogeneous(ss: SchrodingerisedSystem, plan: LcuPlan,
                                      hom: SelectBlocks, V: SelectBlocks,
                                      Vinv: SelectBlocks) -> CombinedResult:
    """Merge the homogeneous branch (``hom`` = one segment e^{iH tau}, applied
    plan.r times) with the inhomogeneous preparation through R_t."""
    wt0 = ss.wt0
    eta0 = float(np.linalg.norm(wt0))
    eta1 = plan.alpha_l1
    if eta0 + eta1 == 0:
        raise ValueError("empty problem: eta0 + eta1 = 0")
    meter = plan.meter
    hom_vec = np.zeros_like(wt0)
    if eta0 > 0:
        meter.add("O_prep", 1)
        meter.add("O_H", plan.r)
        hom_vec = hom.power(plan.r).apply(wt0 / eta0)
    inh = None
    inh_vec = np.zeros_like(wt0)
    probs_inh = {"s=0": 1.0, "s!=0": 0.0}
    if eta1 > 0:
        inh = prepare_inhomogeneous(plan, ss, V, Vinv)
        inh_vec = inh.branch
        probs_inh = inh.probabilities
    Rt = rotation_Rt(eta0, eta1)
    # R_t^dagger row 0 weighs the two branches
    out0 = Rt[0, 0] * Rt[0, 0] * hom_vec + Rt[1, 0] * Rt[1, 0] * inh_vec
    out1 = Rt[0, 1] * Rt[0, 0] * hom_vec + Rt[1, 1] * Rt[1, 0] * inh_vec
    p00 = float(np.vdot(out0, out0).real)
    # c=0, s!=0 and c=1 components: the s!=0 part only comes from the inhomogeneous branch
    p_s_ne = (eta1 / (eta0 + eta1)) * probs_inh["s!=0"]
    p10 = float(np.vdot(out1, out1).real)
    probs = {"c=0,s=0": p00, "c=1,s=0": p10, "s!=0": p_s_ne}
    w_branch = ss.from_modes(out0)
    return CombinedResult(out0, w_branch, eta0, eta1, probs, meter, inh)


def combined_matrix_path(ss, plan, hom: SelectBlocks, V: SelectBlocks, Vinv: SelectBlocks):
    """(w~_H^a + w~_b^{aa}) / (eta0 + eta1) from linear algebra only."""
    wH = hom.power(plan.r).apply(ss.wt0)
    wb = duhamel_matrix_path(plan, V, Vinv) if plan.alpha_l1 > 0 else np.zeros_like(wH)
    return (wH + wb) / (np.linalg.norm(ss.wt0) + plan.alpha_l1)


# ---------------------------------------------------------------- explicit circuit (small)


def build_lcu_circuit(plan: LcuPlan, ss: SchrodingerisedSystem, d: int, n_x: int,
                      gamma0: float, mode: str = ORIGINAL, periodic: bool = False):
    """Gate-level circuit for the inhomogeneous preparation on small registers.

    Wires: control register (n_s, most significant first), then x and p.
    """
    n_s, n_p = plan.n_s, ss.pgrid.n_p
    lay = HeatLayout(d, n_x, n_p, offset=n_s)
    qc = QuantumCircuit(lay.n_wires, registers={"s": (0, n_s), **lay.registers()})
    s_w = list(range(n_s))
    sys_w = list(range(n_s, lay.n_wires))
    c = plan.coef_amplitudes
    Ucoef = reflector(c)
    qc.append(UNITARY(Ucoef, s_w, "O_coef"))
    for j in range(plan.K):
        bj = plan.b_node(j)
        nb = np.linalg.norm(bj)
        P = reflector(bj / nb) if nb > 0 else np.eye(bj.size, dtype=complex)
        g = UNITARY(P, sys_w, f"O_b[{j}]")
        inner = QuantumCircuit(lay.n_wires, [g])
        for m in range(n_s):  # m = significance
            bit = (j >> m) & 1
            inner = QuantumCircuit(lay.n_wires, [CTRL(s_w[n_s - 1 - m], bit, inner)])
        qc.extend(inner)
    seg = build_Vheat(plan.ds, n_x, n_p, d, gamma0, mode, periodic, lay)
    for m in range(n_s):
        qc.append(CTRL(s_w[n_s - 1 - m], 1, seg.repeat(2**m)))
    qc.append(UNITARY(Ucoef.conj().T, s_w, "O_coef'"))
    back = build_Vheat(-plan.ds, n_x, n_p, d, gamma0, mode, periodic, lay)
    qc.extend(back.repeat(plan.K))
    return qc


def run_lcu_circuit(qc: QuantumCircuit, plan: LcuPlan, dim_sys: int):
    """Full statevector run; returns the system vector on |0^{n_s}> and the state."""
    psi = np.zeros(2**qc.n_wires, dtype=complex)
    psi[0] = 1.0
    out = apply(qc, psi)
    return out.reshape(plan.K, dim_sys)[0].copy(), out


# ---------------------------------------------------------------- probabilities


@dataclass
class SuccessProbability:
    formula: float
    measured: float | None
    C_e0: float
    C_e: float


def success_probability(u0, uT, f_avg: float, pgrid, measured: float | None = None
                        ) -> SuccessProbability:
    """Pr = (C_e0^2/C_e^2) |u(T)|^2 / (|u(0)| + |f|_avg)^2."""
    n0 = float(np.linalg.norm(u0))
    nT = float(np.linalg.norm(uT))
    if n0 + f_avg <= 0:
        raise ValueError("norms must be positive")
    pr = (pgrid.C_e0**2 / pgrid.C_e**2) * nT**2 / (n0 + f_avg) ** 2
    return SuccessProbability(pr, measured, pgrid.C_e0, pgrid.C_e)


def measured_success(w_branch: np.ndarray, pgrid, threshold: float = 0.0) -> float:
    """Probability of the flag outcome and p_k >= threshold, from amplitudes."""
    W = np.asarray(w_branch).reshape(-1, pgrid.N)
    keep = pgrid.nodes >= threshold
    return float(np.sum(np.abs(W[:, keep]) ** 2))


def predicted_lcu_queries(C_heat: float, T: float, delta: float, pgrid, A_norm: float,
                          f: Source | None, u0_norm: float, uT_norm: float,
                          f_avg: float, samples: int = 2**10) -> dict:
    """N_t = (1/Pr) C_LCU T^2 / delta with
    C_LCU = C_heat + sup_t (N_p |A| |f| / (2R) + |f'|) and
    1/Pr = (C_e^3 / C_e0^2) ((|u0| + |f|_avg) / |u(T)|)^3."""
    ts = np.linspace(0.0, T, samples + 1)
    if f is None or f.is_zero():
        sup = 0.0
    else:
        sup = float(np.max(pgrid.N * A_norm * f.norms(ts) / (2 * pgrid.R)
                           + f.derivative().norms(ts)))
    C_lcu = C_heat + sup
    ratio = (u0_norm + f_avg) / max(uT_norm, 1e-300)
    inv_pr = pgrid.C_e**3 / pgrid.C_e0**2 * ratio**3
    return {"C_LCU": C_lcu, "inverse_success_probability": inv_pr,
            "N_t": inv_pr * C_lcu * T**2 / delta,
            "state_oracle_repetitions": (pgrid.C_e / pgrid.C_e0) ** 2 * ratio**2}


def lcu_query_complexity_report(plan: LcuPlan, meter: QueryMeter, predicted: dict | None
                                ) -> dict:
    """Measured meters next to the expected single-run count and the predicted total."""
    expected = plan.r + (2 * plan.K - 1 if plan.alpha_l1 > 0 else 0)
    measured = meter.as_dict()
    return {"measured": measured, "expected_O_H": expected,
            "O_H_matches": measured["O_H"] == expected, "K": plan.K, "r": plan.r,
            "predicted": predicted}


def build_segment_blocks(ss: SchrodingerisedSystem, d: int, n_x: int, tau: float,
                         mode: str = ORIGINAL, periodic: bool = False):
    """Compiled V_heat(tau) and V_heat(-tau) blocks for the Schrodingerised system."""
    fwd = HeatEvolution.build(d, n_x, ss.pgrid.n_p, ss.gamma0, -tau, mode, periodic)
    back = HeatEvolution.build(d, n_x, ss.pgrid.n_p, ss.gamma0, tau, mode, periodic)
    # HeatEvolution(tau') realises e^{iH tau'} = V_heat(-tau'); so fwd = V_heat(tau)
    return fwd.blocks, back.blocks


__all__ = [
    "QueryMeter", "LcuPlan", "LcuState", "CombinedResult", "choose_K", "make_plan",
    "prepare_inhomogeneous", "duhamel_matrix_path", "duhamel_reference",
    "quadrature_exact_path", "combine_homogeneous_inhomogeneous", "combined_matrix_path",
    "build_lcu_circuit", "run_lcu_circuit", "success_probability", "measured_success",
    "lcu_query_complexity_report", "predicted_lcu_queries", "build_segment_blocks", "reflector", "rotation_Rt",
    "MODIFIED", "ORIGINAL", "compile_select",
]
