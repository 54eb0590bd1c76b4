"""Homogeneous circuit pipeline and compiled select blocks shared by the
inhomogeneous pipelines."""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .circuits import (MODIFIED, ORIGINAL, HeatLayout, build_Vheat, count_gates, heat_constant)
from .circuits.sim import apply
from .discretize import HeatProblem, build_system
from .numerics import expm, reference_solution
from .schrodingerise import (PGrid, SchrodingerisedSystem, make_pgrid, recover_u,
                             schrodingerise)


@dataclass
class SelectBlocks:
    """A unitary block-diagonal in the p-register: blocks[k] acts on x when
    the p-register holds k.  Vectors are indexed x-major, p-minor."""

    blocks: np.ndarray  # (N_p, dim_x, dim_x)

    @property
    def N(self) -> int:
        return self.blocks.shape[0]

    @property
    def dim_x(self) -> int:
        return self.blocks.shape[1]

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Apply to vectors of shape (dim_x*N_p,) or (..., dim_x*N_p)."""
        v = np.asarray(vec)
        lead = v.shape[:-1]
        X = v.reshape(lead + (self.dim_x, self.N))
        out = np.einsum("kab,...bk->...ak", self.blocks, X)
        return out.reshape(v.shape)

    def power(self, r: int) -> "SelectBlocks":
        return SelectBlocks(np.stack([np.linalg.matrix_power(b, r) for b in self.blocks]))

    def adjoint(self) -> "SelectBlocks":
        return SelectBlocks(np.conj(np.swapaxes(self.blocks, 1, 2)))

    def __matmul__(self, other: "SelectBlocks") -> "SelectBlocks":
        return SelectBlocks(np.einsum("kab,kbc->kac", self.blocks, other.blocks))

    def dense(self) -> np.ndarray:
        n, N = self.dim_x, self.N
        M = np.zeros((n * N, n * N), dtype=complex)
        for k in range(N):
            M[k::N, k::N] = self.blocks[k]
        return M


def compile_select(circuit, layout: HeatLayout, check: bool = True,
                   rng: np.random.Generator | None = None) -> SelectBlocks:
    """Extract the p-blocks of a circuit acting on x and p registers only.

    Column i of every block is read off from one simulator run on
    e_i (x) (sum over all p basis states).  ``check`` re-runs the circuit on a
    random state and confirms the block form reproduces it.
    """
    if layout.offset != 0 or circuit.n_wires != layout.n_wires:
        raise ValueError("compile_select expects a bare x+p layout")
    dx, N = 2 ** (layout.d * layout.n_x), 2**layout.n_p
    probes = np.zeros((dx * N, dx), dtype=complex)
    for i in range(dx):
        probes[i * N:(i + 1) * N, i] = 1.0
    out = apply(circuit, probes)  # (dx*N, dx)
    blocks = np.transpose(out.reshape(dx, N, dx), (1, 0, 2)).copy()
    sb = SelectBlocks(blocks)
    if check:
        rng = rng or np.random.default_rng(1234)
        v = rng.normal(size=dx * N) + 1j * rng.normal(size=dx * N)
        ref = apply(circuit, v)
        err = np.linalg.norm(ref - sb.apply(v)) / np.linalg.norm(v)
        if err > 1e-10:
            raise ValueError(f"circuit is not block-diagonal in p (mismatch {err:.1e})")
    return sb


def exact_select(ss: SchrodingerisedSystem, tau: float) -> SelectBlocks:
    """Blocks of e^{i H tau} for H = -H1 (x) D_eta + H2 (x) I."""
    eta = ss.pgrid.eta
    return SelectBlocks(np.stack([expm(1j * (-ss.H1 * e + ss.H2), tau) for e in eta]))


def segments_for_tolerance(C_heat: float, T: float, delta: float) -> int:
    """Smallest r with r * C_heat * (T/r)^2 <= delta."""
    return max(1, math.ceil(C_heat * T**2 / delta))


@dataclass
class HeatEvolution:
    """Circuit realisation of w~ -> e^{iH tau} w~ for the heat Hamiltonian."""

    layout: HeatLayout
    gamma0: float
    tau: float
    mode: str
    periodic: bool
    circuit: object
    blocks: SelectBlocks

    @classmethod
    def build(cls, d, n_x, n_p, gamma0, tau, mode=MODIFIED, periodic=False):
        lay = HeatLayout(d, n_x, n_p)
        # V_heat(s) approximates exp(-i s H); the segment e^{iH tau} is V_heat(-tau)
        circ = build_Vheat(-tau, n_x, n_p, d, gamma0, mode, periodic, lay)
        return cls(lay, gamma0, tau, mode, periodic, circ, compile_select(circ, lay))


@dataclass
class HomogeneousResult:
    u: np.ndarray
    u_projected: np.ndarray
    u_ref: np.ndarray
    rel_error: float
    rel_error_projected: float
    variance: float
    k_star: int
    r: int
    tau: float
    C_heat: float
    segment_error: float
    segment_bound: float
    gate_counts: dict
    circuit_check: float
    wt_final: np.ndarray = field(repr=False, default=None)
    timings: dict = field(default_factory=dict)


def run_homogeneous_circuit(problem: HeatProblem, R: float, n_p: int, T: float,
                            delta: float = 1e-2, r: int | None = None, mode: str = ORIGINAL,
                            circuit_check_segments: int = 2) -> HomogeneousResult:
    """Evolve with r segments of V_heat and recover u(T) from the p-slices."""
    t0 = time.perf_counter()
    sys = build_system(problem)
    pgrid: PGrid = make_pgrid(R, n_p, warn=False)
    ss = schrodingerise(sys, pgrid, problem.a)
    if problem.family == "neumann":
        raise ValueError("the heat circuits cover Dirichlet and periodic operators")
    periodic = problem.family == "periodic"
    C = heat_constant(problem.d, problem.n_x, n_p, ss.gamma0)
    if r is None:
        r = segments_for_tolerance(C, T, delta)
    tau = T / r
    evo = HeatEvolution.build(problem.d, problem.n_x, n_p, ss.gamma0, tau, mode, periodic)
    t1 = time.perf_counter()
    wt0 = ss.wt0
    # gate-by-gate check of the compiled segment on the actual state
    v_circ = wt0.copy()
    v_comp = wt0.copy()
    for _ in range(min(circuit_check_segments, r)):
        v_circ = apply(evo.circuit, v_circ)
        v_comp = evo.blocks.apply(v_comp)
    circuit_check = float(np.linalg.norm(v_circ - v_comp))
    wtT = evo.blocks.power(r).apply(wt0)
    t2 = time.perf_counter()
    exact = exact_select(ss, tau)
    seg_err = float(max(np.linalg.norm(a - b, 2) for a, b in zip(evo.blocks.blocks, exact.blocks)))
    wT = ss.from_modes(wtT)
    rec = recover_u(wT, pgrid, 0.0, T)
    u_ref = reference_solution(sys, T)
    nref = np.linalg.norm(u_ref)
    t3 = time.perf_counter()
    return HomogeneousResult(
        u=rec.u, u_projected=rec.u_projected, u_ref=u_ref,
        rel_error=float(np.linalg.norm(rec.u - u_ref) / nref),
        rel_error_projected=float(np.linalg.norm(rec.u_projected - u_ref) / nref),
        variance=rec.variance, k_star=rec.k_star, r=r, tau=tau, C_heat=C,
        segment_error=seg_err, segment_bound=C * tau**2,
        gate_counts=count_gates(evo.circuit).as_dict(), circuit_check=circuit_check,
        wt_final=wtT, timings={"build": t1 - t0, "evolve": t2 - t1, "check": t3 - t2})
