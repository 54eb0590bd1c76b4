"""Augmentation and autonomisation of the inhomogeneous heat system.

The source is absorbed into a constant auxiliary vector r_eps, giving the
homogeneous but time-dependent generator [[A, F_eps(t)], [0, 0]].  After the
warped phase transform its time dependence is removed by a transport
variable s on [-T, T): z(t, s=t) = G(0) w~_eps(t).  One time step of the
autonomised Hamiltonian

    H_bar = -P_s (x) I + I (x) A0 + sum_l |l><l| (x) B_eps(s_l)

is split as U1(tau) U2x(tau) U2y(tau): U1 carries the transport (phase
kickback) and the heat block on the flag-0 branch, the U2 factors are direct
sums of 2x2 rotations.

Register order: s, flag, x (axis d-1 first), p; an ancilla follows in the
gate-level U1 circuit.
"""
from __future__ import annotations

import math
import time
import warnings
from collections import Counter
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg

from .circuits import ORIGINAL, HeatLayout, build_Vheat, heat_constant
from .circuits.ir import MCRZ, UNITARY, CTRL, QuantumCircuit
from .discretize import HeatProblem, build_system
from .numerics import (DENSE_CAP, CapExceeded, expm, expm_action, rk4, simpson_weights,
                       unitary_dft)
from .pipelines import HeatEvolution, SelectBlocks
from .schrodingerise import (PGrid, RecoveryError, lambda_plus, make_pgrid, recover_u,
                             recovery_threshold, schrodingerise, split_hermitian)

SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
FLAG0 = np.array([[1, 0], [0, 0]], dtype=complex)


def mollifier_G(s):
    """e * exp(1/(s^2 - 1)) on |s| < 1, zero elsewhere."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = np.abs(s) < 1
    out[inside] = np.e * np.exp(1.0 / (s[inside] ** 2 - 1.0))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class SGrid:
    """Half-open grid l = 0..N_s-1 on [-T, T).  The node s = T is the periodic
    image of l = 0, which is where the solution is read out."""

    T: float
    n_s: int

    @property
    def N(self) -> int:
        return 2**self.n_s

    @property
    def R_s(self) -> float:
        return self.T / math.pi

    @property
    def ds(self) -> float:
        return 2 * self.T / self.N

    @property
    def nodes(self) -> np.ndarray:
        return -self.T + self.ds * np.arange(self.N)

    @property
    def mu(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) / self.R_s

    read_index: int = 0

    def fourier(self) -> np.ndarray:
        return unitary_dft(self.N)

    def P_s(self) -> np.ndarray:
        F = self.fourier()
        return (F * self.mu) @ F.conj().T

    def transport(self, tau: float) -> np.ndarray:
        """e^{-i P_s tau} as an N_s x N_s matrix."""
        F = self.fourier()
        return (F * np.exp(-1j * tau * self.mu)) @ F.conj().T

    @property
    def G(self) -> np.ndarray:
        # support rescaled to [-T, T]; unscaled when T >= 1
        return mollifier_G(self.nodes / min(self.T, 1.0))

    @property
    def C_G(self) -> float:
        return float(np.linalg.norm(self.G))

    @property
    def C_G0(self) -> float:
        return float(mollifier_G(0.0))

    def constraint(self, N_p: int, A_norm: float, R: float) -> tuple[float, float, bool]:
        lhs = self.N * math.pi / (2 * self.T)
        rhs = N_p * A_norm / (2 * R)
        return lhs, rhs, lhs <= rhs


# ---------------------------------------------------------------- enlarged system


@dataclass
class EnlargedSystem:
    """d/dt [u; r] = [[A, F_eps(t)], [0, 0]] [u; r] with r = r_eps constant."""

    A: np.ndarray
    source: object  # Source for f(t)
    u0: np.ndarray
    T: float
    f2_ave: np.ndarray
    eps: float

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def r_eps(self) -> np.ndarray:
        return np.sqrt(self.f2_ave + self.eps**2)

    def F_diag(self, t) -> np.ndarray:
        """Diagonal of F_eps at time(s) t; shape (dim,) or (dim, len(t))."""
        ts = np.atleast_1d(np.asarray(t, dtype=float))
        if self.source is None or self.source.is_zero():
            vals = np.zeros((self.dim, ts.size))
        else:
            vals = self.source.many(ts).real / self.r_eps[:, None]
        return vals[:, 0] if np.ndim(t) == 0 else vals

    def g_f(self, ts) -> float:
        return float(np.abs(self.F_diag(np.asarray(ts))).max()) if self.dim else 0.0

    @property
    def u_eps0(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.u0, dtype=complex), self.r_eps.astype(complex)])

    def A_eps(self, t: float) -> np.ndarray:
        n = self.dim
        M = np.zeros((2 * n, 2 * n), dtype=complex)
        M[:n, :n] = self.A
        M[:n, n:] = np.diag(self.F_diag(t))
        return M

    def H1_eps(self, t: float) -> np.ndarray:
        return split_hermitian(self.A_eps(t))[0]

    def H2_eps(self, t: float) -> np.ndarray:
        return split_hermitian(self.A_eps(t))[1]

    @property
    def f_ave_sq(self) -> float:
        """|f|^2_ave = sum_i (f_i^2)_ave."""
        return float(self.f2_ave.sum())


def build_enlarged(sys, T: float, samples: int = 2**10) -> EnlargedSystem:
    n = sys.A.shape[0]
    if sys.f is None or sys.f.is_zero():
        f2 = np.zeros(n)
    else:
        ts = np.linspace(0.0, T, samples + 1)
        w = simpson_weights(samples, T / samples)
        f2 = (np.abs(sys.f.many(ts)) ** 2) @ w / T
    return EnlargedSystem(np.asarray(sys.A, dtype=complex), sys.f, np.asarray(sys.u0), T,
                          f2, 1.0 / math.sqrt(n))


def integrate_enlarged(enl: EnlargedSystem, T: float, steps: int = 2**14) -> np.ndarray:
    """RK4 on the enlarged linear ODE in the u-domain; returns [u(T); r(T)]."""
    n = enl.dim
    src = enl.source
    r = enl.r_eps

    def rhs(t, y):
        out = np.zeros_like(y)
        out[:n] = enl.A @ y[:n]
        if src is not None and not src.is_zero():
            out[:n] += enl.F_diag(t) * y[n:]
        return out

    return rk4(rhs, enl.u_eps0, T, steps) if n else r


# ---------------------------------------------------------------- Schrodingerised enlarged


@dataclass
class AutonomisedSystem:
    """Warped-phase form of the enlarged system plus the s-grid."""

    enl: EnlargedSystem
    pgrid: PGrid
    sgrid: SGrid
    H: np.ndarray  # heat Hamiltonian -H1 (x) D_eta + H2 (x) I of A
    H1: np.ndarray
    gamma0: float
    problem: HeatProblem | None = None

    @property
    def dim_x(self) -> int:
        return self.enl.dim

    @property
    def dim_w(self) -> int:
        return 2 * self.dim_x * self.pgrid.N

    @property
    def dim(self) -> int:
        return self.sgrid.N * self.dim_w

    def A0(self) -> sp.csr_matrix:
        return sp.kron(sp.csr_matrix(FLAG0), sp.csr_matrix(self.H), format="csr")

    def B(self, s: float) -> sp.csr_matrix:
        """B_eps(s); zero for s < 0."""
        if s < 0:
            return sp.csr_matrix((self.dim_w, self.dim_w), dtype=complex)
        Fh = sp.diags(self.enl.F_diag(s) / 2)
        De = sp.diags(self.pgrid.eta)
        Ip = sp.identity(self.pgrid.N)
        return (-sp.kron(sp.csr_matrix(SIGMA_X), sp.kron(Fh, De))
                + sp.kron(sp.csr_matrix(SIGMA_Y), sp.kron(Fh, Ip))).tocsr()

    def H_eps(self, t: float) -> sp.csr_matrix:
        return (self.A0() + self.B(t)).tocsr()

    @property
    def wt_eps0(self) -> np.ndarray:
        """w~_eps(0) = (I (x) F^dagger) [u0; r_eps] (x) e^{-|p|}."""
        F = self.pgrid.fourier()
        W = np.outer(self.enl.u_eps0, self.pgrid.profile)
        return (W @ F.conj()).ravel()

    def from_modes(self, wt: np.ndarray) -> np.ndarray:
        F = self.pgrid.fourier()
        W = np.asarray(wt).reshape(-1, self.pgrid.N)
        return (W @ F.T).reshape(np.shape(wt))

    def initial_state(self, normalise: bool = True) -> np.ndarray:
        z = np.kron(self.sgrid.G, self.wt_eps0)
        return z / np.linalg.norm(z) if normalise else z

    def A_norm(self) -> float:
        return float(np.linalg.norm(self.enl.A, 2))

    def g_f(self) -> float:
        s = self.sgrid.nodes
        return self.enl.g_f(s[s >= 0]) if np.any(s >= 0) else 0.0

    def C_auto(self, d: int, n_x: int) -> float:
        N_p, R = self.pgrid.N, self.pgrid.R
        g = self.g_f()
        C_heat = heat_constant(d, n_x, self.pgrid.n_p, self.gamma0)
        return (C_heat + (N_p * self.A_norm() / R) * (N_p / (2 * R) + 1) * g
                + (N_p / R) * g**2)

    def lambda_plus(self, T: float) -> float:
        return lambda_plus(self.enl.F_diag, self.H1, T)


def autonomise(problem: HeatProblem, R: float, n_p: int, T: float, n_s: int,
               warn: bool = True) -> AutonomisedSystem:
    sys = build_system(problem)
    pg = make_pgrid(R, n_p, warn=False)
    homog = sys.with_initial(sys.u0)
    ss = schrodingerise(homog, pg, problem.a)
    enl = build_enlarged(sys, T)
    sg = SGrid(T, n_s)
    auto = AutonomisedSystem(enl, pg, sg, ss.H, ss.H1, ss.gamma0, problem)
    lhs, rhs, ok = sg.constraint(pg.N, auto.A_norm(), R)
    if warn and not ok:
        warnings.warn(f"s-grid constraint violated: {lhs:.3g} > {rhs:.3g}", RuntimeWarning)
    return auto


def assemble_Hbar(auto: AutonomisedSystem, dense: bool = False):
    """H_bar as a sparse matrix (dense on request, within the verification cap)."""
    sg = auto.sgrid
    Ps = sp.csr_matrix(sg.P_s())
    n = auto.dim_w
    Hb = -sp.kron(Ps, sp.identity(n, format="csr"))
    Hb = Hb + sp.kron(sp.identity(sg.N, format="csr"), auto.A0())
    for l, s in enumerate(sg.nodes):
        if s >= 0:
            e = sp.csr_matrix(([1.0], ([l], [l])), shape=(sg.N, sg.N))
            Hb = Hb + sp.kron(e, auto.B(s))
    Hb = ((Hb + Hb.conj().T) / 2).tocsr()
    if dense:
        if Hb.shape[0] > DENSE_CAP:
            raise CapExceeded("H_bar exceeds dense cap")
        return Hb.toarray()
    return Hb


class HbarBlocks:
    """H_bar split by p-mode: every term is diagonal in the eta index, so
    H_bar = sum_k H_k (x) |k><k| with H_k acting on (s, flag, x)."""

    def __init__(self, auto: AutonomisedSystem):
        self.auto = auto
        sg, pg = auto.sgrid, auto.pgrid
        dx, N = auto.dim_x, pg.N
        self.M = sg.N * 2 * dx
        Ps = np.kron(sg.P_s(), np.eye(2 * dx))
        Hk = auto.H.reshape(dx, N, dx, N)
        blocks = np.empty((N, self.M, self.M), dtype=complex)
        for k in range(N):
            Bsum = np.zeros((sg.N, 2 * dx, 2 * dx), dtype=complex)
            for l, sl in enumerate(sg.nodes):
                if sl >= 0:
                    Fh = np.diag(auto.enl.F_diag(sl) / 2)
                    Bsum[l] = -pg.eta[k] * np.kron(SIGMA_X, Fh) + np.kron(SIGMA_Y, Fh)
            A0 = np.kron(FLAG0, Hk[:, k, :, k])
            blocks[k] = -Ps + scipy.linalg.block_diag(*(A0 + Bsum))
        self.blocks = (blocks + np.conj(np.swapaxes(blocks, 1, 2))) / 2
        self._eig = None

    @property
    def eig(self):
        if self._eig is None:
            self._eig = [scipy.linalg.eigh(b, driver="evr") for b in self.blocks]
        return self._eig

    def _split(self, z):
        return np.asarray(z).reshape(self.M, self.auto.pgrid.N)

    def evolve(self, z: np.ndarray, t: float) -> np.ndarray:
        Z = self._split(z)
        out = np.empty_like(Z, dtype=complex)
        for k, (w, V) in enumerate(self.eig):
            out[:, k] = V @ (np.exp(1j * t * w) * (V.conj().T @ Z[:, k]))
        return out.ravel()

    def segment_error(self, seg: "AutoSegment") -> float:
        """max_k |S_k - exp(i H_k tau)|_2, i.e. the operator norm of the full
        segment error (both operators are block diagonal in k)."""
        S = seg.blocks()
        best = 0.0
        for k, (w, V) in enumerate(self.eig):
            D = S[k] - (V * np.exp(1j * seg.tau * w)) @ V.conj().T
            top = scipy.sparse.linalg.svds(D, k=1, tol=0, return_singular_vectors=False,
                                           random_state=0)
            best = max(best, float(top[0]))
        return best


def evolve_Hbar(auto: AutonomisedSystem, T: float, z0: np.ndarray | None = None) -> np.ndarray:
    z0 = auto.initial_state(normalise=False) if z0 is None else z0
    return expm_action(1j * assemble_Hbar(auto), T, z0)


def nonautonomous_reference(auto: AutonomisedSystem, T: float, steps: int = 2**14
                            ) -> np.ndarray:
    """RK4 of dw~/dt = i (A0 + B_eps(t)) w~ from w~_eps(0)."""
    H = sp.csr_matrix(auto.H)
    dx, N = auto.dim_x, auto.pgrid.N
    eta = auto.pgrid.eta

    def rhs(t, y):
        Y = y.reshape(2, dx, N)
        out = np.zeros_like(Y)
        out[0] = (H @ Y[0].ravel()).reshape(dx, N)
        if t >= 0:
            Fh = (auto.enl.F_diag(t) / 2)[:, None]
            # -sigma_x (x) F/2 (x) D_eta  +  sigma_y (x) F/2 (x) I
            out[0] += -Fh * eta * Y[1] - 1j * Fh * Y[1]
            out[1] += -Fh * eta * Y[0] + 1j * Fh * Y[0]
        return 1j * out.ravel()

    return rk4(rhs, auto.wt_eps0, T, steps)


# ---------------------------------------------------------------- segment circuits


def build_Uauto1(tau: float, sgrid: SGrid, d: int, n_x: int, n_p: int, gamma0: float,
                 mode: str = ORIGINAL, periodic: bool = False) -> QuantumCircuit:
    """Gate-level U1: Fourier on s, Rz kickback ladder onto an ancilla, back,
    plus V_heat on the flag-0 branch.

    Wires: s (n_s), flag, x, p, ancilla.  With the ancilla in |0> it realises
    exp(i tau (-P_s (x) I + I (x) A0)) up to the heat-circuit Trotter error.
    """
    n_s = sgrid.n_s
    lay = HeatLayout(d, n_x, n_p, offset=n_s + 1)
    anc = lay.n_wires
    n = anc + 1
    regs = {"s": (0, n_s), "flag": (n_s, 1), **lay.registers(), "anc": (anc, 1)}
    qc = QuantumCircuit(n, registers=regs)
    s_w = list(range(n_s))
    F = sgrid.fourier()
    gamma_s = 2 * tau / sgrid.R_s
    qc.append(UNITARY(F.conj().T, s_w, "QFT_s^dag"))
    for m in range(n_s):
        qc.append(MCRZ(2**m * gamma_s, [s_w[n_s - 1 - m]], anc))
    qc.append(MCRZ(-(sgrid.N // 2) * gamma_s, [], anc))
    qc.append(UNITARY(F, s_w, "QFT_s"))
    heat = build_Vheat(-tau, n_x, n_p, d, gamma0, mode, periodic, lay)
    heat = heat.remap({w: w for w in range(lay.n_wires)}, n)
    qc.append(CTRL(n_s, 0, heat))
    return qc


@dataclass
class QueryMeterAuto:
    counts: Counter = field(default_factory=Counter)

    def add(self, name, k=1):
        self.counts[name] += k

    def as_dict(self):
        return {k: int(v) for k, v in self.counts.items()}


class AutoSegment:
    """Compiled U1(tau) U2x(tau) U2y(tau) acting on arrays (N_s, 2, dim_x, N_p)."""

    def __init__(self, auto: AutonomisedSystem, tau: float, heat: SelectBlocks | None,
                 meter: QueryMeterAuto | None = None):
        self.auto, self.tau = auto, tau
        sg, pg = auto.sgrid, auto.pgrid
        self.E = sg.transport(tau)
        self.heat = heat
        s = sg.nodes
        Fd = auto.enl.F_diag(np.maximum(s, 0.0)).T  # (N_s, dim_x)
        Fd[s < 0] = 0.0
        # U2y: exp(i tau sigma_y F/2) = [[c, sn], [-sn, c]]
        th = tau * Fd / 2
        self.cy, self.sy = np.cos(th)[:, :, None], np.sin(th)[:, :, None]
        # U2x: select over p of EXP_x(k tau) then EXP_x(-N_p/2 tau); angles add
        ang = tau * Fd[:, :, None] * pg.eta[None, None, :] / 2
        self.cx, self.sx = np.cos(ang), np.sin(ang)
        self.meter = meter if meter is not None else QueryMeterAuto()

    def u2y(self, z):
        a, b = z[:, 0], z[:, 1]
        return np.stack([self.cy * a + self.sy * b, -self.sy * a + self.cy * b], axis=1)

    def u2x(self, z):
        a, b = z[:, 0], z[:, 1]
        return np.stack([self.cx * a - 1j * self.sx * b, -1j * self.sx * a + self.cx * b], axis=1)

    def u1(self, z):
        N_s = z.shape[0]
        z = (self.E @ z.reshape(N_s, -1)).reshape(z.shape)
        if self.heat is not None:
            z = z.copy()
            z[:, 0] = np.einsum("kab,lbk->lak", self.heat.blocks, z[:, 0])
        return z

    def __call__(self, z):
        pg = self.auto.pgrid
        self.meter.add("O_H", 1)
        src = self.auto.enl.source
        if src is not None and not src.is_zero():
            self.meter.add("HAM", pg.n_p + 2)  # n_p + 1 EXP_x factors and one EXP_y
        self.meter.add("QFT_s", 2)
        return self.u1(self.u2x(self.u2y(z)))

    def blocks(self) -> np.ndarray:
        """Dense p-mode blocks (N_p, M, M), read off column by column."""
        a = self.auto
        N, M = a.pgrid.N, a.sgrid.N * 2 * a.dim_x
        S = np.empty((N, M, M), dtype=complex)
        probe = np.zeros((M, N), dtype=complex)
        for j in range(M):
            probe[j] = 1.0
            out = self.u1(self.u2x(self.u2y(probe.reshape(a.sgrid.N, 2, a.dim_x, N))))
            S[:, :, j] = out.reshape(M, N).T
            probe[j] = 0.0
        return S

    def flat(self, v: np.ndarray) -> np.ndarray:
        a = self.auto
        shape = (a.sgrid.N, 2, a.dim_x, a.pgrid.N)
        return self(np.asarray(v).reshape(shape)).ravel()

    def adjoint_flat(self, v: np.ndarray) -> np.ndarray:
        """Inverse segment (U2y^dag U2x^dag U1^dag)."""
        a = self.auto
        z = np.asarray(v).reshape(a.sgrid.N, 2, a.dim_x, a.pgrid.N)
        z = (self.E.conj().T @ z.reshape(a.sgrid.N, -1)).reshape(z.shape)
        if self.heat is not None:
            z = z.copy()
            z[:, 0] = np.einsum("kba,lbk->lak", self.heat.blocks.conj(), z[:, 0])
        a_, b_ = z[:, 0], z[:, 1]
        z = np.stack([self.cx * a_ + 1j * self.sx * b_, 1j * self.sx * a_ + self.cx * b_], axis=1)
        a_, b_ = z[:, 0], z[:, 1]
        z = np.stack([self.cy * a_ - self.sy * b_, self.sy * a_ + self.cy * b_], axis=1)
        return z.ravel()


def Uauto2_select_dense(auto: AutonomisedSystem, tau: float) -> np.ndarray:
    """U2x U2y built literally: controlled EXP_x(2^m tau) per p-bit, the offset
    EXP_x(-2^{n_p-1} tau), and EXP_y; dense, for small instances."""
    sg, pg = auto.sgrid, auto.pgrid
    dx, N = auto.dim_x, pg.N
    s = sg.nodes

    def exp_sigma(sig, scale):
        blocks = []
        for l, sl in enumerate(s):
            Fh = np.diag(auto.enl.F_diag(max(sl, 0.0)) / 2) if sl >= 0 else np.zeros((dx, dx))
            gen = np.kron(sig, Fh)
            w, V = np.linalg.eigh(gen)
            blocks.append((V * np.exp(1j * scale * w)) @ V.conj().T)
        return scipy.linalg.block_diag(*blocks)  # (N_s*2*dx) square

    def on_p(M_sfx, proj):
        return np.kron(M_sfx, proj)

    Ip = np.eye(N)
    U = np.eye(sg.N * 2 * dx * N, dtype=complex)
    Uy = on_p(exp_sigma(SIGMA_Y, tau), Ip)
    Ux = np.eye(U.shape[0], dtype=complex)
    for m in range(pg.n_p):
        bit = np.array([(k >> m) & 1 for k in range(N)], dtype=float)
        Em = exp_sigma(SIGMA_X, -(2**m) * tau / pg.R)
        Ux = (on_p(Em, np.diag(bit)) + on_p(np.eye(Em.shape[0]), np.diag(1 - bit))) @ Ux
    Ux = on_p(exp_sigma(SIGMA_X, (N // 2) * tau / pg.R), Ip) @ Ux
    return Ux @ Uy @ U


# ---------------------------------------------------------------- evolution and recovery


@dataclass
class AutoRun:
    z: np.ndarray
    r: int
    tau: float
    meter: QueryMeterAuto
    norm_drift: float
    seconds: float


def heat_blocks(auto: AutonomisedSystem, tau: float, mode: str = ORIGINAL) -> SelectBlocks:
    pb = auto.problem
    periodic = pb is not None and pb.family == "periodic"
    d = pb.d if pb is not None else 1
    n_x = pb.n_x if pb is not None else int(math.log2(auto.dim_x))
    return HeatEvolution.build(d, n_x, auto.pgrid.n_p, auto.gamma0, tau, mode, periodic).blocks


def evolve_autonomised(auto: AutonomisedSystem, T: float, r: int, mode: str = ORIGINAL,
                       heat: SelectBlocks | None = None, z0: np.ndarray | None = None,
                       exact_heat: bool = False) -> AutoRun:
    """Apply r segments of U1 U2x U2y to the normalised initial state."""
    t0 = time.perf_counter()
    tau = T / r
    if heat is None:
        heat = _exact_heat(auto, tau) if exact_heat else heat_blocks(auto, tau, mode)
    meter = QueryMeterAuto()
    seg = AutoSegment(auto, tau, heat, meter)
    z = auto.initial_state() if z0 is None else z0
    z = z.reshape(auto.sgrid.N, 2, auto.dim_x, auto.pgrid.N)
    n0 = np.linalg.norm(z)
    for _ in range(r):
        z = seg(z)
    drift = abs(np.linalg.norm(z) - n0)
    return AutoRun(z.ravel(), r, tau, meter, float(drift), time.perf_counter() - t0)


def _exact_heat(auto: AutonomisedSystem, tau: float) -> SelectBlocks:
    N, dx = auto.pgrid.N, auto.dim_x
    H = auto.H.reshape(dx, N, dx, N)
    return SelectBlocks(np.stack([expm(1j * H[:, k, :, k], tau) for k in range(N)]))


@dataclass
class AutoRecovery:
    u: np.ndarray
    u_projected: np.ndarray
    probabilities: dict
    formulas: dict
    lambda_plus: float
    threshold: float


def recover_from_autonomised(z: np.ndarray, auto: AutonomisedSystem, lam_plus: float,
                             T: float, u_T: np.ndarray | None = None) -> AutoRecovery:
    """Project s onto the node s = T, then p onto p_k >= lambda_+ T, then the
    flag onto 0, and undo the warped transform."""
    sg, pg = auto.sgrid, auto.pgrid
    if abs((sg.nodes[sg.read_index] + 2 * T) - T) > 1e-12 * max(1.0, T):
        raise RecoveryError("s-grid has no node at s = T")
    Z = np.asarray(z).reshape(sg.N, 2, auto.dim_x, pg.N)
    total = float(np.vdot(Z, Z).real)
    zs = Z[sg.read_index]
    p1 = float(np.vdot(zs, zs).real) / total
    w = auto.from_modes(zs.reshape(-1)).reshape(2, auto.dim_x, pg.N)
    thr = recovery_threshold(pg, lam_plus, T)
    keep = pg.nodes >= lam_plus * T - 1e-12
    kept = w[:, :, keep]
    p2 = float(np.vdot(kept, kept).real) / float(np.vdot(w, w).real)
    p3 = float(np.vdot(kept[0], kept[0]).real) / float(np.vdot(kept, kept).real)
    # undo the normalisation of the initial state: |w_bar(0)| = C_G |w~_eps0|
    scale = sg.C_G * np.linalg.norm(auto.wt_eps0) / sg.C_G0
    rec = recover_u(w[0].reshape(-1) * scale, pg, lam_plus, T)
    keep_e = pg.nodes >= lam_plus * T - 1e-12
    Ce_plus2 = float(np.sum(pg.profile[keep_e] ** 2))
    r2 = float(np.sum(auto.enl.r_eps**2))
    u0n2 = float(np.linalg.norm(auto.enl.u0) ** 2)
    formulas = {"s=T": sg.C_G0**2 / sg.C_G**2}
    if u_T is not None:
        uT2 = float(np.linalg.norm(u_T) ** 2)
        formulas["p>=lambda_plus*T"] = Ce_plus2 / pg.C_e**2 * (uT2 + r2) / (u0n2 + r2)
        formulas["flag=0"] = uT2 / (uT2 + r2)
        formulas["overall"] = (Ce_plus2 / pg.C_e**2) * formulas["s=T"] * uT2 / (
            u0n2 + auto.enl.f_ave_sq + 1.0)
    probs = {"s=T": p1, "p>=lambda_plus*T": p2, "flag=0": p3, "overall": p1 * p2 * p3}
    return AutoRecovery(rec.u, rec.u_projected, probs, formulas, lam_plus, thr)


def predicted_auto_queries(auto: AutonomisedSystem, d: int, n_x: int, T: float,
                           delta: float, u0_norm: float, uT_norm: float) -> dict:
    """N_t = (1/Pr) C_auto T^2 / delta with
    1/Pr = e^{2 lambda_+ T} (C_G^3 / C_G0^2) ((|u0| + |f|_ave + 1) / |u(T)|)^3."""
    sg = auto.sgrid
    lam = auto.lambda_plus(T)
    C = auto.C_auto(d, n_x)
    ratio = (u0_norm + math.sqrt(auto.enl.f_ave_sq) + 1.0) / max(uT_norm, 1e-300)
    inv_pr = math.exp(2 * lam * T) * sg.C_G**3 / sg.C_G0**2 * ratio**3
    return {"C_auto": C, "g_f": auto.g_f(), "lambda_plus": lam,
            "inverse_success_probability": inv_pr, "N_t": inv_pr * C * T**2 / delta}


__all__ = [
    "predicted_auto_queries",
    "mollifier_G", "SGrid", "EnlargedSystem", "build_enlarged", "integrate_enlarged",
    "AutonomisedSystem", "autonomise", "assemble_Hbar", "evolve_Hbar",
    "nonautonomous_reference", "HbarBlocks", "build_Uauto1", "AutoSegment", "Uauto2_select_dense",
    "evolve_autonomised", "recover_from_autonomised", "AutoRecovery", "AutoRun",
    "heat_blocks", "QueryMeterAuto",
]
