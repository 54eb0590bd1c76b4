"""Warped phase transform: p-grid, Hermitian split, Hamiltonian assembly,
extended initial data and recovery of u from the p-slices."""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .numerics import DENSE_CAP, CapExceeded, expm, unitary_dft
from .signals import Source


class RecoveryError(ValueError):
    pass


@dataclass(frozen=True)
class PGrid:
    R: float
    n_p: int

    def __post_init__(self):
        if self.R <= 0 or self.n_p < 1:
            raise ValueError("need R > 0 and n_p >= 1")

    @property
    def N(self) -> int:
        return 2**self.n_p

    @property
    def dp(self) -> float:
        return 2 * math.pi * self.R / self.N

    @property
    def nodes(self) -> np.ndarray:
        return -math.pi * self.R + self.dp * np.arange(self.N)

    @property
    def eta(self) -> np.ndarray:
        return (np.arange(self.N) - self.N // 2) / self.R

    @property
    def profile(self) -> np.ndarray:
        """e^{-|p_k|}."""
        return np.exp(-np.abs(self.nodes))

    @property
    def C_e(self) -> float:
        return float(np.sqrt(np.sum(self.profile**2)))

    @property
    def C_e0(self) -> float:
        """Norm of the profile restricted to p_k >= 0."""
        pr = self.profile[self.nodes >= 0]
        return float(np.sqrt(np.sum(pr**2)))

    @property
    def tail_ok(self) -> bool:
        return math.exp(-math.pi * self.R) < 1e-9

    def fourier(self) -> np.ndarray:
        """Unitary change of basis from p-values to eta-modes' coefficients."""
        return unitary_dft(self.N)


def make_pgrid(R: float, n_p: int, warn: bool = True) -> PGrid:
    g = PGrid(float(R), int(n_p))
    if warn and not g.tail_ok:
        warnings.warn(f"exp(-pi R) = {math.exp(-math.pi * R):.1e} >= 1e-9: "
                      "the e^-|p| tail is truncated", RuntimeWarning)
    return g


def split_hermitian(A: np.ndarray):
    A = np.asarray(A, dtype=complex)
    return (A + A.conj().T) / 2, (A - A.conj().T) / 2j


def initial_extended_state(u0: np.ndarray, pgrid: PGrid) -> np.ndarray:
    return np.kron(np.asarray(u0, dtype=complex), pgrid.profile)


def _check_hermitian(M, name):
    if np.abs(M - M.conj().T).max() > 1e-12 * max(1.0, np.abs(M).max()):
        raise ValueError(f"{name} is not Hermitian")


def assemble_hamiltonian(H1: np.ndarray, H2: np.ndarray, pgrid: PGrid) -> np.ndarray:
    """H = -H1 (x) D_eta + H2 (x) I."""
    _check_hermitian(H1, "H1")
    _check_hermitian(H2, "H2")
    if H1.shape[0] * pgrid.N > DENSE_CAP:
        raise CapExceeded("Hamiltonian exceeds dense cap")
    H = -np.kron(H1, np.diag(pgrid.eta)) + np.kron(H2, np.eye(pgrid.N))
    return (H + H.conj().T) / 2


@dataclass
class SchrodingerisedSystem:
    H1: np.ndarray
    H2: np.ndarray
    pgrid: PGrid
    H: np.ndarray
    w0: np.ndarray
    gamma0: float = float("nan")
    source: Source | None = None  # b~(t) in the eta representation

    @property
    def dim_u(self) -> int:
        return self.H1.shape[0]

    def to_modes(self, w: np.ndarray) -> np.ndarray:
        """(I (x) F^dagger) w with F the unitary Fourier matrix."""
        F = self.pgrid.fourier()
        W = np.asarray(w).reshape(self.dim_u, self.pgrid.N)
        return (W @ F.conj()).ravel()

    def from_modes(self, wt: np.ndarray) -> np.ndarray:
        F = self.pgrid.fourier()
        W = np.asarray(wt).reshape(self.dim_u, self.pgrid.N)
        return (W @ F.T).ravel()

    @property
    def wt0(self) -> np.ndarray:
        return self.to_modes(self.w0)

    @property
    def hamiltonian_norm(self) -> float:
        return float(np.linalg.norm(self.H, 2))


def schrodingerise(sys, pgrid: PGrid, a: float = 1.0) -> SchrodingerisedSystem:
    """Build H, w(0) and the transformed source for du/dt = A u + f."""
    H1, H2 = split_hermitian(sys.A)
    H = assemble_hamiltonian(H1, H2, pgrid)
    w0 = initial_extended_state(sys.u0, pgrid)
    src = None
    if sys.f is not None and not sys.f.is_zero():
        prof_modes = pgrid.fourier().conj().T @ pgrid.profile
        src = sys.f.kron(prof_modes)
    gamma0 = a / (sys.dx**2 * pgrid.R) if getattr(sys, "dx", None) else float("nan")
    return SchrodingerisedSystem(H1, H2, pgrid, H, w0, gamma0, src)


def evolve_exact(ss: SchrodingerisedSystem, T: float) -> np.ndarray:
    """Homogeneous part e^{iHT} w~(0), in the eta representation."""
    return expm(1j * ss.H, T) @ ss.wt0


@dataclass
class Recovery:
    u: np.ndarray
    k_star: int
    admissible: np.ndarray  # indices k with p_k above the threshold
    per_node: np.ndarray  # rows e^{p_k} * slice_k for admissible k
    variance: float
    u_projected: np.ndarray


def recovery_threshold(pgrid: PGrid, lambda_plus: float, t: float) -> float:
    return lambda_plus * t + max(pgrid.dp, 0.1)


def recover_u(w: np.ndarray, pgrid: PGrid, lambda_plus: float = 0.0, t: float = 0.0,
              margin: float | None = None) -> Recovery:
    """Undo the warped transform from the p-space state ``w``.

    ``u`` is taken at the smallest node above lambda_plus*t + margin.
    ``u_projected`` combines every admissible node by least squares against
    the known e^{-p} profile, which averages out the sign-alternating error of
    the unpaired Fourier mode.
    """
    if lambda_plus < 0:
        raise ValueError("lambda_plus must be >= 0")
    thr = lambda_plus * t + (max(pgrid.dp, 0.1) if margin is None else margin)
    p = pgrid.nodes
    adm = np.nonzero(p >= thr - 1e-12)[0]
    if lambda_plus * t >= math.pi * pgrid.R or adm.size == 0:
        raise RecoveryError("no admissible p node; increase R")
    W = np.asarray(w).reshape(-1, pgrid.N)
    k_star = int(adm[0])
    per = (W[:, adm] * np.exp(p[adm])).T
    u = per[0].copy()
    var = float(np.mean(np.sum(np.abs(per - per.mean(axis=0)) ** 2, axis=1)))
    wts = np.exp(-p[adm])
    u_proj = (W[:, adm] @ wts) / np.dot(wts, wts)
    return Recovery(u, k_star, adm, per, var, u_proj)


def lambda_plus(F_eps, H1: np.ndarray, T: float, samples: int = 2**10) -> float:
    """Largest growth rate of the enlarged generator, clipped at zero.

    ``F_eps`` is a callable returning the diagonal of F_eps(t) (or None for a
    homogeneous problem).
    """
    lam = float(np.linalg.eigvalsh((H1 + H1.conj().T) / 2).max())
    if F_eps is None:
        return max(lam, 0.0)
    ts = np.linspace(0.0, T, samples + 1)
    g = max(float(np.abs(F_eps(t)).max()) for t in ts)
    return max(lam + 0.5 * g, 0.0)
