"""Dense linear algebra oracles: Fourier matrices, exponentials, norms and a
reference ODE integrator used to validate every circuit and bound."""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

DENSE_CAP_QUBITS = 13
DENSE_CAP = 2**DENSE_CAP_QUBITS


class CapExceeded(ValueError):
    """Raised when a dense object would exceed the desk-scale size cap."""


class QuadratureWarning(RuntimeWarning):
    pass


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (n & (n - 1)) == 0


def _check_square(M: np.ndarray, cap: int = DENSE_CAP) -> np.ndarray:
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > cap:
        raise CapExceeded(f"dimension {M.shape[0]} exceeds dense cap {cap}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    return M


def mode_indices(N: int) -> np.ndarray:
    """Signed Fourier mode labels l = k - N/2 stored at position k."""
    return np.arange(N) - N // 2


def dft_matrix(N: int, L: float, R: float) -> np.ndarray:
    """Fourier matrix with entries exp(i mu_l (x_j - L)) on the half-open grid.

    Column k carries the mode l = k - N/2 with mu_l = 2 pi l / (R - L), so that
    P = Phi D Phi^{-1} with D = diag(mu) is the spectral derivative -i d/dx.
    """
    if not is_power_of_two(N) or N < 2:
        raise ValueError(f"N must be a power of two >= 2, got {N}")
    if not L < R:
        raise ValueError("need L < R")
    j = np.arange(N)[:, None]
    l = mode_indices(N)[None, :]
    # mu_l (x_j - L) = 2 pi l j / N exactly; avoid rounding through x_j
    return np.exp(2j * np.pi * l * j / N)


def unitary_dft(N: int) -> np.ndarray:
    """Normalised Fourier matrix Phi / sqrt(N); interval-independent."""
    return dft_matrix(N, 0.0, 1.0) / np.sqrt(N)


def fourier_modes(N: int, L: float, R: float) -> np.ndarray:
    return 2 * np.pi * mode_indices(N) / (R - L)


def expm(M: np.ndarray, t: float = 1.0) -> np.ndarray:
    """exp(t M) for a dense square matrix.

    Hermitian and skew-Hermitian inputs go through an eigendecomposition,
    which keeps the result unitary to machine precision; everything else uses
    scaling and squaring with Pade approximants.
    """
    M = _check_square(M)
    if M.shape[0] == 0:
        return M.copy()
    scale = max(np.abs(M).max(), 1e-300)
    herm_defect = np.abs(M - M.conj().T).max() / scale
    skew_defect = np.abs(M + M.conj().T).max() / scale
    if herm_defect < 1e-14:
        w, V = np.linalg.eigh((M + M.conj().T) / 2)
        return (V * np.exp(t * w)) @ V.conj().T
    if skew_defect < 1e-14:
        K = -1j * M
        w, V = np.linalg.eigh((K + K.conj().T) / 2)
        return (V * np.exp(1j * t * w)) @ V.conj().T
    return scipy.linalg.expm(t * M)


def op_norm(M: np.ndarray) -> float:
    """Spectral norm (largest singular value)."""
    M = np.asarray(M)
    if M.ndim != 2:
        raise ValueError("expected a matrix")
    if max(M.shape) > DENSE_CAP:
        raise CapExceeded(f"dimension {M.shape} exceeds dense cap {DENSE_CAP}")
    if not np.all(np.isfinite(M)):
        raise ValueError("matrix has non-finite entries")
    if M.size == 0:
        return 0.0
    return float(np.linalg.norm(M, 2))


def expm_action(M, t: float, v: np.ndarray) -> np.ndarray:
    """exp(t M) v without forming the exponential (sparse or large operators)."""
    if not scipy.sparse.issparse(M):
        M = scipy.sparse.csr_matrix(M)
    return scipy.sparse.linalg.expm_multiply(t * M, v)


def sparse_op_norm(apply, apply_adj, dim: int, tol: float = 1e-6) -> float:
    """Largest singular value of an operator given only by its action."""
    op = scipy.sparse.linalg.LinearOperator(
        (dim, dim), dtype=complex,
        matvec=lambda v: np.asarray(apply(np.ravel(v))).ravel(),
        rmatvec=lambda v: np.asarray(apply_adj(np.ravel(v))).ravel(),
    )
    s = scipy.sparse.linalg.svds(op, k=1, tol=tol, return_singular_vectors=False)
    return float(s[0])


# ---------------------------------------------------------------- reference ODE


def simpson_weights(K: int, h: float) -> np.ndarray:
    if K % 2:
        raise ValueError("Simpson rule needs an even number of panels")
    w = np.ones(K + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * h / 3.0


@dataclass
class ReferenceResult:
    u: np.ndarray
    K_used: int
    error_estimate: float
    converged: bool


def _is_normal(A: np.ndarray) -> bool:
    scale = max(np.abs(A).max(), 1e-300) ** 2
    return np.abs(A @ A.conj().T - A.conj().T @ A).max() / scale < 1e-12


def _duhamel_quadrature(A, src, T, K, eig):
    """Composite Simpson approximation of int_0^T exp(A(T-s)) f(s) ds."""
    s = np.linspace(0.0, T, K + 1)
    w = simpson_weights(K, T / K)
    G = src.signal_matrix(s)  # (m, K+1)
    if eig is not None:
        lam, V, Vinv = eig
        C = Vinv @ src.vectors  # (n, m)
        E = np.exp(np.outer(lam, T - s))  # (n, K+1)
        acc = np.einsum("nk,mk,k,nm->n", E, G, w, C)
        return V @ acc
    # non-normal: Horner sweep with a one-step propagator
    step = expm(A, T / K)
    F = src.vectors @ G  # (n, K+1)
    acc = np.zeros(A.shape[0], dtype=complex)
    for k in range(K + 1):
        acc = step @ acc + w[k] * F[:, k] if k else w[k] * F[:, k]
    return acc


def reference_solution(sys, T: float, K_ref: int = 2**12, tol: float = 1e-8,
                       K_max: int = 2**18, return_info: bool = False):
    """Fine-quadrature Duhamel solution u(T) of du/dt = A u + f(t).

    Simpson's rule at K and 2K nodes is combined by Richardson extrapolation;
    K doubles until the extrapolated change drops below ``tol`` relative to
    |u(T)|.  ``sys`` needs attributes ``A``, ``f`` (a Source) and ``u0``.
    """
    A = _check_square(np.asarray(sys.A, dtype=complex))
    u0 = np.asarray(sys.u0, dtype=complex)
    hom = expm(A, T) @ u0
    src = sys.f
    if src is None or src.is_zero() or T == 0:
        res = ReferenceResult(hom, 0, 0.0, True)
        return res if return_info else res.u
    eig = None
    if _is_normal(A):
        # the complex Schur form of a normal matrix is diagonal
        Tm, Z = scipy.linalg.schur(A, output="complex")
        eig = (np.diag(Tm).copy(), Z, Z.conj().T)
    K = max(2, K_ref + (K_ref % 2))
    I_K = _duhamel_quadrature(A, src, T, K, eig)
    while True:
        I_2K = _duhamel_quadrature(A, src, T, 2 * K, eig)
        extrap = I_2K + (I_2K - I_K) / 15.0
        u = hom + extrap
        err = np.linalg.norm(I_2K - I_K) / 15.0
        rel = err / max(np.linalg.norm(u), 1e-300)
        if rel <= tol or 2 * K >= K_max:
            break
        K, I_K = 2 * K, I_2K
    converged = rel <= tol
    if not converged:
        warnings.warn(f"reference quadrature not converged: rel change {rel:.2e}",
                      QuadratureWarning)
    res = ReferenceResult(u, 2 * K, float(rel), converged)
    return res if return_info else res.u


def rk4(rhs, y0: np.ndarray, T: float, steps: int) -> np.ndarray:
    """Classical fourth-order Runge-Kutta for dy/dt = rhs(t, y)."""
    y = np.array(y0, dtype=complex)
    h = T / steps
    t = 0.0
    for _ in range(steps):
        k1 = rhs(t, y)
        k2 = rhs(t + h / 2, y + h / 2 * k1)
        k3 = rhs(t + h / 2, y + h / 2 * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return y


def loglog_slope(x, y) -> float:
    """Least-squares slope of log(y) against log(x)."""
    return float(np.polyfit(np.log(np.asarray(x, float)), np.log(np.asarray(y, float)), 1)[0])
