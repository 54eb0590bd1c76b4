"""Finite-difference semi-discretisation of the heat equation.

Grids force power-of-two unknown counts: Dirichlet has M - 1 = 2**n_x interior
points, Neumann-mixed and periodic have M = 2**n_x.  In d dimensions axis 0
is the least significant (rightmost) Kronecker factor.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from functools import reduce
from typing import Callable

import numpy as np

from .signals import ZERO, Source, TimeSignal, parse_signal

DIRICHLET = "dirichlet"
NEUMANN = "neumann"
PERIODIC = "periodic"
FAMILIES = (DIRICHLET, NEUMANN, PERIODIC)

MAX_SYSTEM_QUBITS = 13

SIGMA01 = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|
SIGMA10 = np.array([[0, 0], [1, 0]], dtype=complex)  # |1><0|
I2 = np.eye(2, dtype=complex)


def kron_all(mats) -> np.ndarray:
    return reduce(np.kron, mats, np.eye(1, dtype=complex))


# ------------------------------------------------------------------ shift ops


@dataclass
class ShiftOps:
    n: int
    S_plus: np.ndarray
    S_minus: np.ndarray
    terms_plus: list
    terms_minus: list


def shift_term(n: int, j: int, lower: bool) -> np.ndarray:
    """s_j^- = I^(n-j) (x) sigma01 (x) sigma10^(j-1), or s_j^+ with roles swapped."""
    a, b = (SIGMA01, SIGMA10) if lower else (SIGMA10, SIGMA01)
    return kron_all([I2] * (n - j) + [a] + [b] * (j - 1))


def shift_ops(n: int) -> ShiftOps:
    if not 1 <= n <= 12:
        raise ValueError("shift_ops supports 1 <= n <= 12")
    N = 2**n
    Sm = np.zeros((N, N), dtype=complex)
    Sp = np.zeros((N, N), dtype=complex)
    for j in range(N):
        if j > 0:
            Sm[j - 1, j] = 1.0
        if j < N - 1:
            Sp[j + 1, j] = 1.0
    tm = [shift_term(n, j, True) for j in range(1, n + 1)]
    tp = [shift_term(n, j, False) for j in range(1, n + 1)]
    return ShiftOps(n, Sp, Sm, tp, tm)


def corner_coupling(n: int) -> np.ndarray:
    """sigma01^(n) + sigma10^(n): couples |0...0> and |1...1>."""
    return kron_all([SIGMA01] * n) + kron_all([SIGMA10] * n)


# ------------------------------------------------------------------ systems


@dataclass
class BoundaryCondition:
    """Per-face boundary signals.

    Dirichlet: faces[(axis, 0)] and faces[(axis, 1)] hold values.
    Neumann-mixed: faces[(axis, 0)] holds the value g, faces[(axis, 1)] the
    outward flux h.  Periodic: no faces.
    """

    family: str
    faces: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown boundary family {self.family!r}")
        self.faces = {k: parse_signal(v) for k, v in self.faces.items()}
        if self.family == PERIODIC and any(not s.is_zero() for s in self.faces.values()):
            raise ValueError("periodic boundaries carry no data")

    def face(self, axis: int, side: int) -> TimeSignal:
        return self.faces.get((axis, side), ZERO)

    @classmethod
    def uniform(cls, family: str, d: int, left="const(0)", right="const(0)"):
        if family == PERIODIC:
            return cls(family)
        faces = {}
        for ax in range(d):
            faces[(ax, 0)] = parse_signal(left)
            faces[(ax, 1)] = parse_signal(right)
        return cls(family, faces)


@dataclass
class SemiDiscreteSystem:
    """du/dt = A u + f(t), u(0) = u0."""

    A: np.ndarray
    f: Source
    u0: np.ndarray
    n_x: int
    d: int
    dx: float
    family: str = DIRICHLET
    grid: np.ndarray | None = None  # 1-D node coordinates (shared by all axes)

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    def with_initial(self, u0) -> "SemiDiscreteSystem":
        return SemiDiscreteSystem(self.A, self.f, np.asarray(u0, dtype=complex), self.n_x,
                                  self.d, self.dx, self.family, self.grid)

    def scaled(self, a: float) -> "SemiDiscreteSystem":
        """Multiply the operator and source by a diffusion constant."""
        return SemiDiscreteSystem(a * self.A, Source(a * self.f.vectors, list(self.f.signals)),
                                  self.u0, self.n_x, self.d, self.dx, self.family, self.grid)


def _stencil(n_x: int, dx: float) -> np.ndarray:
    M = 2**n_x
    return (np.diag(-2.0 * np.ones(M)) + np.diag(np.ones(M - 1), 1)
            + np.diag(np.ones(M - 1), -1)).astype(complex) / dx**2


def build_dirichlet_1d(n_x: int, dx: float, u_a="const(0)", u_b="const(0)") -> SemiDiscreteSystem:
    if n_x < 1 or dx <= 0:
        raise ValueError("need n_x >= 1 and dx > 0")
    M = 2**n_x
    e0 = np.zeros(M)
    e0[0] = 1.0 / dx**2
    e1 = np.zeros(M)
    e1[-1] = 1.0 / dx**2
    src = Source(np.stack([e0, e1], axis=1), [parse_signal(u_a), parse_signal(u_b)])
    return SemiDiscreteSystem(_stencil(n_x, dx), src, np.zeros(M, complex), n_x, 1, dx, DIRICHLET)


def build_neumann_1d(n_x: int, dx: float, g="const(0)", h="const(0)") -> SemiDiscreteSystem:
    """Left value g, right flux h; the ghost node beyond x_M is eliminated."""
    if n_x < 1 or dx <= 0:
        raise ValueError("need n_x >= 1 and dx > 0")
    M = 2**n_x
    A = _stencil(n_x, dx)
    A[M - 1, M - 2] = 2.0 / dx**2
    e0 = np.zeros(M)
    e0[0] = 1.0 / dx**2
    e1 = np.zeros(M)
    e1[-1] = 2.0 / dx
    src = Source(np.stack([e0, e1], axis=1), [parse_signal(g), parse_signal(h)])
    return SemiDiscreteSystem(A, src, np.zeros(M, complex), n_x, 1, dx, NEUMANN)


def build_periodic_1d(n_x: int, dx: float) -> SemiDiscreteSystem:
    if n_x < 1 or dx <= 0:
        raise ValueError("need n_x >= 1 and dx > 0")
    M = 2**n_x
    A = _stencil(n_x, dx) + corner_coupling(n_x) / dx**2
    return SemiDiscreteSystem(A, Source.zero(M), np.zeros(M, complex), n_x, 1, dx, PERIODIC)


def _face_weight(family: str, side: int, dx: float) -> float:
    if family == NEUMANN and side == 1:
        return 2.0 / dx
    return 1.0 / dx**2


def lift_to_d(sys1d: SemiDiscreteSystem, d: int, bc: BoundaryCondition,
              max_qubits: int = MAX_SYSTEM_QUBITS) -> SemiDiscreteSystem:
    """Kronecker-sum lift; the boundary source is assembled face by face."""
    if d < 1:
        raise ValueError("d must be >= 1")
    n_x = sys1d.n_x
    if d * n_x > max_qubits:
        raise ValueError(f"d*n_x = {d * n_x} exceeds the {max_qubits}-qubit cap")
    M = 2**n_x
    A1 = sys1d.A
    Id = np.eye(M, dtype=complex)
    A = np.zeros((M**d, M**d), dtype=complex)
    for ax in range(d):
        factors = [Id] * d
        factors[d - 1 - ax] = A1
        A += kron_all(factors)
    idx = np.indices((M,) * d).reshape(d, -1)  # idx[d-1-ax] is the axis-ax digit
    vecs, sigs = [], []
    if bc.family != PERIODIC:
        for ax in range(d):
            digit = idx[d - 1 - ax]
            for side, pos in ((0, 0), (1, M - 1)):
                sig = bc.face(ax, side)
                v = np.where(digit == pos, _face_weight(bc.family, side, sys1d.dx), 0.0)
                vecs.append(v)
                sigs.append(sig)
    src = Source(np.stack(vecs, axis=1), sigs) if vecs else Source.zero(M**d)
    return SemiDiscreteSystem(A, src, np.zeros(M**d, complex), n_x, d, sys1d.dx,
                              sys1d.family, sys1d.grid)


# ------------------------------------------------------------------ problems

_IC = re.compile(r"\s*(sin_mode|cos_mode|const|gaussian)\s*\(([^()]*)\)\s*$")


@dataclass(frozen=True)
class InitialCondition:
    """Product-form initial data: ``sin_mode(k)``, ``cos_mode(k)``, ``const(c)``
    or ``gaussian(center, width)``, applied along every axis."""

    spec: str = "sin_mode(1)"

    def evaluate(self, x: np.ndarray, lo: float, hi: float) -> np.ndarray:
        m = _IC.match(self.spec)
        if not m:
            raise ValueError(f"bad initial condition {self.spec!r}")
        args = [float(a) for a in m.group(2).split(",") if a.strip()]
        s = (x - lo) / (hi - lo)
        kind = m.group(1)
        if kind == "sin_mode":
            return np.sin(args[0] * np.pi * s)
        if kind == "cos_mode":
            return np.cos(args[0] * np.pi * s)
        if kind == "const":
            return np.full_like(x, args[0])
        return np.exp(-((x - args[0]) ** 2) / (2 * args[1] ** 2))


@dataclass
class HeatProblem:
    d: int = 1
    n_x: int = 4
    family: str = DIRICHLET
    a: float = 1.0
    domain: tuple = (0.0, 1.0)
    bc: BoundaryCondition | None = None
    initial: InitialCondition | Callable = field(default_factory=InitialCondition)

    def __post_init__(self):
        if isinstance(self.initial, str):
            self.initial = InitialCondition(self.initial)
        if self.bc is None:
            self.bc = BoundaryCondition.uniform(self.family, self.d)
        if self.bc.family != self.family:
            raise ValueError("boundary family mismatch")

    @property
    def M(self) -> int:
        return 2**self.n_x + (1 if self.family == DIRICHLET else 0)

    @property
    def dx(self) -> float:
        lo, hi = self.domain
        return (hi - lo) / self.M

    def nodes(self) -> np.ndarray:
        """Coordinates of the unknowns along one axis."""
        lo, _ = self.domain
        j = np.arange(2**self.n_x)
        if self.family == PERIODIC:
            return lo + j * self.dx
        return lo + (j + 1) * self.dx

    def initial_vector(self) -> np.ndarray:
        x = self.nodes()
        lo, hi = self.domain
        if callable(self.initial) and not isinstance(self.initial, InitialCondition):
            grids = np.meshgrid(*([x] * self.d), indexing="ij")
            # grids[k] varies along Kronecker position k, i.e. axis d-1-k
            coords = [grids[self.d - 1 - ax].ravel() for ax in range(self.d)]
            return np.asarray(self.initial(*coords), dtype=complex)
        prof = self.initial.evaluate(x, lo, hi)
        return kron_all([prof[:, None]] * self.d).ravel().astype(complex)


def build_system(problem: HeatProblem) -> SemiDiscreteSystem:
    """Assemble a*A, a*f and u0 for a heat problem."""
    dx = problem.dx
    n = problem.n_x
    bc = problem.bc
    if problem.family == DIRICHLET:
        base = build_dirichlet_1d(n, dx, bc.face(0, 0), bc.face(0, 1))
    elif problem.family == NEUMANN:
        base = build_neumann_1d(n, dx, bc.face(0, 0), bc.face(0, 1))
    else:
        base = build_periodic_1d(n, dx)
    base.grid = problem.nodes()
    sys = base if problem.d == 1 else lift_to_d(base, problem.d, bc)
    sys = sys.scaled(problem.a).with_initial(problem.initial_vector())
    return sys


def eigenvalue_circulant(n_x: int) -> np.ndarray:
    """Closed-form spectrum of the periodic second difference (unit spacing)."""
    M = 2**n_x
    return 2 * np.cos(2 * math.pi * np.arange(M) / M) - 2
