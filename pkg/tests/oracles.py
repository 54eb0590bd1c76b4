"""Independent constructions used as oracles by the tests."""
from __future__ import annotations

from fractions import Fraction

import numpy as np


def neumann_by_elimination(M: int, length: Fraction = Fraction(1)):
    """Mixed value/flux second difference built on the extended node set
    x_0 (boundary value), x_1..x_M (unknowns), x_{M+1} (ghost), then reduced by
    substituting the two constraint equations.  Exact rational arithmetic.

    Returns (A, e_g, e_h): du/dt = A u + e_g g(t) + e_h h(t).
    """
    dx = length / M
    n_ext = M + 2
    # every extended node as an affine form over (u_1..u_M, g, h)
    forms = []
    for i in range(n_ext):
        f = [Fraction(0)] * (M + 2)
        if i == 0:
            f[M] = Fraction(1)  # u_0 = g
        elif i <= M:
            f[i - 1] = Fraction(1)
        forms.append(f)
    # ghost: (u_{M+1} - u_{M-1}) / (2 dx) = h
    ghost = list(forms[M - 1])
    ghost[M + 1] += 2 * dx
    forms[M + 1] = ghost
    A = [[Fraction(0)] * M for _ in range(M)]
    eg = [Fraction(0)] * M
    eh = [Fraction(0)] * M
    for row, i in enumerate(range(1, M + 1)):
        for node, c in ((i - 1, 1), (i, -2), (i + 1, 1)):
            for k, v in enumerate(forms[node]):
                term = c * v / dx**2
                if k < M:
                    A[row][k] += term
                elif k == M:
                    eg[row] += term
                else:
                    eh[row] += term
    return A, eg, eh


def to_array(rows) -> np.ndarray:
    return np.array([[float(v) for v in r] for r in rows]) if isinstance(rows[0], list) \
        else np.array([float(v) for v in rows])
