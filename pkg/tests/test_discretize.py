import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatschrod.discretize import (BoundaryCondition, HeatProblem, InitialCondition,
                                   build_dirichlet_1d, build_neumann_1d, build_periodic_1d,
                                   build_system, corner_coupling, eigenvalue_circulant,
                                   kron_all, lift_to_d, shift_ops, shift_term)
from oracles import neumann_by_elimination, to_array


@given(st.integers(1, 7))
def test_shift_terms_sum_to_shift_operators(n):
    so = shift_ops(n)
    assert np.array_equal(sum(so.terms_plus), so.S_plus)
    assert np.array_equal(sum(so.terms_minus), so.S_minus)
    assert np.array_equal(so.S_plus, so.S_minus.conj().T)


def test_shift_term_single_entry():
    # s_2^- on 2 wires maps |10> to |01>
    t = shift_term(2, 2, True)
    assert t[1, 2] == 1 and np.count_nonzero(t) == 1


def test_corner_coupling_links_extremes():
    C = corner_coupling(3)
    assert C[0, 7] == 1 and C[7, 0] == 1 and np.count_nonzero(C) == 2


def test_dirichlet_source_vectors():
    sys = build_dirichlet_1d(2, 0.2, "const(1)", "const(3)")
    assert np.allclose(sys.f(0.0), [25, 0, 0, 75])
    assert np.allclose(np.diag(sys.A), -50)


@pytest.mark.parametrize("M", [2, 4, 8, 16])
def test_neumann_matches_elimination(M):
    A, eg, eh = neumann_by_elimination(M)
    sys = build_neumann_1d(int(math.log2(M)), 1.0 / M)
    assert np.array_equal(sys.A.real, to_array(A))
    assert np.array_equal(sys.f.vectors[:, 0].real, to_array(eg))
    assert np.array_equal(sys.f.vectors[:, 1].real, to_array(eh))


@given(st.integers(1, 6))
def test_periodic_spectrum(n):
    ev = np.sort(np.linalg.eigvalsh(build_periodic_1d(n, 1.0).A.real))
    assert np.allclose(ev, np.sort(eigenvalue_circulant(n)), atol=1e-10)


def test_lift_is_kronecker_sum_and_faces_sum_up():
    bc = BoundaryCondition.uniform("dirichlet", 2, "const(1)", "const(1)")
    base = build_dirichlet_1d(2, 0.2)
    sys = lift_to_d(base, 2, bc)
    I = np.eye(4)
    assert np.allclose(sys.A, np.kron(base.A, I) + np.kron(I, base.A))
    # constant boundary value 1 on all faces: A u + f = 0 for u = 1
    assert np.allclose(sys.A @ np.ones(16) + sys.f(0.0), 0)


def test_axis_zero_is_least_significant():
    pb = HeatProblem(d=2, n_x=1, initial=lambda x0, x1: x0 + 10 * x1)
    x = pb.nodes()
    u = pb.initial_vector()
    assert u[1] == pytest.approx(x[1] + 10 * x[0])


def test_system_scaling_and_initial():
    pb = HeatProblem(d=1, n_x=3, a=0.5, initial=InitialCondition("sin_mode(1)"))
    sys = build_system(pb)
    assert pb.dx == pytest.approx(1 / 9)
    assert np.allclose(sys.u0, np.sin(math.pi * pb.nodes()))
    assert sys.A[0, 0] == pytest.approx(-0.5 * 2 * 81)


def test_bad_inputs():
    with pytest.raises(ValueError):
        BoundaryCondition("robin")
    with pytest.raises(ValueError):
        BoundaryCondition("periodic", {(0, 0): "const(1)"})
    with pytest.raises(ValueError):
        InitialCondition("tri(1)").evaluate(np.zeros(2), 0, 1)
    with pytest.raises(ValueError):
        lift_to_d(build_dirichlet_1d(7, 0.1), 2, BoundaryCondition.uniform("dirichlet", 2))
