import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from heatschrod.discretize import HeatProblem, build_system
from heatschrod.numerics import expm, reference_solution
from heatschrod.schrodingerise import (RecoveryError, make_pgrid, recover_u, schrodingerise,
                                       split_hermitian)


@given(st.integers(1, 6), st.integers(0, 10**6))
def test_split_hermitian_reassembles(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    H1, H2 = split_hermitian(A)
    assert np.allclose(H1, H1.conj().T) and np.allclose(H2, H2.conj().T)
    assert np.allclose(H1 + 1j * H2, A)


def test_pgrid_values():
    g = make_pgrid(3.0, 6, warn=False)
    assert g.N == 64 and g.dp == pytest.approx(2 * math.pi * 3 / 64)
    assert g.nodes[0] == pytest.approx(-3 * math.pi)
    assert g.eta[32] == 0 and g.eta[33] == pytest.approx(1 / 3)
    # C_e^2 = sum e^{-2|p_k|}, and C_e0 keeps only p_k >= 0
    assert g.C_e**2 == pytest.approx(np.sum(np.exp(-2 * np.abs(g.nodes))))
    assert g.C_e0 < g.C_e


def test_tail_warning():
    with pytest.warns(RuntimeWarning):
        make_pgrid(1.0, 4)


def test_hamiltonian_hermitian_and_sizes():
    sys = build_system(HeatProblem(d=1, n_x=2))
    ss = schrodingerise(sys, make_pgrid(3.0, 3, warn=False))
    assert np.allclose(ss.H, ss.H.conj().T)
    assert ss.H.shape == (32, 32)
    assert ss.gamma0 == pytest.approx(1 / (0.2**2 * 3))


def test_mode_transform_round_trip(rng):
    ss = schrodingerise(build_system(HeatProblem(d=1, n_x=2)), make_pgrid(3.0, 4, warn=False))
    w = rng.normal(size=64) + 0j
    assert np.allclose(ss.from_modes(ss.to_modes(w)), w)


def test_exact_evolution_recovers_solution():
    pb = HeatProblem(d=1, n_x=3)
    sys = build_system(pb)
    pg = make_pgrid(3.0, 8, warn=False)
    ss = schrodingerise(sys, pg)
    T = 0.02
    rec = recover_u(ss.from_modes(expm(1j * ss.H, T) @ ss.wt0), pg, 0.0, T)
    ref = reference_solution(sys, T)
    assert np.linalg.norm(rec.u_projected - ref) / np.linalg.norm(ref) < 5e-3
    assert rec.k_star == rec.admissible[0]


def test_recovery_errors():
    pg = make_pgrid(1.0, 3, warn=False)
    with pytest.raises(ValueError):
        recover_u(np.zeros(8), pg, -1.0)
    with pytest.raises(RecoveryError):
        recover_u(np.zeros(8), pg, 1.0, 10.0)
