import numpy as np
import pytest

from heatschrod.circuits import (ORIGINAL, HeatLayout, build_Vheat, circuit_to_matrix,
                                 heat_constant)
from heatschrod.discretize import HeatProblem, build_system
from heatschrod.pipelines import (HeatEvolution, SelectBlocks, compile_select, exact_select,
                                  segments_for_tolerance, run_homogeneous_circuit)
from heatschrod.schrodingerise import make_pgrid, schrodingerise


def test_select_blocks_algebra(rng):
    from conftest import random_unitary

    blocks = np.stack([random_unitary(rng, 4) for _ in range(4)])
    S = SelectBlocks(blocks)
    v = rng.normal(size=16) + 0j
    assert np.allclose(S.dense() @ v, S.apply(v))
    assert np.allclose((S @ S.adjoint()).dense(), np.eye(16), atol=1e-12)
    assert np.allclose(S.power(3).dense(), np.linalg.matrix_power(S.dense(), 3))


def test_compile_select_matches_circuit():
    lay = HeatLayout(1, 2, 3)
    qc = build_Vheat(0.1, 2, 3, 1, 1.0, ORIGINAL, layout=lay)
    assert np.allclose(compile_select(qc, lay).dense(), circuit_to_matrix(qc), atol=1e-12)


def test_heat_evolution_sign():
    # the segment targets e^{iH tau} of the Schrodingerised Hamiltonian
    pb = HeatProblem(d=1, n_x=2)
    ss = schrodingerise(build_system(pb), make_pgrid(3.0, 3, warn=False))
    tau = 1e-4
    evo = HeatEvolution.build(1, 2, 3, ss.gamma0, tau, ORIGINAL)
    dist = lambda ex: max(np.linalg.norm(a - b, 2) for a, b in zip(evo.blocks.blocks, ex.blocks))
    C = heat_constant(1, 2, 3, ss.gamma0)
    assert dist(exact_select(ss, tau)) <= C * tau**2
    assert dist(exact_select(ss, -tau)) > 100 * C * tau**2


def test_segments_for_tolerance_rounds_up():
    assert segments_for_tolerance(40.0, 0.5, 1.0) == 10
    assert segments_for_tolerance(40.0, 0.5, 0.99) == 11
    assert segments_for_tolerance(0.0, 1.0, 1.0) == 1


def test_homogeneous_pipeline_small():
    res = run_homogeneous_circuit(HeatProblem(d=1, n_x=2), 3.0, 6, 0.02, 1e-2)
    assert res.circuit_check < 1e-12
    assert res.segment_error <= res.segment_bound
    assert res.rel_error_projected < 3e-2


def test_homogeneous_pipeline_periodic_two_dims():
    pb = HeatProblem(d=2, n_x=2, family="periodic", initial="cos_mode(2)")
    res = run_homogeneous_circuit(pb, 3.0, 6, 0.01, 1e-2)
    assert res.circuit_check < 1e-12
    assert res.rel_error_projected < 3e-2


def test_neumann_rejected():
    with pytest.raises(ValueError):
        run_homogeneous_circuit(HeatProblem(d=1, n_x=2, family="neumann"), 3.0, 4, 0.1)
