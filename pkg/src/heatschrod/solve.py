"""End-to-end runners shared by the command line, the scripts and the tests.

Each runner returns a report dict with a fixed field set; measurements that
do not apply to a method are explicit ``None``.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace

import numpy as np

from . import __version__
from .autonomise import (AutoSegment, HbarBlocks, autonomise, evolve_autonomised,
                         heat_blocks, predicted_auto_queries, recover_from_autonomised)
from .circuits import (MODIFIED, ORIGINAL, H0_matrix, HeatLayout, Hheat_matrix, build_B_hat,
                       build_U1_corner, build_Vheat, build_Vtilde0, circuit_to_matrix,
                       count_gates, heat_constant, shift_block)
from .discretize import corner_coupling, kron_all
from .config import RunConfig
from .discretize import BoundaryCondition, HeatProblem, InitialCondition, build_system
from .lcu import (build_segment_blocks, choose_K, combine_homogeneous_inhomogeneous,
                  combined_matrix_path, duhamel_reference, measured_success, lcu_query_complexity_report, make_plan,
                  predicted_lcu_queries, success_probability)
from .numerics import expm, loglog_slope, op_norm, reference_solution, rk4
from .pipelines import HeatEvolution, segments_for_tolerance, run_homogeneous_circuit
from .schrodingerise import evolve_exact, make_pgrid, recover_u, schrodingerise

SCHEMA_VERSION = 1
REPORT_FIELDS = ("schema_version", "version", "command", "method", "config", "parameters",
                 "errors", "probabilities", "gate_counts", "queries", "certificates",
                 "solution", "wall_time")


def certificate(name: str, lhs: float, rhs: float, relation: str = "<=") -> dict:
    """A bound check carrying both sides and the margin rhs - lhs (or lhs - rhs)."""
    lhs, rhs = float(lhs), float(rhs)
    if relation == "<=":
        ok, margin = lhs <= rhs, rhs - lhs
    elif relation == ">=":
        ok, margin = lhs >= rhs, lhs - rhs
    else:
        raise ValueError(relation)
    return {"name": name, "lhs": lhs, "relation": relation, "rhs": rhs,
            "margin": margin, "pass": bool(ok)}


def empty_report(command: str, cfg: RunConfig | None) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "version": __version__,
        "command": command,
        "method": cfg.method if cfg else None,
        "config": cfg.to_dict() if cfg else None,
        "parameters": {},
        "errors": {"rel_l2": None, "rel_l2_projected": None, "recovery_variance": None},
        "probabilities": {"formula": None, "measured": None, "stages": None},
        "gate_counts": None,
        "queries": None,
        "certificates": [],
        "solution": None,
        "wall_time": None,
    }


def problem_from_config(cfg: RunConfig) -> HeatProblem:
    p = cfg.problem
    faces = {}
    for key, sig in p.boundary.items():
        faces[(int(key[0]), 0 if key[1] == "-" else 1)] = sig
    bc = BoundaryCondition(p.family, faces) if p.family != "periodic" else None
    return HeatProblem(d=p.d, n_x=p.n_x, family=p.family, a=p.a, domain=tuple(p.domain),
                       bc=bc, initial=InitialCondition(p.initial))


def _solution(u, u_projected, u_ref) -> dict:
    return {"u": np.asarray(u), "u_projected": np.asarray(u_projected),
            "reference": np.asarray(u_ref)}


def _rel(u, ref):
    return float(np.linalg.norm(np.asarray(u) - ref) / max(np.linalg.norm(ref), 1e-300))


# ---------------------------------------------------------------- methods


def run_exact(cfg: RunConfig) -> dict:
    """Dense routes only: RK4 on the semi-discrete system against the
    quadrature reference, and the dense Schrodingerised evolution."""
    rep = empty_report("solve", cfg)
    t0 = time.perf_counter()
    pb = problem_from_config(cfg)
    sys = build_system(pb)
    T = cfg.time.T
    u_ref = reference_solution(sys, T, tol=1e-12)
    A_norm = op_norm(sys.A)
    steps = max(64, math.ceil(T * A_norm / 0.02))
    f = sys.f
    has_source = f is not None and not f.is_zero()

    def rhs(t, y):
        out = sys.A @ y
        return out + f(t) if has_source else out

    u_rk = rk4(rhs, sys.u0, T, steps)
    pg = make_pgrid(cfg.schrodingerise.R, cfg.schrodingerise.n_p, warn=False)
    ss = schrodingerise(sys, pg, pb.a)
    wt = evolve_exact(ss, T)
    if ss.source is not None:
        wt = wt + duhamel_reference(ss, T)
    rec = recover_u(ss.from_modes(wt), pg, 0.0, T)
    rep["parameters"] = {"rk4_steps": steps, "A_norm": A_norm, "R": pg.R, "n_p": pg.n_p,
                         "T": T, "e^-piR": math.exp(-math.pi * pg.R)}
    rep["errors"] = {"rel_l2": _rel(rec.u, u_ref), "rel_l2_projected": _rel(rec.u_projected, u_ref),
                     "recovery_variance": rec.variance, "rk4_vs_reference": _rel(u_rk, u_ref)}
    rep["certificates"].append(certificate("rk4 matches reference", _rel(u_rk, u_ref), 1e-8))
    rep["solution"] = _solution(rec.u, rec.u_projected, u_ref)
    rep["wall_time"] = time.perf_counter() - t0
    return rep


def run_circuit_homogeneous(cfg: RunConfig) -> dict:
    rep = empty_report("solve", cfg)
    t0 = time.perf_counter()
    pb = problem_from_config(cfg)
    sys = build_system(pb)
    if sys.f is not None and not sys.f.is_zero():
        raise ValueError("problem.boundary: circuit-homogeneous needs zero boundary data")
    res = run_homogeneous_circuit(pb, cfg.schrodingerise.R, cfg.schrodingerise.n_p,
                                  cfg.time.T, cfg.time.delta, cfg.time.r, cfg.verify.mode,
                                  cfg.verify.circuit_check_segments)
    rep["parameters"] = {"r": res.r, "tau": res.tau, "C_heat": res.C_heat, "k_star": res.k_star,
                         "mode": cfg.verify.mode}
    rep["errors"] = {"rel_l2": res.rel_error, "rel_l2_projected": res.rel_error_projected,
                     "recovery_variance": res.variance}
    rep["gate_counts"] = res.gate_counts
    rep["queries"] = {"O_H": res.r}
    rep["solution"] = _solution(res.u, res.u_projected, res.u_ref)
    rep["certificates"] += [
        certificate("segment error <= C_heat tau^2", res.segment_error, res.segment_bound),
        certificate("gate-level vs compiled segment", res.circuit_check, 1e-10),
        certificate("recovered u(T) within tolerance", res.rel_error_projected,
                    cfg.verify.tolerance),
    ]
    rep["wall_time"] = time.perf_counter() - t0
    return rep


def run_lcu(cfg: RunConfig) -> dict:
    rep = empty_report("solve", cfg)
    t0 = time.perf_counter()
    pb = problem_from_config(cfg)
    sys = build_system(pb)
    pg = make_pgrid(cfg.schrodingerise.R, cfg.schrodingerise.n_p, warn=False)
    ss = schrodingerise(sys, pg, pb.a)
    T, mode = cfg.time.T, cfg.verify.mode
    C = heat_constant(pb.d, pb.n_x, pg.n_p, ss.gamma0)
    K = cfg.time.K or choose_K(cfg.time.delta1, T, ss.H, ss.source, C)
    r = cfg.time.r or segments_for_tolerance(C, T, cfg.time.delta)
    plan = make_plan(ss, T, K, r)
    periodic = pb.family == "periodic"
    V, Vinv = build_segment_blocks(ss, pb.d, pb.n_x, plan.ds, mode, periodic)
    hom = HeatEvolution.build(pb.d, pb.n_x, pg.n_p, ss.gamma0, plan.tau, mode, periodic).blocks
    res = combine_homogeneous_inhomogeneous(ss, plan, hom, V, Vinv)
    mat = combined_matrix_path(ss, plan, hom, V, Vinv)
    eta = res.eta0 + res.eta1
    w = res.w_branch * eta
    u_ref = reference_solution(sys, T)
    rec = recover_u(w, pg, 0.0, T)
    f_avg = plan.alpha_l1 / pg.C_e if plan.alpha_l1 else 0.0
    sp_formula = success_probability(sys.u0, u_ref, f_avg, pg)
    meas = measured_success(res.w_branch, pg)
    pr_meas_formula = float(np.linalg.norm(mat) ** 2)
    A_norm = op_norm(sys.A)
    pred = predicted_lcu_queries(C, T, cfg.time.delta, pg, A_norm, sys.f,
                                 float(np.linalg.norm(sys.u0)), float(np.linalg.norm(u_ref)),
                                 f_avg)
    rep["parameters"] = {"K": K, "n_s": plan.n_s, "r": r, "C_heat": C, "eta0": res.eta0,
                         "eta1": res.eta1, "mode": mode}
    rep["errors"] = {"rel_l2": _rel(rec.u, u_ref), "rel_l2_projected": _rel(rec.u_projected, u_ref),
                     "recovery_variance": rec.variance,
                     "circuit_vs_matrix": float(np.linalg.norm(res.wt_branch - mat))}
    rep["probabilities"] = {"formula": sp_formula.formula, "measured": meas,
                            "stages": res.probabilities,
                            "branch_measured": res.branch_probability,
                            "branch_formula": pr_meas_formula}
    rep["queries"] = lcu_query_complexity_report(plan, res.meter, pred)
    rep["solution"] = _solution(rec.u, rec.u_projected, u_ref)
    total = sum(res.probabilities.values())
    rep["certificates"] += [
        certificate("circuit path equals matrix path", rep["errors"]["circuit_vs_matrix"], 1e-9),
        # round-off grows with the number of unitary applications
        certificate("probabilities sum to one", abs(total - 1.0), 1e-13 * (r + 2 * K)),
        certificate("branch probability matches formula",
                    abs(res.branch_probability - pr_meas_formula), 1e-8),
        certificate("O_H count equals r + 2K - 1",
                    abs(res.meter["O_H"] - rep["queries"]["expected_O_H"]), 0),
        certificate("recovered u(T) within tolerance", rep["errors"]["rel_l2_projected"],
                    cfg.verify.tolerance),
    ]
    rep["wall_time"] = time.perf_counter() - t0
    return rep


def run_autonomise(cfg: RunConfig) -> dict:
    rep = empty_report("solve", cfg)
    t0 = time.perf_counter()
    pb = problem_from_config(cfg)
    sys = build_system(pb)
    T = cfg.time.T
    auto = autonomise(pb, cfg.schrodingerise.R, cfg.schrodingerise.n_p, T, cfg.time.n_s,
                      warn=False)
    C_auto = auto.C_auto(pb.d, pb.n_x)
    r = cfg.time.r or max(1, math.ceil(C_auto * T**2 / cfg.time.delta))
    run = evolve_autonomised(auto, T, r, cfg.verify.mode)
    u_ref = reference_solution(sys, T)
    lam = auto.lambda_plus(T)
    rec = recover_from_autonomised(run.z, auto, lam, T, u_ref)
    lhs, rhs, ok = auto.sgrid.constraint(auto.pgrid.N, auto.A_norm(), auto.pgrid.R)
    pred = predicted_auto_queries(auto, pb.d, pb.n_x, T, cfg.time.delta,
                                  float(np.linalg.norm(sys.u0)), float(np.linalg.norm(u_ref)))
    rep["parameters"] = {"r": r, "tau": T / r, "N_s": auto.sgrid.N, "C_auto": C_auto,
                         "g_f": auto.g_f(), "lambda_plus": lam, "s_constraint_lhs": lhs,
                         "s_constraint_rhs": rhs, "s_constraint_ok": ok,
                         "mode": cfg.verify.mode}
    rep["errors"] = {"rel_l2": _rel(rec.u, u_ref), "rel_l2_projected": _rel(rec.u_projected, u_ref),
                     "recovery_variance": None}
    rep["probabilities"] = {"formula": rec.formulas.get("overall"),
                            "measured": rec.probabilities["overall"],
                            "stages": {"measured": rec.probabilities, "formula": rec.formulas}}
    rep["queries"] = {"measured": run.meter.as_dict(), "predicted": pred}
    rep["solution"] = _solution(rec.u, rec.u_projected, u_ref)
    rep["certificates"] += [
        certificate("norm preserved over segments", run.norm_drift, 1e-9),
        certificate("recovered u(T) within tolerance", rep["errors"]["rel_l2_projected"],
                    cfg.verify.tolerance),
    ]
    if cfg.verify.segment_check:
        hb = HbarBlocks(auto)
        seg = AutoSegment(auto, T / r, heat_blocks(auto, T / r, cfg.verify.mode))
        err = hb.segment_error(seg)
        rep["certificates"].append(certificate("segment error <= C_auto tau^2", err,
                                               C_auto * (T / r) ** 2))
    rep["wall_time"] = time.perf_counter() - t0
    return rep


def diagonalisation_defect(j: int, lam: float) -> float:
    """max |B(lam) (Z (x) |1><1|^(j-1)) B(lam)^dagger - S(lam)| entrywise."""
    B = circuit_to_matrix(build_B_hat(j, lam))
    D = kron_all([np.diag([1.0, -1.0])] + [np.diag([0.0, 1.0])] * (j - 1))
    return float(np.abs(B @ D @ B.conj().T - shift_block(j, lam)).max())


def select_form_defect(d: int, n_x: int, n_p: int, tau: float = 0.1,
                       gamma0: float = 1.0) -> float:
    """Largest entry of V_heat(modified) - V_heat(original)."""
    a = circuit_to_matrix(build_Vheat(tau, n_x, n_p, d, gamma0, MODIFIED))
    b = circuit_to_matrix(build_Vheat(tau, n_x, n_p, d, gamma0, ORIGINAL))
    return float(np.abs(a - b).max())


def group_law_defect(d: int, n_x: int, tau1: float, tau2: float, gamma0: float = 1.0,
                     periodic: bool = False) -> float:
    lay = HeatLayout(d, n_x, 0)
    V = lambda t: circuit_to_matrix(build_Vtilde0(t, lay, gamma0, periodic))
    return float(np.abs(V(tau1) @ V(tau2) - V(tau1 + tau2)).max())


def trotter_errors(d: int, n_x: int, n_p: int, taus, gamma0: float = 1.0,
                   periodic: bool = False, mode: str = ORIGINAL) -> np.ndarray:
    """|V_heat(tau) - e^{i tau Hheat}| in operator norm at each tau."""
    H = Hheat_matrix(n_x, n_p, d, gamma0, periodic=periodic)
    return np.array([np.linalg.norm(circuit_to_matrix(
        build_Vheat(t, n_x, n_p, d, gamma0, mode, periodic)) - expm(1j * H, t), 2)
        for t in taus])


def run_verify_circuits(cfg: RunConfig) -> dict:
    """Dense-oracle equivalence and product-formula order checks."""
    rep = empty_report("verify-circuits", cfg)
    t0 = time.perf_counter()
    certs = rep["certificates"]
    worst = max(diagonalisation_defect(j, lam) for j in range(1, 7)
                for lam in (0.0, math.pi / 4, 1.3))
    certs.append(certificate("Bell-basis diagonalisation, j <= 6", worst, 1e-12))
    for triple in ((1, 2, 3), (1, 3, 2), (2, 1, 2)):
        certs.append(certificate(f"modified equals original select, (d, n_x, n_p) = {triple}",
                                 select_form_defect(*triple), 1e-12))
    certs.append(certificate("corner factor equals its exponential, n_x = 3",
                             float(np.abs(circuit_to_matrix(build_U1_corner(0.3, 3, 1.0))
                                          - expm(1j * 0.3 * corner_coupling(3))).max()), 1e-12))
    p = cfg.problem
    d, n_x = p.d, min(p.n_x, 3)
    n_p = max(1, min(cfg.schrodingerise.n_p, 3))
    periodic = p.family == "periodic"
    taus = [0.2, 0.1, 0.05, 0.025, 0.0125]
    errs = trotter_errors(d, n_x, n_p, taus, periodic=periodic)
    C = heat_constant(d, n_x, n_p, 1.0)
    for t, e in zip(taus, errs):
        certs.append(certificate(f"segment error <= C_heat tau^2 at tau = {t}", e, C * t**2))
    slope = loglog_slope(taus, errs)
    rep["parameters"] = {"d": d, "n_x": n_x, "n_p": n_p, "periodic": periodic, "C_heat": C,
                         "taus": taus, "errors": errs.tolist(), "slope": slope}
    rep["gate_counts"] = count_gates(build_Vheat(0.1, n_x, n_p, d, 1.0, MODIFIED,
                                                 periodic)).as_dict()
    rep["wall_time"] = time.perf_counter() - t0
    return rep


RUNNERS = {"exact": run_exact, "circuit-homogeneous": run_circuit_homogeneous,
           "lcu": run_lcu, "autonomise": run_autonomise}


def solve(cfg: RunConfig) -> dict:
    return RUNNERS[cfg.method](cfg)


# ---------------------------------------------------------------- gate counts and sweeps


def gate_count_table(d_list, n_x_list, n_p_list, mode: str = MODIFIED, tau: float = 0.1,
                     gamma0: float = 1.0) -> list[dict]:
    rows = []
    for d in d_list:
        for n_x in n_x_list:
            for n_p in n_p_list:
                c = count_gates(build_Vheat(tau, n_x, n_p, d, gamma0, mode))
                rows.append({"d": d, "n_x": n_x, "n_p": n_p, **c.as_dict()})
    return rows


def fit_gate_counts(rows: list[dict]) -> dict:
    """Least squares single_qubit ~ c1 d n_p n_x (through the origin) and the
    smallest c2 with cnot_equivalent <= c2 d n_p n_x^2 on every row."""
    if not rows:
        return {"c1": None, "r2": None, "c2": None}
    x = np.array([r["d"] * r["n_p"] * r["n_x"] for r in rows], float)
    y = np.array([r["single_qubit"] for r in rows], float)
    c1 = float(x @ y / (x @ x))
    res = y - c1 * x
    ss_tot = float(((y - y.mean()) ** 2).sum())
    r2 = 1.0 - float(res @ res) / ss_tot if ss_tot > 0 else 1.0
    ratios = [r["cnot_equivalent"] / (r["d"] * r["n_p"] * r["n_x"] ** 2) for r in rows]
    return {"c1": c1, "r2": r2, "c2": float(max(ratios)), "c2_min": float(min(ratios))}


def run_gate_count(cfg: RunConfig) -> dict:
    rep = empty_report("gate-count", cfg)
    t0 = time.perf_counter()
    g = cfg.grid
    rows = gate_count_table(g.d, g.n_x, g.n_p, MODIFIED)
    fit = fit_gate_counts(rows)
    rep["gate_counts"] = {"rows": rows, "fit": fit, "mode": MODIFIED}
    if fit["r2"] is not None:
        rep["certificates"].append(certificate("single-qubit fit R^2", fit["r2"], 0.99, ">="))
    rep["wall_time"] = time.perf_counter() - t0
    rep["table"] = rows
    return rep


def sweep_point(cfg: RunConfig, T: float, n_x: int) -> dict:
    """Predicted totals for both methods at one (T, n_x), plus measured meters."""
    sub = replace(cfg, problem=replace(cfg.problem, n_x=n_x), time=replace(cfg.time, T=T))
    pb = problem_from_config(sub)
    sys = build_system(pb)
    pg = make_pgrid(sub.schrodingerise.R, sub.schrodingerise.n_p, warn=False)
    ss = schrodingerise(sys, pg, pb.a)
    C = heat_constant(pb.d, n_x, pg.n_p, ss.gamma0)
    u_ref = reference_solution(sys, T)
    u0n, uTn = float(np.linalg.norm(sys.u0)), float(np.linalg.norm(u_ref))
    K = choose_K(sub.time.delta1, T, ss.H, ss.source, C)
    plan = make_plan(ss, T, K, segments_for_tolerance(C, T, sub.time.delta))
    f_avg = plan.alpha_l1 / pg.C_e if plan.alpha_l1 else 0.0
    p_lcu = predicted_lcu_queries(C, T, sub.time.delta, pg, op_norm(sys.A), sys.f,
                                  u0n, uTn, f_avg)
    auto = autonomise(pb, pg.R, pg.n_p, T, sub.time.n_s, warn=False)
    p_auto = predicted_auto_queries(auto, pb.d, n_x, T, sub.time.delta, u0n, uTn)
    row = {"T": T, "n_x": n_x, "K": K, "N_t_lcu": p_lcu["N_t"], "N_t_auto": p_auto["N_t"],
           "C_LCU": p_lcu["C_LCU"], "C_auto": p_auto["C_auto"], "g_f": p_auto["g_f"],
           "lambda_plus": p_auto["lambda_plus"], "auto_smaller": p_auto["N_t"] < p_lcu["N_t"],
           "lcu_O_H_measured": None, "lcu_inhomogeneous_O_H": None,
           "auto_O_H_measured": None, "auto_HAM_measured": None}
    if cfg.sweep.measure:
        lcu_cfg = replace(sub, method="lcu", time=replace(sub.time, K=min(K, 2**12)))
        lr = run_lcu(lcu_cfg)
        m = lr["queries"]["measured"]
        row["lcu_O_H_measured"] = m["O_H"]
        # the homogeneous branch spends exactly r queries
        row["lcu_inhomogeneous_O_H"] = m["O_H"] - lr["parameters"]["r"]
        auto_cfg = replace(sub, method="autonomise", time=replace(sub.time, r=cfg.sweep.r_auto))
        am = run_autonomise(auto_cfg)["queries"]["measured"]
        row["auto_O_H_measured"] = am.get("O_H", 0)
        row["auto_HAM_measured"] = am.get("HAM", 0)
    return row


def run_sweep(cfg: RunConfig) -> dict:
    """LCU vs autonomise query totals over the (T, n_x) grid.  Points may run on
    ``cfg.threads`` worker threads; rows keep grid order either way."""
    rep = empty_report("sweep", cfg)
    t0 = time.perf_counter()
    grid = [(T, n_x) for T in cfg.sweep.T for n_x in cfg.sweep.n_x]
    if cfg.threads > 1:
        with ThreadPoolExecutor(cfg.threads) as pool:
            rows = list(pool.map(lambda a: sweep_point(cfg, *a), grid))
    else:
        rows = [sweep_point(cfg, *a) for a in grid]
    rep["table"] = rows
    rep["queries"] = {"rows": rows}
    rep["wall_time"] = time.perf_counter() - t0
    return rep
