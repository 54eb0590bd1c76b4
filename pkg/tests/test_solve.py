import json

import numpy as np
import pytest

from heatschrod.cli import main
from heatschrod.config import from_dict
from heatschrod.solve import (REPORT_FIELDS, fit_gate_counts, gate_count_table, run_gate_count,
                              run_sweep, run_verify_circuits, solve)


def cfg(method, **over):
    data = {"method": method,
            "problem": {"d": 1, "n_x": 2},
            "schrodingerise": {"R": 3.0, "n_p": 6},
            "time": {"T": 0.05, "n_s": 3},
            "sweep": {"T": [0.05], "n_x": [2], "r_auto": 32}}
    for k, v in over.items():
        data.setdefault(k, {}).update(v) if isinstance(v, dict) else data.__setitem__(k, v)
    return from_dict(data)


@pytest.mark.parametrize("method", ["exact", "circuit-homogeneous", "lcu", "autonomise"])
def test_report_schema_is_stable(method):
    rep = solve(cfg(method))
    assert set(REPORT_FIELDS) <= set(rep)
    assert set(rep["errors"]) >= {"rel_l2", "rel_l2_projected", "recovery_variance"}
    assert set(rep["probabilities"]) >= {"formula", "measured", "stages"}
    for c in rep["certificates"]:
        assert {"lhs", "rhs", "margin", "pass"} <= set(c)


def test_exact_reproduces_reference():
    rep = solve(cfg("exact"))
    assert rep["errors"]["rk4_vs_reference"] <= 1e-8


def test_lcu_without_source_equals_homogeneous_circuit():
    a = solve(cfg("lcu", time={"r": 40}))
    b = solve(cfg("circuit-homogeneous", time={"r": 40}))
    assert np.allclose(a["solution"]["u"], b["solution"]["u"], atol=1e-10)
    assert a["queries"]["measured"]["O_H"] == 40


def test_autonomise_without_source_tracks_homogeneous_circuit():
    a = solve(cfg("autonomise", time={"r": 40}))
    b = solve(cfg("circuit-homogeneous", time={"r": 40}))
    C, T, tau = b["parameters"]["C_heat"], 0.05, 0.05 / 40
    gap = np.linalg.norm(a["solution"]["u"] - b["solution"]["u"])
    assert gap <= C * T * tau
    assert "HAM" not in a["queries"]["measured"]


def test_lcu_with_source_certificates():
    rep = solve(cfg("lcu", problem={"boundary": {"0-": "sin(1, 1)"}}))
    assert all(c["pass"] for c in rep["certificates"])
    probs = rep["probabilities"]["stages"]
    assert sum(probs.values()) == pytest.approx(1.0, abs=1e-10)


def test_gate_count_fit_and_empty_grid():
    rows = gate_count_table([1], [2, 3], [2, 3])
    fit = fit_gate_counts(rows)
    assert fit["c2"] >= fit["c2_min"] > 0
    assert fit_gate_counts([]) == {"c1": None, "r2": None, "c2": None}
    rep = run_gate_count(cfg("exact", grid={"d": [1], "n_x": [2, 3], "n_p": [2, 3]}))
    assert len(rep["table"]) == 4


def test_sweep_zero_source_meters_and_determinism():
    c = cfg("lcu")
    a, b = run_sweep(c), run_sweep(c)
    row = a["table"][0]
    assert row["lcu_inhomogeneous_O_H"] == 0
    assert row["auto_HAM_measured"] == 0
    keys = ["lcu_O_H_measured", "auto_O_H_measured", "N_t_lcu", "N_t_auto"]
    assert [row[k] for k in keys] == [b["table"][0][k] for k in keys]


def test_sweep_flags_regime():
    rep = run_sweep(cfg("lcu", problem={"boundary": {"0-": "const(1)"}},
                        sweep={"measure": False, "T": [0.05, 0.1]}))
    assert all(isinstance(r["auto_smaller"], bool) for r in rep["table"])
    assert rep["table"][0]["lcu_O_H_measured"] is None


def test_verify_circuits_reports_all_checks():
    rep = run_verify_circuits(cfg("exact"))
    names = [c["name"] for c in rep["certificates"]]
    assert sum("select" in n for n in names) == 3
    assert sum("tau^2" in n for n in names) == 5


def write(tmp_path, text):
    p = tmp_path / "run.toml"
    p.write_text(text)
    return p


def test_cli_writes_json_and_exit_code(tmp_path, capsys):
    conf = write(tmp_path, 'method = "exact"\n[problem]\nn_x = 2\n[schrodingerise]\nn_p = 5\n')
    out = tmp_path / "out"
    assert main(["solve", "--config", str(conf), "--out", str(out)]) == 0
    rep = json.loads((out / "report.json").read_text())
    assert rep["schema_version"] == 1 and rep["command"] == "solve"
    assert rep["errors"]["recovery_variance"] is not None
    assert "PASS" in capsys.readouterr().out


def test_cli_failing_certificate_gives_exit_one(tmp_path):
    conf = write(tmp_path, 'method = "circuit-homogeneous"\n[problem]\nn_x = 2\n'
                           '[schrodingerise]\nn_p = 3\n[verify]\ntolerance = 1e-6\n')
    assert main(["solve", "--config", str(conf), "--out", str(tmp_path / "o")]) == 1


def test_cli_gate_count_csv(tmp_path):
    conf = write(tmp_path, '[grid]\nd = [1]\nn_x = [2]\nn_p = [2, 3]\n')
    assert main(["gate-count", "--config", str(conf), "--out", str(tmp_path)]) == 0
    lines = (tmp_path / "table.csv").read_text().splitlines()
    assert lines[0].startswith("d,n_x,n_p,single_qubit") and len(lines) == 3


def test_cli_config_error(tmp_path, capsys):
    conf = write(tmp_path, '[problem]\nn_x = 0\n')
    assert main(["solve", "--config", str(conf)]) == 2
    assert "problem.n_x" in capsys.readouterr().err


def test_cli_seed_and_threads_override(tmp_path):
    conf = write(tmp_path, 'method = "exact"\n[problem]\nn_x = 1\n[schrodingerise]\nn_p = 4\n')
    main(["solve", "--config", str(conf), "--out", str(tmp_path), "--seed", "7", "--threads", "2"])
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["config"]["seed"] == 7 and rep["config"]["threads"] == 2
