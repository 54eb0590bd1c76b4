"""Autonomised evolution: s-grid convergence and segment error order.

    python scripts/autonomise_convergence.py --n-x 2 --n-p 4 --out autonomise.csv
"""
import argparse
import csv

import numpy as np

from heatschrod.autonomise import (AutoSegment, HbarBlocks, autonomise, heat_blocks,
                                   mollifier_G, nonautonomous_reference)
from heatschrod.discretize import BoundaryCondition, HeatProblem
from heatschrod.numerics import loglog_slope


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-x", type=int, default=2)
    ap.add_argument("--n-p", type=int, default=4)
    ap.add_argument("--R", type=float, default=3.0)
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--signal", default="sin(1, 1)")
    ap.add_argument("--n-s", type=int, nargs="+", default=[2, 3, 4, 5])
    ap.add_argument("--taus", type=float, nargs="+", default=[4e-4, 2e-4, 1e-4])
    ap.add_argument("--out", default="autonomise_convergence.csv")
    a = ap.parse_args()
    pb = HeatProblem(d=1, n_x=a.n_x, bc=BoundaryCondition("dirichlet", {(0, 0): a.signal}))
    rows = []
    for n_s in a.n_s:
        au = autonomise(pb, a.R, a.n_p, a.T, n_s, warn=False)
        hb = HbarBlocks(au)
        z = hb.evolve(au.initial_state(normalise=False), a.T).reshape(au.sgrid.N, -1)[0]
        ref = nonautonomous_reference(au, a.T) * mollifier_G(0.0)
        err = float(np.linalg.norm(z - ref) / np.linalg.norm(ref))
        rows.append(("s_grid", 2**n_s, err))
        print(f"N_s = {2**n_s:>3}  rel error vs RK4 = {err:.3e}")
    C = au.C_auto(1, a.n_x)
    seg = [hb.segment_error(AutoSegment(au, t, heat_blocks(au, t))) for t in a.taus]
    for t, e in zip(a.taus, seg):
        rows.append(("segment", t, e))
        print(f"tau = {t:.2e}  segment error = {e:.3e}  C_auto tau^2 = {C * t * t:.3e}")
    print(f"segment slope {loglog_slope(a.taus, seg):.4f}")
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["study", "x", "error"])
        w.writerows(rows)


if __name__ == "__main__":
    main()
