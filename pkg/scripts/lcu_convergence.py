"""Duhamel quadrature error against the fine reference as K doubles.

    python scripts/lcu_convergence.py --n-x 4 --n-p 6 --out lcu_convergence.csv
"""
import argparse
import csv

import numpy as np

from heatschrod.discretize import BoundaryCondition, HeatProblem, build_system
from heatschrod.lcu import duhamel_reference, quadrature_exact_path
from heatschrod.numerics import loglog_slope
from heatschrod.schrodingerise import make_pgrid, schrodingerise


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-x", type=int, default=4)
    ap.add_argument("--n-p", type=int, default=6)
    ap.add_argument("--R", type=float, default=3.0)
    ap.add_argument("--T", type=float, default=0.05)
    ap.add_argument("--signal", default="sin(1, 1)")
    ap.add_argument("--k-min", type=int, default=6)
    ap.add_argument("--k-max", type=int, default=14)
    ap.add_argument("--out", default="lcu_convergence.csv")
    a = ap.parse_args()
    pb = HeatProblem(d=1, n_x=a.n_x, bc=BoundaryCondition("dirichlet", {(0, 0): a.signal}))
    ss = schrodingerise(build_system(pb), make_pgrid(a.R, a.n_p, warn=False), pb.a)
    ref = duhamel_reference(ss, a.T)
    Ks = [2**k for k in range(a.k_min, a.k_max + 1)]
    errs = [float(np.linalg.norm(quadrature_exact_path(ss, a.T, K) - ref)) for K in Ks]
    with open(a.out, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["K", "error"])
        w.writerows(zip(Ks, errs))
    for K, e in zip(Ks, errs):
        print(f"K = {K:>6}  error = {e:.3e}")
    print(f"slope {loglog_slope(Ks, errs):.4f}")


if __name__ == "__main__":
    main()
