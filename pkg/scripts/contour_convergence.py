"""Unit-identity error and eigenmode error versus contour resolution.

Usage: python scripts/contour_convergence.py [--alpha 0.5] [--n 127]
"""
import argparse
import math

import numpy as np

from fracweak.contour import ContourConfig, unit_check
from fracweak.elliptic import assemble_operator, eigensolve
from fracweak.errors import ConfigError
from fracweak.grids import TimeGrid
from fracweak.kernels import VariableOrder
from fracweak.solvers import duhamel_solve
from fracweak.verify import mittag_leffler


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.5)
    ap.add_argument("--n", type=int, default=127)
    args = ap.parse_args()

    prob = assemble_operator(1, args.n)
    basis = eigensolve(prob, 1)
    lam, phi = basis.eigenvalues[0], basis.vectors[:, 0]
    times = np.logspace(-2, 1, 20)
    grid = TimeGrid(np.concatenate([[0.0], times]))
    kernel = VariableOrder.constant(args.alpha, args.n)
    ref = np.array([mittag_leffler(args.alpha, 1.0, -lam * t**args.alpha) for t in times])

    print(f"{'panel nodes':>11} {'tol':>8} {'nodes':>6} {'unit err':>10} {'mode err':>10}")
    for npp in (4, 6, 8, 12, 16):
        for tol in (1e-8, 1e-14):
            cfg = ContourConfig(tol=tol, window_nodes_per_panel=npp)
            spec = cfg.for_window(grid.steps.min(), grid.T)
            unit = unit_check(spec, times)
            try:
                traj = duhamel_solve(prob, kernel, cfg, phi, None, grid)
            except ConfigError:  # the unit gate rejects coarse contours
                print(f"{npp:>11} {tol:>8.0e} {spec.size:>6} {unit:>10.2e}   rejected")
                continue
            amp = traj.values[1:] @ phi / (phi @ phi)
            err = float(np.max(np.abs(amp - ref) / ref))
            print(f"{npp:>11} {tol:>8.0e} {spec.size:>6} {unit:>10.2e} {err:>10.2e}")

    print("\ntheta sweep at default resolution")
    for frac in (0.55, 0.6, 0.75, 0.9, 0.95):
        cfg = ContourConfig(theta=frac * math.pi)
        nodes = cfg.for_window(grid.steps.min(), grid.T).size
        traj = duhamel_solve(prob, kernel, cfg, phi, None, grid)
        amp = traj.values[1:] @ phi / (phi @ phi)
        print(f"theta = {frac:.2f} pi, {nodes:4d} nodes: max relative error {np.max(np.abs(amp - ref) / ref):.2e}")


if __name__ == "__main__":
    main()
