"""Escape profiles for Brownian motion, an OU drift and the annulus.

Each section prints a small table of Monte Carlo, grid and exact values and
writes ``<name>.csv`` next to this script for plotting. Budgets are kept
small so the whole demo runs in about a minute; the acceptance suite uses
the full sizes.
"""
from pathlib import Path

import numpy as np

from levy_escape import (Annulus, BoundarySubset, Interval, Linear, ProcessSpec, estimate_profile,
                         oracle_bm_annulus, oracle_bm_interval, oracle_drift_1d,
                         solve_elliptic_1d, solve_laplace_annulus)

HERE = Path(__file__).parent
R = 2.0


def table(name, xs, mc, grid, exact):
    print(f"\n{name}")
    print(f"{'x':>7} {'mc':>8} {'+-':>7} {'grid':>10} {'exact':>10}")
    rows = []
    for x, (_, e), g, p in zip(xs, mc, grid, exact):
        print(f"{x:7.2f} {e.p_hat:8.4f} {e.std_err:7.4f} {g:10.6f} {p:10.6f}")
        rows.append((x, e.p_hat, e.std_err, g, p))
    np.savetxt(HERE / f"{name}.csv", rows, delimiter=",", fmt="%.17g",
               header="x,mc_p,mc_stderr,grid_p,exact_p", comments="")


# Brownian motion on (-2, 2): the escape probability through the right end is
# the straight line (x + r) / 2r, and the finite-difference solve is exact on it.
xs = np.linspace(-1.6, 1.6, 9)
mc = estimate_profile(xs, ProcessSpec(), Interval(-R, R), BoundarySubset("right"), 4000, 1e-3, seed=1)
sol = solve_elliptic_1d(0.0, 1.0, (-R, R), 0.0, 1.0, 400)
table("brownian_interval", xs, mc, sol.interpolate(xs), [oracle_bm_interval(x, R).value for x in xs])

# A restoring drift b(x) = -x keeps paths near the middle. Exits are rarer and
# slower, and the profile flattens into an S-shape around p(0) = 1/2.
spec = ProcessSpec(drift=Linear(1.0))
xs = np.linspace(-1.6, 1.6, 5)
mc = estimate_profile(xs, spec, Interval(-R, R), BoundarySubset("right"), 400, 1e-3, seed=2)
sol = solve_elliptic_1d(spec.drift, 1.0, (-R, R), 0.0, 1.0, 2000)
table("ou_interval", xs, mc, sol.interpolate(xs),
      [oracle_drift_1d(x, R, spec.drift, lambda z: 1.0).value for x in xs])

# Planar Brownian motion in the annulus 2 < |x| < 4 reaching the inner circle
# first: a logarithmic profile in the radius.
rho = np.linspace(2.2, 3.8, 5)
mc = estimate_profile([[p, 0.0] for p in rho], ProcessSpec(dim=2), Annulus(2.0, 4.0),
                      BoundarySubset("inner"), 2000, 1e-3, seed=3)
sol = solve_laplace_annulus(2.0, 4.0, 1.0, 0.0, 1000)
table("brownian_annulus", rho, mc, sol.interpolate(rho),
      [oracle_bm_annulus(p, 2.0, 4.0).value for p in rho])
