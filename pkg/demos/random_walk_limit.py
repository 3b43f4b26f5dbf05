"""A fair +-delta walk converges to Brownian motion as the step shrinks.

Gambler's ruin gives (x - a) / (b - a) on every lattice, so the walk
estimate should sit on 0.75 for x = 1 in (-2, 2) at every delta. What
changes is the number of steps per walk, which grows like 1/delta^2,
mirroring the diffusive time scale of the limit.
"""
import time

import numpy as np

from levy_escape import BoundarySubset, Interval, ProcessSpec, estimate_escape, random_walk_escape

print(f"{'delta':>6} {'p_hat':>8} {'+-':>7} {'seconds':>8}")
for delta in (0.5, 0.1, 0.05, 0.02, 0.01):
    t0 = time.perf_counter()
    e = random_walk_escape(-2.0, 2.0, 1.0, delta, 20_000, seed=5)
    print(f"{delta:6.2f} {e.p_hat:8.4f} {e.std_err:7.4f} {time.perf_counter() - t0:8.2f}")

bm = estimate_escape(1.0, ProcessSpec(), Interval(-2.0, 2.0), BoundarySubset("right"), 20_000, 1e-3, seed=5)
print(f"\nEuler Brownian motion at dt=1e-3: {bm.p_hat:.4f} +- {bm.std_err:.4f}")
print(f"expected {0.75}; combined difference in sigma units: "
      f"{abs(bm.p_hat - e.p_hat) / np.hypot(bm.std_err, e.std_err):.2f}")
