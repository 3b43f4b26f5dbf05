"""Escape probabilities for stochastic systems with Brownian and symmetric alpha-stable noise.

Three routes compute the same quantity and check each other: Monte Carlo
first-exit simulation (:mod:`.montecarlo`), deterministic boundary-value
solvers (:mod:`.solver`) and analytic or quadrature oracles (:mod:`.oracles`).
"""
from .montecarlo import (AllCensoredError, CensoringWarning, EscapeEstimate, estimate_escape,
                         estimate_profile, random_walk_escape, simulate_paths)
from .oracles import (OracleError, OracleResult, oracle_bm_annulus, oracle_bm_interval,
                      oracle_drift_1d, oracle_stable_interval, oracle_stable_interval_direct)
from .process import (Annulus, BoundarySubset, Brownian, BrownianPlusStable, Constant,
                      ExteriorSet, Interval, Linear, Outcome, ProcessSpec, Stable, Table,
                      simulate_until_exit)
from .rng import RandomStream
from .solver import (ExteriorData, GridSolution, SolverError, solve_elliptic_1d,
                     solve_fractional_1d, solve_laplace_annulus)
from .stable import (StableDensityError, stable_cdf, stable_coeffs, stable_density,
                     sample_isotropic_stable, sample_standard_stable)

__version__ = "0.1.0"
