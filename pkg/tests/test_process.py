import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import stats

from levy_escape.process import (Annulus, BoundarySubset, Brownian, BrownianPlusStable, Constant,
                                 ExteriorSet, Interval, Linear, Outcome, ProcessSpec, Stable, Table,
                                 classify, simulate_until_exit, step)
from levy_escape.rng import RandomStream

D = Interval(-2, 2)
RIGHT = BoundarySubset("right")
U = ExteriorSet.right_of(2)


# -- coefficients and specs ---------------------------------------------------

def test_linear_and_table_coefficients():
    assert Linear(kappa=1.0)(1.5) == -1.5
    assert Linear(kappa=2.0, offset=1.0)(0.25) == 0.5
    t = Table([0.0, 1.0, 2.0], [1.0, 3.0, 2.0])
    x = np.linspace(-1, 3, 41)
    assert np.allclose([t(v) for v in x], np.interp(x, [0, 1, 2], [1, 3, 2]))


def test_bad_tables_rejected():
    with pytest.raises(ValueError):
        Table([0.0, 0.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        Table([0.0, 1.0], [1.0, math.nan])


def test_from_record():
    spec = ProcessSpec.from_record({"drift": {"name": "linear", "kappa": 1.0},
                                    "noise": {"kind": "stable", "alpha": 1.5}})
    assert spec.drift == Linear(1.0) and spec.noise == Stable(1.5)
    with pytest.raises(ValueError):
        ProcessSpec.from_record({"jumps": 1})
    with pytest.raises(ValueError):
        ProcessSpec.from_record({"drift": {"name": "quadratic"}})


@pytest.mark.parametrize("a", [0.0, 2.0, None])
def test_stable_noise_needs_alpha(a):
    with pytest.raises(ValueError):
        Stable(a)


def test_domains_validate():
    with pytest.raises(ValueError):
        Interval(1.0, 1.0)
    with pytest.raises(ValueError):
        Annulus(3.0, 2.0)
    with pytest.raises(ValueError):
        ExteriorSet((1.0, 3.0)).pieces(D)


def test_boundary_target_rejected_for_jumps():
    with pytest.raises(ValueError):
        simulate_until_exit(0.0, ProcessSpec(noise=Stable(1.0)), D, RIGHT, 1e-3)


# -- step ---------------------------------------------------------------------

def test_step_identity_without_noise():
    spec = ProcessSpec(diffusion=Constant(0.0))
    assert step([0.7], spec, 0.1, RandomStream(1)).tolist() == [0.7]


def test_step_drift_only():
    spec = ProcessSpec(drift=Linear(1.0), diffusion=Constant(0.0))
    assert step([0.5], spec, 0.1, RandomStream(1))[0] == pytest.approx(0.45, abs=1e-15)


def _increments(spec, dt, n, seed=21):
    rng = RandomStream(seed, 0)
    x0 = np.zeros(spec.dim)
    return np.array([step(x0, spec, dt, rng) for _ in range(n)])


def test_brownian_step_variance():
    dt, n = 1e-3, 100_000
    inc = _increments(ProcessSpec(), dt, n)[:, 0]
    assert abs(inc.var() - dt) < 5 * dt * math.sqrt(2 / n)


def test_cauchy_step_scaled():
    inc = _increments(ProcessSpec(noise=Stable(1.0), diffusion=Constant(0.0)), 0.25, 100_000)[:, 0]
    assert stats.kstest(inc, stats.cauchy(scale=0.25).cdf).statistic < 0.02


def test_stable_step_self_similar():
    inc = _increments(ProcessSpec(noise=Stable(1.5), diffusion=Constant(0.0)), 0.1, 40_000)[:, 0]
    from levy_escape.stable import ks_statistic
    assert ks_statistic(inc / 0.1 ** (1 / 1.5), 1.5) < 0.02


def test_brownian_plus_stable_independent_parts():
    # Cauchy plus Gaussian: characteristic function is the product
    dt = 0.5
    inc = _increments(ProcessSpec(noise=BrownianPlusStable(1.0)), dt, 60_000)[:, 0]
    for u in (0.5, 1.0, 2.0):
        cf = np.mean(np.cos(u * inc))
        assert cf == pytest.approx(math.exp(-dt * u * u / 2 - dt * u), abs=0.01)


def test_2d_brownian_step_covariance():
    dt = 1e-2
    inc = _increments(ProcessSpec(dim=2), dt, 50_000)
    cov = np.cov(inc.T) / dt
    assert np.allclose(cov, np.eye(2), atol=0.03)


def test_step_rejects_nonfinite_coefficient():
    spec = ProcessSpec(drift=lambda x: math.log(x))
    with pytest.raises(ValueError):
        step([-1.0], spec, 0.1, RandomStream(1))
    with pytest.raises(ValueError):
        step([0.5], ProcessSpec(), 0.0, RandomStream(1))


def test_callable_matches_compiled():
    # the Python fallback consumes the stream exactly like the kernel
    fast = ProcessSpec(drift=Linear(1.0))
    slow = ProcessSpec(drift=lambda x: -x)
    a = simulate_until_exit(0.3, fast, D, RIGHT, 1e-2, rng=RandomStream(4, 1))
    b = simulate_until_exit(0.3, slow, D, RIGHT, 1e-2, rng=RandomStream(4, 1))
    assert a.steps == b.steps and a.outcome == b.outcome
    assert a.exit_position[0] == pytest.approx(b.exit_position[0], abs=1e-12)


# -- classify -------------------------------------------------------------------

def test_classify_basic_cases():
    assert classify(3.0, D, U) is Outcome.TARGET
    assert classify(-2.5, D, U) is Outcome.NON_TARGET
    assert classify(0.0, D, U) is Outcome.INSIDE
    disk = ExteriorSet((0.0, 2.0))
    assert classify([0.0, 0.0], Annulus(2, 4), disk) is Outcome.TARGET
    assert classify([0.0, 5.0], Annulus(2, 4), disk) is Outcome.NON_TARGET
    assert classify([2.0, 2.0], Annulus(2, 4), BoundarySubset("inner")) is Outcome.INSIDE


def test_classify_boundary_nearest_component():
    assert classify(2.0003, D, RIGHT) is Outcome.TARGET
    assert classify(-2.0003, D, RIGHT) is Outcome.NON_TARGET
    assert classify([0.0, 1.99], Annulus(2, 4), BoundarySubset("inner")) is Outcome.TARGET
    assert classify([0.0, 4.01], Annulus(2, 4), BoundarySubset("inner")) is Outcome.NON_TARGET


@given(st.floats(-1e6, 1e6))
def test_classify_partition(x):
    targets = (U, ExteriorSet.left_of(-2), ExteriorSet((-5, -2), (2, 3)), RIGHT)
    for t in targets:
        c = classify(x, D, t)
        assert (c is Outcome.INSIDE) == (-2 < x < 2)
    # a target and its complement in the exterior split every exterior point
    if not -2 < x < 2:
        assert {classify(x, D, U), classify(x, D, ExteriorSet.left_of(-2))} == {Outcome.TARGET, Outcome.NON_TARGET}


# -- simulate_until_exit ----------------------------------------------------------

def test_frozen_path_censored():
    rec = simulate_until_exit(0.0, ProcessSpec(diffusion=Constant(0.0)), D, RIGHT, 0.1, max_time=5.0)
    assert rec.outcome is Outcome.CENSORED
    assert rec.steps == 50 and rec.exit_time == pytest.approx(5.0)


def test_start_outside_rejected():
    with pytest.raises(ValueError):
        simulate_until_exit(2.0, ProcessSpec(), D, RIGHT, 1e-3)
    with pytest.raises(ValueError):
        simulate_until_exit(0.0, ProcessSpec(), D, RIGHT, 1e-3, max_time=1e-4)


def test_near_boundary_start():
    hits = sum(simulate_until_exit(1.999, ProcessSpec(), D, RIGHT, 1e-6,
                                   rng=RandomStream(5, 0, j)).outcome is Outcome.TARGET
               for j in range(400))
    # closed form 0.99975; a single left exit is already unlikely
    assert hits >= 398


def test_stable_exit_by_jump():
    spec = ProcessSpec(noise=Stable(0.5), diffusion=Constant(0.0))
    graze = 0
    n = 2000
    for j in range(n):
        rec = simulate_until_exit(0.0, spec, D, U, 1e-3, rng=RandomStream(6, 0, j))
        assert rec.outcome is not Outcome.CENSORED
        graze += abs(rec.exit_position[0]) <= 2 + 1e-9
    assert graze / n < 0.01


def test_overshoot_shrinks_with_dt():
    means = []
    for dt in (1e-2, 1e-3, 1e-4):
        over = [abs(simulate_until_exit(1.5, ProcessSpec(), D, RIGHT, dt,
                                        rng=RandomStream(7, 0, j)).exit_position[0]) - 2
                for j in range(300)]
        assert min(over) >= 0
        means.append(np.mean(over))
    assert means[0] > means[1] > means[2]
    # O(sqrt(dt)) scaling within a loose factor
    assert 1.5 < means[0] / means[1] < 6


@given(st.integers(0, 2**32), st.floats(-1.9, 1.9), st.sampled_from([1e-2, 1e-3, 0.05]))
def test_exit_time_multiple_of_dt(seed, x0, dt):
    rec = simulate_until_exit(x0, ProcessSpec(), D, RIGHT, dt, rng=RandomStream(seed))
    assert rec.steps >= 1
    assert rec.exit_time == rec.steps * dt


@given(st.integers(0, 2**32))
def test_simulation_deterministic(seed):
    spec = ProcessSpec(noise=BrownianPlusStable(1.2))
    a = simulate_until_exit(0.1, spec, D, U, 1e-3, rng=RandomStream(seed))
    b = simulate_until_exit(0.1, spec, D, U, 1e-3, rng=RandomStream(seed))
    assert a.steps == b.steps and a.outcome == b.outcome
    assert np.array_equal(a.exit_position, b.exit_position)


def test_default_stream_is_path_zero():
    from levy_escape.montecarlo import simulate_paths
    rec = simulate_until_exit(0.5, ProcessSpec(), D, RIGHT, 1e-3)
    batch = simulate_paths(0.5, ProcessSpec(), D, RIGHT, 1, 1e-3, seed=1)
    assert rec.steps == batch.steps[0]
    assert rec.exit_position[0] == batch.positions[0, 0]


def test_annulus_exit():
    rec = simulate_until_exit([3.0, 0.0], ProcessSpec(dim=2), Annulus(2, 4), BoundarySubset("inner"),
                              1e-3, rng=RandomStream(8))
    r = float(np.hypot(*rec.exit_position))
    assert not 2 < r < 4
    assert rec.outcome is (Outcome.TARGET if r <= 2 else Outcome.NON_TARGET)


def test_table_drift_runs_compiled():
    spec = ProcessSpec(drift=Table([-2.0, 0.0, 2.0], [2.0, 0.0, -2.0]))
    assert spec.compiled
    ref = ProcessSpec(drift=Linear(1.0))
    a = simulate_until_exit(0.2, spec, D, RIGHT, 1e-3, rng=RandomStream(9))
    b = simulate_until_exit(0.2, ref, D, RIGHT, 1e-3, rng=RandomStream(9))
    assert a.steps == b.steps
