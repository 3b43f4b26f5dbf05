import math
import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from levy_escape.montecarlo import (AllCensoredError, CensoringWarning, EscapeEstimate,
                                    estimate_escape, estimate_profile, random_walk_escape,
                                    resolve_workers, simulate_paths)
from levy_escape.process import (Annulus, BoundarySubset, Constant, ExteriorSet, Interval, Linear,
                                 Outcome, ProcessSpec, Stable)

D = Interval(-2, 2)
RIGHT = BoundarySubset("right")


def test_estimate_fields():
    e = EscapeEstimate.from_counts(30, 110, 10)
    assert e.p_hat == 0.3
    assert e.std_err == pytest.approx(math.sqrt(0.3 * 0.7 / 100))
    assert e.ci95 == pytest.approx((0.3 - 1.96 * e.std_err, 0.3 + 1.96 * e.std_err))
    assert EscapeEstimate.from_counts(100, 100, 0).ci95 == (1.0, 1.0)
    with pytest.raises(AllCensoredError):
        EscapeEstimate.from_counts(0, 5, 5)


def test_brownian_three_quarters():
    e = estimate_escape(1.0, ProcessSpec(), D, RIGHT, 100_000, 1e-3, seed=11)
    assert abs(e.p_hat - 0.75) < 0.01
    assert e.n_censored == 0 and e.n_paths == 100_000


@pytest.mark.parametrize("alpha", [0.5, 1.0, 1.5])
def test_stable_symmetric_midpoint(alpha):
    spec = ProcessSpec(noise=Stable(alpha), diffusion=Constant(0.0))
    e = estimate_escape(0.0, spec, D, ExteriorSet.right_of(2), 20_000, 1e-3, seed=12)
    assert abs(e.p_hat - 0.5) < 3 * e.std_err


def test_odd_drift_midpoint():
    e = estimate_escape(0.0, ProcessSpec(drift=Linear(1.0)), D, RIGHT, 2_000, 1e-3, seed=13)
    assert abs(e.p_hat - 0.5) < 3 * e.std_err


def test_censoring_reported():
    spec = ProcessSpec(diffusion=Constant(0.0))
    with pytest.raises(AllCensoredError):
        estimate_escape(0.0, spec, D, RIGHT, 10, 0.1, max_time=1.0)
    # paths from near the edge exit; some from the middle do not within the horizon
    with pytest.warns(CensoringWarning):
        e = estimate_escape(1.9, ProcessSpec(), D, RIGHT, 2000, 1e-2, max_time=0.05, seed=14)
    assert 0 < e.n_censored < 2000
    batch = simulate_paths(1.9, ProcessSpec(), D, RIGHT, 2000, 1e-2, max_time=0.05, seed=14)
    n_t = np.count_nonzero(batch.outcomes == Outcome.TARGET)
    assert e.p_hat == n_t / (2000 - e.n_censored)


def test_profile_monotone_1d():
    prof = estimate_profile([-1.99, 0.0, 1.99], ProcessSpec(), D, RIGHT, 4000, 1e-3, seed=15)
    p = [e.p_hat for _, e in prof]
    assert p[0] < p[1] < p[2]


def test_profile_monotone_annulus():
    xs = [[2.2, 0.0], [3.0, 0.0], [3.8, 0.0]]
    prof = estimate_profile(xs, ProcessSpec(dim=2), Annulus(2, 4), BoundarySubset("inner"),
                            3000, 1e-3, seed=16)
    p = [e.p_hat for _, e in prof]
    assert p[0] > p[1] > p[2]


def test_profile_point_matches_single_estimate():
    prof = estimate_profile([0.3, -0.4], ProcessSpec(), D, RIGHT, 500, 1e-3, seed=17)
    single = estimate_escape(-0.4, ProcessSpec(), D, RIGHT, 500, 1e-3, seed=17, x_index=1)
    assert prof[1][1] == single


def test_profile_rejects_outside_point():
    with pytest.raises(ValueError):
        estimate_profile([0.0, 2.5], ProcessSpec(), D, RIGHT, 10, 1e-3)


@pytest.mark.parametrize("alpha", [0.5, 1.5])
def test_complement_exact(alpha):
    spec = ProcessSpec(noise=Stable(alpha), diffusion=Constant(0.0))
    u = estimate_escape(0.5, spec, D, ExteriorSet.right_of(2), 5000, 1e-3, seed=18)
    v = estimate_escape(0.5, spec, D, ExteriorSet.left_of(-2), 5000, 1e-3, seed=18)
    assert u.n_target + v.n_target == u.n_paths - u.n_censored
    assert abs(u.p_hat + v.p_hat - 1) <= 2.3e-16


@settings(max_examples=15)
@given(st.floats(1.0, 5.0), st.floats(-1.5, 1.5))
def test_enlarged_target_never_decreases(extra, x0):
    spec = ProcessSpec(noise=Stable(0.8), diffusion=Constant(0.0))
    small = ExteriorSet((2.0, 2.0 + extra))
    big = ExteriorSet((2.0, math.inf))
    both = ExteriorSet((-math.inf, -2.0 - extra), (2.0, math.inf))
    p = [estimate_escape(x0, spec, D, t, 300, 1e-2, seed=19).p_hat for t in (small, big, both)]
    assert p[0] <= p[1] <= p[2]


def test_thread_count_bit_identical(monkeypatch):
    spec = ProcessSpec(noise=Stable(1.5), drift=Linear(0.5))
    args = (0.2, spec, D, ExteriorSet.right_of(2), 9000, 1e-3)
    ref = simulate_paths(*args, seed=20, workers=1)
    for w in (2, 3, 8):
        b = simulate_paths(*args, seed=20, workers=w)
        assert np.array_equal(ref.steps, b.steps)
        assert np.array_equal(ref.positions, b.positions)
        assert np.array_equal(ref.outcomes, b.outcomes)
    monkeypatch.setenv("LEVY_ESCAPE_THREADS", "1")
    assert resolve_workers(8) == 1
    assert np.array_equal(ref.positions, simulate_paths(*args, seed=20, workers=8).positions)


def test_chunking_does_not_change_prefix():
    a = simulate_paths(0.0, ProcessSpec(), D, RIGHT, 100, 1e-3, seed=21)
    b = simulate_paths(0.0, ProcessSpec(), D, RIGHT, 5000, 1e-3, seed=21)
    assert np.array_equal(a.positions, b.positions[:100])


def test_seeds_differ():
    a = simulate_paths(0.0, ProcessSpec(), D, RIGHT, 50, 1e-3, seed=1)
    b = simulate_paths(0.0, ProcessSpec(), D, RIGHT, 50, 1e-3, seed=2)
    assert not np.array_equal(a.steps, b.steps)


@pytest.mark.slow
def test_ci_calibration():
    cover = 0
    for rep in range(200):
        e = estimate_escape(1.0, ProcessSpec(), D, RIGHT, 1000, 1e-3, seed=1000 + rep)
        cover += e.ci95[0] <= 0.75 <= e.ci95[1]
    assert 180 <= cover <= 198


def test_random_walk_gamblers_ruin():
    e = random_walk_escape(-2, 2, 1, 0.01, 20_000, seed=3)
    assert abs(e.p_hat - 0.75) < 3 * e.std_err
    mid = random_walk_escape(-1, 1, 0, 0.5, 10_000, seed=4)
    assert abs(mid.p_hat - 0.5) < 3 * mid.std_err
    # one step either way from the midpoint of a three-point lattice decides it
    assert random_walk_escape(-1, 1, 0, 1.0, 10_000, seed=4).p_hat == pytest.approx(0.5, abs=0.03)


def test_random_walk_lattice_rules():
    with pytest.raises(ValueError):
        random_walk_escape(-2, 2, 3, 0.1, 10)
    with pytest.warns(UserWarning, match="snapped"):
        random_walk_escape(-2, 2, 1.013, 0.1, 10)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        random_walk_escape(-2, 2, 1.0, 0.01, 10)


def test_random_walk_deterministic():
    a = random_walk_escape(-2, 2, 0.5, 0.05, 3000, seed=9, workers=1)
    b = random_walk_escape(-2, 2, 0.5, 0.05, 3000, seed=9, workers=4)
    assert a == b
