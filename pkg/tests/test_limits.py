import math

import numpy as np
import pytest
from scipy import stats

from rareflow import distributions as dist
from rareflow.limits import (
    CountPmf,
    SolverDidNotConverge,
    kth_event_limit_cdf,
    limit_count_pmf,
    pgf_from_pmf,
    solve_count_pgf,
    solve_delayed_pgf,
)
from rareflow.step_cdf import discretize

H = 1e-3


@pytest.fixture(scope="module")
def exp_grid():
    return discretize(dist.exponential(1.0), h=H, horizon=5.0)


@pytest.fixture(scope="module")
def det_grid():
    return discretize(dist.deterministic(1.0), h=H, horizon=5.0)


@pytest.fixture(scope="module")
def uni_grid():
    return discretize(dist.uniform(0.5, 1.5), h=H, horizon=5.0)


def test_pgf_no_events_at_origin(exp_grid):
    slice_ = solve_count_pgf(exp_grid, 0.5)
    assert slice_.values[0] == 1.0


def test_pgf_degenerate_at_s_one(exp_grid, det_grid, uni_grid):
    for grid in (exp_grid, det_grid, uni_grid):
        slice_ = solve_count_pgf(grid, 1.0)
        assert np.max(np.abs(slice_.values - 1.0)) <= 10 * H


def test_pgf_matches_poisson_closed_form(exp_grid):
    # memoryless inter-arrivals: E s^{N(t)} = exp(-t (1 - s))
    for s in (0.2, 0.5, 0.8):
        slice_ = solve_count_pgf(exp_grid, s)
        want = np.exp(-slice_.h * np.arange(slice_.values.size) * (1 - s))
        assert np.max(np.abs(slice_.values - want)) <= 1e-3


@pytest.mark.parametrize("s", [0.3, 0.8, 1.0])
def test_modes_agree(exp_grid, uni_grid, det_grid, s):
    for grid in (exp_grid, uni_grid, det_grid):
        a = solve_count_pgf(grid, s, mode="iteration")
        b = solve_count_pgf(grid, s, mode="series")
        assert np.max(np.abs(a.values - b.values)) <= 1e-8


def test_iteration_cap_reports_residual(exp_grid):
    with pytest.raises(SolverDidNotConverge) as err:
        solve_count_pgf(exp_grid, 0.9, mode="iteration", max_iter=2)
    assert err.value.residual > 0


def test_delayed_pgf_trivial_and_closed_form(exp_grid):
    assert np.max(np.abs(solve_delayed_pgf(exp_grid, exp_grid, 1.0).values - 1.0)) <= 10 * H
    g = solve_delayed_pgf(exp_grid, exp_grid, 0.5)
    assert g.at_time(2.0) == pytest.approx(math.exp(-1.0), abs=1e-3)


def test_delayed_pgf_deterministic_counting(det_grid):
    g = solve_delayed_pgf(det_grid, det_grid, 0.5)
    # exactly two events by t = 2.5, so E s^N = 0.25
    assert g.at_time(2.5) == pytest.approx(0.25, abs=1e-9)


def test_delayed_pgf_literal_variant_differs(exp_grid, det_grid):
    # same-law case: both readings coincide
    a = solve_delayed_pgf(exp_grid, exp_grid, 0.5)
    b = solve_delayed_pgf(exp_grid, exp_grid, 0.5, first_increment_law="later")
    assert np.max(np.abs(a.values - b.values)) <= 1e-12
    # mixed laws: the literal reading is a different function
    a2 = solve_delayed_pgf(det_grid, exp_grid, 0.5)
    b2 = solve_delayed_pgf(det_grid, exp_grid, 0.5, first_increment_law="later")
    assert np.max(np.abs(a2.values - b2.values)) > 0.01


def test_pgf_monotone_in_time(exp_grid, uni_grid):
    for grid in (exp_grid, uni_grid):
        slice_ = solve_count_pgf(grid, 0.5)
        assert np.all(np.diff(slice_.values) <= 1e-12)


def test_count_pmf_origin(exp_grid):
    pmf = limit_count_pmf(exp_grid, exp_grid, 0.0, 5)
    assert pmf.probs[0] == 1.0 and np.all(pmf.probs[1:] == 0.0)
    assert pmf.tail_mass == 0.0


def test_count_pmf_deterministic(det_grid):
    pmf = limit_count_pmf(det_grid, det_grid, 2.5, 6)
    want = np.zeros(7)
    want[2] = 1.0
    assert np.allclose(pmf.probs, want, atol=1e-12)


def test_count_pmf_poisson_identity(exp_grid):
    t = 2.0
    pmf = limit_count_pmf(exp_grid, exp_grid, t, 25)
    want = stats.poisson.pmf(np.arange(26), t)
    assert np.max(np.abs(pmf.probs - want)) <= 10 * H
    assert not pmf.tail_flagged


def test_count_pmf_flags_heavy_tail(exp_grid):
    pmf = limit_count_pmf(exp_grid, exp_grid, 4.0, 1)
    assert pmf.tail_flagged


def test_kth_event_cdf_values(exp_grid):
    assert kth_event_limit_cdf(exp_grid, exp_grid, 1, 1.0, 0.0) == 0.0
    got = kth_event_limit_cdf(exp_grid, exp_grid, 1, 1.0, 1.0)
    assert got == pytest.approx(1 - math.exp(-1), abs=2 * H)
    with pytest.raises(ValueError):
        kth_event_limit_cdf(exp_grid, exp_grid, 1, 2.0, 4.0)


def test_kth_event_erlang_closure():
    grid = discretize(dist.exponential(1.0), h=H, horizon=12.0)
    x = np.linspace(0, 10, 501)
    got = kth_event_limit_cdf(grid, grid, 3, 1.0, x)
    assert np.max(np.abs(got - dist.erlang_cdf(3, 1.0, x))) <= 10 * H


def test_kth_event_stochastic_ordering(exp_grid):
    x = np.linspace(0, 4.5, 91)
    prev = kth_event_limit_cdf(exp_grid, exp_grid, 1, 1.0, x)
    for k in (2, 3, 4):
        cur = kth_event_limit_cdf(exp_grid, exp_grid, k, 1.0, x)
        assert np.all(cur <= prev + 1e-12)
        prev = cur


def test_pgf_from_pmf_values():
    assert pgf_from_pmf(CountPmf(0.0, np.array([1.0]), 0.0), 0.7) == 1.0
    assert pgf_from_pmf(CountPmf(0.0, np.array([0.5, 0.5]), 0.0), 0.5) == pytest.approx(0.75)
    pois = CountPmf(2.0, stats.poisson.pmf(np.arange(41), 2.0), float(stats.poisson.sf(40, 2.0)))
    assert pgf_from_pmf(pois, 0.5) == pytest.approx(math.exp(-1.0), abs=1e-6)
    with pytest.raises(ValueError):
        pgf_from_pmf(CountPmf(0.0, np.array([0.5, 0.4]), 0.1), 0.5)


def test_consistency_triangle_single_case(det_grid, uni_grid):
    s, t = 0.5, 2.0
    pmf = limit_count_pmf(det_grid, uni_grid, t, 12)
    lhs = pgf_from_pmf(pmf, s)
    rhs = solve_delayed_pgf(det_grid, uni_grid, s).at_time(t)
    assert abs(lhs - rhs) <= 10 * H + pmf.tail_mass


def test_slice_csv(tmp_path, exp_grid):
    slice_ = solve_count_pgf(exp_grid, 0.5)
    f = tmp_path / "slice.csv"
    slice_.to_csv(f)
    data = np.loadtxt(f, delimiter=",", skiprows=1)
    assert data.shape[0] == slice_.values.size
