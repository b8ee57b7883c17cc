import math

import numpy as np
import pytest

from rareflow import distributions as dist
from rareflow.marking import (
    MarkingStrideSource,
    RecordStrideSource,
    mark,
    marked_h_times,
    markov_increments,
    next_mark_stride,
    poisson_marking_limit,
    simulate_marking,
    stride_cdf_by_overshoot,
)
from rareflow.raring import InsufficientRealization, ThresholdEvent, estimate_mixing, kept_indices
from rareflow.renewal import RenewalPath, sample_path


def grid_paths(h_etas, z_etas, horizon):
    return (
        RenewalPath.from_interarrivals(h_etas, horizon),
        RenewalPath.from_interarrivals(z_etas, horizon),
    )


def test_dense_marking_marks_everything():
    h, z = grid_paths([1.0] * 12, [0.5] + [1.0] * 11, horizon=10.0)
    rec = mark(h, z)
    assert np.all(rec.marked[1:])
    assert np.array_equal(rec.h_marked_times, [0.0] + [float(i) for i in range(1, 11)])
    assert np.allclose(rec.z_trigger_times, np.arange(10) + 0.5)
    inc = markov_increments(rec)
    assert np.allclose(inc.v, 0.5) and np.allclose(inc.u, 0.5)


def test_single_mark():
    h, z = grid_paths([1.0] * 13, [10.5, 5.0], horizon=12.0)
    rec = mark(h, z)
    assert np.array_equal(rec.marked_indices, [11])
    assert np.array_equal(rec.h_marked_times, [0.0, 11.0])
    assert np.array_equal(rec.z_trigger_times, [10.5])
    inc = markov_increments(rec)
    assert inc.v[0] == 10.5 and inc.u[0] == 0.5


def test_mark_requires_common_horizon():
    h, _ = grid_paths([1.0] * 12, [1.0] * 12, horizon=10.0)
    z = RenewalPath.from_interarrivals([1.0] * 12, horizon=11.0)
    with pytest.raises(ValueError):
        mark(h, z)


def test_coincident_points_allowed():
    # Z point exactly on an H point: closed right end counts it, u = 0
    h, z = grid_paths([3.0, 3.0], [3.0, 5.0], horizon=3.0)
    rec = mark(h, z)
    inc = markov_increments(rec)
    assert inc.v[0] == 3.0 and inc.u[0] == 0.0


def test_marked_fraction_poisson_oracle():
    # per-interval marking probability for memoryless Z:
    # 1 - E exp(-lam * eta) = 1 - 1/(1 + lam) for exp(1) intervals
    lam = 0.1
    rng = np.random.default_rng(321)
    h = sample_path(dist.exponential(1.0), 1e4, rng)
    z = sample_path(dist.exponential(lam), 1e4, rng)
    rec = mark(h, z)
    fraction = rec.n_h_marks / (rec.marked.size - 1)
    assert abs(fraction - (1 - 1 / (1 + lam))) < 0.01


def test_alternation_on_random_pairs():
    rng = np.random.default_rng(994)
    specs = [dist.exponential(1.0), dist.uniform(0.5, 1.5), dist.exponential(0.4)]
    for child in rng.spawn(300):
        hs = specs[int(child.integers(0, len(specs)))]
        zs = specs[int(child.integers(0, len(specs)))]
        h = sample_path(hs, 60.0, child)
        z = sample_path(zs, 60.0, child)
        rec = mark(h, z)  # raises on any alternation violation
        k = min(rec.z_trigger_times.size, rec.n_h_marks)
        assert np.all(rec.z_trigger_times[:k] <= rec.h_marked_times[1 : k + 1])


def test_next_mark_stride_pattern():
    # marked flags (0, 0, 1, 0, 1) over five H points
    h, z = grid_paths([1.0] * 6, [2.5, 2.2, 10.0], horizon=5.0)
    rec = mark(h, z)
    assert np.array_equal(rec.marked_indices, [3, 5])
    assert next_mark_stride(rec, 0) == 3
    assert next_mark_stride(rec, 3) == 2
    with pytest.raises(InsufficientRealization):
        next_mark_stride(rec, 5)


def test_stride_consistency_with_flags():
    rng = np.random.default_rng(17)
    rec = simulate_marking(dist.exponential(1.0), dist.exponential(0.3), rng, min_marks=5)
    for site in (0, 1, 2, 3):
        j = next_mark_stride(rec, site)
        assert rec.marked[site + j]
        assert not np.any(rec.marked[site + 1 : site + j])


def test_subflow_identity_exact():
    # marked H indices equal the kept indices of the stride recursion
    # replayed from the same record
    rng = np.random.default_rng(2025)
    for child in rng.spawn(100):
        rec = simulate_marking(dist.exponential(1.0), dist.exponential(0.3), child, min_marks=3)
        source = RecordStrideSource(rec)
        seq = kept_indices(source, rec.marked_indices.size, child)
        assert np.array_equal(seq.indices, rec.marked_indices)
        times = rec.h_path.tau[seq.indices]
        assert np.array_equal(times, rec.h_marked_times[1:])


def test_markov_increment_mean_self_consistency():
    # two independent seeds must agree on E[V] within 2 joint stderr
    def mean_v(seed):
        rng = np.random.default_rng(seed)
        h = sample_path(dist.exponential(1.0), 1.2e5, rng)
        z = sample_path(dist.exponential(0.1), 1.2e5, rng)
        inc = markov_increments(mark(h, z))
        v = inc.v[:10_000]
        assert v.size == 10_000
        return v.mean(), v.std(ddof=1) / math.sqrt(v.size)

    m1, se1 = mean_v(101)
    m2, se2 = mean_v(202)
    assert abs(m1 - m2) <= 2 * math.hypot(se1, se2)


def test_marked_h_times_extends_until_enough():
    rng = np.random.default_rng(3)
    times = marked_h_times(dist.exponential(1.0), dist.exponential(0.05), 3, rng, horizon0=5.0)
    assert times.size == 3 and np.all(np.diff(times) > 0)


def test_stride_cdf_by_overshoot_trivial():
    rng = np.random.default_rng(0)
    dense = stride_cdf_by_overshoot(
        dist.deterministic(1.0), dist.deterministic(0.001), 0, 1, 200, rng
    )
    assert dense.value == 1.0
    sparse = stride_cdf_by_overshoot(
        dist.deterministic(1.0), dist.deterministic(10.0), 0, 5, 200, rng
    )
    assert sparse.value == 0.0


def test_overshoot_identity_matches_direct_sampling():
    # the same probability through the two independent estimators
    h_spec, z_spec = dist.exponential(1.0), dist.exponential(0.1)
    site, m, n = 0, 5, 3000
    rng = np.random.default_rng(808)
    formula = stride_cdf_by_overshoot(h_spec, z_spec, site, m, n, rng)
    source = MarkingStrideSource(h_spec, z_spec)
    hits = sum(
        source.realization(child).stride(site) <= m for child in rng.spawn(n)
    )
    direct = hits / n
    se = math.hypot(formula.stderr, math.sqrt(direct * (1 - direct) / n))
    assert abs(formula.value - direct) <= 3 * se


def test_marking_source_zero_dependence_below_lag():
    # threshold events with level below the lag are exactly independent
    source = MarkingStrideSource(dist.exponential(1.0), dist.exponential(0.1))
    family = [(ThresholdEvent(0, "le", 3), ThresholdEvent(6, "le", 5))]
    est = estimate_mixing(source, 6, family, 1500, np.random.default_rng(55))
    assert est.estimate <= 3 * est.stderr


def test_poisson_marking_limit_values():
    rng = np.random.default_rng(7)
    assert poisson_marking_limit(0.01, dist.exponential(1.0), 0.005, 100, rng).value == 0.0
    # deterministic intervals: no Monte Carlo noise at all
    det = poisson_marking_limit(0.01, dist.deterministic(1.0), 1.0, 50, rng)
    assert det.value == pytest.approx(1 - math.exp(-1.0), abs=1e-12)
    assert det.stderr == pytest.approx(0.0, abs=1e-8)


def test_poisson_marking_limit_converges_lln():
    # exact value 1 - (1 + lam)^(-floor(1/lam)) for exp(1) intervals
    rng = np.random.default_rng(12)
    for lam in (0.1, 0.01):
        est = poisson_marking_limit(lam, dist.exponential(1.0), 1.0, 20_000, rng)
        exact = 1 - (1 + lam) ** (-math.floor(1 / lam))
        assert abs(est.value - exact) <= 4 * est.stderr + 1e-9


def test_record_csv(tmp_path):
    h, z = grid_paths([1.0] * 6, [2.5, 2.2, 10.0], horizon=5.0)
    rec = mark(h, z)
    f = tmp_path / "marking.csv"
    rec.to_csv(f)
    lines = f.read_text().strip().splitlines()
    assert lines[0] == "kind,index,time,marked"
    assert any(line.startswith("H,3,") and line.endswith(",1") for line in lines)
