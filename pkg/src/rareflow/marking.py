"""Two renewal processes marking each other's renewal points.

A point of the primary process H is *marked* when the half-open interval
back to its predecessor contains at least one point of the secondary
process Z.  The marked H times and the Z times that trigger them alternate
around the conventional origin entry:

    0 < Z-trigger(1) <= H-marked(1) <= Z-trigger(2) <= H-marked(2) <= ...

where Z-trigger(n) is the first Z point strictly after H-marked(n-1).
(Extracting Z-marked points interval-by-interval, mirroring the H rule,
does NOT produce this alternation: with H points {3, 6} and Z points
{1, 2, 4} it yields a first Z-marked time of 4, after the first H-marked
time 3.  The alternating extraction is the one under which the first gap
is distributed exactly like the first Z inter-arrival.)

The marked subflow of H is exactly the thinned subflow generated by the
stride process  stride(site) = min{j >= 1 : (site+j)-th H point marked},
which ties this model to the recursion in :mod:`rareflow.raring`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, sample, spec_mean
from .raring import InsufficientRealization, StrideRealization, StrideSource, _CachedRealization
from .renewal import RenewalPath, extend_path, overshoot, sample_path

__all__ = [
    "MarkingRecord",
    "MarkovIncrements",
    "MCEstimate",
    "mark",
    "next_mark_stride",
    "markov_increments",
    "simulate_marking",
    "marked_h_times",
    "MarkingStrideSource",
    "RecordStrideSource",
    "stride_cdf_by_overshoot",
    "poisson_marking_limit",
]


@dataclass(frozen=True)
class MarkingRecord:
    """Marking of two renewal paths over a common horizon.

    ``marked[i]`` (i >= 1) says whether the i-th H point is marked;
    ``h_marked_times`` starts with the conventional 0 entry, so its n-th
    element is the time of the n-th marked H point.  ``z_trigger_times``
    is the alternating ladder of first-Z-after entries described in the
    module docstring; both ladders are truncated to the horizon.
    """

    h_path: RenewalPath
    z_path: RenewalPath
    marked: np.ndarray = field(repr=False)
    marked_indices: np.ndarray = field(repr=False)
    h_marked_times: np.ndarray = field(repr=False)
    z_trigger_times: np.ndarray = field(repr=False)
    horizon: float = 0.0

    @property
    def n_h_marks(self) -> int:
        return self.h_marked_times.size - 1

    def to_csv(self, path) -> None:
        trigger = set(float(t) for t in self.z_trigger_times)
        zi = int(np.searchsorted(self.z_path.tau, self.horizon, side="right")) - 1
        with open(path, "w") as fh:
            fh.write("kind,index,time,marked\n")
            for i in range(1, self.marked.size):
                fh.write(f"H,{i},{self.h_path.tau[i]!r},{int(self.marked[i])}\n")
            for i in range(1, zi + 1):
                t = float(self.z_path.tau[i])
                fh.write(f"Z,{i},{t!r},{int(t in trigger)}\n")


def _marked_flags(points: np.ndarray, others: np.ndarray, horizon: float) -> np.ndarray:
    """flags[i] for i = 1..I: does (points[i-1], points[i]] contain one of
    ``others``?  ``points`` includes the leading 0; only points within the
    horizon are classified."""
    count = int(np.searchsorted(points, horizon, side="right")) - 1
    upto = np.searchsorted(others, points[: count + 1], side="right")
    flags = np.zeros(count + 1, dtype=bool)
    flags[1:] = np.diff(upto) > 0
    return flags


def mark(h_path: RenewalPath, z_path: RenewalPath) -> MarkingRecord:
    """Classify marked H points and extract the alternating Z triggers.

    The two paths must share the same horizon.  The origin entry of the
    marked ladder is conventional, never itself a marked point.
    """
    if h_path.horizon != z_path.horizon:
        raise ValueError("paths must cover the same horizon")
    horizon = h_path.horizon
    z_pts = z_path.tau[1:]

    h_flags = _marked_flags(h_path.tau, z_pts, horizon)
    h_idx = np.flatnonzero(h_flags)
    h_times = np.concatenate([[0.0], h_path.tau[h_idx]])

    # first Z point strictly after each marked-ladder entry (incl. the 0)
    pos = np.searchsorted(z_pts, h_times, side="right")
    keep = pos < z_pts.size
    z_times = z_pts[pos[keep]]
    z_times = z_times[z_times <= horizon]

    k = min(z_times.size, h_times.size - 1)
    if z_times.size and not z_times[0] > 0:
        raise ValueError("alternation violated: first Z trigger not positive")
    if np.any(z_times[:k] > h_times[1 : k + 1]) or np.any(h_times[:k] >= z_times[:k]):
        raise ValueError("alternation of marked times violated")
    return MarkingRecord(h_path, z_path, h_flags, h_idx, h_times, z_times, horizon)


def next_mark_stride(rec: MarkingRecord, site: int) -> int:
    """min{j >= 1 : the (site+j)-th H point is marked}."""
    if site < 0:
        raise ValueError("site must be nonnegative")
    pos = int(np.searchsorted(rec.marked_indices, site, side="right"))
    if pos >= rec.marked_indices.size:
        raise InsufficientRealization(
            f"no marked H point beyond site {site} within horizon {rec.horizon}"
        )
    return int(rec.marked_indices[pos]) - site


@dataclass(frozen=True)
class MarkovIncrements:
    """Alternating gaps between the marked-time ladders: for each complete
    pair, v[n] = Z-trigger(n) - H-marked(n-1) > 0 and
    u[n] = H-marked(n) - Z-trigger(n) >= 0."""

    v: np.ndarray
    u: np.ndarray

    def __post_init__(self) -> None:
        if self.v.size != self.u.size or self.v.size == 0:
            raise ValueError("v and u must be nonempty and aligned")
        if np.any(self.v <= 0) or np.any(self.u < 0):
            raise ValueError("increments violate v > 0, u >= 0")


def markov_increments(rec: MarkingRecord) -> MarkovIncrements:
    k = min(rec.z_trigger_times.size, rec.h_marked_times.size - 1)
    if k < 1:
        raise InsufficientRealization("no complete marked pair within the horizon")
    v = rec.z_trigger_times[:k] - rec.h_marked_times[:k]
    u = rec.h_marked_times[1 : k + 1] - rec.z_trigger_times[:k]
    return MarkovIncrements(v, u)


def simulate_marking(
    h_spec: DistributionSpec,
    z_spec: DistributionSpec,
    rng: np.random.Generator,
    min_marks: int = 1,
    horizon0: float | None = None,
) -> MarkingRecord:
    """Fresh path pair marked over an adaptive horizon.

    The horizon doubles (extending the same realization, which keeps the
    law exact) until at least ``min_marks`` H points are marked.
    """
    if horizon0 is None:
        horizon0 = (min_marks + 4.0) * spec_mean(z_spec) + 8.0 * spec_mean(h_spec)
    h_path = sample_path(h_spec, horizon0, rng)
    z_path = sample_path(z_spec, horizon0, rng)
    while True:
        rec = mark(h_path, z_path)
        if rec.n_h_marks >= min_marks:
            return rec
        new_horizon = 2.0 * h_path.horizon
        h_path = extend_path(h_path, new_horizon, rng)
        z_path = extend_path(z_path, new_horizon, rng)


def marked_h_times(
    h_spec: DistributionSpec,
    z_spec: DistributionSpec,
    k: int,
    rng: np.random.Generator,
    horizon0: float | None = None,
) -> np.ndarray:
    """Times of the first k marked H points."""
    rec = simulate_marking(h_spec, z_spec, rng, min_marks=k, horizon0=horizon0)
    return np.asarray(rec.h_marked_times[1 : k + 1])


class _MarkingRealization(StrideRealization):
    def __init__(self, source: "MarkingStrideSource", rng: np.random.Generator):
        self._rng = rng
        self._rec = simulate_marking(source.h_spec, source.z_spec, rng, 1, source.horizon0)
        self._cache: dict[int, int] = {}

    def stride(self, site: int) -> int:
        got = self._cache.get(site)
        if got is not None:
            return got
        while True:
            try:
                value = next_mark_stride(self._rec, site)
                break
            except InsufficientRealization:
                new_horizon = 2.0 * self._rec.horizon
                h = extend_path(self._rec.h_path, new_horizon, self._rng)
                z = extend_path(self._rec.z_path, new_horizon, self._rng)
                self._rec = mark(h, z)
        self._cache[site] = value
        return value


class MarkingStrideSource(StrideSource):
    """Stride process generated by one renewal process marking another:
    each realization simulates a fresh path pair and serves stride queries
    from its marking record, growing the horizon on demand."""

    def __init__(
        self,
        h_spec: DistributionSpec,
        z_spec: DistributionSpec,
        horizon0: float | None = None,
    ):
        self.h_spec = h_spec
        self.z_spec = z_spec
        self.horizon0 = horizon0

    def realization(self, rng: np.random.Generator) -> StrideRealization:
        return _MarkingRealization(self, rng)

    @property
    def descriptor(self) -> str:
        return f"marking[H={self.h_spec!r}, Z={self.z_spec!r}]"


class RecordStrideSource(StrideSource):
    """Replays the strides of one fixed marking record (ignores the rng);
    used to check that the marked subflow and the kept-index recursion
    produce identical index sets."""

    def __init__(self, rec: MarkingRecord):
        self.rec = rec

    def realization(self, rng: np.random.Generator) -> StrideRealization:
        return _CachedRealization(lambda site: next_mark_stride(self.rec, site))

    @property
    def descriptor(self) -> str:
        return "record-replay"


@dataclass(frozen=True)
class MCEstimate:
    value: float
    stderr: float
    n_samples: int


def stride_cdf_by_overshoot(
    h_spec: DistributionSpec,
    z_spec: DistributionSpec,
    site: int,
    m: int,
    n_samples: int,
    rng: np.random.Generator,
) -> MCEstimate:
    """P(stride(site) <= m) estimated through the overshoot identity:

    the stride from the ``site``-th H point stays within m exactly when
    the residual Z-life there is shorter than the next m H inter-arrivals,
    so the probability equals
    P(Z-overshoot at tau_site < eta_{site+1} + ... + eta_{site+m}).
    Fresh paths per replication.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    tiny = 1e-9 * spec_mean(z_spec)
    hits = 0
    for child in rng.spawn(n_samples):
        eta = np.asarray(sample(h_spec, child, size=site + m), dtype=float)
        tau_site = float(eta[:site].sum())
        block = float(eta[site:].sum())
        z_path = sample_path(z_spec, tau_site + tiny, child)
        gamma = overshoot(z_path, tau_site, child)
        hits += int(gamma < block)
    p_hat = hits / n_samples
    se = math.sqrt(p_hat * (1.0 - p_hat) / n_samples)
    return MCEstimate(p_hat, se, n_samples)


def poisson_marking_limit(
    lam: float,
    h_spec: DistributionSpec,
    x: float,
    n_samples: int,
    rng: np.random.Generator,
    chunk: int = 512,
) -> MCEstimate:
    """Large-rarefaction stride law under memoryless marking.

    When the marking process is Poisson(lam), the chance that the stride
    from any site stays within floor(x/lam) steps equals
    E[1 - exp(-lam * tau_m)] with m = floor(x/lam) and tau_m the sum of m
    H inter-arrivals; this estimates that expectation by Monte Carlo.
    As lam -> 0 it tends to 1 - exp(-mean(eta) * x).
    """
    if lam <= 0:
        raise ValueError("lam must be positive")
    if x < 0:
        raise ValueError("x must be nonnegative")
    m = int(math.floor(x / lam + 1e-9))
    if m == 0:
        return MCEstimate(0.0, 0.0, n_samples)
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_samples:
        take = min(chunk, n_samples - done)
        draws = np.asarray(sample(h_spec, rng, size=(take, m)), dtype=float)
        vals = -np.expm1(-lam * draws.sum(axis=1))
        total += float(vals.sum())
        total_sq += float((vals**2).sum())
        done += take
    mean = total / n_samples
    var = max(total_sq / n_samples - mean**2, 0.0)
    return MCEstimate(mean, math.sqrt(var / n_samples), n_samples)
