"""Renewal-process path simulation and path queries.

A path is one realization: positive inter-arrivals, their partial sums,
and the horizon it covers.  Counting uses the strict convention
``N(t) = sup{n : tau_n < t}``; the overshoot at t is the distance to the
next renewal point strictly beyond t, so it is always positive (at an
exact renewal epoch the point itself does not count).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, sample, spec_mean

__all__ = ["RenewalPath", "sample_path", "extend_path", "count_at", "overshoot", "partial_sum"]

_MAX_EXPECTED_ARRIVALS = 1e8


@dataclass(frozen=True)
class RenewalPath:
    """One realization of a renewal process.

    ``tau[0] = 0`` and ``tau[i] = tau[i-1] + eta[i]``; the realized points
    cover the horizon (``tau[-1] >= horizon``).  ``spec`` records the law
    of the inter-arrivals past the first so the path can be extended.
    """

    eta: np.ndarray = field(repr=False)
    tau: np.ndarray = field(repr=False)
    horizon: float = 0.0
    spec: DistributionSpec | None = None

    def __post_init__(self) -> None:
        eta = np.asarray(self.eta, dtype=float)
        tau = np.asarray(self.tau, dtype=float)
        if eta.size == 0 or tau.size != eta.size + 1 or tau[0] != 0.0:
            raise ValueError("path requires tau = [0, cumsum(eta)]")
        if np.any(eta <= 0):
            raise ValueError("inter-arrivals must be strictly positive")
        if self.horizon <= 0 or tau[-1] < self.horizon:
            raise ValueError("realized points must cover the horizon")
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "tau", tau)
        self.eta.setflags(write=False)
        self.tau.setflags(write=False)

    @property
    def n_points(self) -> int:
        """Number of realized renewal points (excluding tau_0 = 0)."""
        return self.eta.size

    @classmethod
    def from_interarrivals(
        cls, eta, horizon: float | None = None, spec: DistributionSpec | None = None
    ) -> "RenewalPath":
        eta = np.asarray(eta, dtype=float)
        tau = np.concatenate([[0.0], np.cumsum(eta)])
        if horizon is None:
            horizon = float(tau[-1])
        return cls(eta, tau, horizon, spec)

    def to_csv(self, path) -> None:
        i = np.arange(1, self.n_points + 1)
        data = np.column_stack([i, self.eta, self.tau[1:]])
        np.savetxt(path, data, delimiter=",", header="i,eta,tau", comments="", fmt="%.17g")


def _draw_until(spec: DistributionSpec, target: float, rng: np.random.Generator,
                start: float = 0.0) -> np.ndarray:
    """Fresh inter-arrivals from ``start`` until the running sum reaches
    ``target``; trimmed at the first point >= target."""
    mean = spec_mean(spec)
    blocks: list[np.ndarray] = []
    total = start
    remaining = target - start
    while total < target:
        est = max(remaining, 0.0) / mean
        size = int(est * 1.1 + 6.0 * np.sqrt(est + 1.0) + 16.0)
        draw = np.asarray(sample(spec, rng, size), dtype=float)
        cum = total + np.cumsum(draw)
        hit = np.searchsorted(cum, target, side="left")
        if hit < size:
            blocks.append(draw[: hit + 1])
            total = float(cum[hit])
            break
        blocks.append(draw)
        total = float(cum[-1])
        remaining = target - total
    return np.concatenate(blocks)


def sample_path(
    spec: DistributionSpec,
    horizon: float,
    rng: np.random.Generator,
    first: DistributionSpec | None = None,
) -> RenewalPath:
    """Draw i.i.d. inter-arrivals until the partial sum reaches the horizon.

    ``first`` optionally gives the first interval a distinct law.  Paths
    whose expected length exceeds 1e8 arrivals are refused outright.
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    if horizon / spec_mean(spec) > _MAX_EXPECTED_ARRIVALS:
        raise ValueError("expected arrival count exceeds the hard cap (1e8)")
    if first is None:
        eta = _draw_until(spec, horizon, rng)
    else:
        head = float(sample(first, rng))
        if head >= horizon:
            eta = np.array([head])
        else:
            eta = np.concatenate([[head], _draw_until(spec, horizon, rng, start=head)])
    tau = np.concatenate([[0.0], np.cumsum(eta)])
    return RenewalPath(eta, tau, horizon, spec)


def extend_path(path: RenewalPath, new_horizon: float, rng: np.random.Generator) -> RenewalPath:
    """Longer path sharing this realization as its prefix (fresh draws)."""
    if path.spec is None:
        raise ValueError("cannot extend a path without its generating spec")
    if new_horizon <= path.horizon:
        return path
    if new_horizon <= path.tau[-1]:
        return RenewalPath(path.eta, path.tau, new_horizon, path.spec)
    extra = _draw_until(path.spec, new_horizon, rng, start=float(path.tau[-1]))
    eta = np.concatenate([path.eta, extra])
    tau = np.concatenate([[0.0], np.cumsum(eta)])
    return RenewalPath(eta, tau, new_horizon, path.spec)


def count_at(path: RenewalPath, t: float) -> int:
    """N(t) = sup{n : tau_n < t} (strict inequality); N(0) = 0."""
    if t < 0 or t > path.horizon:
        raise ValueError("t must lie in [0, horizon]")
    idx = int(np.searchsorted(path.tau, t, side="left"))
    return max(idx - 1, 0)


def overshoot(path: RenewalPath, t: float, rng: np.random.Generator | None = None) -> float:
    """Distance from t to the next renewal point strictly beyond t.

    If that point is not realized (possible only at the right edge) the
    path is lazily extended with fresh draws from ``rng``; without an rng
    this raises instead.
    """
    if t < 0 or t > path.horizon:
        raise ValueError("t must lie in [0, horizon]")
    idx = int(np.searchsorted(path.tau, t, side="right"))
    if idx < path.tau.size:
        return float(path.tau[idx] - t)
    if rng is None or path.spec is None:
        raise ValueError("next renewal point not realized; pass an rng to extend")
    s = float(path.tau[-1])
    while s <= t:
        s += float(sample(path.spec, rng))
    return s - t


def partial_sum(path: RenewalPath, i: int) -> float:
    """tau_i, the time of the i-th renewal (tau_0 = 0)."""
    if i < 0 or i > path.n_points:
        raise ValueError(f"index {i} outside the realized range 0..{path.n_points}")
    return float(path.tau[i])
