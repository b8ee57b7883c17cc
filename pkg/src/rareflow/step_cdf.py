"""Distribution functions discretized on a uniform grid, with Stieltjes
convolution and convolution powers.

The grid carries CDF values at ``x_j = j*h`` for ``j = 0..N`` with
``N = ceil(T/h)``.  Convolution is the direct summation

    (a * b)(x_j) = sum_{i<=j} b(x_{j-i}) * (a(x_i) - a(x_{i-1}))

which is exact for lattice atoms and has O(h) error for smooth laws; mass
convolved beyond the horizon is silently truncated, so every StepCDF
records its lost mass.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import DistributionSpec, cdf_eval

__all__ = ["StepCDF", "discretize", "convolve", "convolve_power", "stieltjes_against"]

_MONOTONE_TOL = 1e-12


@dataclass(frozen=True)
class StepCDF:
    """CDF sampled on a uniform grid; immutable after construction.

    ``values[j]`` is the CDF at ``j*h``.  Between grid points the function
    is treated as the right-continuous step through the grid values.
    """

    h: float
    horizon: float
    values: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        if self.h <= 0:
            raise ValueError("grid step h must be positive")
        if self.horizon < self.h:
            raise ValueError("horizon must be at least one grid step")
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise ValueError("values must be a 1-d array with at least two points")
        if np.any(np.diff(vals) < -_MONOTONE_TOL):
            raise ValueError("StepCDF values must be nondecreasing")
        if vals[0] < -_MONOTONE_TOL or vals[-1] > 1.0 + _MONOTONE_TOL:
            raise ValueError("StepCDF values must lie in [0, 1]")
        object.__setattr__(self, "values", np.clip(vals, 0.0, 1.0))
        self.values.setflags(write=False)

    @property
    def n_points(self) -> int:
        return self.values.size

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_points) * self.h

    @property
    def lost_mass(self) -> float:
        """Mass beyond the horizon (1 - F at the last grid point)."""
        return float(1.0 - self.values[-1])

    @classmethod
    def delta_zero(cls, h: float, horizon: float) -> "StepCDF":
        """Unit mass at the origin: the convolution identity."""
        n = int(np.ceil(horizon / h))
        return cls(h, horizon, np.ones(n + 1))

    def index_of(self, x: float) -> int:
        """Largest grid index j with j*h <= x (clipped to the grid)."""
        j = int(np.floor(x / self.h + 1e-9))
        return min(max(j, 0), self.n_points - 1)

    def eval_at(self, x):
        """Step evaluation F(floor(x/h) * h); scalar or array ``x``."""
        xa = np.asarray(x, dtype=float)
        j = np.clip(np.floor(xa / self.h + 1e-9).astype(int), 0, self.n_points - 1)
        out = self.values[j]
        return float(out) if np.ndim(x) == 0 else out

    def same_grid(self, other: "StepCDF") -> bool:
        return self.h == other.h and self.n_points == other.n_points

    def to_csv(self, path) -> None:
        data = np.column_stack([self.x, self.values])
        np.savetxt(path, data, delimiter=",", header="x,F", comments="", fmt="%.17g")


def discretize(spec: DistributionSpec, h: float, horizon: float) -> StepCDF:
    """Sample the parametric CDF on the grid (right-continuous atoms).

    An atom at ``a`` contributes to every grid point ``j*h >= a``.
    """
    if h <= 0:
        raise ValueError("grid step h must be positive")
    if horizon < h:
        raise ValueError("horizon must be at least one grid step")
    n = int(np.ceil(horizon / h))
    grid = np.arange(n + 1) * h
    return StepCDF(h, horizon, cdf_eval(spec, grid))


def stieltjes_against(curve: np.ndarray, against: StepCDF) -> np.ndarray:
    """Integrate ``curve`` against the increment measure of ``against``:

    returns ``out[j] = sum_{i<=j} curve[j-i] * dA[i]`` where
    ``dA[i] = A[i] - A[i-1]`` (``dA[0] = A[0]``).
    """
    da = np.diff(against.values, prepend=0.0)
    n = against.n_points
    if len(curve) != n:
        raise ValueError("curve length must match the grid")
    return np.convolve(da, curve)[:n]


def convolve(a: StepCDF, b: StepCDF) -> StepCDF:
    """Distribution of the sum of independent draws from ``a`` and ``b``.

    Both operands must share (h, horizon); mass pushed past the horizon is
    truncated, so the result is capped below 1 near the right edge.
    """
    if not a.same_grid(b):
        raise ValueError("convolve requires operands on the same grid")
    out = stieltjes_against(b.values, a)
    return StepCDF(a.h, a.horizon, np.clip(out, 0.0, 1.0))


def convolve_power(a: StepCDF, k: int) -> StepCDF:
    """k-fold self-convolution, computed by plain iteration so that
    ``convolve_power(a, k+1) == convolve(convolve_power(a, k), a)`` holds
    exactly (same code path).  ``k = 0`` is rejected; represent the unit
    mass at 0 with :meth:`StepCDF.delta_zero` instead.
    """
    if k < 1:
        raise ValueError("convolve_power requires k >= 1 (use delta_zero for k = 0)")
    acc = a
    for _ in range(k - 1):
        acc = convolve(acc, a)
    return acc
