"""Goodness-of-fit distances: Kolmogorov-Smirnov against a grid CDF and
total variation between counting laws."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .step_cdf import StepCDF

__all__ = ["EmpiricalCDF", "KSResult", "ks_distance", "tv_distance"]


@dataclass(frozen=True)
class EmpiricalCDF:
    """Sorted sample carrier; evaluation at x is (#values <= x) / n."""

    values: np.ndarray
    n: int

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 1 or vals.size == 0:
            raise ValueError("empirical CDF requires a nonempty 1-d sample")
        if np.any(vals < 0):
            raise ValueError("samples must be nonnegative")
        if np.any(np.diff(vals) < 0):
            raise ValueError("values must be sorted nondecreasing")
        if self.n != vals.size:
            raise ValueError("n must equal the sample size")
        object.__setattr__(self, "values", vals)
        self.values.setflags(write=False)

    @classmethod
    def from_samples(cls, samples) -> "EmpiricalCDF":
        vals = np.sort(np.asarray(samples, dtype=float))
        return cls(vals, vals.size)

    def eval_at(self, x):
        out = np.searchsorted(self.values, np.asarray(x, dtype=float), side="right") / self.n
        return float(out) if np.ndim(x) == 0 else out


@dataclass(frozen=True)
class KSResult:
    """Sup-distance plus a truncation flag.

    ``n_beyond_horizon`` counts samples past the reference horizon; those
    points cannot be compared and the statistic is taken over the horizon
    only, so a nonzero count flags a truncated comparison.
    """

    statistic: float
    n_beyond_horizon: int


def ks_distance(emp: EmpiricalCDF, ref: StepCDF) -> KSResult:
    """sup_x |emp(x) - ref(x)| over grid points and sample points.

    Both functions are right-continuous steps, so the sup is attained at a
    jump point of one of them; each candidate is checked from both sides.
    """
    if emp.n == 0:
        raise ValueError("empty sample")
    horizon_x = (ref.n_points - 1) * ref.h
    inside = emp.values[emp.values <= horizon_x * (1 + 1e-12)]
    n_beyond = emp.n - inside.size

    best = 0.0
    if inside.size:
        at = np.abs(emp.eval_at(inside) - ref.eval_at(inside))
        # left limits at sample jumps: emp(v-) = (#values < v)/n, ref(v-) = F[ceil(v/h)-1]
        emp_left = np.searchsorted(emp.values, inside, side="left") / emp.n
        j_left = np.clip(np.ceil(inside / ref.h - 1e-9).astype(int) - 1, 0, ref.n_points - 1)
        before = np.abs(emp_left - ref.values[j_left])
        best = max(best, float(at.max()), float(before.max()))

    grid = ref.x
    at_grid = np.abs(emp.eval_at(grid) - ref.values)
    best = max(best, float(at_grid.max()))
    if ref.n_points > 1:
        emp_left_grid = np.searchsorted(emp.values, grid[1:], side="left") / emp.n
        before_grid = np.abs(emp_left_grid - ref.values[:-1])
        best = max(best, float(before_grid.max()))
    return KSResult(min(best, 1.0), n_beyond)


def tv_distance(p, q) -> float:
    """Total variation between two sub-probability vectors on {0, 1, ...}.

    Shorter input is zero-padded; any mass missing from a vector (its
    deficit from 1) is treated as a shared overflow category.
    """
    pa = np.asarray(p, dtype=float)
    qa = np.asarray(q, dtype=float)
    if np.any(pa < -1e-12) or np.any(qa < -1e-12):
        raise ValueError("pmf entries must be nonnegative")
    k = max(pa.size, qa.size)
    pa = np.pad(pa, (0, k - pa.size))
    qa = np.pad(qa, (0, k - qa.size))
    rest_p = max(0.0, 1.0 - pa.sum())
    rest_q = max(0.0, 1.0 - qa.sum())
    return 0.5 * (float(np.abs(pa - qa).sum()) + abs(rest_p - rest_q))
