"""Numerical limit laws for delayed renewal counting processes.

For inter-arrival CDFs R1 (first interval) and R2 (later intervals), this
module computes, on the shared grid:

* the counting-process pgf slice  E s^{N(t)}  as a function of t for fixed
  s, both for the pure process (all intervals R2) via the fixed point

      P(t, s) = 1 - R2(t) + s * (R2-increments * P)(t, s)

  and for the delayed process via  1 - R1(t) + s * (R1-increments * P);
* the counting pmf  P(N(t) = k)  from differences of convolution powers;
* the k-th event-time limit CDF  (R1 * R2^{*(k-1)})(x * mu).

The fixed point can be solved by direct iteration or by the convolution-
power series; both must agree, which the tests verify.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .step_cdf import StepCDF, convolve, convolve_power, stieltjes_against

__all__ = [
    "PgfSlice",
    "CountPmf",
    "SolverDidNotConverge",
    "solve_count_pgf",
    "solve_delayed_pgf",
    "limit_count_pmf",
    "kth_event_limit_cdf",
    "pgf_from_pmf",
]

_VALUE_TOL = 1e-9


class SolverDidNotConverge(RuntimeError):
    def __init__(self, residual: float, iterations: int):
        super().__init__(
            f"fixed-point iteration residual {residual:.3e} after {iterations} iterations"
        )
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class PgfSlice:
    """E s^{N(t)} on the grid, for one fixed s in (0, 1].

    ``bounded`` is False only for diagnostic curves (the literal equation
    variant) that are not probability generating functions and may leave
    [0, 1].
    """

    s: float
    h: float
    horizon: float
    values: np.ndarray = field(repr=False)
    mode: str = "series"
    terms: int = 0
    bounded: bool = True

    def __post_init__(self) -> None:
        if not 0 < self.s <= 1:
            raise ValueError("s must lie in (0, 1]")
        vals = np.asarray(self.values, dtype=float)
        if self.bounded:
            if np.any(vals < -_VALUE_TOL) or np.any(vals > 1 + _VALUE_TOL):
                raise ValueError("pgf values must lie in [0, 1]")
            vals = np.clip(vals, 0.0, 1.0)
        object.__setattr__(self, "values", vals)
        self.values.setflags(write=False)

    def at_time(self, t: float) -> float:
        j = int(np.floor(t / self.h + 1e-9))
        if j < 0 or j >= self.values.size:
            raise ValueError("t outside the grid")
        return float(self.values[j])

    def to_csv(self, path) -> None:
        x = np.arange(self.values.size) * self.h
        np.savetxt(path, np.column_stack([x, self.values]), delimiter=",",
                   header="x,value", comments="", fmt="%.17g")


def _solve_pgf_values(r2: StepCDF, s: float, mode: str, tol: float,
                      max_iter: int, series_cap: int) -> tuple[np.ndarray, int]:
    head = 1.0 - r2.values
    if mode == "iteration":
        cur = head.copy()
        for it in range(1, max_iter + 1):
            nxt = head + s * stieltjes_against(cur, r2)
            delta = float(np.max(np.abs(nxt - cur)))
            cur = nxt
            if delta < tol:
                return cur, it
        raise SolverDidNotConverge(delta, max_iter)
    if mode == "series":
        # sum_d s^d (R2^{*d} - R2^{*(d+1)}), truncated once the tail bound
        # s^d * R2^{*d}(T) drops below tol
        power = np.ones_like(r2.values)  # R2^{*0}: unit mass at 0
        acc = np.zeros_like(r2.values)
        s_pow = 1.0
        for d in range(series_cap):
            nxt = stieltjes_against(power, r2)
            acc += s_pow * (power - nxt)
            power = nxt
            s_pow *= s
            if s_pow * power[-1] < tol:
                return acc, d + 1
        raise SolverDidNotConverge(float(s_pow * power[-1]), series_cap)
    raise ValueError(f"unknown mode {mode!r} (expected 'iteration' or 'series')")


def solve_count_pgf(
    r2: StepCDF,
    s: float,
    mode: str = "series",
    tol: float = 1e-10,
    max_iter: int = 100_000,
    series_cap: int = 100_000,
) -> PgfSlice:
    """Pgf slice of the pure renewal counting process (every interval R2).

    ``iteration`` runs the fixed point from the no-event head 1 - R2 until
    the sup change drops below ``tol``; ``series`` sums weighted
    differences of convolution powers with the stated tail bound.  Both
    terminate because no interval law puts mass at 0.
    """
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    values, terms = _solve_pgf_values(r2, s, mode, tol, max_iter, series_cap)
    return PgfSlice(s, r2.h, r2.horizon, values, mode, terms)


def solve_delayed_pgf(
    r1: StepCDF,
    r2: StepCDF,
    s: float,
    mode: str = "series",
    tol: float = 1e-10,
    first_increment_law: str = "first",
    **kwargs,
) -> PgfSlice:
    """Pgf slice when the first interval follows R1 and later ones R2.

    The head term 1 - R1 counts the no-event case; the pure-process slice
    is then integrated against the first interval's increments.  With
    ``first_increment_law="later"`` the integration uses R2's increments
    instead - dimensionally doubtful (the first interval's law would never
    enter the convolution) but kept for comparison.
    """
    if not r1.same_grid(r2):
        raise ValueError("R1 and R2 must share the grid")
    inner = solve_count_pgf(r2, s, mode, tol, **kwargs)
    if first_increment_law == "first":
        against = r1
    elif first_increment_law == "later":
        against = r2
    else:
        raise ValueError("first_increment_law must be 'first' or 'later'")
    values = (1.0 - r1.values) + s * stieltjes_against(inner.values, against)
    return PgfSlice(s, r1.h, r1.horizon, values, mode, inner.terms,
                    bounded=first_increment_law == "first")


@dataclass(frozen=True)
class CountPmf:
    """P(N(t) = k) for k = 0..k_max, plus the truncated tail mass."""

    t: float
    probs: np.ndarray
    tail_mass: float

    def __post_init__(self) -> None:
        probs = np.asarray(self.probs, dtype=float)
        if np.any(probs < -1e-12):
            raise ValueError("pmf entries must be nonnegative")
        object.__setattr__(self, "probs", np.maximum(probs, 0.0))
        self.probs.setflags(write=False)

    @property
    def k_max(self) -> int:
        return self.probs.size - 1

    @property
    def tail_flagged(self) -> bool:
        """True when more than 1% of the mass lies beyond k_max."""
        return self.tail_mass > 0.01


def limit_count_pmf(r1: StepCDF, r2: StepCDF, t: float, k_max: int) -> CountPmf:
    """Counting pmf of the delayed renewal process at time t:

    P(N(t) = 0) = 1 - R1(t) and, for k >= 1,
    P(N(t) = k) = (R1 * R2^{*(k-1)})(t) - (R1 * R2^{*k})(t).
    """
    if not r1.same_grid(r2):
        raise ValueError("R1 and R2 must share the grid")
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    j = r1.index_of(t)
    if t > r1.horizon:
        raise ValueError("t must not exceed the grid horizon")
    probs = np.empty(k_max + 1)
    cdf_k = r1  # R1 * R2^{*(k-1)} at k = 1
    probs[0] = 1.0 - r1.values[j]
    prev = float(r1.values[j])
    for k in range(1, k_max + 1):
        cdf_k = convolve(cdf_k, r2)
        cur = float(cdf_k.values[j])
        probs[k] = prev - cur
        prev = cur
    return CountPmf(float(t), probs, prev)


def kth_event_limit_cdf(r1: StepCDF, r2: StepCDF, k: int, mu: float, x):
    """(R1 * R2^{*(k-1)}) evaluated at x * mu on the grid (k = 1 is R1
    alone).  ``x`` may be a scalar or an array; x * mu must stay within
    the horizon."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if mu <= 0:
        raise ValueError("mu must be positive")
    if not r1.same_grid(r2):
        raise ValueError("R1 and R2 must share the grid")
    cdf_k = r1 if k == 1 else convolve(r1, convolve_power(r2, k - 1))
    xa = np.asarray(x, dtype=float) * mu
    if np.any(xa < 0) or np.any(xa > r1.horizon * (1 + 1e-12)):
        raise ValueError("x * mu must lie within [0, horizon]")
    return cdf_k.eval_at(np.asarray(x) * mu) if np.ndim(x) else float(cdf_k.eval_at(float(x) * mu))


def pgf_from_pmf(pmf: CountPmf, s: float) -> float:
    """sum_k P(N = k) s^k; the truncated tail bounds the error from above
    (the pmf must carry at most 1% tail mass)."""
    if not 0 < s <= 1:
        raise ValueError("s must lie in (0, 1]")
    if pmf.tail_flagged:
        raise ValueError(f"tail mass {pmf.tail_mass:.4f} exceeds 0.01; raise k_max")
    powers = s ** np.arange(pmf.probs.size)
    return float(np.dot(pmf.probs, powers))
