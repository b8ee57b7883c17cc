"""Thinned subflows of integer-indexed flows.

A *stride source* emits, per site t in {0, 1, 2, ...}, a positive integer
stride: the number of index steps from a kept event to the next one.  The
kept indices follow the recursion

    kept(1) = stride(0),      kept(m+1) = kept(m) + stride(kept(m)),

so kept(m) >= m always.  The module also provides the lower-tail bound for
kept(m), source truncation, and finite-family estimation of the
strong-mixing coefficient of a stride process.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .distributions import (
    DistributionSpec,
    cdf_strict,
    geometric,
    integer_supported,
    sample,
)

__all__ = [
    "InsufficientRealization",
    "StrideSource",
    "StrideRealization",
    "ParametricStrideSource",
    "TruncatedStrideSource",
    "geometric_source",
    "truncate_source",
    "KeptIndices",
    "kept_indices",
    "kept_indices_until",
    "rare_count",
    "index_tail_bound",
    "BoundCheckReport",
    "check_index_tail_bound",
    "ThresholdEvent",
    "MixingEstimate",
    "estimate_mixing",
]

_MAX_RECURSION_STEPS = 10_000_000


class InsufficientRealization(RuntimeError):
    """A query needs more of the realization than was generated."""


class StrideRealization(ABC):
    """One realization of a stride process; values are cached so repeated
    queries at a site agree within the realization."""

    @abstractmethod
    def stride(self, site: int) -> int:
        """Stride at ``site`` (integer >= 1)."""


class StrideSource(ABC):
    """Replayable generator of stride realizations.

    Realizations drawn with identically seeded generators, and queried in
    the same site order, reproduce identical values.
    """

    @abstractmethod
    def realization(self, rng: np.random.Generator) -> StrideRealization:
        ...

    @property
    @abstractmethod
    def descriptor(self) -> str:
        ...

    def cdf_strict_sup(self, threshold: float, max_site: float) -> float:
        """max over sites t <= max_site of P(stride(t) < threshold), when
        the per-site laws are known analytically."""
        raise NotImplementedError(f"{type(self).__name__} has no analytic stride law")


class _CachedRealization(StrideRealization):
    def __init__(self, draw: Callable[[int], int]):
        self._draw = draw
        self._cache: dict[int, int] = {}

    def stride(self, site: int) -> int:
        if site < 0:
            raise ValueError("sites are nonnegative integers")
        got = self._cache.get(site)
        if got is None:
            got = self._draw(site)
            self._cache[site] = got
        return got


def _as_stride(value, spec: DistributionSpec) -> int:
    iv = int(round(float(value)))
    if iv < 1 or abs(iv - float(value)) > 1e-9:
        raise ValueError(f"stride law {spec!r} emitted {value!r}; strides must be integers >= 1")
    return iv


class ParametricStrideSource(StrideSource):
    """I.i.d. strides with a common integer law, optionally a distinct law
    at site 0 (the two-regime setup where the first stride differs)."""

    def __init__(self, spec: DistributionSpec, *, site0_spec: DistributionSpec | None = None):
        for s in (spec, site0_spec):
            if s is not None and not integer_supported(s):
                raise ValueError(f"{s!r} is not supported on {{1, 2, ...}}")
        self.spec = spec
        self.site0_spec = site0_spec

    def law_at(self, site: int) -> DistributionSpec:
        if site == 0 and self.site0_spec is not None:
            return self.site0_spec
        return self.spec

    def realization(self, rng: np.random.Generator) -> StrideRealization:
        def draw(site: int) -> int:
            law = self.law_at(site)
            return _as_stride(sample(law, rng), law)

        return _CachedRealization(draw)

    @property
    def descriptor(self) -> str:
        if self.site0_spec is None:
            return f"iid[{self.spec!r}]"
        return f"iid[site0={self.site0_spec!r}, rest={self.spec!r}]"

    def cdf_strict_sup(self, threshold: float, max_site: float) -> float:
        out = cdf_strict(self.spec, threshold)
        if self.site0_spec is not None:
            out = max(out, cdf_strict(self.site0_spec, threshold))
        return out


class TruncatedStrideSource(StrideSource):
    """Wraps a source, capping strides at ``c - r``; agrees with the
    wrapped source wherever the wrapped value is within the cap."""

    def __init__(self, inner: StrideSource, c: int, r: int):
        if r >= c:
            raise ValueError("truncation requires r < c")
        if c - r < 1:
            raise ValueError("cap c - r must be at least 1")
        self.inner = inner
        self.cap = int(c - r)

    def realization(self, rng: np.random.Generator) -> StrideRealization:
        wrapped = self.inner.realization(rng)
        return _CachedRealization(lambda site: min(wrapped.stride(site), self.cap))

    @property
    def descriptor(self) -> str:
        return f"min({self.inner.descriptor}, {self.cap})"

    def cdf_strict_sup(self, threshold: float, max_site: float) -> float:
        if threshold > self.cap:
            return 1.0
        return self.inner.cdf_strict_sup(threshold, max_site)


def geometric_source(p: float) -> ParametricStrideSource:
    """I.i.d. geometric(p) strides at every site."""
    return ParametricStrideSource(geometric(p))


def truncate_source(source: StrideSource, c: int, r: int) -> TruncatedStrideSource:
    return TruncatedStrideSource(source, c, r)


@dataclass(frozen=True)
class KeptIndices:
    """Realized kept indices of a thinned subflow (1-based positions)."""

    indices: np.ndarray
    source_descriptor: str = ""

    def __post_init__(self) -> None:
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.size == 0:
            raise ValueError("at least one kept index is required")
        if idx[0] < 1 or np.any(np.diff(idx) < 1):
            raise ValueError("kept indices must be strictly increasing, starting at >= 1")
        if np.any(idx < np.arange(1, idx.size + 1)):
            raise ValueError("the m-th kept index can never be below m")
        object.__setattr__(self, "indices", idx)
        self.indices.setflags(write=False)

    @property
    def m_max(self) -> int:
        return self.indices.size


def _run_recursion(realization: StrideRealization, stop: Callable[[int, int], bool]) -> list[int]:
    out: list[int] = [realization.stride(0)]
    while not stop(len(out), out[-1]):
        if len(out) >= _MAX_RECURSION_STEPS:
            raise InsufficientRealization("recursion step cap exceeded")
        out.append(out[-1] + realization.stride(out[-1]))
    return out


def kept_indices(source: StrideSource, m_max: int, rng: np.random.Generator) -> KeptIndices:
    """Realize the first ``m_max`` kept indices; only site 0 and the kept
    indices themselves are queried."""
    if m_max < 1:
        raise ValueError("m_max must be >= 1")
    realization = source.realization(rng)
    out = _run_recursion(realization, lambda m, _last: m >= m_max)
    return KeptIndices(np.asarray(out), source.descriptor)


def kept_indices_until(source: StrideSource, t: float, rng: np.random.Generator) -> KeptIndices:
    """Realize the recursion until the last index exceeds ``t`` (so that
    :func:`rare_count` at ``t`` is fully determined)."""
    realization = source.realization(rng)
    out = _run_recursion(realization, lambda _m, last: last > t)
    return KeptIndices(np.asarray(out), source.descriptor)


def rare_count(kept: KeptIndices, t: float) -> int:
    """Number of kept indices at or below ``t``; 0 when even the first kept
    index lies beyond ``t``."""
    if kept.indices[-1] <= t:
        raise InsufficientRealization(
            f"realization ends at kept index {kept.indices[-1]} <= t = {t}; "
            "realize a longer sequence"
        )
    return int(np.searchsorted(kept.indices, t, side="right"))


def index_tail_bound(stride_cdf_sup, m: int, x: float) -> float:
    """Upper bound for P(m-th kept index < x):

        max_{t <= x} P(stride(t) < x/m) * (floor(x) + 1).

    ``stride_cdf_sup`` is either that max probability, or a callable
    ``(threshold, max_site) -> probability`` computing it.  The bound may
    exceed 1; it is a bound, not a probability.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    if x <= 0:
        raise ValueError("x must be positive")
    sup = stride_cdf_sup(x / m, x) if callable(stride_cdf_sup) else float(stride_cdf_sup)
    if not 0.0 <= sup <= 1.0:
        raise ValueError("the supplied sup must be a probability")
    return sup * (math.floor(x) + 1)


@dataclass(frozen=True)
class BoundCheckReport:
    source_descriptor: str
    m: int
    x: float
    n_samples: int
    empirical: float
    stderr: float
    bound: float
    passed: bool

    def to_json(self) -> dict:
        return {
            "source": self.source_descriptor,
            "m": self.m,
            "x": self.x,
            "n_samples": self.n_samples,
            "empirical": self.empirical,
            "stderr": self.stderr,
            "bound": self.bound,
            "passed": self.passed,
        }


def check_index_tail_bound(
    source: StrideSource, m: int, x: float, n_samples: int, rng: np.random.Generator
) -> BoundCheckReport:
    """Monte Carlo frequency of {m-th kept index < x} against the analytic
    tail bound.

    Passes when the empirical frequency does not exceed the bound by more
    than three binomial standard errors.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    hits = 0
    for child in rng.spawn(n_samples):
        kept = kept_indices(source, m, child)
        hits += int(kept.indices[-1] < x)
    p_hat = hits / n_samples
    se = math.sqrt(p_hat * (1.0 - p_hat) / n_samples)
    bound = index_tail_bound(source.cdf_strict_sup, m, x)
    return BoundCheckReport(
        source.descriptor, m, x, n_samples, p_hat, se, bound, p_hat <= bound + 3.0 * se
    )


@dataclass(frozen=True)
class ThresholdEvent:
    """Elementary event on one site: stride(site) <op> level, with op in
    {"le", "gt", "eq"}."""

    site: int
    op: str
    level: int

    def __post_init__(self) -> None:
        if self.op not in ("le", "gt", "eq"):
            raise ValueError("op must be one of 'le', 'gt', 'eq'")
        if self.site < 0:
            raise ValueError("site must be nonnegative")

    def holds(self, realization: StrideRealization) -> bool:
        v = realization.stride(self.site)
        if self.op == "le":
            return v <= self.level
        if self.op == "gt":
            return v > self.level
        return v == self.level


def _atoms(event) -> tuple[ThresholdEvent, ...]:
    if isinstance(event, ThresholdEvent):
        return (event,)
    atoms = tuple(event)
    if not atoms or not all(isinstance(a, ThresholdEvent) for a in atoms):
        raise ValueError("an event is a ThresholdEvent or a nonempty sequence of them")
    return atoms


def _holds(atoms: tuple[ThresholdEvent, ...], realization: StrideRealization) -> bool:
    return all(a.holds(realization) for a in atoms)


@dataclass(frozen=True)
class MixingEstimate:
    """Finite-family estimate of the strong-mixing coefficient at a lag.

    The true coefficient takes a sup over full sigma-algebras; a finite
    family can only exhibit dependence, so this is a lower-bound estimate.
    """

    lag: int
    estimate: float
    stderr: float
    n_samples: int
    family_size: int
    best_pair: int
    is_lower_bound: bool = True

    def to_json(self) -> dict:
        return {
            "lag": self.lag,
            "estimate": self.estimate,
            "stderr": self.stderr,
            "n_samples": self.n_samples,
            "family_size": self.family_size,
            "best_pair": self.best_pair,
            "is_lower_bound": self.is_lower_bound,
        }


def estimate_mixing(
    source: StrideSource,
    lag: int,
    family: Iterable[tuple],
    n_samples: int,
    rng: np.random.Generator,
) -> MixingEstimate:
    """max over the family of |P(A and B) - P(A) P(B)|, estimated over
    fresh realizations.

    Each pair (A, B) must be separated by the lag: every site of A plus
    the lag must not exceed any site of B.  The reported standard error is
    the independence-null error of the maximizing pair.
    """
    if lag < 1:
        raise ValueError("lag must be >= 1")
    pairs = [(_atoms(a), _atoms(b)) for a, b in family]
    if not pairs:
        raise ValueError("event family must be nonempty")
    for a_atoms, b_atoms in pairs:
        past = max(atom.site for atom in a_atoms)
        future = min(atom.site for atom in b_atoms)
        if past + lag > future:
            raise ValueError(
                f"event pair not separated by lag {lag}: past site {past}, future site {future}"
            )
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")

    sites = sorted({atom.site for a, b in pairs for atom in a + b})
    n_pairs = len(pairs)
    a_hits = np.zeros(n_pairs)
    b_hits = np.zeros(n_pairs)
    ab_hits = np.zeros(n_pairs)
    for child in rng.spawn(n_samples):
        realization = source.realization(child)
        for site in sites:  # touch sites in fixed order for replayability
            realization.stride(site)
        for j, (a_atoms, b_atoms) in enumerate(pairs):
            a = _holds(a_atoms, realization)
            b = _holds(b_atoms, realization)
            a_hits[j] += a
            b_hits[j] += b
            ab_hits[j] += a and b
    pa = a_hits / n_samples
    pb = b_hits / n_samples
    pab = ab_hits / n_samples
    dep = np.abs(pab - pa * pb)
    best = int(np.argmax(dep))
    se = math.sqrt(max(pa[best] * (1 - pa[best]) * pb[best] * (1 - pb[best]), 1e-300) / n_samples)
    return MixingEstimate(lag, float(dep[best]), se, n_samples, n_pairs, best)
