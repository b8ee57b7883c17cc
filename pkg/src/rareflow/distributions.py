"""Parametric nonnegative inter-arrival laws and their closed forms.

A :class:`DistributionSpec` is a plain description of a law (kind plus
parameters); evaluation, sampling and moments are free functions so the
spec stays a value object that serializes to/from flat JSON.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping

import numpy as np

__all__ = [
    "DistributionSpec",
    "exponential",
    "deterministic",
    "uniform",
    "geometric",
    "discrete",
    "erlang",
    "cdf_eval",
    "cdf_strict",
    "pmf_eval",
    "sample",
    "spec_mean",
    "integer_supported",
    "erlang_cdf",
    "spec_from_json",
    "spec_to_json",
]

_KINDS = ("exponential", "deterministic", "uniform", "geometric", "discrete", "erlang")


@dataclass(frozen=True)
class DistributionSpec:
    """Description of a law on (0, inf) or on {1, 2, ...}.

    Use the factory functions (:func:`exponential`, :func:`geometric`, ...)
    rather than constructing directly; they normalize parameter types.
    """

    kind: str
    params: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown distribution kind {self.kind!r}")
        p = self.params
        if self.kind == "exponential":
            if not p["rate"] > 0:
                raise ValueError("exponential rate must be positive")
        elif self.kind == "deterministic":
            if not p["value"] > 0:
                raise ValueError("deterministic value must be positive")
        elif self.kind == "uniform":
            if not (0 < p["lo"] < p["hi"]):
                raise ValueError("uniform requires 0 < lo < hi")
        elif self.kind == "geometric":
            if not (0 < p["p"] <= 1):
                raise ValueError("geometric p must be in (0, 1]")
        elif self.kind == "discrete":
            values = np.asarray(p["values"], dtype=float)
            probs = np.asarray(p["probs"], dtype=float)
            if values.ndim != 1 or values.shape != probs.shape or values.size == 0:
                raise ValueError("discrete requires matching nonempty value/prob lists")
            if np.any(values <= 0):
                raise ValueError("discrete support must be positive")
            if np.any(np.diff(values) <= 0):
                raise ValueError("discrete values must be strictly increasing")
            if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-12:
                raise ValueError("discrete probs must be nonnegative and sum to 1")
        elif self.kind == "erlang":
            if int(p["shape"]) != p["shape"] or p["shape"] < 1:
                raise ValueError("erlang shape must be a positive integer")
            if not p["rate"] > 0:
                raise ValueError("erlang rate must be positive")

    def __repr__(self) -> str:
        inner = ", ".join(f"{k}={v}" for k, v in self.params.items())
        return f"{self.kind}({inner})"


def exponential(rate: float) -> DistributionSpec:
    return DistributionSpec("exponential", {"rate": float(rate)})


def deterministic(value: float) -> DistributionSpec:
    return DistributionSpec("deterministic", {"value": float(value)})


def uniform(lo: float, hi: float) -> DistributionSpec:
    return DistributionSpec("uniform", {"lo": float(lo), "hi": float(hi)})


def geometric(p: float) -> DistributionSpec:
    """Number of trials to first success; support {1, 2, ...}."""
    return DistributionSpec("geometric", {"p": float(p)})


def discrete(values, probs) -> DistributionSpec:
    return DistributionSpec(
        "discrete",
        {"values": tuple(float(v) for v in values), "probs": tuple(float(q) for q in probs)},
    )


def erlang(shape: int, rate: float) -> DistributionSpec:
    return DistributionSpec("erlang", {"shape": int(shape), "rate": float(rate)})


def erlang_cdf(k: int, mu: float, x):
    """CDF of the sum of ``k`` independent exponential(``mu``) variables.

    Evaluates ``1 - exp(-mu*x) * sum_{j<k} (mu*x)^j / j!`` directly; accepts
    scalar or array ``x``.
    """
    if k < 1:
        raise ValueError("erlang_cdf requires k >= 1")
    if mu <= 0:
        raise ValueError("erlang_cdf requires mu > 0")
    xa = np.asarray(x, dtype=float)
    z = np.maximum(mu * xa, 0.0)
    total = np.ones_like(z)
    term = np.ones_like(z)
    for j in range(1, k):
        term = term * z / j
        total += term
    out = -np.expm1(-z) + np.exp(-z) * (1.0 - total)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def cdf_eval(spec: DistributionSpec, x):
    """P(X <= x) for the parametric kind; scalar or array ``x``."""
    xa = np.asarray(x, dtype=float)
    p = spec.params
    if spec.kind == "exponential":
        out = np.where(xa >= 0, -np.expm1(-p["rate"] * np.maximum(xa, 0.0)), 0.0)
    elif spec.kind == "deterministic":
        out = (xa >= p["value"]).astype(float)
    elif spec.kind == "uniform":
        out = np.clip((xa - p["lo"]) / (p["hi"] - p["lo"]), 0.0, 1.0)
    elif spec.kind == "geometric":
        n = np.floor(np.maximum(xa, 0.0))
        out = np.where(n >= 1, -np.expm1(n * math.log1p(-p["p"])) if p["p"] < 1 else 1.0, 0.0)
    elif spec.kind == "discrete":
        values = np.asarray(p["values"])
        probs = np.asarray(p["probs"])
        idx = np.searchsorted(values, xa, side="right")
        cum = np.concatenate([[0.0], np.cumsum(probs)])
        out = cum[idx]
    elif spec.kind == "erlang":
        return erlang_cdf(p["shape"], p["rate"], x)
    out = np.clip(out, 0.0, 1.0)
    return float(out) if np.isscalar(x) or np.ndim(x) == 0 else out


def pmf_eval(spec: DistributionSpec, k) -> float:
    """P(X = k) for laws with atoms; zero for continuous kinds."""
    p = spec.params
    if spec.kind == "deterministic":
        return 1.0 if k == p["value"] else 0.0
    if spec.kind == "geometric":
        kk = float(k)
        if kk < 1 or kk != int(kk):
            return 0.0
        return p["p"] * (1.0 - p["p"]) ** (int(kk) - 1)
    if spec.kind == "discrete":
        values = np.asarray(p["values"])
        probs = np.asarray(p["probs"])
        hit = np.flatnonzero(values == float(k))
        return float(probs[hit[0]]) if hit.size else 0.0
    return 0.0


def cdf_strict(spec: DistributionSpec, x: float) -> float:
    """P(X < x); differs from :func:`cdf_eval` only at atoms."""
    if spec.kind in ("exponential", "uniform", "erlang"):
        return cdf_eval(spec, x)
    return float(cdf_eval(spec, x) - pmf_eval(spec, x))


def sample(spec: DistributionSpec, rng: np.random.Generator, size=None):
    """Draw from the law; scalar when ``size`` is None, else an array."""
    p = spec.params
    if spec.kind == "exponential":
        out = rng.exponential(1.0 / p["rate"], size)
    elif spec.kind == "deterministic":
        out = p["value"] if size is None else np.full(size, p["value"])
    elif spec.kind == "uniform":
        out = rng.uniform(p["lo"], p["hi"], size)
    elif spec.kind == "geometric":
        out = rng.geometric(p["p"], size)
    elif spec.kind == "discrete":
        cum = np.cumsum(p["probs"])
        idx = np.searchsorted(cum, rng.random(size), side="right")
        idx = np.minimum(idx, len(cum) - 1)
        values = np.asarray(p["values"])
        out = values[idx]
    elif spec.kind == "erlang":
        out = rng.gamma(p["shape"], 1.0 / p["rate"], size)
    if size is None:
        return int(out) if spec.kind == "geometric" else float(out)
    return out


def spec_mean(spec: DistributionSpec) -> float:
    p = spec.params
    if spec.kind == "exponential":
        return 1.0 / p["rate"]
    if spec.kind == "deterministic":
        return p["value"]
    if spec.kind == "uniform":
        return 0.5 * (p["lo"] + p["hi"])
    if spec.kind == "geometric":
        return 1.0 / p["p"]
    if spec.kind == "discrete":
        return float(np.dot(p["values"], p["probs"]))
    if spec.kind == "erlang":
        return p["shape"] / p["rate"]
    raise AssertionError(spec.kind)


def integer_supported(spec: DistributionSpec) -> bool:
    """True when the law lives on {1, 2, ...}."""
    p = spec.params
    if spec.kind == "geometric":
        return True
    if spec.kind == "deterministic":
        return p["value"] >= 1 and float(p["value"]).is_integer()
    if spec.kind == "discrete":
        return all(v >= 1 and float(v).is_integer() for v in p["values"])
    return False


def spec_to_json(spec: DistributionSpec) -> dict:
    out: dict[str, Any] = {"kind": spec.kind}
    for key, value in spec.params.items():
        out[key] = list(value) if isinstance(value, tuple) else value
    return out


def spec_from_json(obj: Mapping[str, Any]) -> DistributionSpec:
    obj = dict(obj)
    kind = obj.pop("kind", None)
    if kind == "exponential":
        return exponential(obj["rate"])
    if kind == "deterministic":
        return deterministic(obj["value"])
    if kind == "uniform":
        return uniform(obj["lo"], obj["hi"])
    if kind == "geometric":
        return geometric(obj["p"])
    if kind == "discrete":
        return discrete(obj["values"], obj["probs"])
    if kind == "erlang":
        return erlang(obj["shape"], obj["rate"])
    raise ValueError(f"unknown distribution kind {kind!r}")
