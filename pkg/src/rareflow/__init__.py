"""rareflow: simulation and numerics for thinned (rarefied) subflows of
renewal processes.

The library has three layers:

* distribution plumbing — parametric laws (:mod:`rareflow.distributions`),
  grid CDFs with Stieltjes convolution (:mod:`rareflow.step_cdf`), and
  goodness-of-fit distances (:mod:`rareflow.distances`);
* stochastic models — renewal paths (:mod:`rareflow.renewal`), thinned
  subflows driven by stride processes (:mod:`rareflow.raring`), and two
  renewal processes marking each other (:mod:`rareflow.marking`);
* limit laws and verification — delayed-renewal counting pgf/pmf solvers
  (:mod:`rareflow.limits`) and the seeded experiment harness
  (:mod:`rareflow.experiments`).
"""

from .distributions import (
    DistributionSpec,
    cdf_eval,
    cdf_strict,
    deterministic,
    discrete,
    erlang,
    erlang_cdf,
    exponential,
    geometric,
    sample,
    spec_from_json,
    spec_mean,
    spec_to_json,
    uniform,
)
from .step_cdf import StepCDF, convolve, convolve_power, discretize
from .distances import EmpiricalCDF, KSResult, ks_distance, tv_distance
from .renewal import RenewalPath, count_at, extend_path, overshoot, partial_sum, sample_path
from .raring import (
    BoundCheckReport,
    InsufficientRealization,
    KeptIndices,
    MixingEstimate,
    ParametricStrideSource,
    StrideSource,
    ThresholdEvent,
    TruncatedStrideSource,
    check_index_tail_bound,
    estimate_mixing,
    geometric_source,
    index_tail_bound,
    kept_indices,
    kept_indices_until,
    rare_count,
    truncate_source,
)
from .marking import (
    MarkingRecord,
    MarkingStrideSource,
    MarkovIncrements,
    MCEstimate,
    RecordStrideSource,
    mark,
    marked_h_times,
    markov_increments,
    next_mark_stride,
    poisson_marking_limit,
    simulate_marking,
    stride_cdf_by_overshoot,
)
from .limits import (
    CountPmf,
    PgfSlice,
    SolverDidNotConverge,
    kth_event_limit_cdf,
    limit_count_pmf,
    pgf_from_pmf,
    solve_count_pgf,
    solve_delayed_pgf,
)

__version__ = "0.1.0"
