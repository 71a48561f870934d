"""Window decision functions, moving-window application, rejection densities.

A stationarity test here is any deterministic map from a length-n window to
{accept=0, reject=1} with a declared nominal size.  Applying it along a path
yields an indicator sequence whose limiting rejection frequency, for a path
that genuinely behaves stationarily, cannot exceed the size; the
``rejection_upper_density`` estimator is the finite surrogate for that
limiting frequency.

Built-in tests reject when a continuous statistic strictly exceeds a
threshold, so the boundary of the rejection region is a null set under any
continuous law.  User-supplied deciders are trusted to satisfy one of the
closed-region / null-boundary conditions; the ``boundary_condition`` field
records the caller's assertion but is not checked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, AnalysisConfig
from .generators import GeneratorSpec, generate
from .pathcore import Path

__all__ = [
    "StationarityTest",
    "RejectionRecord",
    "SuiteResult",
    "CalibrationResult",
    "CalibrationError",
    "make_builtin_test",
    "apply_moving_window",
    "rejection_upper_density",
    "asymptotic_suite",
    "calibrate_test_size",
    "BUILTIN_KINDS",
]


class CalibrationError(RuntimeError):
    """The test statistic is degenerate under the calibration generator."""


@dataclass(frozen=True)
class StationarityTest:
    """A window test: reject (1) when the statistic exceeds its threshold."""

    name: str
    window: int
    nominal_size: float
    decide: Callable[[np.ndarray], int]
    params: Mapping[str, float] = field(default_factory=dict)
    boundary_condition: str = "null-boundary"
    # optional vectorized evaluator over all window starts; must agree with
    # ``decide`` exactly (tested), it exists purely for throughput
    batch_decide: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self) -> None:
        if self.window < 2:
            raise ValueError("window size must be at least 2")
        if not 0.0 < self.nominal_size < 1.0:
            raise ValueError("nominal size must be in (0, 1)")


# ---------------------------------------------------------------------------
# built-in statistics

def _stat_threshold_exceedance(w: np.ndarray) -> float:
    return float(np.mean(w))


def _stat_mean_split(w: np.ndarray) -> float:
    h = w.size // 2
    return float(abs(np.mean(w[:h]) - np.mean(w[h:])))


def _stat_variance_split(w: np.ndarray) -> float:
    h = w.size // 2
    return float(abs(np.var(w[:h]) - np.var(w[h:])))


def _stat_kpss_like(w: np.ndarray) -> float:
    n = w.size
    e = w - np.mean(w)
    variance = float(np.mean(e * e))
    if variance == 0.0:
        return 0.0
    s = np.cumsum(e)
    return float(np.sum(s * s) / (n * n * variance))


def _sliding_sums(x: np.ndarray, n: int) -> np.ndarray:
    c = np.concatenate(([0.0], np.cumsum(x)))
    return c[n:] - c[:-n]


def _batch_threshold(x: np.ndarray, n: int) -> np.ndarray:
    return _sliding_sums(x, n) / n


def _batch_mean_split(x: np.ndarray, n: int) -> np.ndarray:
    h = n // 2
    sums_a = _sliding_sums(x, h)[:x.size - n + 1]
    sums_b = _sliding_sums(x, n - h)[h:h + x.size - n + 1]
    return np.abs(sums_a / h - sums_b / (n - h))


def _batch_variance_split(x: np.ndarray, n: int) -> np.ndarray:
    h = n // 2
    m = x.size - n + 1
    s1 = _sliding_sums(x, h)
    q1 = _sliding_sums(x * x, h)
    var_a = q1[:m] / h - (s1[:m] / h) ** 2
    s2 = _sliding_sums(x, n - h)[h:h + m]
    q2 = _sliding_sums(x * x, n - h)[h:h + m]
    var_b = q2 / (n - h) - (s2 / (n - h)) ** 2
    return np.abs(var_a - var_b)


def _batch_kpss_like(x: np.ndarray, n: int) -> np.ndarray:
    # window partial sums S_t = (C[i+t]-C[i]) - t*mu_i expanded so that every
    # term is a sliding sum of a precomputed sequence
    m = x.size - n + 1
    idx = np.arange(m)
    c = np.concatenate(([0.0], np.cumsum(x)))
    csq = np.concatenate(([0.0], np.cumsum(c[1:] * c[1:])))
    csum = np.concatenate(([0.0], np.cumsum(c[1:])))
    cjsum = np.concatenate(([0.0], np.cumsum(np.arange(1.0, x.size + 1) * c[1:])))
    q = np.concatenate(([0.0], np.cumsum(x * x)))

    c_i = c[idx]
    win_sum = c[idx + n] - c_i
    mu = win_sum / n
    sum_c = csum[idx + n] - csum[idx]
    sum_csq = csq[idx + n] - csq[idx]
    sum_jc = cjsum[idx + n] - cjsum[idx]
    sum_a = sum_c - n * c_i
    sum_a_sq = sum_csq - 2.0 * c_i * sum_c + n * c_i * c_i
    sum_t_a = (sum_jc - idx * sum_c) - c_i * (n * (n + 1) / 2.0)
    sum_t_sq = n * (n + 1) * (2 * n + 1) / 6.0
    total = sum_a_sq - 2.0 * mu * sum_t_a + mu * mu * sum_t_sq
    variance = (q[idx + n] - q[idx]) / n - mu * mu
    stats = np.zeros(m)
    ok = variance > 0
    stats[ok] = total[ok] / (n * n * variance[ok])
    return stats


BUILTIN_KINDS: dict[str, tuple[Callable[[np.ndarray], float],
                               Callable[[np.ndarray, int], np.ndarray]]] = {
    "threshold_exceedance": (_stat_threshold_exceedance, _batch_threshold),
    "mean_split": (_stat_mean_split, _batch_mean_split),
    "variance_split": (_stat_variance_split, _batch_variance_split),
    "kpss_like": (_stat_kpss_like, _batch_kpss_like),
}


def builtin_statistic(kind: str) -> Callable[[np.ndarray], float]:
    if kind not in BUILTIN_KINDS:
        raise ValueError(f"unknown test kind {kind!r}")
    return BUILTIN_KINDS[kind][0]


def make_builtin_test(kind: str, n: int, tau: float, alpha: float,
                      name: str | None = None) -> StationarityTest:
    """A built-in test rejecting when its statistic strictly exceeds tau."""
    if kind not in BUILTIN_KINDS:
        raise ValueError(f"unknown test kind {kind!r}")
    stat, batch = BUILTIN_KINDS[kind]

    def decide(window: np.ndarray) -> int:
        return int(stat(np.asarray(window, dtype=np.float64)) > tau)

    def batch_decide(values: np.ndarray) -> np.ndarray:
        return (batch(values, n) > tau).astype(np.uint8)

    return StationarityTest(
        name=name or f"{kind}(n={n})",
        window=n,
        nominal_size=alpha,
        decide=decide,
        params={"kind": kind, "tau": tau},
        batch_decide=batch_decide,
    )


# ---------------------------------------------------------------------------
# moving-window application

@dataclass(frozen=True, eq=False)
class RejectionRecord:
    """Indicator sequence over window offsets plus its tail-density summary."""

    test_name: str
    window: int
    nominal_size: float
    start: int
    stride: int
    indicators: np.ndarray
    upper_density: float
    tail_profile: tuple[tuple[int, float], ...]  # (rung length, mean)


def _tail_rungs(n_offsets: int, window: int, min_rung_windows: int) -> list[int]:
    """Dyadic tail rungs, skipping rungs too short to resolve ~0.01 density.

    The full-offset mean is always a rung, so the estimate is defined for any
    indicator length; short dyadic rungs whose means fluctuate more than the
    densities being compared are excluded rather than allowed to dominate
    the max.
    """
    min_len = min_rung_windows * window
    rungs = [n_offsets]
    for frac in (0.5, 0.25, 0.125):
        r = math.ceil(frac * n_offsets)
        if r >= min_len and r not in rungs:
            rungs.append(r)
    return rungs


def rejection_upper_density(indicators: np.ndarray, window: int = 1,
                            config: AnalysisConfig = DEFAULT_CONFIG) -> float:
    """Max of tail means over the rung ladder: the limsup surrogate."""
    ind = np.asarray(indicators)
    if ind.size == 0:
        raise ValueError("no indicators")
    rungs = _tail_rungs(ind.size, window, config.min_rung_windows)
    return float(max(np.mean(ind[ind.size - r:]) for r in rungs))


def apply_moving_window(path: Path, test: StationarityTest, start: int = 0,
                        stride: int = 1,
                        config: AnalysisConfig = DEFAULT_CONFIG) -> RejectionRecord:
    """Evaluate the test at offsets start, start+stride, ... along the path."""
    n = test.window
    if stride < 1:
        raise ValueError("stride must be at least 1")
    if start < 0 or start + n > path.length:
        raise ValueError(
            f"window of size {n} at offset {start} does not fit the path")
    if test.batch_decide is not None:
        all_ind = np.asarray(test.batch_decide(path.values), dtype=np.uint8)
        indicators = all_ind[start::stride]
    else:
        starts = np.arange(start, path.length - n + 1, stride)
        indicators = np.fromiter(
            (test.decide(path.values[i:i + n]) for i in starts),
            dtype=np.uint8, count=starts.size)
    rungs = _tail_rungs(indicators.size, n, config.min_rung_windows)
    profile = tuple((r, float(np.mean(indicators[indicators.size - r:])))
                    for r in rungs)
    return RejectionRecord(
        test_name=test.name,
        window=n,
        nominal_size=test.nominal_size,
        start=start,
        stride=stride,
        indicators=indicators,
        upper_density=max(v for _, v in profile),
        tail_profile=profile,
    )


@dataclass(frozen=True, eq=False)
class SuiteResult:
    records: tuple[RejectionRecord, ...]
    epsilon: float
    # smallest window size from which every later test keeps its upper
    # density within nominal_size + epsilon, None when none does
    stabilization_n: int | None


def asymptotic_suite(path: Path, tests: Sequence[StationarityTest],
                     epsilon: float = 0.01, start: int = 0, stride: int = 1,
                     config: AnalysisConfig = DEFAULT_CONFIG) -> SuiteResult:
    """Apply a ladder of tests with increasing window sizes."""
    if not tests:
        raise ValueError("no tests given")
    windows = [t.window for t in tests]
    if windows != sorted(windows):
        raise ValueError("tests must be sorted by window size")
    records = tuple(apply_moving_window(path, t, start, stride, config)
                    for t in tests)
    stabilization_n: int | None = None
    for i in range(len(records) - 1, -1, -1):
        if records[i].upper_density <= records[i].nominal_size + epsilon:
            stabilization_n = records[i].window
        else:
            break
    return SuiteResult(records=records, epsilon=epsilon,
                       stabilization_n=stabilization_n)


# ---------------------------------------------------------------------------
# Monte Carlo size calibration

@dataclass(frozen=True)
class CalibrationResult:
    kind: str
    window: int
    alpha: float
    tau: float
    stderr: float
    replicates: int
    seed: int

    def make_test(self, name: str | None = None) -> StationarityTest:
        return make_builtin_test(self.kind, self.window, self.tau, self.alpha,
                                 name=name)


def calibrate_test_size(kind: str, window: int, alpha: float,
                        generator: GeneratorSpec, replicates: int = 2000,
                        seed: int = 0) -> CalibrationResult:
    """Empirical (1 - alpha) quantile of the statistic over seeded replicates.

    Each replicate is an independent window drawn from the generator with a
    seed derived via SeedSequence, so the result does not depend on
    execution order.  The standard error is the half-width between the order
    statistics one binomial standard deviation either side of the quantile
    rank.
    """
    if replicates < 1000:
        raise ValueError("replicates must be at least 1000")
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    stat = builtin_statistic(kind)
    child_seeds = np.random.SeedSequence(seed).generate_state(replicates)
    base = GeneratorSpec(kind=generator.kind, length=window,
                         params=generator.params)
    stats = np.empty(replicates)
    for i, child in enumerate(child_seeds):
        stats[i] = stat(generate(base.with_seed(int(child))).values)
    if np.ptp(stats) == 0.0:
        raise CalibrationError(
            f"statistic {kind!r} is constant under {generator.kind!r}")
    stats.sort()
    tau = float(np.quantile(stats, 1.0 - alpha))
    rank = (1.0 - alpha) * (replicates - 1)
    spread = math.sqrt(replicates * alpha * (1.0 - alpha))
    lo = int(max(0, math.floor(rank - spread)))
    hi = int(min(replicates - 1, math.ceil(rank + spread)))
    stderr = float((stats[hi] - stats[lo]) / 2.0)
    return CalibrationResult(kind=kind, window=window, alpha=alpha, tau=tau,
                             stderr=stderr, replicates=replicates, seed=seed)
