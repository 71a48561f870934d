"""Finite-sample verdicts on recurrence, tightness, and induced distributions.

The recurrence check (Property E) classifies each interval pattern as Empty,
PositiveDensity, Violation, or Inconclusive from the tail of its density
trajectory.  The tightness check (Property T) watches the fraction of values
inside (-K, K) as K grows.  Grid scans tabulate the empirical window
distributions whose limits define the process a path induces, along with the
marginalization consistency between successive window lengths.

Verdict semantics at a finite horizon:

* Violation fires only when the pattern occurred, its running density has
  fallen below ``violation_floor_count / horizon``, and the density is
  non-increasing across the whole tail window.  Occurred-but-rare patterns
  that do not exhibit decay stay Inconclusive; rarity alone is not evidence
  against recurrence.
* PositiveDensity requires the tail window to have stabilised (oscillation
  within tolerance) at a level of at least ``positive_floor_count / horizon``.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Literal, Mapping, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, AnalysisConfig
from .pathcore import (
    DensityEstimate,
    DensityTrajectory,
    IntervalPattern,
    Path,
    density_trajectory,
    estimate_limit_density,
    occurrence_set,
    tail_window_size,
)

__all__ = [
    "PatternGrid",
    "PropertyEVerdict",
    "TightnessProfile",
    "EmpiricalMeasure",
    "InducedFDD",
    "DeviationReport",
    "PathDiagnostics",
    "quantile_edges",
    "grid_family",
    "check_property_e",
    "scan_property_e",
    "check_property_t",
    "empirical_measure",
    "induced_fdd",
    "consistency_check",
    "local_density_deviation",
    "analyze_path",
    "has_violation",
]

Status = Literal["Empty", "PositiveDensity", "Violation", "Inconclusive"]


# ---------------------------------------------------------------------------
# pattern grids

@dataclass(frozen=True)
class PatternGrid:
    """Product cells built from one marginal partition used on every axis.

    ``edges`` are the marginal interval boundaries (g + 1 values, usually
    -inf and +inf at the ends).  Cells are ordered with the first coordinate
    slowest, so cell index = sum_j digit_j * g^(k-1-j).
    """

    k: int
    edges: tuple[float, ...]
    cells: tuple[IntervalPattern, ...]

    @classmethod
    def from_edges(cls, edges: Sequence[float], k: int) -> "PatternGrid":
        e = tuple(float(x) for x in edges)
        if len(e) < 2:
            raise ValueError("need at least two edges")
        if any(not a < b for a, b in zip(e, e[1:])):
            raise ValueError("edges must be strictly increasing")
        if k < 1:
            raise ValueError("k must be at least 1")
        marginal = tuple(zip(e, e[1:]))
        cells = tuple(
            IntervalPattern(combo)
            for combo in itertools.product(marginal, repeat=k)
        )
        return cls(k=k, edges=e, cells=cells)

    @property
    def marginal_cells(self) -> int:
        return len(self.edges) - 1

    @property
    def n_cells(self) -> int:
        return len(self.cells)


def quantile_edges(values: np.ndarray, cells: int = 8) -> tuple[float, ...]:
    """Path-adaptive marginal edges: empirical quantile cuts plus +-inf.

    Duplicate cuts (heavy atoms) are collapsed; a path with fewer than two
    distinct cut points falls back to a symmetric window around its centre
    so the grid is never degenerate.
    """
    v = np.asarray(values, dtype=np.float64)
    if cells < 2:
        raise ValueError("cells must be at least 2")
    qs = np.quantile(v, np.linspace(0.0, 1.0, cells + 1)[1:-1])
    cuts = np.unique(qs)
    if cuts.size < 2:
        center = float(cuts[0]) if cuts.size else float(np.median(v))
        spread = float(np.std(v))
        half = 0.5 * spread if spread > 0 else 0.5
        cuts = np.array([center - half, center + half])
    return (-math.inf, *(float(c) for c in cuts), math.inf)


def grid_family(edges: Sequence[float], k_max: int) -> dict[int, PatternGrid]:
    return {k: PatternGrid.from_edges(edges, k) for k in range(1, k_max + 1)}


def _digitize_open(values: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Marginal cell index per value, -1 for endpoint contact or out of range.

    A value exactly equal to any edge matches no open cell.
    """
    idx = np.searchsorted(edges, values, side="right") - 1
    in_range = (idx >= 0) & (idx < edges.size - 1)
    safe = np.clip(idx, 0, edges.size - 2)
    on_edge = values == edges[safe]
    return np.where(in_range & ~on_edge, safe, -1)


def window_cell_ids(values: np.ndarray, grid: PatternGrid) -> np.ndarray:
    """Cell id per window start for the grid's order k; -1 where no cell matches."""
    edges = np.asarray(grid.edges)
    marg = _digitize_open(np.asarray(values, dtype=np.float64), edges)
    k = grid.k
    n = values.size - k + 1
    if n < 1:
        raise ValueError("path shorter than pattern order")
    g = grid.marginal_cells
    code = marg[:n].astype(np.int64)
    ok = code >= 0
    for j in range(1, k):
        nxt = marg[j:j + n]
        ok &= nxt >= 0
        code = code * g + nxt
    code[~ok] = -1
    return code


# ---------------------------------------------------------------------------
# batched tail statistics

@dataclass(frozen=True)
class _CellStats:
    value: float
    oscillation: float
    converged: bool
    final_count: int
    final_ratio: float
    tail_nonincreasing: bool

    def estimate(self, tail_fraction: float, tolerance: float) -> DensityEstimate:
        return DensityEstimate(
            value=self.value,
            oscillation=self.oscillation,
            converged=self.oscillation <= tolerance,
            tail_fraction=tail_fraction,
        )


def cell_tail_stats(cell_ids: np.ndarray, n_cells: int,
                    tail_fraction: float, tolerance: float) -> list[_CellStats]:
    """Per-cell tail statistics of d(n) = N(n)/n in one pass.

    Exactly equivalent to building each cell's occurrence set and running
    ``density_trajectory`` + ``estimate_limit_density`` on it, but O(total
    occurrences) instead of O(n_cells * horizon): between jumps d(n) decays
    as N/n, so the tail max sits at segment starts, the min at segment ends,
    and the mean is a sum of counts times harmonic increments.
    """
    horizon = int(cell_ids.size)
    if horizon < 1:
        raise ValueError("no windows")
    w = tail_window_size(horizon, tail_fraction)
    n0 = horizon - w + 1

    order = np.argsort(cell_ids, kind="stable")
    sorted_ids = cell_ids[order]
    bounds = np.searchsorted(sorted_ids, np.arange(n_cells + 1))
    # harm[m] = sum_{n=1}^{m} 1/n
    harm = np.concatenate(([0.0], np.cumsum(1.0 / np.arange(1.0, horizon + 1))))

    out: list[_CellStats] = []
    for c in range(n_cells):
        occ = order[bounds[c]:bounds[c + 1]]
        n_occ = occ.size
        if n_occ == 0 or n_occ == horizon:
            # d(n) is identically 0 or identically 1
            level = float(n_occ == horizon)
            out.append(_CellStats(
                value=level, oscillation=0.0, converged=True,
                final_count=int(n_occ), final_ratio=level,
                tail_nonincreasing=True))
            continue
        before = int(np.searchsorted(occ, n0))  # N(n0) counts indices < n0
        jumps = occ[before:] + 1  # jump points in (n0, horizon]
        r = jumps.size
        starts = np.concatenate(([n0], jumps))
        counts_at_start = before + np.arange(r + 1)
        ends = np.concatenate((jumps - 1, [horizon]))
        counts_at_end = np.concatenate((before + np.arange(r), [before + r]))
        d_start = counts_at_start / starts
        d_end = counts_at_end / ends
        osc = float(d_start.max() - d_end.min())
        total = float(np.sum(counts_at_start * (harm[ends] - harm[starts - 1])))
        final_count = before + r
        # a jump at n leaves d flat only when the prefix was saturated
        # (N(n-1) = n-1, d stuck at 1); any other jump raises d
        saturated = bool(np.all(before + np.arange(r) == jumps - 1))
        out.append(_CellStats(
            value=total / w,
            oscillation=osc,
            converged=osc <= tolerance,
            final_count=int(final_count),
            final_ratio=final_count / horizon,
            tail_nonincreasing=(r == 0) or saturated,
        ))
    return out


# ---------------------------------------------------------------------------
# Property E

@dataclass(frozen=True)
class PropertyEVerdict:
    """Recurrence verdict for one pattern.

    Empty: the pattern never occurred.  PositiveDensity: the density
    trajectory stabilised at a clearly positive level.  Violation: the
    pattern occurred but its density decays toward zero.  Inconclusive:
    anything else (slow mixing, rare-but-recurrent, still drifting).
    """

    status: Status
    pattern: IntervalPattern
    estimate: DensityEstimate
    final_count: int
    final_ratio: float
    horizon: int


def _classify(stats: _CellStats, pattern: IntervalPattern, horizon: int,
              config: AnalysisConfig) -> PropertyEVerdict:
    est = stats.estimate(config.tail_fraction, config.tolerance)
    violation_floor = config.violation_floor_count / horizon
    positive_floor = config.positive_floor_count / horizon
    if stats.final_count == 0:
        status: Status = "Empty"
    elif est.converged and est.value >= positive_floor:
        status = "PositiveDensity"
    elif (stats.final_ratio < violation_floor and stats.tail_nonincreasing):
        status = "Violation"
    else:
        status = "Inconclusive"
    return PropertyEVerdict(
        status=status,
        pattern=pattern,
        estimate=est,
        final_count=stats.final_count,
        final_ratio=stats.final_ratio,
        horizon=horizon,
    )


def _single_pattern_stats(path: Path, pattern: IntervalPattern,
                          config: AnalysisConfig) -> tuple[_CellStats, DensityTrajectory]:
    occ = occurrence_set(path, pattern)
    traj = density_trajectory(occ, occ.source_horizon)
    est = estimate_limit_density(traj, config.tail_fraction, config.tolerance)
    w = tail_window_size(traj.horizon, config.tail_fraction)
    tail = traj.ratios[traj.horizon - w:]
    stats = _CellStats(
        value=est.value,
        oscillation=est.oscillation,
        converged=est.converged,
        final_count=traj.final_count,
        final_ratio=traj.final_count / traj.horizon,
        tail_nonincreasing=bool(np.all(np.diff(tail) <= 0)),
    )
    return stats, traj


def check_property_e(path: Path, pattern: IntervalPattern,
                     config: AnalysisConfig = DEFAULT_CONFIG) -> PropertyEVerdict:
    """Recurrence verdict for a single pattern."""
    stats, traj = _single_pattern_stats(path, pattern, config)
    return _classify(stats, pattern, traj.horizon, config)


def scan_property_e(path: Path, k_max: int,
                    grids: Mapping[int, PatternGrid],
                    config: AnalysisConfig = DEFAULT_CONFIG) -> list[PropertyEVerdict]:
    """One verdict per cell per order k <= k_max; pass means no Violation."""
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    verdicts: list[PropertyEVerdict] = []
    for k in range(1, k_max + 1):
        grid = grids[k]
        ids = window_cell_ids(path.values, grid)
        horizon = ids.size
        stats = cell_tail_stats(ids, grid.n_cells,
                                config.tail_fraction, config.tolerance)
        for cell, st in zip(grid.cells, stats):
            verdicts.append(_classify(st, cell, horizon, config))
    return verdicts


def has_violation(verdicts: Sequence[PropertyEVerdict]) -> bool:
    return any(v.status == "Violation" for v in verdicts)


# ---------------------------------------------------------------------------
# Property T

@dataclass(frozen=True)
class TightnessProfile:
    """Tail-window fractions of |x_i| < K across a ladder of levels K."""

    levels: tuple[float, ...]
    fractions: tuple[float, ...]
    verdict: bool


def check_property_t(path: Path, k_levels: Sequence[float] | None = None,
                     config: AnalysisConfig = DEFAULT_CONFIG) -> TightnessProfile:
    """Tightness: the top-level fraction must reach 1 - t_slack.

    Fractions are computed over the tail window of the path itself, so a
    sequence drifting off to infinity scores near zero even if its early
    values were bounded.
    """
    levels = tuple(float(k) for k in (k_levels if k_levels is not None
                                      else config.k_levels))
    if list(levels) != sorted(levels) or min(levels) <= 0:
        raise ValueError("K levels must be strictly increasing and positive")
    w = tail_window_size(path.length, config.tail_fraction)
    tail = np.abs(path.values[path.length - w:])
    fractions = tuple(float(np.mean(tail < k)) for k in levels)
    return TightnessProfile(
        levels=levels,
        fractions=fractions,
        verdict=fractions[-1] >= 1.0 - config.t_slack,
    )


# ---------------------------------------------------------------------------
# empirical measures and induced distributions

@dataclass(frozen=True, eq=False)
class EmpiricalMeasure:
    """Cell masses count/n over the first n windows of length k.

    ``uncovered`` counts windows matching no cell, either because a value sat
    exactly on a cell endpoint or fell outside a finite grid range; masses
    sum to 1 - uncovered/n exactly.
    """

    k: int
    grid: PatternGrid
    masses: np.ndarray
    counts: np.ndarray
    n: int
    uncovered: int


def empirical_measure(path: Path, grid: PatternGrid, n: int) -> EmpiricalMeasure:
    max_n = path.length - grid.k + 1
    if not 1 <= n <= max_n:
        raise ValueError(f"n must be in [1, {max_n}]")
    ids = window_cell_ids(path.values, grid)[:n]
    covered = ids[ids >= 0]
    counts = np.bincount(covered, minlength=grid.n_cells)
    return EmpiricalMeasure(
        k=grid.k,
        grid=grid,
        masses=counts / n,
        counts=counts,
        n=n,
        uncovered=int(n - covered.size),
    )


@dataclass(frozen=True, eq=False)
class InducedFDD:
    """Per-order tables of tail density estimates on a common grid family.

    ``measures`` holds integer-count empirical measures at one matched window
    count ``n_matched`` so that marginalization consistency can be asserted
    exactly on counts.
    """

    grids: dict[int, PatternGrid]
    tables: dict[int, tuple[DensityEstimate, ...]]
    final_counts: dict[int, np.ndarray]
    measures: dict[int, EmpiricalMeasure]
    n_matched: int


def induced_fdd(path: Path, k_max: int, edges: Sequence[float],
                config: AnalysisConfig = DEFAULT_CONFIG) -> InducedFDD:
    if k_max < 1:
        raise ValueError("k_max must be at least 1")
    if path.length < k_max:
        raise ValueError("path too short for the requested order")
    grids = grid_family(edges, k_max)
    tables: dict[int, tuple[DensityEstimate, ...]] = {}
    final_counts: dict[int, np.ndarray] = {}
    measures: dict[int, EmpiricalMeasure] = {}
    # the largest window count admissible at every order up to k_max
    n_matched = path.length - k_max + 1
    for k, grid in grids.items():
        ids = window_cell_ids(path.values, grid)
        stats = cell_tail_stats(ids, grid.n_cells,
                                config.tail_fraction, config.tolerance)
        tables[k] = tuple(s.estimate(config.tail_fraction, config.tolerance)
                          for s in stats)
        final_counts[k] = np.array([s.final_count for s in stats])
        measures[k] = empirical_measure(path, grid, n_matched)
    return InducedFDD(grids=grids, tables=tables, final_counts=final_counts,
                      measures=measures, n_matched=n_matched)


def consistency_check(fdd: InducedFDD, k: int) -> float:
    """Max |level-k mass - marginalized level-(k+1) mass| at matched n.

    With both levels counted over the same window starts the discrepancy per
    cell equals (extensions whose added coordinate matched no marginal cell)
    divided by n, so it is bounded by k/n plus the endpoint-contact rate.
    """
    if k not in fdd.measures or (k + 1) not in fdd.measures:
        raise ValueError(f"orders {k} and {k + 1} not both tabulated")
    lo, hi = fdd.measures[k], fdd.measures[k + 1]
    if lo.grid.edges != hi.grid.edges:
        raise ValueError("grids are not compatible")
    g = lo.grid.marginal_cells
    child = hi.counts.reshape(lo.grid.n_cells, g).sum(axis=1)
    return float(np.max(np.abs(lo.counts - child)) / lo.n)


def consistency_bound(fdd: InducedFDD, k: int) -> float:
    """The assertable ceiling k/n + (uncovered windows at order k+1)/n."""
    hi = fdd.measures[k + 1]
    return k / fdd.n_matched + hi.uncovered / fdd.n_matched


# ---------------------------------------------------------------------------
# local-average deviation: how often windowed occurrence rates stray

@dataclass(frozen=True)
class DeviationReport:
    """Tail density of window starts whose local occurrence average strays
    from the estimated limit density by more than epsilon."""

    N: int
    epsilon: float
    deviation_density: float
    p_hat: float


def local_density_deviation(path: Path, pattern: IntervalPattern, N: int,
                            epsilon: float,
                            config: AnalysisConfig = DEFAULT_CONFIG,
                            p_hat: float | None = None) -> DeviationReport:
    """Density of length-N windows whose occurrence rate deviates from p_hat.

    ``p_hat`` defaults to the tail estimate of the pattern's own limit
    density; passing a known exact density avoids lattice artifacts when
    N * epsilon is an integer.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    occ = occurrence_set(path, pattern)
    horizon = occ.source_horizon
    if N > horizon:
        raise ValueError(f"window N={N} exceeds horizon {horizon}")
    if p_hat is None:
        traj = density_trajectory(occ, horizon)
        p_hat = estimate_limit_density(
            traj, config.tail_fraction, config.tolerance).value
    indicator = np.zeros(horizon + 1)
    indicator[1:][occ.indices] = 1.0
    csum = np.cumsum(indicator)
    local = (csum[N:] - csum[:-N]) / N
    deviant = np.abs(local - p_hat) > epsilon
    w = tail_window_size(deviant.size, config.tail_fraction)
    return DeviationReport(
        N=N,
        epsilon=epsilon,
        deviation_density=float(np.mean(deviant[deviant.size - w:])),
        p_hat=float(p_hat),
    )


# ---------------------------------------------------------------------------
# combined per-path diagnostics

@dataclass(frozen=True, eq=False)
class PathDiagnostics:
    edges: tuple[float, ...]
    verdicts: tuple[PropertyEVerdict, ...]
    property_e_pass: bool
    tightness: TightnessProfile
    fdd: InducedFDD
    consistency: dict[int, float]
    consistency_bounds: dict[int, float]
    consistency_pass: bool


def analyze_path(path: Path, config: AnalysisConfig = DEFAULT_CONFIG,
                 edges: Sequence[float] | None = None) -> PathDiagnostics:
    """Run the recurrence scan, tightness check, and consistency checks."""
    if edges is None:
        edges = quantile_edges(path.values, config.grid_cells)
    k_max = min(config.k_max, path.length - 1) or 1
    grids = grid_family(edges, k_max)
    verdicts = tuple(scan_property_e(path, k_max, grids, config))
    tightness = check_property_t(path, None, config)
    fdd = induced_fdd(path, k_max, edges, config)
    consistency: dict[int, float] = {}
    bounds: dict[int, float] = {}
    for k in range(1, k_max):
        consistency[k] = consistency_check(fdd, k)
        bounds[k] = consistency_bound(fdd, k)
    return PathDiagnostics(
        edges=tuple(edges),
        verdicts=verdicts,
        property_e_pass=not has_violation(verdicts),
        tightness=tightness,
        fdd=fdd,
        consistency=consistency,
        consistency_bounds=bounds,
        consistency_pass=all(consistency[k] <= bounds[k] for k in consistency),
    )
