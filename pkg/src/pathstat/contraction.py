"""Proportional contractions of the index set and the ergodicity diagnostic.

A contraction keeps an ordered family of integer blocks whose lengths grow
and whose running coverage settles at a positive level c.  A path behaves
ergodically exactly when every such contraction leaves all of its pattern
densities unchanged, so the diagnostic compares per-cell density estimates
between the original path and a family of contracted copies.

The adversarial search inverts that argument: it hunts for window starts
where one pattern's local occurrence rate sits well above its global level,
keeps every m-th such start so the windows are disjoint, thins them to a
common coverage target, and joins the stages into a single contraction whose
block lengths step up through the m schedule.  On a path that really mixes,
high-local-density windows die out as m grows (local averages over growing
windows concentrate at the global density), so the construction is
rejected unless those windows persist across the whole schedule.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .config import DEFAULT_CONFIG, AnalysisConfig
from .pathcore import (
    DensityEstimate,
    IntervalPattern,
    Path,
    estimate_limit_density,
    density_trajectory,
    occurrence_set,
    tail_window_size,
)
from .properties import PatternGrid, cell_tail_stats, window_cell_ids

__all__ = [
    "Contraction",
    "ContractionValidation",
    "ErgodicityVerdict",
    "DiagnosticRecord",
    "AdversarialTrace",
    "build_alternating_contraction",
    "validate_contraction",
    "contract_path",
    "coverage_ratios",
    "ergodicity_diagnostic",
    "adversarial_contraction",
    "default_contraction_family",
]


@dataclass(frozen=True)
class Contraction:
    """Ordered disjoint integer blocks [s_i, e_i] with a declared coverage c."""

    blocks: tuple[tuple[int, int], ...]
    target_density: float
    label: str = ""

    def __post_init__(self) -> None:
        if not self.blocks:
            raise ValueError("contraction needs at least one block")
        if not 0.0 < self.target_density <= 1.0:
            raise ValueError("target density must be in (0, 1]")
        blocks = tuple((int(s), int(e)) for s, e in self.blocks)
        for s, e in blocks:
            if s < 0 or e < s:
                raise ValueError(f"bad block [{s}, {e}]")
        object.__setattr__(self, "blocks", blocks)

    @property
    def lengths(self) -> np.ndarray:
        b = np.asarray(self.blocks)
        return b[:, 1] - b[:, 0] + 1

    @property
    def covered(self) -> int:
        return int(self.lengths.sum())

    @property
    def span_end(self) -> int:
        return self.blocks[-1][1]

    def to_json_dict(self) -> dict:
        return {
            "blocks": [[s, e] for s, e in self.blocks],
            "target_density": self.target_density,
            "label": self.label,
        }


def build_alternating_contraction(target_c: float, horizon: int,
                                  phase: int = 0) -> Contraction:
    """Blocks of length ~round(m*c/(1-c)) against gaps of length m, m = 1,2,...

    Coverage telescopes to target_c.  phase=1 starts with a gap instead of a
    block.  target_c=1 is pure inclusion: a single block over the horizon.
    """
    if not 0.0 < target_c <= 1.0:
        raise ValueError("target_c must be in (0, 1]")
    if horizon < 10:
        raise ValueError("horizon must be at least 10")
    if phase not in (0, 1):
        raise ValueError("phase must be 0 or 1")
    if target_c == 1.0:
        return Contraction(((0, horizon - 1),), 1.0,
                           label=f"alternating(c=1,phase={phase})")
    blocks: list[tuple[int, int]] = []
    pos = 0
    m = 1
    while pos < horizon:
        block_len = max(1, round(m * target_c / (1.0 - target_c)))
        if phase == 1:
            pos += m  # leading gap
        if pos < horizon:
            end = min(pos + block_len, horizon) - 1
            # a truncated final block shorter than its predecessor is dropped
            # so the length profile stays non-decreasing
            if end - pos + 1 == block_len or not blocks or \
                    end - pos + 1 >= blocks[-1][1] - blocks[-1][0] + 1:
                blocks.append((pos, end))
            pos = end + 1
        if phase == 0:
            pos += m  # trailing gap
        m += 1
    if len(blocks) < 2:
        raise ValueError(
            f"horizon {horizon} too small for target density {target_c}")
    return Contraction(tuple(blocks), target_c,
                       label=f"alternating(c={target_c:g},phase={phase})")


def coverage_ratios(contraction: Contraction, horizon: int) -> np.ndarray:
    """Running coverage |[0, n-1] ∩ G| / n for n = 1..horizon."""
    if horizon < 1:
        raise ValueError("horizon must be positive")
    indicator = np.zeros(horizon)
    for s, e in contraction.blocks:
        if s >= horizon:
            break
        indicator[s:min(e + 1, horizon)] = 1.0
    return np.cumsum(indicator) / np.arange(1, horizon + 1)


@dataclass(frozen=True)
class ContractionValidation:
    ordering_ok: bool
    growth_ok: bool
    coverage_ok: bool
    coverage: DensityEstimate

    @property
    def passed(self) -> bool:
        return self.ordering_ok and self.growth_ok and self.coverage_ok


def validate_contraction(contraction: Contraction, horizon: int,
                         config: AnalysisConfig = DEFAULT_CONFIG) -> ContractionValidation:
    """Finite-horizon surrogates for the three defining conditions.

    Ordering is literal.  Unbounded block growth becomes: lengths
    non-decreasing after the first 10% of blocks and the final block at
    least growth_factor times the first (a single full block passes
    trivially).  Coverage must tail-converge to the declared density.
    """
    blocks = np.asarray(contraction.blocks)
    ordering_ok = bool(np.all(blocks[1:, 0] > blocks[:-1, 1])) if len(blocks) > 1 else True
    lengths = contraction.lengths
    if len(lengths) == 1:
        growth_ok = True
    else:
        burn = int(math.floor(config.burn_in_fraction * len(lengths)))
        nondecreasing = bool(np.all(np.diff(lengths[burn:]) >= 0))
        growth_ok = nondecreasing and \
            bool(lengths[-1] >= config.growth_factor * lengths[0])
    ratios = coverage_ratios(contraction, horizon)
    w = tail_window_size(horizon, config.tail_fraction)
    tail = ratios[horizon - w:]
    osc = float(tail.max() - tail.min())
    est = DensityEstimate(value=float(tail.mean()), oscillation=osc,
                          converged=osc <= config.tolerance,
                          tail_fraction=config.tail_fraction)
    coverage_ok = est.converged and \
        bool(abs(est.value - contraction.target_density) <= config.tolerance)
    return ContractionValidation(ordering_ok=ordering_ok, growth_ok=growth_ok,
                                 coverage_ok=coverage_ok, coverage=est)


def contract_path(path: Path, contraction: Contraction) -> Path:
    """The subsequence of path values over the contraction's blocks, in order."""
    if contraction.span_end >= path.length:
        raise ValueError(
            f"block end {contraction.span_end} outside path of length {path.length}")
    pieces = [path.values[s:e + 1] for s, e in contraction.blocks]
    return Path(np.concatenate(pieces))


# ---------------------------------------------------------------------------
# ergodicity diagnostic

@dataclass(frozen=True)
class DiagnosticRecord:
    contraction_label: str
    k: int
    pattern: IntervalPattern
    base_value: float
    contracted_value: float

    @property
    def discrepancy(self) -> float:
        return abs(self.base_value - self.contracted_value)


@dataclass(frozen=True, eq=False)
class ErgodicityVerdict:
    worst_discrepancy: float
    offending: tuple[str, IntervalPattern] | None
    verdict: str  # "ConsistentWithErgodic" | "NonErgodicEvidence"
    records: tuple[DiagnosticRecord, ...]

    def max_discrepancy_for(self, pattern: IntervalPattern) -> float:
        matches = [r.discrepancy for r in self.records if r.pattern == pattern]
        return max(matches) if matches else 0.0


def _grid_values(values: np.ndarray, grids: Mapping[int, PatternGrid],
                 k_max: int, config: AnalysisConfig) -> dict[int, np.ndarray]:
    out: dict[int, np.ndarray] = {}
    for k in range(1, k_max + 1):
        grid = grids[k]
        if values.size < grid.k:
            continue
        ids = window_cell_ids(values, grid)
        stats = cell_tail_stats(ids, grid.n_cells,
                                config.tail_fraction, config.tolerance)
        out[k] = np.array([s.value for s in stats])
    return out


def ergodicity_diagnostic(path: Path, family: Sequence[Contraction],
                          grids: Mapping[int, PatternGrid], k_max: int,
                          tolerance: float | None = None,
                          config: AnalysisConfig = DEFAULT_CONFIG) -> ErgodicityVerdict:
    """Compare per-cell density estimates on contracted copies of the path.

    The worst absolute difference across (contraction, order, cell) decides
    the verdict; anything above the tolerance counts as evidence that the
    path does not induce a single ergodic law.
    """
    if tolerance is None:
        tolerance = config.ergodicity_tolerance
    base = _grid_values(path.values, grids, k_max, config)
    records: list[DiagnosticRecord] = []
    for idx, contraction in enumerate(family):
        label = contraction.label or f"contraction[{idx}]"
        contracted = contract_path(path, contraction)
        cvals = _grid_values(contracted.values, grids, k_max, config)
        for k, base_vals in base.items():
            if k not in cvals:
                continue
            for cell, b, c in zip(grids[k].cells, base_vals, cvals[k]):
                records.append(DiagnosticRecord(
                    contraction_label=label, k=k, pattern=cell,
                    base_value=float(b), contracted_value=float(c)))
    if records:
        worst = max(records, key=lambda r: r.discrepancy)
        worst_disc = worst.discrepancy
        offending = (worst.contraction_label, worst.pattern) \
            if worst_disc > tolerance else None
    else:
        worst_disc, offending = 0.0, None
    return ErgodicityVerdict(
        worst_discrepancy=worst_disc,
        offending=offending,
        verdict="NonErgodicEvidence" if worst_disc > tolerance
                else "ConsistentWithErgodic",
        records=tuple(records),
    )


# ---------------------------------------------------------------------------
# adversarial construction

@dataclass(frozen=True, eq=False)
class AdversarialTrace:
    """Full record of the staged construction.

    Per stage m: v0 are starts of length-m windows whose local occurrence
    rate meets the threshold, v1 keeps every m-th element of v0 (disjoint
    windows), v2 thins v1 to the common coverage target, h_blocks are v2's
    windows as blocks.  n_markers are the joint points between stages.
    """

    pattern: IntervalPattern
    m_schedule: tuple[int, ...]
    threshold: float
    target_density: float
    v0: dict[int, np.ndarray] = field(default_factory=dict)
    v1: dict[int, np.ndarray] = field(default_factory=dict)
    v2: dict[int, np.ndarray] = field(default_factory=dict)
    h_blocks: dict[int, tuple[tuple[int, int], ...]] = field(default_factory=dict)
    n_markers: tuple[int, ...] = ()
    result: Contraction | None = None
    failed: bool = False
    failure_reason: str = ""
    last_feasible_m: int | None = None


def _thin_to_density(indices: np.ndarray, target: float) -> np.ndarray:
    """Greedy earliest-first subset whose running density never exceeds target."""
    kept: list[int] = []
    count = 0
    for v in indices:
        if (count + 1) <= target * (v + 1):
            kept.append(int(v))
            count += 1
    return np.asarray(kept, dtype=np.int64)


def adversarial_contraction(path: Path, pattern: IntervalPattern,
                            m_schedule: Sequence[int] | None = None,
                            threshold: float | None = None,
                            config: AnalysisConfig = DEFAULT_CONFIG) -> AdversarialTrace:
    """Search for a contraction that concentrates one pattern's occurrences.

    threshold defaults to min((p+1)/2, p + threshold_cap) for the pattern's
    estimated global density p.  The construction fails when no window
    reaches the threshold at some stage, or when the density of qualifying
    windows collapses across the schedule (the signature of a mixing path,
    for which local averages concentrate as windows grow).
    """
    if m_schedule is None:
        m_schedule = config.m_schedule
    m_schedule = tuple(int(m) for m in m_schedule)
    if list(m_schedule) != sorted(set(m_schedule)) or m_schedule[0] < 1:
        raise ValueError("m_schedule must be strictly increasing")
    occ = occurrence_set(path, pattern)
    horizon = occ.source_horizon
    if m_schedule[-1] > horizon:
        raise ValueError("largest m exceeds the admissible window range")
    traj = density_trajectory(occ, horizon)
    global_estimate = estimate_limit_density(
        traj, config.tail_fraction, config.tolerance)
    p = global_estimate.value
    if threshold is None:
        threshold = min((p + 1.0) / 2.0, p + config.adversarial_threshold_cap)
    if not p <= threshold <= 1.0:
        raise ValueError(
            f"threshold {threshold} must be between the global density "
            f"{p:.4f} and 1")

    indicator = np.zeros(horizon + 1)
    indicator[1:][occ.indices] = 1.0
    csum = np.cumsum(indicator)

    trace_v0: dict[int, np.ndarray] = {}
    trace_v1: dict[int, np.ndarray] = {}
    v0_density: dict[int, float] = {}
    last_feasible: int | None = None
    for m in m_schedule:
        local = (csum[m:] - csum[:-m]) / m
        v0 = np.flatnonzero(local >= threshold)
        if v0.size == 0:
            return AdversarialTrace(
                pattern=pattern, m_schedule=m_schedule, threshold=threshold,
                target_density=math.nan, v0=trace_v0, v1=trace_v1,
                failed=True,
                failure_reason=f"no window of length {m} reaches the threshold",
                last_feasible_m=last_feasible)
        v1 = v0[::m]
        trace_v0[m] = v0
        trace_v1[m] = v1
        v0_density[m] = v0.size / local.size
        last_feasible = m

    persistence = v0_density[m_schedule[-1]] / v0_density[m_schedule[0]]
    if persistence < config.adversarial_persistence:
        return AdversarialTrace(
            pattern=pattern, m_schedule=m_schedule, threshold=threshold,
            target_density=math.nan, v0=trace_v0, v1=trace_v1,
            failed=True,
            failure_reason=(
                "qualifying windows vanish as m grows "
                f"(persistence {persistence:.4f}); local averages concentrate, "
                "consistent with an ergodic path"),
            last_feasible_m=last_feasible)

    # one coverage level shared by every stage; the tail-window supply with
    # headroom, so late stages can absorb their early candidate drought and
    # still track the target
    tail_start = horizon - tail_window_size(horizon, config.tail_fraction)
    supply = []
    for m in m_schedule:
        n_win = horizon - m + 1
        in_tail = int(np.searchsorted(trace_v1[m], tail_start))
        supply.append(m * (trace_v1[m].size - in_tail) / max(n_win - tail_start, 1))
    target_d = min(1.0, config.adversarial_headroom * min(supply))
    if target_d <= 0.0:
        return AdversarialTrace(
            pattern=pattern, m_schedule=m_schedule, threshold=threshold,
            target_density=math.nan, v0=trace_v0, v1=trace_v1,
            failed=True,
            failure_reason=("qualifying windows do not recur in the tail; "
                            "the concentration is transient, not a "
                            "proportional-contraction witness"),
            last_feasible_m=last_feasible)
    trace_v2: dict[int, np.ndarray] = {}
    trace_h: dict[int, tuple[tuple[int, int], ...]] = {}
    cov_h: dict[int, np.ndarray] = {}
    for m in m_schedule:
        v2 = _thin_to_density(trace_v1[m], target_d / m)
        if v2.size == 0:
            v2 = trace_v1[m][:1]  # never drop a stage entirely
        trace_v2[m] = v2
        trace_h[m] = tuple((int(j), int(j) + m - 1) for j in v2)
        ind = np.zeros(horizon)
        for s, e in trace_h[m]:
            ind[s:e + 1] = 1.0
        cov_h[m] = np.cumsum(ind) / np.arange(1.0, horizon + 1)

    # staged join: switch from G(m) to whole blocks of H(next) at a joint
    # point past which both are settled near the target
    blocks: list[tuple[int, int]] = list(trace_h[m_schedule[0]])
    n_markers: list[int] = []
    for prev_m, next_m in zip(m_schedule, m_schedule[1:]):
        eps_m = config.adversarial_eps1 / prev_m
        ends = np.array([e for _, e in blocks])
        covered = np.cumsum([e - s + 1 for s, e in blocks])
        cov_g = covered / (ends + 1)
        # suffix deviation of the next stage's coverage beyond each position
        dev_next = np.abs(cov_h[next_m] - target_d)
        suffix = np.maximum.accumulate(dev_next[::-1])[::-1]
        quality = np.maximum(
            np.abs(cov_g - target_d),
            np.where(ends + 1 < horizon, suffix[np.minimum(ends + 1, horizon - 1)], 0.0))
        close = np.flatnonzero(quality <= eps_m / 3.0)
        join_at = int(close[0]) if close.size else int(np.argmin(quality))
        marker = int(ends[join_at])
        n_markers.append(marker)
        blocks = blocks[:join_at + 1] + \
            [b for b in trace_h[next_m] if b[0] > marker]

    result = Contraction(tuple(blocks), target_d,
                         label=f"adversarial[{pattern.label()}]")
    return AdversarialTrace(
        pattern=pattern, m_schedule=m_schedule, threshold=threshold,
        target_density=target_d, v0=trace_v0, v1=trace_v1, v2=trace_v2,
        h_blocks=trace_h, n_markers=tuple(n_markers), result=result)


def default_contraction_family(path: Path, level1_grid: PatternGrid,
                               config: AnalysisConfig = DEFAULT_CONFIG) -> list[Contraction]:
    """Alternating contractions over a span of densities and phases, plus one
    adversarial attempt per level-1 cell whose density sits strictly inside
    (p_lo, p_hi).  Failed adversarial constructions are dropped."""
    horizon = path.length
    family: list[Contraction] = []
    for c in config.contraction_densities:
        for phase in config.contraction_phases:
            family.append(build_alternating_contraction(c, horizon, phase))
    ids = window_cell_ids(path.values, level1_grid)
    stats = cell_tail_stats(ids, level1_grid.n_cells,
                            config.tail_fraction, config.tolerance)
    for cell, st in zip(level1_grid.cells, stats):
        if not config.adversarial_p_lo < st.value < config.adversarial_p_hi:
            continue
        trace = adversarial_contraction(path, cell, config.m_schedule,
                                        threshold=None, config=config)
        if not trace.failed and trace.result is not None:
            family.append(trace.result)
    return family
