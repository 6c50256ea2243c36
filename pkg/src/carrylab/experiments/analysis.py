"""Aggregation of runs and measures into structure-learnability summaries.

Runs are grouped per carry function, seed-averaged, joined with that
carry's structure measures, and correlated: each learning metric (max test
accuracy, sigmoid asymptote, normalized critical point) against each
structure measure (minimized depth-K box dimension, overall carry
frequency, depth-K associativity fraction).
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

from ..carry import classify, class_label, table_by_id
from ..errors import ConfigError
from ..measures import MeasureReport
from .stats import _FAILED_FIT, SigmoidFit, fit_sigmoid, spearman
from .training import RunRecord

LEARNING_METRICS = ("max_test_acc", "asymptote", "critical_point")
STRUCTURE_MEASURES = ("box_dim", "carry_freq", "assoc_fraction")


@dataclass(frozen=True)
class CarryAggregate:
    base: int
    carry_id: int
    label: str
    n_runs: int
    n_fit_ok: int
    n_fit_failed: int
    mean_max_test_acc: float
    mean_asymptote: float      # nan when no fit converged
    mean_critical_point: float  # nan when no fit converged
    norm_critical_point: float  # mean c0 / smallest positive mean c0 in base
    box_dim: float
    carry_freq: float
    assoc_fraction: float


@dataclass(frozen=True)
class CorrelationRow:
    metric: str
    measure: str
    n: int
    rho: float  # nan when undefined (constant series or n < 3)
    p: float


@dataclass
class AnalysisSummary:
    eval_length: int
    carries: tuple[CarryAggregate, ...]
    correlations: tuple[CorrelationRow, ...]
    class_means: dict[tuple[int, str], float]
    excluded_fits: int


def fit_for_run(run: RunRecord, eval_length: int) -> SigmoidFit:
    """Sigmoid fit of one run's test-accuracy curve at eval_length.

    A curve too short to fit at all counts as a failed fit rather than an
    error, so sparse runs flow into the exclusion tally.
    """
    curve = [(row.epoch, row.test_acc[eval_length]) for row in run.rows]
    if len(curve) < 4:
        return _FAILED_FIT
    return fit_sigmoid(curve)


def _mean(values) -> float:
    vals = [v for v in values if not math.isnan(v)]
    return sum(vals) / len(vals) if vals else math.nan


def aggregate_analysis(runs, reports, eval_length: int | None = None) -> AnalysisSummary:
    """Seed-averaged per-carry metrics, joined with measures and correlated.

    reports must contain a MeasureReport for every (base, carry_id) that
    appears in runs; its deepest depth supplies the box dimension and
    associativity fraction. Critical points are divisively normalized by
    the smallest positive per-base mean before pooling across bases.
    """
    runs = [r for r in runs if r.status == "ok"]
    if not runs:
        raise ValueError("no completed runs to analyze")
    if eval_length is None:
        eval_length = max(runs[0].config.eval_lengths)
    for r in runs:
        if eval_length not in r.config.eval_lengths:
            raise ConfigError(
                f"run lacks eval length {eval_length}: {r.config}")

    by_report: dict[tuple[int, int], MeasureReport] = {}
    for rep in reports:
        if rep.table_id is None:
            raise ConfigError("measure report lacks a table id")
        by_report[(rep.base, rep.table_id)] = rep

    groups: dict[tuple[int, int], list[RunRecord]] = {}
    for r in runs:
        groups.setdefault((r.config.base, r.config.carry_id), []).append(r)

    rows = []
    excluded = 0
    for (base, carry_id), members in sorted(groups.items()):
        rep = by_report.get((base, carry_id))
        if rep is None:
            raise ConfigError(f"no measure report for base {base} id {carry_id}")
        deepest = rep.per_depth[-1]

        fits = [fit_for_run(r, eval_length) for r in members]
        ok = [f for f in fits if f.ok]
        excluded += len(fits) - len(ok)
        label = class_label(classify(table_by_id(base, carry_id)))
        rows.append(CarryAggregate(
            base=base,
            carry_id=carry_id,
            label=label,
            n_runs=len(members),
            n_fit_ok=len(ok),
            n_fit_failed=len(fits) - len(ok),
            mean_max_test_acc=_mean(r.max_test_acc[eval_length]
                                    for r in members),
            mean_asymptote=_mean(f.a for f in ok),
            mean_critical_point=_mean(f.c0 for f in ok),
            norm_critical_point=math.nan,  # filled below per base
            box_dim=deepest.box_dim_min_ordering,
            carry_freq=rep.overall_carry_frequency,
            assoc_fraction=deepest.assoc.fraction,
        ))

    # divisive per-base normalization of critical points
    by_base: dict[int, list[float]] = {}
    for row in rows:
        if not math.isnan(row.mean_critical_point) and row.mean_critical_point > 0:
            by_base.setdefault(row.base, []).append(row.mean_critical_point)
    normed = []
    for row in rows:
        floor = min(by_base.get(row.base, [1.0]))
        norm = (row.mean_critical_point / floor
                if not math.isnan(row.mean_critical_point) and floor > 0
                else math.nan)
        normed.append(dataclasses.replace(row, norm_critical_point=norm))
    rows = normed

    metric_of = {
        "max_test_acc": lambda r: r.mean_max_test_acc,
        "asymptote": lambda r: r.mean_asymptote,
        "critical_point": lambda r: r.norm_critical_point,
    }
    measure_of = {
        "box_dim": lambda r: r.box_dim,
        "carry_freq": lambda r: r.carry_freq,
        "assoc_fraction": lambda r: r.assoc_fraction,
    }
    correlations = []
    for metric in LEARNING_METRICS:
        for measure in STRUCTURE_MEASURES:
            pts = [(metric_of[metric](r), measure_of[measure](r))
                   for r in rows if not math.isnan(metric_of[metric](r))]
            if len(pts) < 3:
                correlations.append(CorrelationRow(
                    metric, measure, len(pts), math.nan, math.nan))
                continue
            try:
                rho, p = spearman([p_[0] for p_ in pts], [p_[1] for p_ in pts])
            except ValueError:
                rho, p = math.nan, math.nan
            correlations.append(CorrelationRow(metric, measure, len(pts), rho, p))

    class_sums: dict[tuple[int, str], list[float]] = {}
    for row in rows:
        class_sums.setdefault((row.base, row.label), []).append(
            row.mean_max_test_acc)
    class_means = {k: sum(v) / len(v) for k, v in sorted(class_sums.items())}

    return AnalysisSummary(
        eval_length=eval_length,
        carries=tuple(rows),
        correlations=tuple(correlations),
        class_means=class_means,
        excluded_fits=excluded,
    )
